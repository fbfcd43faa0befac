#pragma once

// Axis discretizations and the one-dimensional calculus helpers built on
// them. All downstream modules agree on these conventions:
//   x-grid: n uniform nodes left + h, ..., right with h = (right-left)/n.
//           The left endpoint is not a node; fields on [0, r] vanish there.
//   k-grid: nonzero multiples of pi/L_eff up to k_max, one or both signs,
//           sorted ascending.
//   y-grid: m uniform nodes covering [-L0, L0) half-open, m even.

#include <span>
#include <vector>

#include "wrinkle/numeric.hpp"

namespace wrinkle {

struct XGrid {
  double left = 0.0;
  double right = 1.0;
  int n = 0;
  double h = 0.0;

  double node(int i) const { return left + (i + 1) * h; }
};

struct KGrid {
  double L_eff = 0.0;
  double k_max = 0.0;
  bool symmetric = false;
  int j_max = 0;               // largest positive multiple index
  std::vector<double> k;       // ascending; size j_max or 2*j_max

  double spacing() const;
  /** Multiple index of k[col]: +j for k = j*pi/L_eff, negative for k < 0. */
  int multiple(int col) const;
  /** Column holding signed multiple j, or -1 if absent. */
  int col_of(int j) const;
};

struct YGrid {
  double L0 = 0.0;
  int m = 0;
  double dy = 0.0;

  double node(int i) const { return -L0 + i * dy; }
};

/** Uniform nodes on (left, right]; throws unless n >= 1 and right > left. */
XGrid make_x_grid(int n, double left, double right);

/**
 * Frequencies j*pi/L_eff with 1 <= j and |k| <= k_max (within rounding),
 * both signs when symmetric. Throws if no admissible frequency exists.
 */
KGrid make_k_grid(double L_eff, double k_max, bool symmetric = false);

/** m equispaced nodes on [-L0, L0); m must be even and positive. */
YGrid make_y_grid(double L0, int m);

/**
 * First-difference quotient at the nodes. On grids with left = 0 the
 * boundary value is the implicit zero ghost node; otherwise the first node
 * reuses the forward difference of its neighbor pair.
 */
std::vector<double> diff_x(std::span<const double> v, const XGrid& g);

/** diff_x applied to every column of a table with rows on g. */
Table diff_x(const Table& t, const XGrid& g);

/** Trapezoid rule over (left, right] given the value at the left endpoint. */
double trapezoid(std::span<const double> v, const XGrid& g, double left_val);

/**
 * Trapezoid over (x_{i0-1}, right] where the open boundary value is
 * linearly extrapolated from the first two nodes (i0 = 0), giving node
 * weights (2, 1/2, 1, ..., 1, 1/2) h -- exact on affine data and
 * data-independent, so objectives built on it stay differentiable.
 */
double open_trapezoid(std::span<const double> v, const XGrid& g, int i0 = 0);

/** Node weights realizing open_trapezoid(v, g, 0) as a dot product. */
std::vector<double> open_weights(const XGrid& g);

/** Trapezoid restricted to nodes with x <= z (empty prefix gives 0). */
double trapezoid_upto(std::span<const double> v, const XGrid& g, double left_val, double z);

/** Running trapezoid antiderivative sampled at the nodes. */
std::vector<double> cumtrapz(std::span<const double> v, const XGrid& g, double left_val = 0.0);

/** Mean of v over one period; exact for trigonometric polynomials on g. */
double rectangle_mean(std::span<const double> v, const YGrid& g);

}  // namespace wrinkle
