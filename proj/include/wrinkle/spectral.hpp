#pragma once

// Trigonometric representation of periodic profiles. A field on one y-period
// is stored either as samples or as coefficients against the orthonormal
// family {1, sqrt(2) sin(k y) for k > 0, sqrt(2) cos(|k| y) for k < 0}
// under the averaged inner product over a period. Rectangle-rule sums are
// exact on this family as long as the sampling resolves the band.

#include "wrinkle/grids.hpp"
#include "wrinkle/numeric.hpp"

namespace wrinkle {

struct CoefficientSet {
  XGrid x;
  KGrid k;
  Table a;                  // rows follow x, columns follow k
  std::vector<double> a0;   // zero mode per row; empty means identically zero

  double zero_mode(int row) const { return a0.empty() ? 0.0 : a0[row]; }
};

struct FieldSamples {
  XGrid x;
  YGrid y;
  Table u;  // rows follow x, columns follow y
};

/**
 * Evaluate the series on the sample grid. Throws when a frequency is not a
 * harmonic of the sample period or when m cannot resolve the band
 * (m <= 2 * top multiple).
 */
FieldSamples synthesize(const CoefficientSet& c, const YGrid& y);

/**
 * Project samples onto the family over k, plus the zero mode. Exact inverse
 * of synthesize for fields whose band the grids share.
 */
CoefficientSet analyze(const FieldSamples& f, const KGrid& k);

/**
 * Mean square of the order-th y-derivative per row, straight from
 * coefficients: sum over k of (a_k |k|^order)^2, plus a0^2 at order 0.
 */
std::vector<double> plancherel_norm(const CoefficientSet& c, int order = 0);

/** Coefficients of du/dy; requires a symmetric frequency grid. */
CoefficientSet y_derivative(const CoefficientSet& c);

/** Coefficients of the difference quotient in x (see diff_x). */
CoefficientSet x_derivative(const CoefficientSet& c);

}  // namespace wrinkle
