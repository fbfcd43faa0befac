#pragma once

// Builds finite-width displacement fields whose energy tracks the limit
// value of a frequency table. The pipeline stretches the table slightly in
// x, collapses it onto the coarse frequency comb of one period cell,
// freezes it past a cut point, smooths the result with an exponential
// kernel, and assembles out-of-plane and in-plane fields whose membrane
// terms cancel by construction.

#include <utility>
#include <vector>

#include "wrinkle/grids.hpp"
#include "wrinkle/measure.hpp"
#include "wrinkle/numeric.hpp"
#include "wrinkle/spectral.hpp"

namespace wrinkle {

struct RecoveryParams {
  double L = 0.0;          // half-width of the strip in rescaled units
  int M = 0;               // smoothing sharpness index, at least 2
  double eps = 0.0;        // kernel scale, L^(-2/3) M^(7/8)
  double delta = 0.0;      // cutoff scale eps / M
  double lambda = 0.0;     // stretch factor 1 + sqrt(eps)
  double lambda_bar = 0.0; // freeze point inside ((lambda+1)/2, lambda); 0 until truncation runs
  double L0 = 0.0;         // period cell half-width, L / n
  int n = 0;               // whole number of cells per strip
};

// Smoothed spectral weights with their exact x-derivative. Column j holds
// the kernel average of the table's column j; rows follow x on (-1, 1].
struct CoefficientTable {
  XGrid x;
  KGrid k;
  Table a;
  Table a_x;
};

// Row profiles derived from the weights: A is half the row sum of a, f the
// amplitude normalizer sqrt(x / A) (zero at x <= 0). The _x arrays are
// exact derivatives except f_x, which is zeroed where f is not smooth
// (x <= 0); consumers multiply it by a cutoff that vanishes there.
struct AmplitudeProfile {
  std::vector<double> A;
  std::vector<double> A_x;
  std::vector<double> f;
  std::vector<double> f_x;
};

// Sine-mode coefficients of the out-of-plane field and their exact
// x-derivative, on the same grids.
struct OutOfPlane {
  CoefficientSet u;
  CoefficientSet u_x;
};

// In-plane samples on the field grid times one period cell, plus the
// per-row mean offset entering w2 and the periodicity defects of both
// components (value jump across one period; zero up to rounding for
// admissible inputs).
struct InPlane {
  YGrid y;
  Table w1;
  Table w2;
  std::vector<double> B;
  std::vector<double> w1_defect;
  std::vector<double> w2_defect;
};

struct DisplacementField {
  RecoveryParams params;
  CoefficientTable a;
  std::vector<double> A;
  std::vector<double> f;
  CoefficientSet u;
  CoefficientSet u_x;
  YGrid y;
  Table w1;
  Table w2;
  std::vector<double> B;
  std::vector<double> w1_defect;
  std::vector<double> w2_defect;
};

struct RecoveryOptions {
  int nx_field = 800;      // x-resolution of the built field; must be even
  int y_oversample = 8;    // samples per top mode in the period cell
};

/**
 * Quintic step: 0 for x <= delta, 1 for x >= 2 delta, 6t^5 - 15t^4 + 10t^3
 * in between with t = (x - delta) / delta. Twice continuously
 * differentiable with |psi'| <= 1.875 / delta and |psi''| <= 5.8 / delta^2.
 */
double cutoff_step(double x, double delta);
double cutoff_step_dx(double x, double delta);

/**
 * Cumulative derivative-quotient content sum_k b_x^2 / (4 k^2 b) integrated
 * over x up to min(z, domain end). Node-to-node trapezoid starting at the
 * first node: the density may blow up like 1/x toward the origin, so the
 * quadrature deliberately never extrapolates to the open boundary.
 * Nondecreasing in z; zero for z below the second node. Throws for z < 0
 * or an infeasible table.
 */
double omega_modulus(const MeasureTable& t, double z);

/**
 * Pick the construction parameters for half-width L: M is the largest
 * integer in [2, sqrt(L)] whose smoothing window passes the quotient-content
 * test omega(2 M^2 L^(-2/3)) <= 1/M, then eps, delta, lambda follow from the
 * formulas above and the cell count n is the largest integer keeping
 * L0 = L/n inside [M^(1/8), 2 M^(1/8)). lambda_bar stays 0 here; the
 * truncation stage fills it. Throws when no admissible M or cell count
 * exists (L too small for the table's quotient content).
 */
RecoveryParams schedule_parameters(const MeasureTable& t, double L);

/**
 * Freeze the table past a cut point: lambda_bar is the smallest grid node
 * strictly inside ((lambda+1)/2, lambda) whose second moment row sum does
 * not exceed the node average over that window (one always qualifies), and
 * every row at or beyond it is replaced by the lambda_bar row. Row slopes
 * are rebuilt, so the frozen region has zero derivative. The input must
 * live on [0, lambda]. Throws if the window holds no node.
 */
std::pair<MeasureTable, double> truncate_table(const MeasureTable& t, double lambda);

/**
 * Kernel average of each column against (1/(2 eps)) exp(-|x|/eps), output
 * on the grid `out`. The column is read as the piecewise-linear function
 * through (0, 0) and the nodes, constant past the last node and zero below
 * the origin; each linear piece convolves in closed form, so the only error
 * is rounding. a_x holds the equally exact derivative. Throws for eps <= 0.
 */
CoefficientTable mollify(const MeasureTable& t, double eps, const XGrid& out);

/**
 * Row profiles A = half row sum of a (with exact derivative) and
 * f = sqrt(x / A) for x > 0, zero otherwise. Throws if A is not strictly
 * positive at some x > 0, which signals a broken upstream table.
 */
AmplitudeProfile amplitude_profile(const CoefficientTable& a);

/**
 * Out-of-plane coefficients beta_k = psi(x) f(x) sqrt(a(x,k)) / k against
 * the orthonormal sine family, all signs positive, together with their
 * exact x-derivative. Rows with x <= delta are identically zero. The mean
 * square of the y-derivative then equals 2 psi^2 f^2 A row by row, which is
 * 2 psi^2 x wherever the cutoff is 1. Throws if a dips below -1e-12 times
 * its scale; smaller negatives are clamped to zero.
 */
OutOfPlane build_out_of_plane(const CoefficientTable& a, const AmplitudeProfile& amp,
                              const RecoveryParams& p);

/**
 * In-plane components on one period cell:
 *   w2 = psi^2 x y + B - (1/2) int_0^y (u_,y)^2,
 *   w1 = x - L^(-2) int_0^y (w2_,x + u_,x u_,y).
 * Products are sampled on a cell grid that resolves twice the coefficient
 * band, cumulative y-integrals are antidifferentiated mode by mode (the
 * sampled mean rides on the linear-in-y part), and w2_,x uses the same
 * difference quotient the energy evaluation applies, so the shear term
 * cancels to rounding. B collects the two mean offsets of its definition;
 * the x-cumulative one is a trapezoid sum from the origin. The defect
 * vectors report the value jump across the cell per row.
 */
InPlane build_in_plane(const OutOfPlane& oop, const RecoveryParams& p, int y_oversample = 8);

/**
 * Full pipeline from a feasible table on [0, 1]: schedule, stretch by
 * lambda, collapse onto the pi/L0 comb, freeze, smooth, normalize, then
 * assemble both fields. Metadata records every parameter including the
 * chosen lambda_bar.
 */
DisplacementField build_recovery(const MeasureTable& t, double L,
                                 const RecoveryOptions& opts = {});

}  // namespace wrinkle
