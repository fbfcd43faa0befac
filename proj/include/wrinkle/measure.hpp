#pragma once

// Tabulated positive measures on (0, lambda) x R carried by a frequency
// comb: b(x_i, k_j) is the density against dx (x) and unit point masses (k).
// The companion table b_x holds the difference quotient of b and stands in
// for the distributional x-derivative; the admissibility rule is that b_x
// vanishes wherever b does, so a column may switch on as x grows but can
// never switch off.

#include <optional>
#include <vector>

#include "wrinkle/grids.hpp"
#include "wrinkle/numeric.hpp"

namespace wrinkle {

struct MeasureTable {
  XGrid x;
  KGrid k;
  Table b;
  Table b_x;          // regenerated from b on construction
  double b_min = 0.0; // evaluation floor for denominators; 0 = perspective rule
};

/** Build a table; b_x is derived via diff_x. Throws on shape mismatch or
 *  non-finite entries. Negative b is representable (reported by
 *  check_feasible, rejected by the evaluators). */
MeasureTable make_measure_table(const XGrid& x, const KGrid& k, Table b, double b_min = 0.0);

/** Expert variant with a caller-supplied derivative table (diagnostics that
 *  posit b_x directly). The b = 0 => b_x = 0 rule is still enforced. */
MeasureTable make_measure_table(const XGrid& x, const KGrid& k, Table b, Table b_x,
                                double b_min);

struct FeasibilityReport {
  double max_marginal_residual = 0.0; // max_i |sum_j b - 2 x_i|
  double min_b = 0.0;
  int zero_cells_with_slope = 0;      // cells with b = 0 but b_x != 0
  double tol = 0.0;
  bool feasible = false;
};

/** Always returns a report; never throws. */
FeasibilityReport check_feasible(const MeasureTable& t, double tol = 1e-9);

struct FInftyValue {
  double total = 0.0;          // k-moment + derivative quotient
  double k_part = 0.0;
  double quotient_part = 0.0;
  double total_after_skip = 0.0; // same sum excluding the first n_skip rows
  int n_skip = 0;
  bool floored = false;        // a denominator was clamped to b_min
};

struct FInftyOptions {
  std::optional<double> b_min; // override the table's floor
  int n_skip = 0;              // rows excluded from total_after_skip
};

/**
 * Quadrature of sum_j [k_j^2 b + b_x^2 / (4 k_j^2 b)] over (left, right].
 * Zero denominators follow the perspective rule: 0 when b_x = 0 there,
 * +inf otherwise; a positive floor clamps denominators instead (flagged).
 * The x-rule is trapezoid on (left, right] with the open left endpoint's
 * integrand linearly extrapolated from the first two nodes, so the node
 * weights are (2, 1/2, 1, ..., 1, 1/2) h and affine rows integrate
 * exactly. Throws on negative b.
 *
 * Tables with b proportional to x near 0 at fixed k diverge logarithmically
 * under refinement; total_after_skip (n_skip > 0) exposes that growth
 * instead of hiding it.
 */
FInftyValue eval_F_infty(const MeasureTable& t, const FInftyOptions& opts = {});

/**
 * Same value through the total-variation route: each cell is weighted by
 * |mu~| = sqrt(b^2 + b_x^2) and the integrand uses the two density ratios
 * against it. Agrees with eval_F_infty up to rounding.
 */
FInftyValue eval_F_infty_tv(const MeasureTable& t, const FInftyOptions& opts = {});

struct XDisintegration {
  XGrid x;
  KGrid k;
  Table nu;                    // row i: probability weights over k
};

struct KDisintegration {
  XGrid x;
  KGrid k;
  std::vector<double> lambda;  // column masses, quadrature of b(., k_j)
  Table g;                     // column j: profile with unit x-integral
};

/** nu_x(k_j) = b / (2x). Throws if t is infeasible (tol 1e-8). */
XDisintegration disintegrate_x(const MeasureTable& t);

/** lambda_j = integral of column j; g = column / lambda_j (zero column stays
 *  zero). Throws if t is infeasible (tol 1e-8). */
KDisintegration disintegrate_k(const MeasureTable& t);

struct DilatedTable {
  MeasureTable table;
  bool interpolated = false;   // scaled-grid remap is exact, so always false
};

/**
 * Push-forward under (x, k) -> (lambda x, k) with density lambda * b(x/lambda, k),
 * carried on the scaled grid (same node count, spacing lambda * h). Node
 * values map one-to-one, so the k^2-moment scales by exactly lambda^2 and
 * the derivative-quotient term is unchanged. Requires t on [0, 1] and
 * lambda in (1, 2).
 */
DilatedTable dilate(const MeasureTable& t, double lambda);

/**
 * Collapse each row's distribution onto the coarse comb with spacing
 * pi/L0: mass in (k - pi/L0, k] lands at k for k > 0, mass in
 * [k, k + pi/L0) at k for k < 0; boundary ties go to the closed endpoint.
 * Row sums are preserved term-by-term. Throws when a nonzero column lies
 * beyond k_max on the coarse comb.
 */
MeasureTable bin_frequencies(const MeasureTable& t, double L0, double k_max);

}  // namespace wrinkle
