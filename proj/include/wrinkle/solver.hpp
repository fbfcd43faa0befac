#pragma once

// Minimization of the tabulated limit energy over row-wise scaled
// simplices {b >= 0, sum_j b(x_i, .) = 2 x_i}, plus the minimizer
// diagnostics: per-frequency energy split, low-frequency support edge, and
// the kinetic-energy probe for density/flux pairs.

#include <optional>
#include <vector>

#include "wrinkle/measure.hpp"

namespace wrinkle {

struct SolverConfig {
  int nx = 200;
  double x_right = 1.0;
  double L_eff = 8.0;
  double k_max = 12.0;
  bool symmetric = false;      // one sign of k is enough for the energy
  double b_min_scale = 1e-12;  // iteration floor is b_min_scale * 2 x_i
  int max_iters = 200000;
  double kkt_tol = 1e-6;
  double shrink = 0.5;         // backtracking factor
  int check_every = 25;        // iterations between convergence checks
  bool uniform_init = false;   // start from equal weights instead of the
                               // balance-frequency profile
  unsigned long long seed = 0; // recorded for reproducibility of runs
};

struct EquipartitionRow {
  double k = 0.0;
  double lambda_k = 0.0;  // column mass
  double moment = 0.0;    // integral of k^2 g_k (equals k^2 by normalization)
  double quotient = 0.0;  // integral of (b_x/b)^2 g_k / (4 k^2)
  double r_k = 0.0;       // |moment - quotient| / (moment + quotient)
  bool active = true;     // carries at least 1e-12 of the total mass
};

struct MinimizerReport {
  MeasureTable table;        // feasible; evaluated at floor 0 below
  double objective = 0.0;    // eval_F_infty at b_min = 0 (perspective rule)
  double kkt_residual = 0.0; // unit-step projected-gradient movement, floor off
  std::vector<EquipartitionRow> per_k;
  double global_residual = 0.0;  // |moment - quotient| of the whole table
  double support_k_min = 0.0;    // smallest |k| holding > 1e-6 of the mass
  int iterations = 0;
  bool converged = false;
};

/**
 * Interior Newton minimization: a log-barrier weight halves per stage and
 * each stage recenters with Newton steps, solved through per-column
 * tridiagonal curvature blocks plus a dense row-coupling Schur system,
 * with iterative refinement so the deep stages keep exact row sums and
 * true descent directions. A projected-gradient polish of the floored
 * objective backs up the rare stalled run. Iterates keep row sums at
 * exactly 2 x_i and every cell positive; the reported table is the final
 * iterate untouched, its objective re-evaluated with the floor off, and
 * kkt_residual is the sup-norm movement of one unit projected-gradient
 * step of that same floor-free objective. Deterministic for a fixed
 * config. Throws on invalid configs; a run that exhausts max_iters
 * returns the best iterate with converged = false.
 */
MinimizerReport minimize_F_infty(const SolverConfig& cfg,
                                 const std::optional<MeasureTable>& init = {});

struct ObjectiveEval {
  double value = 0.0;
  Table gradient;
};

/**
 * The floored objective the solver's line search sees, with its exact
 * gradient (forward-difference adjoint of diff_x). Exposed so the gradient
 * can be verified against finite differences of the value. Requires the
 * table's x-grid to start at 0 (ghost-zero difference convention).
 */
ObjectiveEval floored_objective(const MeasureTable& t, double b_min_scale = 1e-12);

/**
 * Per-frequency energy split for any feasible table. Columns holding less
 * than 1e-12 of the total mass are reported inactive and skipped by
 * aggregates. For each active k the moment side is k^2 exactly, so r_k
 * measures how far the quotient side is from k^2.
 */
std::vector<EquipartitionRow> equipartition_residual(const MeasureTable& t);

/** |sum k^2 d mu - sum quotient| over the whole table (the two halves of
 *  the energy; equal at an unconstrained-in-k minimizer). */
double global_equipartition_residual(const MeasureTable& t);

/** Smallest |k| whose column mass exceeds mass_tol * total. Throws when no
 *  column qualifies. */
double support_lower_bound(const MeasureTable& t, double mass_tol);

/**
 * Kinetic-energy probe: sum over cells of (1/2) E^2 / rho against the
 * shared cell weights, with the perspective convention at rho = 0. Putting
 * E = b_x / (sqrt(2) k) cellwise turns (1/2) E^2 / rho into
 * b_x^2 / (4 k^2 b), so the probe reproduces the quotient part of the
 * energy. Jointly convex in (rho, E). Throws on negative rho.
 */
double benamou_brenier(const MeasureTable& rho, const Table& flux);

}  // namespace wrinkle
