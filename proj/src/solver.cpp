#include "wrinkle/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <numbers>
#include <numeric>
#include <span>
#include <stdexcept>

namespace wrinkle {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kActiveMassFraction = 1e-12;
constexpr double kTailAbsFloor = 1e-250;

/** Euclidean projection of z onto {b >= 0, sum b = target}, sort-based. */
void project_row(const double* z, int n, double target, double* out,
                 std::vector<double>& scratch) {
  scratch.assign(z, z + n);
  std::sort(scratch.begin(), scratch.end(), std::greater<double>());
  double cum = 0.0, tau = 0.0;
  int support = 0;
  for (int k = 0; k < n; ++k) {
    cum += scratch[k];
    double cand = (cum - target) / (k + 1);
    if (scratch[k] - cand > 0.0) {
      tau = cand;
      support = k + 1;
    } else {
      break;
    }
  }
  if (support == 0) {  // target <= 0 or degenerate input: all mass on the max
    int arg = static_cast<int>(std::max_element(z, z + n) - z);
    std::fill(out, out + n, 0.0);
    out[arg] = std::max(target, 0.0);
    return;
  }
  for (int j = 0; j < n; ++j) out[j] = std::max(z[j] - tau, 0.0);
}

struct Problem {
  XGrid x;
  KGrid k;
  int nx = 0, nk = 0;
  std::vector<double> w;        // open-trapezoid node weights
  std::vector<double> k2;       // k_j^2
  std::vector<double> inv4k2;   // 1 / (4 k_j^2)
  std::vector<double> floor_i;  // iteration floor per row
  std::vector<double> target;   // row masses 2 x_i

  double objective(const std::vector<double>& b) const {
    double acc = 0.0;
    for (int i = 0; i < nx; ++i) {
      const double* bi = &b[static_cast<std::size_t>(i) * nk];
      const double* bp = i > 0 ? &b[static_cast<std::size_t>(i - 1) * nk] : nullptr;
      double row = 0.0;
      double inv_h = 1.0 / x.h;
      for (int j = 0; j < nk; ++j) {
        double bx = (bi[j] - (bp ? bp[j] : 0.0)) * inv_h;
        double d = std::max(bi[j], floor_i[i]);
        row += k2[j] * bi[j] + bx * bx * inv4k2[j] / d;
      }
      acc += w[i] * row;
    }
    return acc;
  }

  // dF/db; the quotient couples each cell to the one above through bx.
  void gradient(const std::vector<double>& b, std::vector<double>& g) const {
    double inv_h = 1.0 / x.h;
    for (int i = 0; i < nx; ++i) {
      const double* bi = &b[static_cast<std::size_t>(i) * nk];
      const double* bp = i > 0 ? &b[static_cast<std::size_t>(i - 1) * nk] : nullptr;
      const double* bn = i + 1 < nx ? &b[static_cast<std::size_t>(i + 1) * nk] : nullptr;
      double* gi = &g[static_cast<std::size_t>(i) * nk];
      for (int j = 0; j < nk; ++j) {
        double bx = (bi[j] - (bp ? bp[j] : 0.0)) * inv_h;
        double d = std::max(bi[j], floor_i[i]);
        double val = k2[j] + 2.0 * bx * inv4k2[j] / d * inv_h;
        if (bi[j] > floor_i[i]) val -= bx * bx * inv4k2[j] / (bi[j] * bi[j]);
        val *= w[i];
        if (bn) {
          double bxn = (bn[j] - bi[j]) * inv_h;
          double dn = std::max(bn[j], floor_i[i + 1]);
          val -= w[i + 1] * 2.0 * bxn * inv4k2[j] / dn * inv_h;
        }
        gi[j] = val;
      }
    }
  }

  void project(std::vector<double>& b, std::vector<double>& scratch) const {
    std::vector<double> row(nk);
    for (int i = 0; i < nx; ++i) {
      double* bi = &b[static_cast<std::size_t>(i) * nk];
      project_row(bi, nk, target[i], row.data(), scratch);
      std::copy(row.begin(), row.end(), bi);
    }
  }
};

Problem make_problem(XGrid x, KGrid k, double b_min_scale) {
  if (x.left != 0.0)
    throw std::invalid_argument("solver: x-grid must start at 0");
  Problem p;
  p.x = x;
  p.k = std::move(k);
  p.nx = x.n;
  p.nk = static_cast<int>(p.k.k.size());
  p.w = open_weights(p.x);
  p.k2.resize(p.nk);
  p.inv4k2.resize(p.nk);
  for (int j = 0; j < p.nk; ++j) {
    p.k2[j] = p.k.k[j] * p.k.k[j];
    p.inv4k2[j] = 1.0 / (4.0 * p.k2[j]);
  }
  p.floor_i.resize(p.nx);
  p.target.resize(p.nx);
  for (int i = 0; i < p.nx; ++i) {
    p.target[i] = 2.0 * p.x.node(i);
    p.floor_i[i] = b_min_scale * p.target[i];
  }
  return p;
}

Problem make_problem(const SolverConfig& cfg) {
  if (!(cfg.kkt_tol > 0.0)) throw std::invalid_argument("solver: kkt_tol must be positive");
  if (cfg.nx < 2) throw std::invalid_argument("solver: need at least two x-nodes");
  if (cfg.max_iters < 1) throw std::invalid_argument("solver: max_iters must be positive");
  double support_edge = std::sqrt(std::numbers::pi / 2.0);
  if (cfg.k_max < support_edge)
    throw std::invalid_argument("solver: k_max below the support bound sqrt(pi/2)");
  return make_problem(make_x_grid(cfg.nx, 0.0, cfg.x_right),
                      make_k_grid(cfg.L_eff, cfg.k_max, cfg.symmetric),
                      cfg.b_min_scale);
}

std::vector<double> initial_point(const Problem& p, const SolverConfig& cfg,
                                  const std::optional<MeasureTable>& init) {
  std::vector<double> b(static_cast<std::size_t>(p.nx) * p.nk);
  if (init) {
    if (init->b.rows != p.nx || init->b.cols != p.nk)
      throw std::invalid_argument("solver: init table shape mismatch");
    auto rep = check_feasible(*init, 1e-8);
    if (!rep.feasible) throw std::invalid_argument("solver: init table infeasible");
    std::copy(init->b.v.begin(), init->b.v.end(), b.begin());
    return b;
  }
  double k_lo = std::abs(p.k.k.front()), k_hi = std::abs(p.k.k.back());
  for (double kk : p.k.k) {
    k_lo = std::min(k_lo, std::abs(kk));
    k_hi = std::max(k_hi, std::abs(kk));
  }
  for (int i = 0; i < p.nx; ++i) {
    double* bi = &b[static_cast<std::size_t>(i) * p.nk];
    double row = 0.0;
    if (cfg.uniform_init) {
      for (int j = 0; j < p.nk; ++j) bi[j] = 1.0;
      row = p.nk;
    } else {
      double balance = 1.0 / std::sqrt(p.target[i]);  // frequency where the
      // two energy densities trade places, clipped to the comb
      double kstar = std::clamp(balance, k_lo, k_hi);
      for (int j = 0; j < p.nk; ++j) {
        double d = std::abs(p.k.k[j]) - kstar;
        bi[j] = std::exp(-d * d);
        row += bi[j];
      }
    }
    double scale = p.target[i] / row;
    for (int j = 0; j < p.nk; ++j) bi[j] *= scale;
  }
  return b;
}

// Continue every switched-on column geometrically through its sub-floor
// tail so no column dies mid-domain (a dead cell after a live one carries
// slope and the floor-free energy would be infinite). The decay factor
// exp(-2 k^2 h) is the asymptotic rate of the minimizer's own tails, so
// this is also the iteration repair step: projection can zero a cell under
// a live one, and the resulting cliff has energy ~ 1/floor and gradients
// to match, which no global step length survives. Row sums are restored
// exactly on the heaviest cell of each row.
void continue_tails(const Problem& p, std::vector<double>& b) {
  std::vector<double> added(p.nx, 0.0);
  for (int j = 0; j < p.nk; ++j) {
    double q = std::exp(-2.0 * p.k2[j] * p.x.h);
    double tail = 0.0;
    for (int i = 0; i < p.nx; ++i) {
      double& cell = b[static_cast<std::size_t>(i) * p.nk + j];
      if (tail == 0.0) {
        tail = cell;  // column not on yet
        continue;
      }
      tail = std::max(tail * q, kTailAbsFloor);
      if (cell < tail) {
        added[i] += tail - cell;
        cell = tail;
      } else {
        tail = cell;
      }
    }
  }
  for (int i = 0; i < p.nx; ++i) {
    if (added[i] == 0.0) continue;
    double* bi = &b[static_cast<std::size_t>(i) * p.nk];
    int arg = static_cast<int>(std::max_element(bi, bi + p.nk) - bi);
    bi[arg] = std::max(bi[arg] - added[i], 0.0);
  }
}

double kkt_residual(const Problem& p, const std::vector<double>& b,
                    const std::vector<double>& g, std::vector<double>& scratch) {
  std::vector<double> z(p.nk), proj(p.nk);
  double worst = 0.0;
  for (int i = 0; i < p.nx; ++i) {
    const double* bi = &b[static_cast<std::size_t>(i) * p.nk];
    const double* gi = &g[static_cast<std::size_t>(i) * p.nk];
    for (int j = 0; j < p.nk; ++j) z[j] = bi[j] - gi[j];
    project_row(z.data(), p.nk, p.target[i], proj.data(), scratch);
    for (int j = 0; j < p.nk; ++j) worst = std::max(worst, std::abs(bi[j] - proj[j]));
  }
  return worst;
}

}  // namespace

namespace {

// Rebuild phi = sqrt(b) and the phi-gradient 2 phi grad_b F. The polish
// stage runs in square-root variables: a gradient step there moves b
// multiplicatively, so cells cannot jump across zero and the quotient
// term's 1/b stiffness at small cells cancels against the factor phi.
void to_sqrt_vars(const std::vector<double>& b, const std::vector<double>& gb,
                  std::vector<double>& phi, std::vector<double>& gphi) {
  for (std::size_t q = 0; q < b.size(); ++q) {
    phi[q] = std::sqrt(b[q]);
    gphi[q] = 2.0 * phi[q] * gb[q];
  }
}

// Square, rescale each row back onto its mass shell, then repair tails.
void realize_trial(const Problem& p, const std::vector<double>& phi,
                   std::vector<double>& b) {
  for (int i = 0; i < p.nx; ++i) {
    const double* fi = &phi[static_cast<std::size_t>(i) * p.nk];
    double* bi = &b[static_cast<std::size_t>(i) * p.nk];
    double s = 0.0;
    for (int j = 0; j < p.nk; ++j) s += fi[j] * fi[j];
    double c = s > 0.0 ? p.target[i] / s : 0.0;
    for (int j = 0; j < p.nk; ++j) bi[j] = c * fi[j] * fi[j];
  }
  continue_tails(p, b);
}

// Factored symmetric tridiagonal system (unit-lower-bidiagonal L, diag D).
struct Tridiag {
  std::vector<double> l, d;

  void factor(const std::vector<double>& diag, const std::vector<double>& off) {
    int n = static_cast<int>(diag.size());
    l.assign(n, 0.0);
    d.assign(n, 0.0);
    d[0] = diag[0];
    for (int i = 1; i < n; ++i) {
      l[i] = off[i] / d[i - 1];
      d[i] = diag[i] - l[i] * off[i];
      if (!(d[i] > 0.0)) d[i] = 1e-300;  // PD up to rounding
    }
  }

  void solve(std::vector<double>& r) const {
    int n = static_cast<int>(d.size());
    for (int i = 1; i < n; ++i) r[i] -= l[i] * r[i - 1];
    for (int i = 0; i < n; ++i) r[i] /= d[i];
    for (int i = n - 2; i >= 0; --i) r[i] -= l[i + 1] * r[i + 1];
  }
};

// Newton with a log barrier and a halving barrier weight, solving
//   min F(b)  s.t.  row sums = 2 x_i,  b > 0.
// The energy's second derivatives live on per-column chains (tridiagonal
// blocks), and the row-sum constraints tie columns together only through
// an nx-by-nx Schur complement, so every Newton system is solved exactly.
// Descent is measured against the multiplier-shifted gradient g + lam:
// the raw inner product -g.step cancels catastrophically once centered
// (terms O(1), value O(tau)) and its sign noise would wreck both the line
// search and the stage exit. Shifting by lam changes nothing in exact
// arithmetic since every row of the step sums to zero.
// Runs to tau ~ 7e-13; the worst projected-gradient residual a centered
// point can carry sits at sqrt(tau), from cells crossing into the support,
// which is what puts the final residual just under 1e-6. Returns the
// number of accepted Newton steps.
int barrier_newton(const Problem& p, std::vector<double>& b) {
  int nx = p.nx, nk = p.nk;
  std::size_t dim = b.size();

  // lift dead cells so logs and curvatures stay representable, then put
  // each row back on its mass shell
  for (int i = 0; i < nx; ++i) {
    double* bi = &b[static_cast<std::size_t>(i) * nk];
    double lift = 1e-10 * p.target[i];
    double s = 0.0;
    for (int j = 0; j < nk; ++j) {
      bi[j] = std::max(bi[j], lift);
      s += bi[j];
    }
    double c = p.target[i] / s;
    for (int j = 0; j < nk; ++j) bi[j] *= c;
  }

  std::vector<double> g(dim), step(dim), bt(dim);
  std::vector<double> lam(nx), diag(nx), off(nx), rhs(nx), col(nx);
  std::vector<Tridiag> fac(nk);
  std::vector<double> schur(static_cast<std::size_t>(nx) * nx);
  std::vector<double> hdiag(dim), hoff(dim), resid(dim), rdef(nx), dlam(nx);

  const bool trace = std::getenv("WRINKLE_SOLVER_TRACE") != nullptr;
  int accepted_steps = 0;
  for (double tau = 1e-1; tau > 5e-13; tau *= 0.5) {
    for (int inner = 0; inner < 40; ++inner) {
      p.gradient(b, g);
      for (std::size_t q = 0; q < dim; ++q) g[q] -= tau / b[q];

      // assemble and factor the chain Hessians; accumulate the Schur
      // complement sum_j inv(H_j) and the reduced right-hand side
      std::fill(schur.begin(), schur.end(), 0.0);
      std::fill(rhs.begin(), rhs.end(), 0.0);
      for (int i = 0; i < nx; ++i)
        rhs[i] = p.target[i];
      for (int j = 0; j < nk; ++j) {
        for (int i = 0; i < nx; ++i) {
          double bij = b[static_cast<std::size_t>(i) * nk + j];
          diag[i] = tau / (bij * bij);
          off[i] = 0.0;
          rhs[i] -= bij;  // shared row residual, subtracted once per cell
        }
        for (int i = 1; i < nx; ++i) {
          double bij = b[static_cast<std::size_t>(i) * nk + j];
          double prev = b[static_cast<std::size_t>(i - 1) * nk + j];
          double beta = p.w[i] / (2.0 * p.k2[j] * p.x.h * p.x.h * bij);
          double ratio = prev / bij;
          diag[i] += beta * ratio * ratio;
          diag[i - 1] += beta;
          off[i] = -beta * ratio;
        }
        for (int i = 0; i < nx; ++i) {
          hdiag[static_cast<std::size_t>(j) * nx + i] = diag[i];
          hoff[static_cast<std::size_t>(j) * nx + i] = off[i];
        }
        fac[j].factor(diag, off);
        // dense inverse, column by column
        for (int c = 0; c < nx; ++c) {
          std::fill(col.begin(), col.end(), 0.0);
          col[c] = 1.0;
          fac[j].solve(col);
          double* srow = &schur[static_cast<std::size_t>(c) * nx];
          for (int r = 0; r < nx; ++r) srow[r] += col[r];
        }
        // y = inv(H_j) g_j feeds the reduced rhs
        for (int i = 0; i < nx; ++i) col[i] = g[static_cast<std::size_t>(i) * nk + j];
        fac[j].solve(col);
        for (int i = 0; i < nx; ++i) rhs[i] += col[i];
      }

      // S lam = -(r + A inv(H) g), dense Cholesky
      for (int c = 0; c < nx; ++c)  // symmetrize rounding
        for (int r = 0; r < c; ++r) {
          double m = 0.5 * (schur[static_cast<std::size_t>(c) * nx + r] +
                            schur[static_cast<std::size_t>(r) * nx + c]);
          schur[static_cast<std::size_t>(c) * nx + r] = m;
          schur[static_cast<std::size_t>(r) * nx + c] = m;
        }
      for (int c = 0; c < nx; ++c) {
        double* col_c = &schur[static_cast<std::size_t>(c) * nx];
        for (int r = 0; r < c; ++r) {
          double* col_r = &schur[static_cast<std::size_t>(r) * nx];
          col_c[c] -= col_r[c] * col_r[c];
          for (int r2 = c + 1; r2 < nx; ++r2) col_c[r2] -= col_r[c] * col_r[r2];
        }
        col_c[c] = std::sqrt(std::max(col_c[c], 1e-300));
        for (int r2 = c + 1; r2 < nx; ++r2) col_c[r2] /= col_c[c];
      }
      for (int i = 0; i < nx; ++i) lam[i] = -rhs[i];
      for (int c = 0; c < nx; ++c) {
        lam[c] /= schur[static_cast<std::size_t>(c) * nx + c];
        for (int r = c + 1; r < nx; ++r)
          lam[r] -= schur[static_cast<std::size_t>(c) * nx + r] * lam[c];
      }
      for (int c = nx - 1; c >= 0; --c) {
        lam[c] /= schur[static_cast<std::size_t>(c) * nx + c];
        for (int r = 0; r < c; ++r)
          lam[r] -= schur[static_cast<std::size_t>(r) * nx + c] * lam[c];
      }

      // back-substitute the step column by column
      for (int j = 0; j < nk; ++j) {
        for (int i = 0; i < nx; ++i)
          col[i] = -(g[static_cast<std::size_t>(i) * nk + j] + lam[i]);
        fac[j].solve(col);
        for (int i = 0; i < nx; ++i) step[static_cast<std::size_t>(i) * nk + j] = col[i];
      }

      // two rounds of iterative refinement through the same factors; the
      // chain entries span fourteen orders of magnitude near the end of
      // the path and a single pass loses the step's row sums (and with
      // them descent) to rounding
      for (int i = 0; i < nx; ++i) {
        double s = p.target[i];
        for (int j = 0; j < nk; ++j) s -= b[static_cast<std::size_t>(i) * nk + j];
        rdef[i] = s;
      }
      for (int round = 0; round < 2; ++round) {
        for (int j = 0; j < nk; ++j) {
          const double* hd = &hdiag[static_cast<std::size_t>(j) * nx];
          const double* ho = &hoff[static_cast<std::size_t>(j) * nx];
          for (int i = 0; i < nx; ++i) {
            std::size_t q = static_cast<std::size_t>(i) * nk + j;
            double hs = hd[i] * step[q];
            if (i > 0) hs += ho[i] * step[q - nk];
            if (i + 1 < nx) hs += ho[i + 1] * step[q + nk];
            resid[q] = -g[q] - lam[i] - hs;
          }
        }
        for (int i = 0; i < nx; ++i) {
          double s = rdef[i];
          for (int j = 0; j < nk; ++j) s -= step[static_cast<std::size_t>(i) * nk + j];
          rhs[i] = -s;  // S dlam = A invH e_b - e_A
        }
        for (int j = 0; j < nk; ++j) {
          for (int i = 0; i < nx; ++i) col[i] = resid[static_cast<std::size_t>(i) * nk + j];
          fac[j].solve(col);
          for (int i = 0; i < nx; ++i) rhs[i] += col[i];
        }
        for (int i = 0; i < nx; ++i) dlam[i] = rhs[i];
        for (int c = 0; c < nx; ++c) {
          dlam[c] /= schur[static_cast<std::size_t>(c) * nx + c];
          for (int r = c + 1; r < nx; ++r)
            dlam[r] -= schur[static_cast<std::size_t>(c) * nx + r] * dlam[c];
        }
        for (int c = nx - 1; c >= 0; --c) {
          dlam[c] /= schur[static_cast<std::size_t>(c) * nx + c];
          for (int r = 0; r < c; ++r)
            dlam[r] -= schur[static_cast<std::size_t>(r) * nx + c] * dlam[c];
        }
        for (int j = 0; j < nk; ++j) {
          for (int i = 0; i < nx; ++i)
            col[i] = resid[static_cast<std::size_t>(i) * nk + j] - dlam[i];
          fac[j].solve(col);
          for (int i = 0; i < nx; ++i) step[static_cast<std::size_t>(i) * nk + j] += col[i];
        }
        for (int i = 0; i < nx; ++i) lam[i] += dlam[i];
      }

      double decrement = 0.0;
      for (int i = 0; i < nx; ++i)
        for (int j = 0; j < nk; ++j) {
          std::size_t q = static_cast<std::size_t>(i) * nk + j;
          decrement -= (g[q] + lam[i]) * step[q];
        }

      // a nonpositive decrement means this stage is centered to rounding
      if (!(decrement > 0.0)) {
        if (trace)
          std::fprintf(stderr, "tau %.3e inner %d centered decr %.3e\n", tau,
                       inner, decrement);
        break;
      }

      // keep strictly inside the positive cone
      double alpha = 1.0;
      for (std::size_t q = 0; q < dim; ++q)
        if (step[q] < 0.0) alpha = std::min(alpha, -0.995 * b[q] / step[q]);

      double phi0 = p.objective(b);
      double logs0 = 0.0;
      for (std::size_t q = 0; q < dim; ++q) logs0 += std::log(b[q]);
      double f0 = phi0 - tau * logs0;
      double accepted = -1.0;
      for (int bt_i = 0; bt_i < 40; ++bt_i) {
        for (std::size_t q = 0; q < dim; ++q) bt[q] = b[q] + alpha * step[q];
        double phi1 = p.objective(bt);
        double logs1 = 0.0;
        for (std::size_t q = 0; q < dim; ++q) logs1 += std::log(bt[q]);
        double f1 = phi1 - tau * logs1;
        if (f1 <= f0 - 1e-4 * alpha * decrement + 1e-12 * std::abs(f0)) {
          accepted = alpha;
          break;
        }
        alpha *= 0.5;
      }
      if (trace) {
        // duality gap of the raw objective at the current iterate
        double gb = 0.0, shift = 0.0;
        for (int i = 0; i < nx; ++i) {
          double lo = kInf;
          for (int j = 0; j < nk; ++j) {
            std::size_t q = static_cast<std::size_t>(i) * nk + j;
            double gf = g[q] + tau / b[q];
            gb += gf * b[q];
            lo = std::min(lo, gf);
          }
          shift += p.target[i] * lo;
        }
        std::fprintf(stderr,
                     "tau %.3e inner %d F %.10f gap %.3e decr %.3e alpha %.3e\n",
                     tau, inner, phi0, gb - shift, decrement, accepted);
      }
      if (accepted < 0.0) break;  // numerically stuck at this tau
      for (std::size_t q = 0; q < dim; ++q) b[q] += accepted * step[q];
      ++accepted_steps;
      // the centering error a decrement this size leaves behind is well
      // under the barrier's own gap of tau per cell
      if (decrement <= 1e-2 * tau * static_cast<double>(dim)) break;
    }
  }

  // settle row sums exactly on the heaviest cell of each row
  for (int i = 0; i < nx; ++i) {
    double* bi = &b[static_cast<std::size_t>(i) * nk];
    double s = 0.0;
    for (int j = 0; j < nk; ++j) s += bi[j];
    int arg = static_cast<int>(std::max_element(bi, bi + nk) - bi);
    bi[arg] += p.target[i] - s;
  }
  return accepted_steps;
}

// Floored-objective descent in sqrt variables, used to finish off the
// barrier solution: the barrier ignores the iteration floor, so cells
// straddling it get a last local equilibration here.
int polish(const Problem& p, const SolverConfig& cfg, std::vector<double>& b,
           int budget, std::vector<double>& g, bool& converged,
           std::vector<double>& scratch) {
  std::size_t dim = b.size();
  std::vector<double> phi(dim), gphi(dim), phi_new(dim), gphi_new(dim);
  std::vector<double> trial_phi(dim), b_new(dim);
  p.gradient(b, g);
  to_sqrt_vars(b, g, phi, gphi);
  double fb = p.objective(b);
  double step = 1.0 / (1.0 + std::abs(p.k2.back()));
  int it = 0;
  converged = false;

  for (; it < budget; ++it) {
    if (it % cfg.check_every == 0) {
      double r = kkt_residual(p, b, g, scratch);
      if (r <= cfg.kkt_tol) {
        converged = true;
        return it;
      }
    }
    double s = step;
    double f_trial = kInf;
    for (int bt = 0; bt < 60; ++bt) {
      for (std::size_t q = 0; q < dim; ++q) trial_phi[q] = phi[q] - s * gphi[q];
      realize_trial(p, trial_phi, b_new);
      f_trial = p.objective(b_new);
      if (f_trial <= fb + 1e-12 * std::abs(fb)) break;
      s *= cfg.shrink;
    }
    if (!(f_trial <= fb + 1e-12 * std::abs(fb))) break;  // stationary
    p.gradient(b_new, g);
    to_sqrt_vars(b_new, g, phi_new, gphi_new);

    double sy = 0.0, ss = 0.0;
    for (std::size_t q = 0; q < dim; ++q) {
      double dphi = phi_new[q] - phi[q];
      double dg = gphi_new[q] - gphi[q];
      sy += dphi * dg;
      ss += dphi * dphi;
    }
    step = sy > 0.0 ? std::clamp(ss / sy, 1e-14, 1e6) : step * 2.0;

    std::swap(b, b_new);
    std::swap(phi, phi_new);
    std::swap(gphi, gphi_new);
    fb = f_trial;
  }
  double r = kkt_residual(p, b, g, scratch);
  converged = r <= cfg.kkt_tol;
  return it;
}

}  // namespace

MinimizerReport minimize_F_infty(const SolverConfig& cfg,
                                 const std::optional<MeasureTable>& init) {
  Problem p = make_problem(cfg);
  std::vector<double> scratch;
  std::vector<double> b = initial_point(p, cfg, init);
  p.project(b, scratch);
  continue_tails(p, b);

  // the interior point solve does the hard global work; its iterate is the
  // answer and must not be touched afterwards (any repair of near-zero
  // cells moves them off their complementarity values and the projected
  // gradient jumps by orders of magnitude)
  Problem p0 = make_problem(p.x, p.k, 0.0);
  int it = barrier_newton(p0, b);

  // stationarity is measured against the same objective the report quotes,
  // the bare difference scheme with no floor; the barrier endpoint keeps
  // every cell positive on a geometric tail so that gradient is finite
  std::vector<double> g(b.size());
  p0.gradient(b, g);
  double res = kkt_residual(p0, b, g, scratch);
  bool converged = res <= cfg.kkt_tol;

  // fallback for the rare case the interior point stalls: first-order
  // polish of the floored objective, kept only if it actually helps
  if (!converged) {
    std::vector<double> b2 = b;
    continue_tails(p, b2);
    bool conv2 = false;
    it += polish(p, cfg, b2, cfg.max_iters, g, conv2, scratch);
    continue_tails(p, b2);
    p0.gradient(b2, g);
    double res2 = kkt_residual(p0, b2, g, scratch);
    if (res2 < res) {
      b = std::move(b2);
      res = res2;
      converged = conv2 || res <= cfg.kkt_tol;
    }
  }

  MinimizerReport rep;
  Table bt(p.nx, p.nk);
  bt.v = b;
  rep.table = make_measure_table(p.x, p.k, std::move(bt), 0.0);
  rep.kkt_residual = res;
  rep.converged = converged;
  rep.iterations = it;
  rep.objective = eval_F_infty(rep.table).total;
  rep.per_k = equipartition_residual(rep.table);
  rep.global_residual = global_equipartition_residual(rep.table);
  rep.support_k_min = support_lower_bound(rep.table, 1e-6);
  return rep;
}

ObjectiveEval floored_objective(const MeasureTable& t, double b_min_scale) {
  Problem p = make_problem(t.x, t.k, b_min_scale);
  ObjectiveEval out;
  out.value = p.objective(t.b.v);
  out.gradient = Table(t.b.rows, t.b.cols);
  p.gradient(t.b.v, out.gradient.v);
  return out;
}

std::vector<EquipartitionRow> equipartition_residual(const MeasureTable& t) {
  int nx = t.x.n, nk = t.b.cols;
  std::vector<EquipartitionRow> rows(nk);
  std::vector<double> col(nx), qrow(nx);
  double total_mass = 0.0;
  std::vector<double> masses(nk);
  for (int j = 0; j < nk; ++j) {
    for (int i = 0; i < nx; ++i) col[i] = t.b(i, j);
    masses[j] = open_trapezoid(std::span<const double>(col), t.x);
    total_mass += masses[j];
  }
  for (int j = 0; j < nk; ++j) {
    EquipartitionRow& r = rows[j];
    r.k = t.k.k[j];
    r.lambda_k = masses[j];
    r.active = masses[j] > kActiveMassFraction * total_mass;
    if (!r.active) continue;
    double k2 = r.k * r.k;
    for (int i = 0; i < nx; ++i) {
      double b = t.b(i, j), bx = t.b_x(i, j);
      double gk = b / masses[j];
      col[i] = k2 * gk;
      qrow[i] = b > 0.0 ? (bx / b) * (bx / b) * gk / (4.0 * k2) : 0.0;
    }
    r.moment = open_trapezoid(std::span<const double>(col), t.x);
    r.quotient = open_trapezoid(std::span<const double>(qrow), t.x);
    double denom = r.moment + r.quotient;
    r.r_k = denom > 0.0 ? std::abs(r.moment - r.quotient) / denom : 0.0;
  }
  return rows;
}

double global_equipartition_residual(const MeasureTable& t) {
  auto v = eval_F_infty(t, {.b_min = 0.0, .n_skip = 0});
  return std::abs(v.k_part - v.quotient_part);
}

double support_lower_bound(const MeasureTable& t, double mass_tol) {
  auto rows = equipartition_residual(t);
  double total = 0.0;
  for (const auto& r : rows) total += r.lambda_k;
  double best = kInf;
  for (const auto& r : rows)
    if (r.lambda_k > mass_tol * total) best = std::min(best, std::abs(r.k));
  if (!std::isfinite(best))
    throw std::invalid_argument("support_lower_bound: no column above the mass tolerance");
  return best;
}

double benamou_brenier(const MeasureTable& rho, const Table& flux) {
  if (!rho.b.same_shape(flux))
    throw std::invalid_argument("benamou_brenier: shape mismatch");
  for (double v : rho.b.v)
    if (v < 0.0) throw std::invalid_argument("benamou_brenier: negative density");
  auto w = open_weights(rho.x);
  double acc = 0.0;
  for (int i = 0; i < rho.b.rows; ++i) {
    double row = 0.0;
    for (int j = 0; j < rho.b.cols; ++j) {
      double r = rho.b(i, j), e = flux(i, j);
      if (r == 0.0) {
        if (e != 0.0) return kInf;
        continue;
      }
      row += 0.5 * e * e / r;
    }
    acc += w[i] * row;
  }
  return acc;
}

}  // namespace wrinkle
