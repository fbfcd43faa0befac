#include "wrinkle/measure.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace wrinkle {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_shapes(const XGrid& x, const KGrid& k, const Table& b) {
  if (b.rows != x.n || b.cols != static_cast<int>(k.k.size()))
    throw std::invalid_argument("measure: table shape does not match grids");
  for (double v : b.v)
    if (!std::isfinite(v)) throw std::invalid_argument("measure: non-finite entry");
}

void require_nonnegative(const MeasureTable& t, const char* who) {
  for (double v : t.b.v)
    if (v < 0.0) throw std::invalid_argument(std::string(who) + ": negative density");
}

void require_feasible(const MeasureTable& t, const char* who) {
  auto rep = check_feasible(t, 1e-8);
  if (!rep.feasible) throw std::invalid_argument(std::string(who) + ": infeasible table");
}

double integrate_rows(const std::vector<double>& v, const XGrid& g, int i0) {
  return open_trapezoid(std::span<const double>(v), g, i0);
}

struct RowTerms {
  double k_part;
  double quotient;
  bool floored;
};

// One row of the integrand; route selects the direct algebra or the
// total-variation weighting (identical values up to rounding).
template <bool kTvRoute>
RowTerms row_terms(const MeasureTable& t, int i, double floor_val) {
  RowTerms out{0.0, 0.0, false};
  for (int j = 0; j < t.b.cols; ++j) {
    double k2 = t.k.k[j] * t.k.k[j];
    double b = t.b(i, j);
    double bx = t.b_x(i, j);
    double den = b;
    if (den < floor_val) {
      den = floor_val;
      if (b < floor_val) out.floored = true;
    }
    if constexpr (kTvRoute) {
      double m = std::sqrt(den * den + bx * bx);
      if (m == 0.0) continue;  // both ratios vanish
      double rb = den / m, rbx = bx / m;
      out.k_part += k2 * rb * m;
      if (rb == 0.0) {
        if (rbx != 0.0) out.quotient = kInf;
      } else {
        out.quotient += (rbx * rbx / rb) / (4.0 * k2) * m;
      }
    } else {
      out.k_part += k2 * b;
      if (den == 0.0) {
        if (bx != 0.0) out.quotient = kInf;
      } else {
        out.quotient += bx * bx / (4.0 * k2 * den);
      }
    }
    if (out.quotient == kInf) break;
  }
  return out;
}

template <bool kTvRoute>
FInftyValue eval_impl(const MeasureTable& t, const FInftyOptions& opts) {
  double floor_val = opts.b_min.value_or(t.b_min);
  if (floor_val < 0.0) throw std::invalid_argument("eval_F_infty: negative floor");
  int n_skip = opts.n_skip;
  if (n_skip < 0 || n_skip > t.x.n) throw std::invalid_argument("eval_F_infty: bad n_skip");

  std::vector<double> vk(t.x.n), vq(t.x.n);
  bool floored = false, infinite = false, infinite_tail = false;
  for (int i = 0; i < t.x.n; ++i) {
    auto rt = row_terms<kTvRoute>(t, i, floor_val);
    vk[i] = rt.k_part;
    vq[i] = rt.quotient;
    floored = floored || rt.floored;
    if (rt.quotient == kInf) {
      infinite = true;
      if (i >= n_skip) infinite_tail = true;
      vq[i] = 0.0;  // keep the finite part of the quadrature meaningful
    }
  }

  FInftyValue out;
  out.n_skip = n_skip;
  out.floored = floored;
  out.k_part = integrate_rows(vk, t.x, 0);
  out.quotient_part = infinite ? kInf : integrate_rows(vq, t.x, 0);
  out.total = infinite ? kInf : out.k_part + out.quotient_part;
  if (infinite_tail) {
    out.total_after_skip = kInf;
  } else {
    out.total_after_skip = integrate_rows(vk, t.x, n_skip) + integrate_rows(vq, t.x, n_skip);
  }
  return out;
}

}  // namespace

MeasureTable make_measure_table(const XGrid& x, const KGrid& k, Table b, double b_min) {
  check_shapes(x, k, b);
  if (b_min < 0.0) throw std::invalid_argument("make_measure_table: negative floor");
  MeasureTable t;
  t.x = x;
  t.k = k;
  t.b = std::move(b);
  t.b_x = diff_x(t.b, x);
  t.b_min = b_min;
  return t;
}

MeasureTable make_measure_table(const XGrid& x, const KGrid& k, Table b, Table b_x,
                                double b_min) {
  check_shapes(x, k, b);
  if (!b.same_shape(b_x))
    throw std::invalid_argument("make_measure_table: derivative shape mismatch");
  for (std::size_t idx = 0; idx < b.v.size(); ++idx)
    if (b.v[idx] == 0.0 && b_x.v[idx] != 0.0)
      throw std::invalid_argument("make_measure_table: slope on an empty cell");
  if (b_min < 0.0) throw std::invalid_argument("make_measure_table: negative floor");
  MeasureTable t;
  t.x = x;
  t.k = k;
  t.b = std::move(b);
  t.b_x = std::move(b_x);
  t.b_min = b_min;
  return t;
}

FeasibilityReport check_feasible(const MeasureTable& t, double tol) {
  FeasibilityReport rep;
  rep.tol = tol;
  rep.min_b = t.b.v.empty() ? 0.0 : t.b.v[0];
  for (int i = 0; i < t.b.rows; ++i) {
    double row = 0.0;
    for (int j = 0; j < t.b.cols; ++j) {
      double b = t.b(i, j);
      row += b;
      if (b < rep.min_b) rep.min_b = b;
      if (b == 0.0 && t.b_x(i, j) != 0.0) ++rep.zero_cells_with_slope;
    }
    double res = std::abs(row - 2.0 * t.x.node(i));
    if (res > rep.max_marginal_residual) rep.max_marginal_residual = res;
  }
  rep.feasible = rep.max_marginal_residual <= tol && rep.min_b >= -tol &&
                 rep.zero_cells_with_slope == 0;
  return rep;
}

FInftyValue eval_F_infty(const MeasureTable& t, const FInftyOptions& opts) {
  require_nonnegative(t, "eval_F_infty");
  return eval_impl<false>(t, opts);
}

FInftyValue eval_F_infty_tv(const MeasureTable& t, const FInftyOptions& opts) {
  require_nonnegative(t, "eval_F_infty_tv");
  return eval_impl<true>(t, opts);
}

XDisintegration disintegrate_x(const MeasureTable& t) {
  require_feasible(t, "disintegrate_x");
  XDisintegration d;
  d.x = t.x;
  d.k = t.k;
  d.nu = Table(t.b.rows, t.b.cols);
  for (int i = 0; i < t.b.rows; ++i) {
    double m = 2.0 * t.x.node(i);
    if (m <= 0.0) continue;
    for (int j = 0; j < t.b.cols; ++j) d.nu(i, j) = t.b(i, j) / m;
  }
  return d;
}

KDisintegration disintegrate_k(const MeasureTable& t) {
  require_feasible(t, "disintegrate_k");
  KDisintegration d;
  d.x = t.x;
  d.k = t.k;
  d.lambda.assign(t.b.cols, 0.0);
  d.g = Table(t.b.rows, t.b.cols);
  std::vector<double> col(t.b.rows);
  for (int j = 0; j < t.b.cols; ++j) {
    for (int i = 0; i < t.b.rows; ++i) col[i] = t.b(i, j);
    double lam = integrate_rows(col, t.x, 0);
    d.lambda[j] = lam;
    if (lam > 0.0)
      for (int i = 0; i < t.b.rows; ++i) d.g(i, j) = t.b(i, j) / lam;
  }
  return d;
}

DilatedTable dilate(const MeasureTable& t, double lambda) {
  if (!(lambda > 1.0 && lambda < 2.0))
    throw std::invalid_argument("dilate: lambda must lie in (1, 2)");
  if (t.x.left != 0.0 || std::abs(t.x.right - 1.0) > 1e-12)
    throw std::invalid_argument("dilate: source must live on [0, 1]");
  require_feasible(t, "dilate");
  XGrid xs = t.x;
  xs.right = lambda * t.x.right;
  xs.h = lambda * t.x.h;
  Table b = t.b;
  for (double& v : b.v) v *= lambda;
  DilatedTable out;
  out.table = make_measure_table(xs, t.k, std::move(b), t.b_min);
  out.interpolated = false;
  return out;
}

MeasureTable bin_frequencies(const MeasureTable& t, double L0, double k_max) {
  require_feasible(t, "bin_frequencies");
  if (!(L0 > 0.0)) throw std::invalid_argument("bin_frequencies: L0 must be positive");
  KGrid coarse = make_k_grid(L0, k_max, t.k.symmetric);
  double d = coarse.spacing();

  // target multiple: round |k| up to the comb, ties staying in place
  std::vector<int> dest(t.k.k.size());
  for (std::size_t j = 0; j < t.k.k.size(); ++j) {
    double kk = t.k.k[j];
    int mag = static_cast<int>(std::ceil(std::abs(kk) / d - 1e-9));
    int signed_mult = kk > 0 ? mag : -mag;
    int col = coarse.col_of(signed_mult);
    if (col < 0) {
      bool has_mass = false;
      for (int i = 0; i < t.b.rows && !has_mass; ++i) has_mass = t.b(i, j) != 0.0;
      if (has_mass)
        throw std::invalid_argument("bin_frequencies: support extends beyond k_max");
    }
    dest[j] = col;
  }

  Table b(t.b.rows, static_cast<int>(coarse.k.size()));
  for (int i = 0; i < t.b.rows; ++i)
    for (int j = 0; j < t.b.cols; ++j)
      if (dest[j] >= 0) b(i, dest[j]) += t.b(i, j);
  return make_measure_table(t.x, coarse, std::move(b), t.b_min);
}

}  // namespace wrinkle
