#include "wrinkle/recovery.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace wrinkle {

namespace {

void require_feasible(const MeasureTable& t, const char* who) {
  auto rep = check_feasible(t, 1e-8);
  if (!rep.feasible) throw std::invalid_argument(std::string(who) + ": infeasible table");
}

// Mollified unit ramp and its derivative: the convolution of z^+ with the
// exponential kernel. Every piecewise-linear profile is a jump combination
// of shifted copies, which is what makes the closed form below exact.
double ramp_smooth(double z, double eps) {
  if (z > 0.0) return z + 0.5 * eps * std::exp(-z / eps);
  return 0.5 * eps * std::exp(z / eps);
}

double ramp_smooth_dx(double z, double eps) {
  if (z > 0.0) return 1.0 - 0.5 * std::exp(-z / eps);
  return 0.5 * std::exp(z / eps);
}

// Spectral antiderivative with zero mean: inverts the sin/cos slot swap of
// y_derivative. The input must carry no zero mode.
CoefficientSet antidifferentiate(const CoefficientSet& c) {
  CoefficientSet p;
  p.x = c.x;
  p.k = c.k;
  p.a = Table(c.a.rows, c.a.cols);
  for (int j = 1; j <= c.k.j_max; ++j) {
    int sin_col = c.k.col_of(j), cos_col = c.k.col_of(-j);
    double kk = j * c.k.spacing();
    for (int r = 0; r < c.a.rows; ++r) {
      p.a(r, sin_col) = c.a(r, cos_col) / kk;
      p.a(r, cos_col) = -c.a(r, sin_col) / kk;
    }
  }
  return p;
}

}  // namespace

double cutoff_step(double x, double delta) {
  double t = (x - delta) / delta;
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  return t * t * t * (10.0 + t * (6.0 * t - 15.0));
}

double cutoff_step_dx(double x, double delta) {
  double t = (x - delta) / delta;
  if (t <= 0.0 || t >= 1.0) return 0.0;
  double u = t * (1.0 - t);
  return 30.0 * u * u / delta;
}

double omega_modulus(const MeasureTable& t, double z) {
  if (z < 0.0) throw std::invalid_argument("omega_modulus: negative endpoint");
  require_feasible(t, "omega_modulus");
  std::vector<double> d(t.x.n, 0.0);
  for (int i = 0; i < t.x.n; ++i) {
    double acc = 0.0;
    for (int j = 0; j < t.b.cols; ++j) {
      double b = t.b(i, j), bx = t.b_x(i, j);
      if (b == 0.0) continue;  // feasible tables carry no slope on empty cells
      acc += bx * bx / (4.0 * t.k.k[j] * t.k.k[j] * b);
    }
    d[i] = acc;
  }
  double tol = 1e-12 * (std::abs(t.x.right) + 1.0);
  double acc = 0.0;
  for (int i = 1; i < t.x.n && t.x.node(i) <= z + tol; ++i)
    acc += 0.5 * t.x.h * (d[i - 1] + d[i]);
  return acc;
}

RecoveryParams schedule_parameters(const MeasureTable& t, double L) {
  if (!(L > 0.0)) throw std::invalid_argument("schedule_parameters: L must be positive");
  int m_top = static_cast<int>(std::floor(std::sqrt(L) + 1e-9));
  double l23 = std::pow(L, -2.0 / 3.0);
  int M = 0;
  for (int cand = m_top; cand >= 2; --cand) {
    if (omega_modulus(t, 2.0 * cand * cand * l23) <= 1.0 / cand + 1e-15) {
      M = cand;
      break;
    }
  }
  if (M == 0)
    throw std::invalid_argument(
        "schedule_parameters: no admissible smoothing index; L too small for this table");
  RecoveryParams p;
  p.L = L;
  p.M = M;
  p.eps = l23 * std::pow(static_cast<double>(M), 7.0 / 8.0);
  if (p.eps >= 1.0)
    throw std::invalid_argument("schedule_parameters: smoothing scale reaches 1; L too small");
  p.delta = p.eps / M;
  p.lambda = 1.0 + std::sqrt(p.eps);
  double cell = std::pow(static_cast<double>(M), 1.0 / 8.0);
  p.n = static_cast<int>(std::floor(L / cell + 1e-12));
  if (p.n < 1) throw std::invalid_argument("schedule_parameters: no whole cell fits");
  p.L0 = L / p.n;
  if (!(p.L0 >= cell * (1.0 - 1e-12) && p.L0 < 2.0 * cell))
    throw std::invalid_argument("schedule_parameters: cell width left its admissible window");
  return p;
}

std::pair<MeasureTable, double> truncate_table(const MeasureTable& t, double lambda) {
  require_feasible(t, "truncate_table");
  if (std::abs(t.x.right - lambda) > 1e-9 * (1.0 + lambda))
    throw std::invalid_argument("truncate_table: table must end at the stretch factor");
  double lo = 0.5 * (lambda + 1.0);
  double tol = 1e-12 * (1.0 + lambda);
  std::vector<double> moment(t.x.n, 0.0);
  for (int i = 0; i < t.x.n; ++i) {
    double acc = 0.0;
    for (int j = 0; j < t.b.cols; ++j) acc += t.b(i, j) * t.k.k[j] * t.k.k[j];
    moment[i] = acc;
  }
  double avg = 0.0;
  int count = 0;
  for (int i = 0; i < t.x.n; ++i) {
    double x = t.x.node(i);
    if (x > lo + tol && x < lambda - tol) {
      avg += moment[i];
      ++count;
    }
  }
  if (count == 0) throw std::invalid_argument("truncate_table: no grid node inside the cut window");
  avg /= count;
  int bar = -1;
  for (int i = 0; i < t.x.n; ++i) {
    double x = t.x.node(i);
    if (x > lo + tol && x < lambda - tol && moment[i] <= avg + 1e-12 * std::abs(avg)) {
      bar = i;
      break;
    }
  }
  if (bar < 0) throw std::invalid_argument("truncate_table: no node at or below the window average");
  Table b = t.b;
  for (int i = bar + 1; i < t.x.n; ++i)
    for (int j = 0; j < b.cols; ++j) b(i, j) = b(bar, j);
  return {make_measure_table(t.x, t.k, std::move(b), t.b_min), t.x.node(bar)};
}

CoefficientTable mollify(const MeasureTable& t, double eps, const XGrid& out) {
  if (!(eps > 0.0)) throw std::invalid_argument("mollify: kernel scale must be positive");
  if (t.x.left != 0.0) throw std::invalid_argument("mollify: table must start at the origin");
  int n = t.x.n, nk = t.b.cols;
  double h = t.x.h;

  CoefficientTable c;
  c.x = out;
  c.k = t.k;
  c.a = Table(out.n, nk);
  c.a_x = Table(out.n, nk);

  // Per column: slope jumps of the piecewise-linear profile through (0, 0)
  // and the nodes, flattened past the last node. The profile is the jump
  // sum of shifted unit ramps, so its kernel average is the same sum over
  // ramp_smooth.
  std::vector<double> pos, jump;
  for (int j = 0; j < nk; ++j) {
    pos.clear();
    jump.clear();
    double s_prev = 0.0;
    for (int i = 0; i < n; ++i) {
      double below = i == 0 ? 0.0 : t.b(i - 1, j);
      double s = (t.b(i, j) - below) / h;
      if (s != s_prev) {
        pos.push_back(t.x.left + i * h);
        jump.push_back(s - s_prev);
      }
      s_prev = s;
    }
    if (s_prev != 0.0) {
      pos.push_back(t.x.node(n - 1));
      jump.push_back(-s_prev);
    }
    int terms = static_cast<int>(pos.size());
    for (int r = 0; r < out.n; ++r) {
      double x = out.node(r);
      double a = 0.0, ax = 0.0;
      for (int q = 0; q < terms; ++q) {
        double z = x - pos[q];
        a += jump[q] * ramp_smooth(z, eps);
        ax += jump[q] * ramp_smooth_dx(z, eps);
      }
      c.a(r, j) = a;
      c.a_x(r, j) = ax;
    }
  }
  return c;
}

AmplitudeProfile amplitude_profile(const CoefficientTable& c) {
  int n = c.x.n, nk = c.a.cols;
  AmplitudeProfile p;
  p.A.assign(n, 0.0);
  p.A_x.assign(n, 0.0);
  p.f.assign(n, 0.0);
  p.f_x.assign(n, 0.0);
  for (int r = 0; r < n; ++r) {
    double a = 0.0, ax = 0.0;
    for (int j = 0; j < nk; ++j) {
      a += c.a(r, j);
      ax += c.a_x(r, j);
    }
    p.A[r] = 0.5 * a;
    p.A_x[r] = 0.5 * ax;
    double x = c.x.node(r);
    if (x <= 0.0) continue;
    if (!(p.A[r] > 0.0))
      throw std::invalid_argument("amplitude_profile: nonpositive amplitude at positive x");
    p.f[r] = std::sqrt(x / p.A[r]);
    p.f_x[r] = (p.A[r] - x * p.A_x[r]) / (2.0 * p.f[r] * p.A[r] * p.A[r]);
  }
  return p;
}

OutOfPlane build_out_of_plane(const CoefficientTable& c, const AmplitudeProfile& amp,
                              const RecoveryParams& p) {
  int n = c.x.n, nk = c.a.cols;
  if (static_cast<int>(amp.f.size()) != n)
    throw std::invalid_argument("build_out_of_plane: profile length mismatch");
  double scale = 0.0;
  for (double v : c.a.v) scale = std::max(scale, std::abs(v));
  double neg_tol = 1e-12 * scale;

  OutOfPlane o;
  o.u.x = c.x;
  o.u.k = c.k;
  o.u.a = Table(n, nk);
  o.u_x = o.u;
  o.u_x.a = Table(n, nk);
  for (int r = 0; r < n; ++r) {
    double x = c.x.node(r);
    if (x <= p.delta) continue;  // cutoff kills the row exactly
    double psi = cutoff_step(x, p.delta);
    double psi_x = cutoff_step_dx(x, p.delta);
    double pf = psi * amp.f[r];
    double pf_x = psi_x * amp.f[r] + psi * amp.f_x[r];
    for (int j = 0; j < nk; ++j) {
      double a = c.a(r, j);
      if (a < 0.0) {
        if (a < -neg_tol)
          throw std::invalid_argument("build_out_of_plane: negative spectral weight");
        a = 0.0;
      }
      double sa = std::sqrt(a);
      double inv_k = 1.0 / c.k.k[j];
      o.u.a(r, j) = pf * sa * inv_k;
      o.u_x.a(r, j) = pf_x * sa * inv_k +
                      (a > 0.0 ? pf * c.a_x(r, j) / (2.0 * sa) * inv_k : 0.0);
    }
  }
  return o;
}

InPlane build_in_plane(const OutOfPlane& oop, const RecoveryParams& p, int y_oversample) {
  const XGrid& xg = oop.u.x;
  const KGrid& kg = oop.u.k;
  int nx = xg.n, nk = oop.u.a.cols;
  if (y_oversample < 5)
    throw std::invalid_argument("build_in_plane: oversampling below product band");
  if (std::abs(kg.L_eff - p.L0) > 1e-9 * p.L0)
    throw std::invalid_argument("build_in_plane: coefficient comb does not match the cell");
  if (nx % 2 != 0 || std::abs(xg.node(nx / 2 - 1)) > 1e-12)
    throw std::invalid_argument("build_in_plane: field grid must contain x = 0");

  int j_top = kg.j_max;
  int m = 32;
  while (m < y_oversample * j_top) m *= 2;
  YGrid y = make_y_grid(p.L0, m);
  double spacing = kg.spacing();
  KGrid ks1 = make_k_grid(p.L0, (j_top + 0.5) * spacing, true);
  KGrid ks2 = make_k_grid(p.L0, (2 * j_top + 0.5) * spacing, true);

  // u_,y carries cos components, u_,x sin components of the same band.
  CoefficientSet uy_set, ux_set;
  uy_set.x = xg;
  uy_set.k = ks1;
  uy_set.a = Table(nx, static_cast<int>(ks1.k.size()));
  ux_set = uy_set;
  ux_set.a = Table(nx, static_cast<int>(ks1.k.size()));
  for (int j = 0; j < nk; ++j) {
    int jm = kg.multiple(j);
    int cos_col = ks1.col_of(-jm), sin_col = ks1.col_of(jm);
    double kk = kg.k[j];
    for (int r = 0; r < nx; ++r) {
      uy_set.a(r, cos_col) = kk * oop.u.a(r, j);
      ux_set.a(r, sin_col) = oop.u_x.a(r, j);
    }
  }
  Table UY = synthesize(uy_set, y).u;
  Table UX = synthesize(ux_set, y).u;

  // (u_,y)^2 and u_,x u_,y: row means ride on the linear-in-y part of the
  // cumulative, the rest goes through the band-2 antiderivative.
  Table SQ(nx, m), XY(nx, m);
  std::vector<double> dc_sq(nx), dc_xy(nx);
  for (int r = 0; r < nx; ++r) {
    double acc_s = 0.0, acc_m = 0.0;
    for (int i = 0; i < m; ++i) {
      double s = UY(r, i) * UY(r, i);
      double w = UX(r, i) * UY(r, i);
      SQ(r, i) = s;
      XY(r, i) = w;
      acc_s += s;
      acc_m += w;
    }
    dc_sq[r] = acc_s / m;
    dc_xy[r] = acc_m / m;
  }
  Table SQ0 = SQ;
  for (int r = 0; r < nx; ++r)
    for (int i = 0; i < m; ++i) SQ0(r, i) -= dc_sq[r];
  Table P_sq = synthesize(antidifferentiate(analyze({xg, y, std::move(SQ0)}, ks2)), y).u;

  int i_zero_y = m / 2;          // y node at 0 exactly
  int i_zero_x = nx / 2 - 1;     // x node at 0 exactly

  // Cross-term mean offset: minus the running x-integral of the cell
  // average of u_,x u_,y, taken from the origin.
  std::vector<double> cum = cumtrapz(std::span<const double>(dc_xy), xg, 0.0);
  std::vector<double> B(nx);
  InPlane out;
  out.y = y;
  out.w1 = Table(nx, m);
  out.w2 = Table(nx, m);
  out.w2_defect.assign(nx, 0.0);
  out.w1_defect.assign(nx, 0.0);
  for (int r = 0; r < nx; ++r) {
    double x = xg.node(r);
    double psi = cutoff_step(x, p.delta);
    double sec = psi * psi * x - 0.5 * dc_sq[r];  // linear-in-y coefficient
    double b2 = -(cum[r] - cum[i_zero_x]);
    B[r] = -0.5 * P_sq(r, i_zero_y) + b2;
    for (int i = 0; i < m; ++i)
      out.w2(r, i) = sec * y.node(i) - 0.5 * P_sq(r, i) + b2;
    out.w2_defect[r] = std::abs(2.0 * p.L0 * sec);
  }
  out.B = std::move(B);

  // w1 absorbs the same difference quotient of w2 the energy terms use, so
  // the two sides of the shear integrand agree sample by sample.
  Table W2X = diff_x(out.w2, xg);
  Table Q(nx, m);
  std::vector<double> dc_q(nx);
  for (int r = 0; r < nx; ++r) {
    double acc = 0.0;
    for (int i = 0; i < m; ++i) {
      double q = W2X(r, i) + XY(r, i);
      Q(r, i) = q;
      acc += q;
    }
    dc_q[r] = acc / m;
    for (int i = 0; i < m; ++i) Q(r, i) -= dc_q[r];
  }
  Table P_q = synthesize(antidifferentiate(analyze({xg, y, std::move(Q)}, ks2)), y).u;
  double inv_l2 = 1.0 / (p.L * p.L);
  for (int r = 0; r < nx; ++r) {
    double x = xg.node(r);
    double p0 = P_q(r, i_zero_y);
    for (int i = 0; i < m; ++i)
      out.w1(r, i) = x - inv_l2 * (dc_q[r] * y.node(i) + P_q(r, i) - p0);
    out.w1_defect[r] = std::abs(2.0 * p.L0 * dc_q[r] * inv_l2);
  }
  return out;
}

DisplacementField build_recovery(const MeasureTable& t, double L, const RecoveryOptions& opts) {
  if (opts.nx_field < 4 || opts.nx_field % 2 != 0)
    throw std::invalid_argument("build_recovery: field resolution must be even and at least 4");
  RecoveryParams p = schedule_parameters(t, L);
  DilatedTable d = dilate(t, p.lambda);
  double k_cover = t.k.k_max + std::numbers::pi / p.L0 * (1.0 + 1e-9);
  MeasureTable binned = bin_frequencies(d.table, p.L0, k_cover);
  auto [frozen, bar] = truncate_table(binned, p.lambda);
  p.lambda_bar = bar;

  XGrid xg = make_x_grid(opts.nx_field, -1.0, 1.0);
  DisplacementField field;
  field.params = p;
  field.a = mollify(frozen, p.eps, xg);
  AmplitudeProfile amp = amplitude_profile(field.a);
  OutOfPlane oop = build_out_of_plane(field.a, amp, p);
  InPlane ip = build_in_plane(oop, p, opts.y_oversample);

  field.A = std::move(amp.A);
  field.f = std::move(amp.f);
  field.u = std::move(oop.u);
  field.u_x = std::move(oop.u_x);
  field.y = ip.y;
  field.w1 = std::move(ip.w1);
  field.w2 = std::move(ip.w2);
  field.B = std::move(ip.B);
  field.w1_defect = std::move(ip.w1_defect);
  field.w2_defect = std::move(ip.w2_defect);
  return field;
}

}  // namespace wrinkle
