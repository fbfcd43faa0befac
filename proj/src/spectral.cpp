#include "wrinkle/spectral.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace wrinkle {

namespace {

// Signed multiple of pi/L0 represented by k, or throws when k is not a
// harmonic of the sample period.
int harmonic_index(double k, double L0) {
  double raw = k * L0 / std::numbers::pi;
  double near = std::round(raw);
  if (std::abs(raw - near) > 1e-9 || near == 0.0)
    throw std::invalid_argument("spectral: frequency is not a harmonic of the sample period");
  return static_cast<int>(near);
}

void check_resolution(const KGrid& k, const YGrid& y) {
  int top = 0;
  for (double kk : k.k) top = std::max(top, std::abs(harmonic_index(kk, y.L0)));
  if (y.m <= 2 * top)
    throw std::invalid_argument("spectral: sample count cannot resolve the band");
}

}  // namespace

FieldSamples synthesize(const CoefficientSet& c, const YGrid& y) {
  if (c.a.rows != c.x.n || c.a.cols != static_cast<int>(c.k.k.size()))
    throw std::invalid_argument("synthesize: coefficient shape mismatch");
  if (!c.a0.empty() && static_cast<int>(c.a0.size()) != c.x.n)
    throw std::invalid_argument("synthesize: zero-mode length mismatch");
  check_resolution(c.k, y);

  int nk = c.a.cols;
  // basis(j, i) = sqrt(2) sin or cos at sample i for column j
  Table basis(nk, y.m);
  const double r2 = std::numbers::sqrt2;
  for (int j = 0; j < nk; ++j) {
    double kk = c.k.k[j];
    for (int i = 0; i < y.m; ++i) {
      double phase = std::abs(kk) * y.node(i);
      basis(j, i) = kk > 0 ? r2 * std::sin(phase) : r2 * std::cos(phase);
    }
  }

  FieldSamples f;
  f.x = c.x;
  f.y = y;
  f.u = Table(c.x.n, y.m);
  parallel_rows(c.x.n, [&](int r) {
    for (int i = 0; i < y.m; ++i) {
      double acc = c.zero_mode(r);
      for (int j = 0; j < nk; ++j) acc += c.a(r, j) * basis(j, i);
      f.u(r, i) = acc;
    }
  });
  return f;
}

CoefficientSet analyze(const FieldSamples& f, const KGrid& k) {
  if (f.u.rows != f.x.n || f.u.cols != f.y.m)
    throw std::invalid_argument("analyze: sample shape mismatch");
  check_resolution(k, f.y);

  int nk = static_cast<int>(k.k.size());
  Table basis(nk, f.y.m);
  const double r2 = std::numbers::sqrt2;
  for (int j = 0; j < nk; ++j) {
    double kk = k.k[j];
    for (int i = 0; i < f.y.m; ++i) {
      double phase = std::abs(kk) * f.y.node(i);
      basis(j, i) = kk > 0 ? r2 * std::sin(phase) : r2 * std::cos(phase);
    }
  }

  CoefficientSet c;
  c.x = f.x;
  c.k = k;
  c.a = Table(f.x.n, nk);
  c.a0.assign(f.x.n, 0.0);
  parallel_rows(f.x.n, [&](int r) {
    double inv_m = 1.0 / f.y.m;
    double mean = 0.0;
    for (int i = 0; i < f.y.m; ++i) mean += f.u(r, i);
    c.a0[r] = mean * inv_m;
    for (int j = 0; j < nk; ++j) {
      double acc = 0.0;
      for (int i = 0; i < f.y.m; ++i) acc += f.u(r, i) * basis(j, i);
      c.a(r, j) = acc * inv_m;
    }
  });
  return c;
}

std::vector<double> plancherel_norm(const CoefficientSet& c, int order) {
  if (order < 0) throw std::invalid_argument("plancherel_norm: negative order");
  std::vector<double> out(c.a.rows, 0.0);
  for (int r = 0; r < c.a.rows; ++r) {
    double acc = order == 0 ? c.zero_mode(r) * c.zero_mode(r) : 0.0;
    for (int j = 0; j < c.a.cols; ++j) {
      double w = c.a(r, j);
      double scale = std::pow(std::abs(c.k.k[j]), order);
      acc += w * scale * w * scale;
    }
    out[r] = acc;
  }
  return out;
}

CoefficientSet y_derivative(const CoefficientSet& c) {
  if (!c.k.symmetric)
    throw std::invalid_argument("y_derivative: needs both signs of each frequency");
  CoefficientSet d;
  d.x = c.x;
  d.k = c.k;
  d.a = Table(c.a.rows, c.a.cols);
  // Differentiation swaps the sin and cos slots of each |k| pair:
  //   a_k sin -> +k a_k cos,  a_{-k} cos -> -k a_{-k} sin.
  for (int j = 1; j <= c.k.j_max; ++j) {
    int sin_col = c.k.col_of(j), cos_col = c.k.col_of(-j);
    double kk = j * c.k.spacing();
    for (int r = 0; r < c.a.rows; ++r) {
      d.a(r, cos_col) = kk * c.a(r, sin_col);
      d.a(r, sin_col) = -kk * c.a(r, cos_col);
    }
  }
  return d;
}

CoefficientSet x_derivative(const CoefficientSet& c) {
  CoefficientSet d;
  d.x = c.x;
  d.k = c.k;
  d.a = diff_x(c.a, c.x);
  if (!c.a0.empty()) d.a0 = diff_x(std::span<const double>(c.a0), c.x);
  return d;
}

}  // namespace wrinkle
