#include "wrinkle/grids.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace wrinkle {

namespace {
constexpr double kIndexSlack = 1e-9;  // admits k_max that is itself a multiple
}

double KGrid::spacing() const { return std::numbers::pi / L_eff; }

int KGrid::multiple(int col) const {
  if (!symmetric) return col + 1;
  return col < j_max ? col - j_max : col - j_max + 1;
}

int KGrid::col_of(int j) const {
  if (j == 0) return -1;
  if (!symmetric) return (j >= 1 && j <= j_max) ? j - 1 : -1;
  if (j < 0) return -j <= j_max ? j + j_max : -1;
  return j <= j_max ? j_max + j - 1 : -1;
}

XGrid make_x_grid(int n, double left, double right) {
  if (n < 1) throw std::invalid_argument("make_x_grid: need at least one node");
  if (!(right > left)) throw std::invalid_argument("make_x_grid: empty interval");
  XGrid g;
  g.left = left;
  g.right = right;
  g.n = n;
  g.h = (right - left) / n;
  return g;
}

KGrid make_k_grid(double L_eff, double k_max, bool symmetric) {
  if (!(L_eff > 0.0)) throw std::invalid_argument("make_k_grid: L_eff must be positive");
  if (!(k_max > 0.0)) throw std::invalid_argument("make_k_grid: k_max must be positive");
  int j_max = static_cast<int>(std::floor(k_max * L_eff / std::numbers::pi + kIndexSlack));
  if (j_max < 1) throw std::invalid_argument("make_k_grid: no frequency below k_max");
  KGrid g;
  g.L_eff = L_eff;
  g.k_max = k_max;
  g.symmetric = symmetric;
  g.j_max = j_max;
  double d = g.spacing();
  if (symmetric) {
    g.k.reserve(2 * static_cast<std::size_t>(j_max));
    for (int j = -j_max; j <= -1; ++j) g.k.push_back(j * d);
    for (int j = 1; j <= j_max; ++j) g.k.push_back(j * d);
  } else {
    g.k.reserve(j_max);
    for (int j = 1; j <= j_max; ++j) g.k.push_back(j * d);
  }
  return g;
}

YGrid make_y_grid(double L0, int m) {
  if (!(L0 > 0.0)) throw std::invalid_argument("make_y_grid: L0 must be positive");
  if (m < 2 || m % 2 != 0) throw std::invalid_argument("make_y_grid: m must be even and >= 2");
  YGrid g;
  g.L0 = L0;
  g.m = m;
  g.dy = 2.0 * L0 / m;
  return g;
}

std::vector<double> diff_x(std::span<const double> v, const XGrid& g) {
  if (static_cast<int>(v.size()) != g.n) throw std::invalid_argument("diff_x: size mismatch");
  std::vector<double> d(v.size());
  if (g.n == 0) return d;
  if (g.left == 0.0) {
    d[0] = v[0] / g.h;  // ghost zero at the excluded boundary node
  } else {
    d[0] = g.n > 1 ? (v[1] - v[0]) / g.h : 0.0;
  }
  for (int i = 1; i < g.n; ++i) d[i] = (v[i] - v[i - 1]) / g.h;
  return d;
}

Table diff_x(const Table& t, const XGrid& g) {
  if (t.rows != g.n) throw std::invalid_argument("diff_x: table rows mismatch");
  Table d(t.rows, t.cols);
  if (t.rows == 0) return d;
  for (int j = 0; j < t.cols; ++j) {
    if (g.left == 0.0) {
      d(0, j) = t(0, j) / g.h;
    } else {
      d(0, j) = t.rows > 1 ? (t(1, j) - t(0, j)) / g.h : 0.0;
    }
  }
  for (int i = 1; i < t.rows; ++i)
    for (int j = 0; j < t.cols; ++j) d(i, j) = (t(i, j) - t(i - 1, j)) / g.h;
  return d;
}

double trapezoid(std::span<const double> v, const XGrid& g, double left_val) {
  if (static_cast<int>(v.size()) != g.n) throw std::invalid_argument("trapezoid: size mismatch");
  if (g.n == 0) return 0.0;
  double acc = 0.5 * (left_val + v[g.n - 1]);
  for (int i = 0; i + 1 < g.n; ++i) acc += v[i];
  return acc * g.h;
}

double open_trapezoid(std::span<const double> v, const XGrid& g, int i0) {
  if (static_cast<int>(v.size()) != g.n)
    throw std::invalid_argument("open_trapezoid: size mismatch");
  int n = g.n;
  if (i0 < 0 || i0 > n) throw std::invalid_argument("open_trapezoid: bad start index");
  if (i0 >= n) return 0.0;
  double left;
  if (i0 > 0) left = v[i0 - 1];
  else left = n >= 2 ? 2.0 * v[0] - v[1] : v[0];
  double acc = 0.5 * (left + v[n - 1]);
  for (int i = i0; i + 1 < n; ++i) acc += v[i];
  return acc * g.h;
}

std::vector<double> open_weights(const XGrid& g) {
  std::vector<double> w(g.n, g.h);
  if (g.n == 1) {
    w[0] = g.h;
    return w;
  }
  w[0] = 2.0 * g.h;
  w[1] = g.n == 2 ? 0.0 : 0.5 * g.h;
  w[g.n - 1] = g.n == 2 ? 0.0 : 0.5 * g.h;
  return w;
}

double trapezoid_upto(std::span<const double> v, const XGrid& g, double left_val, double z) {
  if (static_cast<int>(v.size()) != g.n) throw std::invalid_argument("trapezoid_upto: size mismatch");
  double tol = 1e-12 * (std::abs(g.right) + std::abs(g.left) + 1.0);
  int last = -1;
  for (int i = 0; i < g.n; ++i) {
    if (g.node(i) <= z + tol) last = i;
    else break;
  }
  if (last < 0) return 0.0;
  double acc = 0.5 * (left_val + v[last]);
  for (int i = 0; i < last; ++i) acc += v[i];
  return acc * g.h;
}

std::vector<double> cumtrapz(std::span<const double> v, const XGrid& g, double left_val) {
  if (static_cast<int>(v.size()) != g.n) throw std::invalid_argument("cumtrapz: size mismatch");
  std::vector<double> c(v.size());
  if (g.n == 0) return c;
  c[0] = 0.5 * g.h * (left_val + v[0]);
  for (int i = 1; i < g.n; ++i) c[i] = c[i - 1] + 0.5 * g.h * (v[i - 1] + v[i]);
  return c;
}

double rectangle_mean(std::span<const double> v, const YGrid& g) {
  if (static_cast<int>(v.size()) != g.m) throw std::invalid_argument("rectangle_mean: size mismatch");
  double acc = 0.0;
  for (double x : v) acc += x;
  return acc / g.m;
}

}  // namespace wrinkle
