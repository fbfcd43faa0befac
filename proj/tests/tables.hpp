#pragma once

// Handcrafted feasible competitor tables for the minimizer's upper-bound
// checks. Each builder returns a table with exact row sums 2 x_i whose
// live columns stay strictly positive over the whole domain (a cell that
// died mid-column would carry slope on a zero and evaluate to +inf), so
// every candidate has a finite floor-free energy the solver must beat.

#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "wrinkle/grids.hpp"
#include "wrinkle/measure.hpp"

namespace candidates {

// Row-wise mix: b(i, j) = 2 x_i * weight(x_i, k_j), normalized exactly.
// Weights below wfloor are lifted so no column dies anywhere.
inline wrinkle::MeasureTable mix_table(
    const wrinkle::XGrid& x, const wrinkle::KGrid& k,
    const std::function<double(double, double)>& weight, double wfloor = 1e-8) {
  int nk = static_cast<int>(k.k.size());
  wrinkle::Table b(x.n, nk);
  for (int i = 0; i < x.n; ++i) {
    double xi = x.node(i);
    double row = 0.0;
    for (int j = 0; j < nk; ++j) {
      double w = std::max(weight(xi, k.k[j]), wfloor);
      b(i, j) = w;
      row += w;
    }
    double scale = 2.0 * xi / row;
    for (int j = 0; j < nk; ++j) b(i, j) *= scale;
  }
  return wrinkle::make_measure_table(x, k, std::move(b));
}

// Ten competitors spanning the shapes a minimizer could plausibly take:
// single frequencies low and high, flat and peaked mixes, and profiles
// that chase the pointwise balance frequency across x.
inline std::vector<std::pair<std::string, wrinkle::MeasureTable>>
gallery(const wrinkle::XGrid& x, const wrinkle::KGrid& k) {
  std::vector<std::pair<std::string, wrinkle::MeasureTable>> out;
  auto add = [&](const char* name,
                 const std::function<double(double, double)>& w) {
    out.emplace_back(name, mix_table(x, k, w));
  };
  double k_lo = std::abs(k.k.front());
  double k_hi = k_lo;
  for (double kk : k.k) {
    k_lo = std::min(k_lo, std::abs(kk));
    k_hi = std::max(k_hi, std::abs(kk));
  }

  add("single low comb point", [&](double, double kk) {
    return std::abs(std::abs(kk) - 3.0 * k_lo) < 1e-9 ? 1.0 : 0.0;
  });
  add("single mid comb point", [&](double, double kk) {
    return std::abs(std::abs(kk) - 8.0 * k_lo) < 1e-9 ? 1.0 : 0.0;
  });
  add("two adjacent points", [&](double, double kk) {
    double m = std::abs(kk) / k_lo;
    return (std::abs(m - 3.0) < 1e-9 || std::abs(m - 5.0) < 1e-9) ? 1.0 : 0.0;
  });
  add("uniform mix", [](double, double) { return 1.0; });
  add("low band", [&](double, double kk) {
    return std::abs(kk) <= 8.0 * k_lo + 1e-9 ? 1.0 : 0.0;
  });
  add("soft gaussian mix", [](double, double kk) {
    double d = (std::abs(kk) - 7.0) / 1.5;
    return std::exp(-0.5 * d * d);
  });
  add("exponential low tilt",
      [](double, double kk) { return std::exp(-std::abs(kk)); });
  add("balance tracker", [](double xx, double kk) {
    double kstar = 1.0 / std::sqrt(2.0 * xx);
    double d = std::abs(kk) - kstar;
    return std::exp(-d * d);
  });
  add("wide tracker", [](double xx, double kk) {
    double kstar = 1.0 / std::sqrt(2.0 * xx);
    double d = (std::abs(kk) - kstar) / 3.0;
    return std::exp(-d * d);
  });
  add("logistic handover", [&](double xx, double kk) {
    // high comb point for small x handing over to a low one
    double s = 1.0 / (1.0 + std::exp((xx - 0.05) / 0.02));
    double m = std::abs(kk) / k_lo;
    double hi = std::abs(std::abs(kk) - 0.9 * k_hi) < k_lo ? 1.0 : 0.0;
    double lo = std::abs(m - 3.0) < 1e-9 ? 1.0 : 0.0;
    return s * hi + (1.0 - s) * lo;
  });
  return out;
}

}  // namespace candidates
