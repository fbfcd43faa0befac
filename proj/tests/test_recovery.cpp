#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "wrinkle/recovery.hpp"
#include "tables.hpp"

using namespace wrinkle;

namespace {

// b = 2x concentrated in one column, on [0, right]
MeasureTable ramp_column(int nx, double right, double L_eff, int mult) {
  auto x = make_x_grid(nx, 0.0, right);
  auto k = make_k_grid(L_eff, (mult + 0.5) * std::numbers::pi / L_eff, false);
  Table b(nx, static_cast<int>(k.k.size()));
  for (int i = 0; i < nx; ++i) b(i, k.col_of(mult)) = 2.0 * x.node(i);
  return make_measure_table(x, k, std::move(b));
}

MeasureTable golden(int nx = 200) {
  auto x = make_x_grid(nx, 0.0, 1.0);
  auto k = make_k_grid(8.0, 12.0, false);
  return candidates::mix_table(x, k, [](double, double kk) {
    double d = (kk - 7.0) / 1.5;
    return std::exp(-d * d);
  });
}

double row_moment(const MeasureTable& t, int r) {
  double s = 0.0;
  for (int j = 0; j < t.b.cols; ++j) s += t.b(r, j) * t.k.k[j] * t.k.k[j];
  return s;
}

}  // namespace

TEST_CASE("cutoff step is a C2 ramp with scale-free derivative bounds") {
  for (double delta : {0.05, 0.23}) {
    CHECK(cutoff_step(0.0, delta) == 0.0);
    CHECK(cutoff_step(delta, delta) == 0.0);
    CHECK(cutoff_step(2.0 * delta, delta) == 1.0);
    CHECK(cutoff_step(5.0, delta) == 1.0);
    CHECK(cutoff_step(1.5 * delta, delta) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(cutoff_step_dx(delta, delta) == 0.0);
    CHECK(cutoff_step_dx(2.0 * delta, delta) == 0.0);

    double max_d1 = 0.0, max_d2 = 0.0;
    int n = 4000;
    double prev = cutoff_step_dx(delta, delta);
    for (int i = 1; i <= n; ++i) {
      double xx = delta + i * delta / n;
      double d1 = cutoff_step_dx(xx, delta);
      max_d1 = std::max(max_d1, std::abs(d1));
      max_d2 = std::max(max_d2, std::abs(d1 - prev) / (delta / n));
      prev = d1;
      // derivative against a central difference of the step itself
      double fd = (cutoff_step(xx + 1e-6, delta) - cutoff_step(xx - 1e-6, delta)) / 2e-6;
      CHECK(d1 == doctest::Approx(fd).epsilon(1e-6));
    }
    CHECK(max_d1 <= 1.875 / delta * (1.0 + 1e-12));
    CHECK(max_d1 >= 1.8 / delta);
    CHECK(max_d2 <= 5.8 / (delta * delta));
  }
}

TEST_CASE("quotient content accumulates like the half-log of a single ramp") {
  // b = 2x at k = 1: density 1/(2x), integral from the first node h on
  auto t = ramp_column(100, 1.0, std::numbers::pi, 1);
  double h = t.x.h;
  CHECK(omega_modulus(t, 0.0) == 0.0);
  CHECK(omega_modulus(t, 0.5 * h) == 0.0);  // below the second node
  double w = omega_modulus(t, 0.5);
  CHECK(w == doctest::Approx(0.5 * std::log(0.5 / h)).epsilon(0.05));
  // nondecreasing, saturating at the domain end
  CHECK(omega_modulus(t, 0.25) <= w);
  CHECK(omega_modulus(t, 1.0) == omega_modulus(t, 50.0));
  CHECK_THROWS_AS(omega_modulus(t, -0.1), std::invalid_argument);

  // high-frequency mass carries 1/k^2 of the content
  auto t9 = ramp_column(100, 1.0, std::numbers::pi, 9);
  CHECK(omega_modulus(t9, 0.5) == doctest::Approx(w / 81.0).epsilon(1e-12));
}

TEST_CASE("schedule picks the frozen parameters on the reference table") {
  auto t = golden();
  const double eps[] = {0.4585020216, 0.5297315472, 0.4056630344, 0.3855527064};
  const double lam[] = {1.6771277735, 1.7278265914, 1.6369168191, 1.6209289060};
  const int em[] = {2, 4, 5, 8};
  const int en[] = {7, 13, 26, 49};
  const double L[] = {8.0, 16.0, 32.0, 64.0};
  for (int i = 0; i < 4; ++i) {
    auto p = schedule_parameters(t, L[i]);
    CHECK(p.M == em[i]);
    CHECK(p.n == en[i]);
    CHECK(p.eps == doctest::Approx(eps[i]).epsilon(1e-9));
    CHECK(p.delta == doctest::Approx(eps[i] / em[i]).epsilon(1e-9));
    CHECK(p.lambda == doctest::Approx(lam[i]).epsilon(1e-9));
    CHECK(p.L0 == doctest::Approx(L[i] / en[i]).epsilon(1e-14));
    CHECK(p.lambda_bar == 0.0);
    // cell size stays inside its design window
    double lo = std::pow(static_cast<double>(p.M), 0.125);
    CHECK(p.L0 >= lo);
    CHECK(p.L0 < 2.0 * lo);
  }
  // kernel scale shrinks once the sharpness index settles; the first doubling
  // still rides an index jump and goes the other way
  CHECK(schedule_parameters(t, 16.0).eps > schedule_parameters(t, 8.0).eps);
  CHECK(schedule_parameters(t, 32.0).eps < schedule_parameters(t, 16.0).eps);
  CHECK(schedule_parameters(t, 64.0).eps < schedule_parameters(t, 32.0).eps);
}

TEST_CASE("schedule rejects widths the table cannot support") {
  // sqrt(L) < 2 leaves no candidate index at all
  CHECK_THROWS_AS(schedule_parameters(golden(), 2.0), std::invalid_argument);
  // a low-frequency ramp has too much quotient content for every candidate
  auto t = ramp_column(200, 1.0, std::numbers::pi, 1);
  CHECK_THROWS_AS(schedule_parameters(t, 8.0), std::invalid_argument);
}

TEST_CASE("freeze point lands on the first window node when moments rise") {
  auto t = ramp_column(280, 1.4, std::numbers::pi, 1);
  auto [out, bar] = truncate_table(t, 1.4);
  // window is (1.2, 1.4); first strict node of the h = 0.005 grid is 1.205
  CHECK(bar == doctest::Approx(1.205).epsilon(1e-13));
  int i_bar = static_cast<int>(std::llround(bar / t.x.h)) - 1;
  CHECK(out.x.node(i_bar) == doctest::Approx(bar).epsilon(1e-14));
  // rows before the freeze are untouched, rows after replicate the bar row
  for (int i = 0; i < out.x.n; ++i)
    for (int j = 0; j < out.b.cols; ++j)
      CHECK(out.b(i, j) == t.b(std::min(i, i_bar), j));
  // rebuilt slopes vanish strictly past the freeze
  for (int i = i_bar + 2; i < out.x.n; ++i)
    for (int j = 0; j < out.b.cols; ++j) CHECK(out.b_x(i, j) == 0.0);
}

TEST_CASE("freeze point respects the node-average rule when moments fall") {
  // mass drifts from k = 3 to k = 1 as x grows, so the second moment peaks
  // before the window and decreases across it
  auto x = make_x_grid(280, 0.0, 1.4);
  auto k = make_k_grid(std::numbers::pi, 3.5, false);
  Table b(280, static_cast<int>(k.k.size()));
  for (int i = 0; i < 280; ++i) {
    double xx = x.node(i), w = 0.999 * xx / 1.4;  // keeps both columns alive
    b(i, k.col_of(1)) = 2.0 * xx * w;
    b(i, k.col_of(3)) = 2.0 * xx * (1.0 - w);
  }
  auto t = make_measure_table(x, k, std::move(b));
  auto [out, bar] = truncate_table(t, 1.4);
  CHECK(bar > 1.205 + 1e-12);  // not the first node this time
  // contract: bar is the smallest window node at or below the window average
  double lo = 1.2, hi = 1.4, avg = 0.0;
  int cnt = 0;
  for (int i = 0; i < x.n; ++i) {
    double xx = x.node(i);
    if (xx > lo + 1e-9 && xx < hi - 1e-9) {
      avg += row_moment(t, i);
      ++cnt;
    }
  }
  avg /= cnt;
  for (int i = 0; i < x.n; ++i) {
    double xx = x.node(i);
    if (xx <= lo + 1e-9 || xx >= hi - 1e-9) continue;
    if (xx < bar - 1e-12) CHECK(row_moment(t, i) > avg);
  }
  int i_bar = -1;
  for (int i = 0; i < x.n; ++i)
    if (std::abs(x.node(i) - bar) < 1e-12) i_bar = i;
  REQUIRE(i_bar >= 0);
  CHECK(row_moment(t, i_bar) <= avg * (1.0 + 1e-12));

  // a grid too coarse to put a node inside the window is rejected
  auto tc = ramp_column(4, 1.4, std::numbers::pi, 1);
  CHECK_THROWS_AS(truncate_table(tc, 1.4), std::invalid_argument);
}

TEST_CASE("kernel averaging reproduces the closed form of a frozen ramp") {
  // truncated ramp: 2z up to the freeze point, constant after. Its kernel
  // average has the exact form 2 x+ + eps (e^{-|x|/eps} - e^{(x-bar)/eps}).
  auto t = ramp_column(280, 1.4, std::numbers::pi, 1);
  auto [tr, bar] = truncate_table(t, 1.4);
  auto out = make_x_grid(800, -1.0, 1.0);
  for (double eps : {0.02, 0.05, 0.1}) {
    auto a = mollify(tr, eps, out);
    REQUIRE(a.a.cols == tr.b.cols);
    int j = tr.k.col_of(1);
    for (int i = 0; i < out.n; ++i) {
      double xx = out.node(i);
      double expect = 2.0 * std::max(xx, 0.0) +
                      eps * (std::exp(-std::abs(xx) / eps) - std::exp((xx - bar) / eps));
      double expect_dx = (xx > 0.0 ? 2.0 : 0.0) -
                         (xx > 0.0 ? 1.0 : -1.0) * std::exp(-std::abs(xx) / eps) -
                         std::exp((xx - bar) / eps);
      CHECK(std::abs(a.a(i, j) - expect) <= 1e-12);
      CHECK(std::abs(a.a_x(i, j) - expect_dx) <= 1e-12);
    }
  }
  CHECK_THROWS_AS(mollify(tr, 0.0, out), std::invalid_argument);
  CHECK_THROWS_AS(mollify(ramp_column(10, 1.0, 2.0, 1), -0.1, out), std::invalid_argument);
}

TEST_CASE("kernel averaging keeps zero columns zero and flats flat inside") {
  auto x = make_x_grid(100, 0.0, 1.0);
  auto k = make_k_grid(2.0, 3.5, false);
  Table b(100, static_cast<int>(k.k.size()));
  double c = 0.73;
  for (int i = 0; i < 100; ++i) b(i, 0) = c;  // flat column, rest zero
  Table bx(100, static_cast<int>(k.k.size()));
  auto t = make_measure_table(x, k, std::move(b), std::move(bx), 0.0);
  auto out = make_x_grid(400, -1.0, 1.0);
  auto a = mollify(t, 0.02, out);
  for (int i = 0; i < out.n; ++i) {
    for (int j = 1; j < a.a.cols; ++j) CHECK(a.a(i, j) == 0.0);
    double xx = out.node(i);
    // far from the initial climb the average returns the constant
    if (xx > 0.3 && xx < 1.0) CHECK(std::abs(a.a(i, 0) - c) <= c * std::exp(-10.0));
  }
}

TEST_CASE("amplitude normalizer stays within its kernel-width envelopes") {
  auto t = ramp_column(280, 1.4, std::numbers::pi, 1);
  auto [tr, bar] = truncate_table(t, 1.4);
  auto out = make_x_grid(800, -1.0, 1.0);
  double eps = 0.02;
  auto a = mollify(tr, eps, out);
  auto amp = amplitude_profile(a);
  for (int i = 0; i < out.n; ++i) {
    double xx = out.node(i);
    if (xx <= 0.0) {
      CHECK(amp.f[i] == 0.0);
      CHECK(amp.f_x[i] == 0.0);
      continue;
    }
    double f2 = amp.f[i] * amp.f[i];
    // exact cap from the closed-form row sum
    double cap = xx / (xx + 0.5 * eps * (std::exp(-xx / eps) - std::exp((xx - bar) / eps)));
    CHECK(f2 <= cap * (1.0 + 1e-10));
    // small-kernel envelopes: global cap 1 + eps/8, floor past ten widths
    CHECK(f2 <= 1.0 + eps / 8.0);
    if (xx >= 10.0 * eps) CHECK(f2 >= 1.0 - 1e-5);
    // below half the freeze point the first exponential dominates: f <= 1
    if (xx <= 0.5 * bar) CHECK(f2 <= 1.0 + 1e-13);
  }
  // A carries half the row sum and an exact derivative
  for (int i = 300; i < 700; i += 50) {
    double s = 0.0;
    for (int j = 0; j < a.a.cols; ++j) s += a.a(i, j);
    CHECK(amp.A[i] == doctest::Approx(0.5 * s).epsilon(1e-14));
    double fd = (amp.A[i + 1] - amp.A[i - 1]) / (2.0 * out.h);
    // centered stencil error rides sinh(h/eps)/(h/eps) - 1 on the kernel tails
    CHECK(amp.A_x[i] == doctest::Approx(fd).epsilon(5e-3));
  }
}

TEST_CASE("out-of-plane modes repair the marginal exactly under the cutoff") {
  auto t = golden();
  auto p = schedule_parameters(t, 8.0);
  auto d = dilate(t, p.lambda);
  double cover = t.k.k_max + std::numbers::pi / p.L0 * (1.0 + 1e-9);
  auto binned = bin_frequencies(d.table, p.L0, cover);
  auto [tr, bar] = truncate_table(binned, p.lambda);
  p.lambda_bar = bar;
  auto a = mollify(tr, p.eps, make_x_grid(800, -1.0, 1.0));
  auto amp = amplitude_profile(a);
  auto oop = build_out_of_plane(a, amp, p);

  REQUIRE_FALSE(oop.u.k.symmetric);  // all-sine family
  auto msq = plancherel_norm(oop.u, 1);  // mean square of u_,y per row
  for (int i = 0; i < a.x.n; ++i) {
    double xx = a.x.node(i);
    double psi = cutoff_step(xx, p.delta);
    if (xx <= p.delta) {
      for (int j = 0; j < oop.u.a.cols; ++j) {
        CHECK(oop.u.a(i, j) == 0.0);
        CHECK(oop.u_x.a(i, j) == 0.0);
      }
      continue;
    }
    CHECK(std::abs(msq[i] - 2.0 * xx * psi * psi) <= 1e-12 * (1.0 + 2.0 * xx));
    for (int j = 0; j < oop.u.a.cols; ++j) CHECK(oop.u.a(i, j) >= 0.0);
  }
  // derivative coefficients against a central difference, away from kinks
  for (int i = 0; i < a.x.n; ++i) {
    double xx = a.x.node(i);
    if (xx < 2.5 * p.delta || xx > 0.9) continue;
    if ((i % 97) != 0) continue;
    for (int j = 0; j < oop.u.a.cols; ++j) {
      double fd = (oop.u.a(i + 1, j) - oop.u.a(i - 1, j)) / (2.0 * a.x.h);
      if (std::abs(fd) < 1e-8) continue;
      CHECK(oop.u_x.a(i, j) == doctest::Approx(fd).epsilon(1e-3));
    }
  }
}

TEST_CASE("a one-column table excites exactly one sine slot") {
  // ramp in the 5th comb multiple of the cell; pipeline pieces run by hand
  double L0 = 8.0 / 7.0;
  auto x = make_x_grid(280, 0.0, 1.4);
  auto k = make_k_grid(L0, 6.0 * std::numbers::pi / L0, false);
  Table b(280, static_cast<int>(k.k.size()));
  for (int i = 0; i < 280; ++i) b(i, k.col_of(5)) = 2.0 * x.node(i);
  auto t = make_measure_table(x, k, std::move(b));
  auto [tr, bar] = truncate_table(t, 1.4);
  RecoveryParams p;
  p.L = 8.0;
  p.M = 2;
  p.eps = 0.1;
  p.delta = 0.05;
  p.lambda = 1.4;
  p.lambda_bar = bar;
  p.L0 = L0;
  p.n = 7;
  auto a = mollify(tr, p.eps, make_x_grid(400, -1.0, 1.0));
  auto amp = amplitude_profile(a);
  auto oop = build_out_of_plane(a, amp, p);
  int live = oop.u.k.col_of(5);
  for (int i = 0; i < a.x.n; ++i)
    for (int j = 0; j < oop.u.a.cols; ++j)
      if (j != live) CHECK(oop.u.a(i, j) == 0.0);
  double kk = 5.0 * std::numbers::pi / L0;
  for (int i = 0; i < a.x.n; ++i) {
    double xx = a.x.node(i);
    if (xx <= p.delta) continue;
    double expect = cutoff_step(xx, p.delta) * amp.f[i] * std::sqrt(a.a(i, live)) / kk;
    CHECK(oop.u.a(i, live) == doctest::Approx(expect).epsilon(1e-13));
  }

  // a genuinely negative coefficient cell is refused
  auto bad = a;
  bad.a(350, live) = -1.0;  // a row the cutoff does not silence
  CHECK_THROWS_AS(build_out_of_plane(bad, amp, p), std::invalid_argument);
}

TEST_CASE("in-plane components close the period for admissible modes") {
  auto t = golden();
  auto f = build_recovery(t, 8.0);
  double tol = 1e-10;
  for (int r = 0; r < f.u.x.n; ++r) {
    CHECK(f.w2_defect[r] <= tol);
    CHECK(f.w1_defect[r] <= tol);
  }
  // the mean offset is the w2 value on the y = 0 column
  int i0 = f.y.m / 2;
  REQUIRE(f.y.node(i0) == doctest::Approx(0.0).epsilon(1e-14));
  for (int r = 0; r < f.u.x.n; r += 111)
    CHECK(f.w2(r, i0) == doctest::Approx(f.B[r]).epsilon(1e-12));
}

TEST_CASE("without modes the period defect is the bare secular slope") {
  double L0 = 1.25;
  RecoveryParams p;
  p.L = 8.0;
  p.M = 2;
  p.eps = 0.4;
  p.delta = 0.2;
  p.lambda = 1.6;
  p.lambda_bar = 1.45;
  p.L0 = L0;
  p.n = 6;
  OutOfPlane oop;
  oop.u.x = make_x_grid(200, -1.0, 1.0);
  oop.u.k = make_k_grid(L0, 4.0 * std::numbers::pi / L0, true);
  oop.u.a = Table(200, static_cast<int>(oop.u.k.k.size()));
  oop.u_x = oop.u;
  auto ip = build_in_plane(oop, p);
  for (int r = 0; r < 200; ++r) {
    double xx = oop.u.x.node(r);
    double psi = cutoff_step(xx, p.delta);
    double expect = 2.0 * L0 * std::abs(psi * psi * xx);
    CHECK(ip.w2_defect[r] == doctest::Approx(expect).epsilon(1e-12));
  }
  CHECK_THROWS_AS(build_in_plane(oop, p, 3), std::invalid_argument);
}

TEST_CASE("full pipeline records its parameters and stays band-limited") {
  auto t = golden();
  const double bars[] = {1.341702, 1.364983, 1.325903, 1.312952};
  const double L[] = {8.0, 16.0, 32.0, 64.0};
  for (int i = 0; i < 4; ++i) {
    auto f = build_recovery(t, L[i]);
    CHECK(f.params.lambda_bar == doctest::Approx(bars[i]).epsilon(1e-6));
    CHECK(f.params.L == L[i]);
    // field frequencies live on the comb of one cell and cover the source
    CHECK(f.u.k.L_eff == doctest::Approx(f.params.L0).epsilon(1e-14));
    CHECK(f.u.k.k_max >= t.k.k_max);
    // half row sums match the closed form of the frozen ramp
    for (int r = 0; r < f.u.x.n; ++r) {
      double xx = f.u.x.node(r);
      double expect = std::max(xx, 0.0) +
                      0.5 * f.params.eps *
                          (std::exp(-std::abs(xx) / f.params.eps) -
                           std::exp((xx - f.params.lambda_bar) / f.params.eps));
      CHECK(std::abs(f.A[r] - expect) <= 1e-11);
    }
  }
  RecoveryOptions odd;
  odd.nx_field = 801;
  CHECK_THROWS_AS(build_recovery(t, 8.0, odd), std::invalid_argument);
  CHECK_THROWS_AS(build_recovery(t, 2.0), std::invalid_argument);
}
