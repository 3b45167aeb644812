#include <catch2/catch_amalgamated.hpp>
#include <algorithm>

#include <cmath>

#include "kglab/fitting.hpp"
#include "kglab/oscillatory.hpp"

using namespace kglab;

namespace {

Phase2D elliptic_phase() {
  Phase2D p;
  p.value = [](double x, double y) { return 0.5 * (x * x + y * y); };
  p.gradient = [](double x, double y) -> std::array<double, 2> { return {x, y}; };
  p.hessian = [](double, double) -> std::array<double, 3> { return {1.0, 0.0, 1.0}; };
  return p;
}

Phase2D hyperbolic_phase() {
  Phase2D p;
  p.value = [](double x, double y) { return 0.5 * (x * x - y * y); };
  p.gradient = [](double x, double y) -> std::array<double, 2> { return {x, -y}; };
  p.hessian = [](double, double) -> std::array<double, 3> { return {1.0, 0.0, -1.0}; };
  return p;
}

double gauss_amp(double x, double y) { return std::exp(-(x * x + y * y)); }

}  // namespace

TEST_CASE("stationary point search") {
  const PhaseAnalysis2D a = find_stationary_point(elliptic_phase(), 0.7, -0.4);
  CHECK(std::abs(a.eta0) < 1e-10);
  CHECK(std::abs(a.sigma0) < 1e-10);
  CHECK(a.signature == 2);
  CHECK(a.det == Catch::Approx(1.0));

  const PhaseAnalysis2D h = find_stationary_point(hyperbolic_phase(), 0.3, 0.2);
  CHECK(h.signature == 0);
  CHECK(h.det == Catch::Approx(-1.0));

  SECTION("inconsistent derivatives are rejected") {
    Phase2D bad = elliptic_phase();
    bad.gradient = [](double x, double y) -> std::array<double, 2> { return {2.0 * x, 3.0 * y}; };
    CHECK_THROWS_AS(find_stationary_point(bad, 0.5, 0.5), config_error);
  }
}

TEST_CASE("leading term against the quadrature oracle") {
  const Cutoff2D chi = bump_cutoff(2.0);
  REQUIRE(chi.value(0.0, 0.0) == Catch::Approx(1.0));

  SECTION("elliptic phase at lambda = 100 within 5%") {
    const double lambda = 100.0;
    const complexd lead = stationary_phase_2d(elliptic_phase(), gauss_amp, chi, lambda);
    const complexd expected = 2.0 * M_PI / lambda * std::polar(1.0, M_PI / 2.0);
    CHECK(std::abs(lead - expected) < 1e-12);
    const complexd brute = brute_force_2d(elliptic_phase(), gauss_amp, chi, lambda);
    CHECK(std::abs(lead - brute) / std::abs(brute) < 0.05);
  }

  SECTION("hyperbolic phase has unit signature factor") {
    const double lambda = 60.0;
    const complexd lead = stationary_phase_2d(hyperbolic_phase(), gauss_amp, chi, lambda);
    // signature 0, psi(0,0) = 0: leading term is real positive.
    CHECK(lead.imag() == Catch::Approx(0.0).margin(1e-14));
    CHECK(lead.real() > 0.0);
    const complexd brute = brute_force_2d(hyperbolic_phase(), gauss_amp, chi, lambda);
    CHECK(std::abs(lead - brute) / std::abs(brute) < 0.08);
  }

  SECTION("error scales like lambda^{-2}") {
    std::vector<double> ls{30.0, 60.0, 120.0};
    std::vector<double> errs;
    for (double l : ls) {
      const complexd lead = stationary_phase_2d(elliptic_phase(), gauss_amp, chi, l);
      const complexd brute = brute_force_2d(elliptic_phase(), gauss_amp, chi, l);
      errs.push_back(std::abs(lead - brute));
    }
    const power_law_fit fit = fit_power_law(ls, errs);
    CHECK(fit.exponent <= -1.5);
  }
}

TEST_CASE("brute force quadrature sanity") {
  const Cutoff2D chi = bump_cutoff(2.0);

  SECTION("zero phase reduces to plain quadrature") {
    Phase2D flat;
    flat.value = [](double, double) { return 0.0; };
    flat.gradient = [](double, double) -> std::array<double, 2> { return {0.0, 0.0}; };
    flat.hessian = [](double, double) -> std::array<double, 3> { return {0.0, 0.0, 0.0}; };
    const complexd v = brute_force_2d(flat, gauss_amp, chi, 7.0);
    // Independent plain trapezoid of F chi.
    complexd ref = 0.0;
    const int m = 1500;
    const double step = 4.0 / m;
    for (int iy = 0; iy <= m; ++iy)
      for (int ix = 0; ix <= m; ++ix) {
        const double x = -2.0 + step * ix, y = -2.0 + step * iy;
        ref += gauss_amp(x, y) * chi.value(x, y);
      }
    ref *= step * step;
    CHECK(std::abs(v - ref) < 1e-7 * std::abs(ref));
    // lambda = 0 likewise.
    CHECK(std::abs(brute_force_2d(elliptic_phase(), gauss_amp, chi, 0.0) - ref) < 1e-7 * std::abs(ref));
  }

  SECTION("grid doubling self-convergence") {
    const double lambda = 25.0;
    const complexd ref = brute_force_2d_fixed(elliptic_phase(), gauss_amp, chi, lambda, 4096);
    double prev_err = -1.0;
    int improving = 0;
    for (long m : {64L, 128L, 256L}) {
      const double err = std::abs(brute_force_2d_fixed(elliptic_phase(), gauss_amp, chi, lambda, m) - ref);
      if (prev_err > 0.0 && prev_err / std::max(err, 1e-300) >= 10.0) ++improving;
      prev_err = err;
    }
    CHECK(improving >= 1);
    // the self-converged value agrees with the fine reference
    const complexd conv = brute_force_2d(elliptic_phase(), gauss_amp, chi, lambda);
    CHECK(std::abs(conv - ref) <= 1e-5 * std::abs(ref));
  }
}

TEST_CASE("cubic phase data closed forms") {
  SECTION("values at xi = 0") {
    const CubicPhaseData d1 = cubic_phase_data(1, 0.0);
    CHECK(d1.eta == 0.0);
    CHECK(d1.sigma == 0.0);
    CHECK(d1.value == Catch::Approx(2.0));
    CHECK(d1.det == Catch::Approx(3.0));
    CHECK(d1.signature == 2);
  }

  SECTION("phi2 vanishes at its stationary point for any xi") {
    for (double xi : {-3.0, -0.5, 0.0, 1.7, 4.2}) {
      const CubicPhaseData d = cubic_phase_data(2, xi);
      CHECK(d.value == 0.0);
      CHECK(d.eta == -xi);
      CHECK(d.sigma == xi);
    }
  }

  SECTION("phi4 mirrors phi1") {
    for (double xi : {-2.0, 0.0, 1.0, 5.0}) {
      const CubicPhaseData d1 = cubic_phase_data(1, xi);
      const CubicPhaseData d4 = cubic_phase_data(4, xi);
      CHECK(d4.det == Catch::Approx(d1.det));
      CHECK(d4.signature == -d1.signature);
    }
  }

  SECTION("Newton reproduces the closed forms to 1e-10") {
    for (int j = 1; j <= 4; ++j)
      for (double xi : {-2.0, 0.0, 1.0, 5.0}) {
        const CubicPhaseData d = cubic_phase_data(j, xi);
        const Phase2D phase = cubic_phase(j, xi);
        // Basin check: several deterministic starts near the point.
        for (int trial = 0; trial < 5; ++trial) {
          const double dx = 0.35 * std::sin(2.3 * trial + 0.7 * j);
          const double dy = 0.35 * std::cos(1.9 * trial + 0.3 * j);
          const PhaseAnalysis2D a = find_stationary_point(phase, d.eta + dx, d.sigma + dy);
          CHECK(std::abs(a.eta0 - d.eta) < 1e-10 * (1.0 + std::abs(d.eta)));
          CHECK(std::abs(a.sigma0 - d.sigma) < 1e-10 * (1.0 + std::abs(d.sigma)));
          CHECK(std::abs(a.value - d.value) < 1e-10 * (1.0 + std::abs(d.value)));
          CHECK(std::abs(a.det - d.det) < 1e-10 * (1.0 + std::abs(d.det)));
          CHECK(a.signature == d.signature);
        }
      }
  }

  SECTION("invalid index is rejected") {
    CHECK_THROWS_AS(cubic_phase_data(5, 1.0), config_error);
  }
}

TEST_CASE("vmod phase derivatives") {
  const double s3 = std::sqrt(3.0);

  SECTION("s = t is pure transport") {
    const VmodPhase p = vmod_phase(7.0, 1.3, 7.0, -2.0);
    CHECK(p.d_xi == Catch::Approx(-2.0));
  }

  SECTION("stationary on the ray at s = 0") {
    const double t = 50.0;
    const VmodPhase p = vmod_phase(0.0, s3, t, -s3 / 2.0 * t);
    CHECK(std::abs(p.d_xi) < 1e-10 * t);
  }

  SECTION("convexity in xi for s < t") {
    for (double xi : {-2.0, 0.0, 3.0})
      CHECK(vmod_phase(1.0, xi, 5.0, 0.3).d2_xi > 0.0);
  }
}

TEST_CASE("ray phase Taylor expansion") {
  SECTION("exact value at s = 0") {
    const RayPhase p = ray_phase_taylor(80.0, 0.0);
    CHECK(p.value == Catch::Approx(40.0));
    CHECK(p.deviation == Catch::Approx(0.0).margin(1e-12));
  }

  SECTION("t = 100, s = 1 deviation is C/100 with C <= 10") {
    const RayPhase p = ray_phase_taylor(100.0, 1.0);
    CHECK(p.deviation <= 10.0 / 100.0);
    CHECK(p.deviation > 0.0);
  }

  SECTION("measured constant stabilizes across scales") {
    std::vector<double> cs;
    for (double t : {1e2, 1e3, 1e4}) {
      const double s = 1e-3 * std::sqrt(t);
      const RayPhase p = ray_phase_taylor(t, s);
      cs.push_back(p.deviation / (s * s / t));
    }
    for (double c : cs) {
      CHECK(c < 10.0);
      CHECK(c > 0.1);
    }
    const auto [mn, mx] = std::minmax_element(cs.begin(), cs.end());
    CHECK(*mx / *mn < 1.05);  // the quadratic coefficient has converged
  }

  SECTION("domain validation") {
    CHECK_THROWS_AS(ray_phase_taylor(10.0, -0.1), config_error);
    CHECK_THROWS_AS(ray_phase_taylor(10.0, 2.0), config_error);
  }
}
