#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "kglab/coefficients.hpp"

using namespace kglab;

TEST_CASE("gaussian preset is resonant with the closed-form transform value") {
  const Grid g = make_grid(100.0, 2048);
  const Coefficient c = make_profile(g, ProfileKind::gaussian, {.amplitude = 1.0, .sigma = 1.0});
  CHECK(std::abs(c.r_plus - std::exp(-1.5)) < 1e-10);
  CHECK(std::abs(c.r_plus.real() - 0.22313) < 1e-5);
  CHECK(c.resonant);
  CHECK(std::abs(c.r_minus - std::conj(c.r_plus)) < 1e-12);

  SECTION("even real coefficient has real resonance value") {
    CHECK(std::abs(c.r_plus.imag()) < 1e-12);
  }
}

TEST_CASE("sech_tanh preset is odd with purely imaginary resonance value") {
  const Grid g = make_grid(100.0, 2048);
  const Coefficient c = make_profile(g, ProfileKind::sech_tanh, {.amplitude = 1.0});
  CHECK(std::abs(c.r_plus.real()) < 1e-12);
  CHECK(std::abs(c.r_plus.imag()) > 1e-3);
  CHECK(c.resonant);
}

TEST_CASE("cosine_gaussian resonance peaks at omega = sqrt(3)") {
  const Grid g = make_grid(100.0, 2048);
  const double s3 = std::sqrt(3.0);
  std::vector<double> omegas{0.3, 0.8, 1.3, s3, 2.1, 2.6, 3.1};
  double best = -1.0;
  size_t best_idx = 0;
  for (size_t i = 0; i < omegas.size(); ++i) {
    const Coefficient c =
        make_profile(g, ProfileKind::cosine_gaussian, {.amplitude = 1.0, .sigma = 1.0, .omega = omegas[i]});
    const double r = std::abs(c.r_plus);
    if (r > best) {
      best = r;
      best_idx = i;
    }
  }
  CHECK(omegas[best_idx] == s3);
}

TEST_CASE("profiles that do not decay at the boundary are rejected") {
  const Grid g = make_grid(100.0, 2048);
  CHECK_THROWS_AS(make_profile(g, ProfileKind::gaussian, {.amplitude = 1.0, .sigma = 40.0}), config_error);
}

TEST_CASE("deresonate removes the resonant frequencies") {
  const Grid g = make_grid(100.0, 2048);
  const Coefficient alpha = make_profile(g, ProfileKind::gaussian, {.amplitude = 1.0, .sigma = 1.0});
  const Field window = default_deresonate_window(g);

  const DeresonateResult r = deresonate(alpha, window);
  CHECK(std::abs(r.coefficient.r_plus) < 1e-10);
  CHECK(std::abs(r.coefficient.r_minus) < 1e-10);
  CHECK_FALSE(r.coefficient.resonant);
  CHECK(effectively_real(r.coefficient.values));

  SECTION("idempotence") {
    const DeresonateResult r2 = deresonate(r.coefficient, window);
    CHECK(std::abs(r2.c1) < 1e-10);
    CHECK(std::abs(r2.c2) < 1e-10);
    double diff = 0.0;
    for (int j = 0; j < g.n_points; ++j)
      diff = std::max(diff, std::abs(r2.coefficient.values.values[j] - r.coefficient.values.values[j]));
    CHECK(diff < 1e-10);
  }

  SECTION("perturbation is controlled by the carrier weights") {
    Field diff = alpha.values;
    for (int j = 0; j < g.n_points; ++j) diff.values[j] -= r.coefficient.values.values[j];
    CHECK(l2_norm(diff) <= (std::abs(r.c1) + std::abs(r.c2)) * l2_norm(window) + 1e-12);
  }

  SECTION("already non-resonant input is a fixed point") {
    const Coefficient wide = make_profile(g, ProfileKind::gaussian, {.amplitude = 1.0, .sigma = 4.0});
    REQUIRE_FALSE(wide.resonant);
    const DeresonateResult r3 = deresonate(wide, window);
    CHECK(std::abs(r3.c1) < 1e-9);
    CHECK(std::abs(r3.c2) < 1e-9);
  }

  SECTION("odd coefficient stays odd after deresonation") {
    const Coefficient odd = make_profile(g, ProfileKind::sech_tanh, {.amplitude = 1.0});
    const DeresonateResult ro = deresonate(odd, window);
    CHECK(std::abs(ro.coefficient.r_plus) < 1e-10);
    // Odd alpha has imaginary r_plus, so the cos carrier is unused.
    CHECK(std::abs(ro.c1) < 1e-10);
  }
}

TEST_CASE("degenerate window is rejected") {
  const Grid g = make_grid(100.0, 2048);
  const Coefficient alpha = make_profile(g, ProfileKind::gaussian, {.amplitude = 1.0, .sigma = 1.0});
  const Field zero_window = make_field(g);
  CHECK_THROWS_AS(deresonate(alpha, zero_window), config_error);
}

TEST_CASE("weighted Sobolev norms") {
  const Grid g = make_grid(100.0, 2048);
  const Field f = sample_field(g, [](double x) { return std::exp(-x * x / 2.0); });

  SECTION("j = m = 0 is the L2 norm") {
    CHECK(weighted_sobolev(f, 0, 0) == Catch::Approx(l2_norm(f)).epsilon(1e-12));
  }

  SECTION("H1 norm of the unit Gaussian against the closed form") {
    // int (f^2 + f'^2) = sqrt(pi) (1 + 1/2)
    const double expected = std::sqrt(std::sqrt(M_PI) * 1.5);
    CHECK(weighted_sobolev(f, 0, 1) == Catch::Approx(expected).epsilon(1e-6));
  }

  SECTION("homogeneity") {
    Field f2 = f;
    for (auto& v : f2.values) v *= 2.0;
    CHECK(weighted_sobolev(f2, 3, 2) == Catch::Approx(2.0 * weighted_sobolev(f, 3, 2)).epsilon(1e-12));
  }

  SECTION("derivative order above 4 is rejected") {
    CHECK_THROWS_AS(weighted_sobolev(f, 0, 5), config_error);
    CHECK_THROWS_AS(weighted_sobolev(f, -1, 0), config_error);
  }
}

TEST_CASE("presets satisfy the decay hypotheses interior-dominated") {
  const Grid g = make_grid(100.0, 2048);
  for (ProfileKind kind :
       {ProfileKind::gaussian, ProfileKind::sech2, ProfileKind::sech_tanh, ProfileKind::cosine_gaussian}) {
    const Coefficient c =
        make_profile(g, kind, {.amplitude = 1.0, .sigma = 1.0, .width = 1.0, .omega = std::sqrt(3.0)});
    const double n83 = weighted_sobolev(c.values, 8, 3);
    CHECK(std::isfinite(n83));
    CHECK(sobolev_boundary_fraction(c.values, 8, 3) < 1e-8);
  }
}
