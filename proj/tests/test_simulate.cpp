#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cmath>
#include <vector>

#include "svgof/models.hpp"
#include "svgof/rng.hpp"
#include "svgof/simulate.hpp"
#include "svgof/util.hpp"

using namespace svgof;

namespace {

// Continuous-time equivalent of the (phi0, phi1, sigma_w2) =
// (-0.006, 0.99, 0.0225) weekly OU-SV data generating process.
ParamVector ou_dgp() {
  ParamVector p;
  p.alpha = 0.01;
  p.beta = 0.3;
  return undiscretize_params({-0.006, 0.99, 0.0225}, 1.0 / 52.0, p);
}

}  // namespace

TEST_CASE("wiener increments: correlation and determinism") {
  const auto z0 = wiener_increments(1000000, 0.0, 42);
  double s1 = 0, s2 = 0, s12 = 0, s11 = 0, s22 = 0;
  for (const auto& p : z0) {
    s1 += p[0];
    s2 += p[1];
    s12 += p[0] * p[1];
    s11 += p[0] * p[0];
    s22 += p[1] * p[1];
  }
  const double n = double(z0.size());
  const double corr = (s12 / n - s1 / n * s2 / n) /
                      std::sqrt((s11 / n - s1 / n * s1 / n) *
                                (s22 / n - s2 / n * s2 / n));
  CHECK(std::abs(corr) < 0.005);

  const auto z1 = wiener_increments(100, 1.0, 9);
  for (const auto& p : z1) CHECK(p[0] == p[1]);

  const auto a = wiener_increments(50, -0.4, 7);
  const auto b = wiener_increments(50, -0.4, 7);
  CHECK(a == b);

  CHECK_THROWS_AS(wiener_increments(10, 1.5, 1), std::domain_error);
}

TEST_CASE("deterministic Euler step with zero volatility") {
  ParamVector p;
  p.alpha = 0.0;
  p.beta = 1.0;
  p.xi = 0.0;
  SimConfig cfg;
  cfg.n = 2;
  cfg.burn_in = 0;
  cfg.dt = 0.1;
  cfg.r0 = 1.0;
  cfg.h0 = -std::numeric_limits<double>::infinity();  // sigma = 0 exactly
  const Path path = simulate_path(ModelSpec::ou_sv(), p, cfg);
  CHECK(path.r[0] == 1.0);
  CHECK(path.r[1] == Catch::Approx(0.9).epsilon(1e-15));
  CHECK(path.r[2] == Catch::Approx(0.81).epsilon(1e-15));
}

TEST_CASE("zero-noise limit solves the forward-Euler ODE") {
  ParamVector p;
  p.alpha = 0.05;
  p.beta = 0.8;
  p.xi = 0.0;
  SimConfig cfg;
  cfg.n = 200;
  cfg.burn_in = 0;
  cfg.dt = 1.0 / 52.0;
  cfg.r0 = 0.2;
  cfg.h0 = -std::numeric_limits<double>::infinity();
  const Path path = simulate_path(ModelSpec::ou_sv(), p, cfg);
  // independent forward-Euler stepper for r' = alpha - beta r
  double r = 0.2;
  for (std::size_t i = 0; i < cfg.n; ++i) {
    CHECK(std::abs(path.r[i] - r) < 1e-12);
    r += (p.alpha - p.beta * r) * cfg.dt;
  }
}

TEST_CASE("simulation is a pure function of its inputs") {
  SimConfig cfg;
  cfg.n = 300;
  cfg.burn_in = 50;
  cfg.dt = 1.0 / 52.0;
  cfg.seed = 1234;
  const Path a = simulate_path(ModelSpec::ou_sv(), ou_dgp(), cfg);
  const Path b = simulate_path(ModelSpec::ou_sv(), ou_dgp(), cfg);
  CHECK(a.r == b.r);
  CHECK(a.sigma2 == b.sigma2);
  CHECK(a.r.size() == cfg.n + 1);
  for (double s2 : a.sigma2) CHECK(s2 > 0.0);
}

TEST_CASE("long-run mean of the OU-SV state matches alpha/beta") {
  const ParamVector p = ou_dgp();
  std::vector<double> means;
  for (std::uint64_t rep = 0; rep < 30; ++rep) {
    SimConfig cfg;
    cfg.n = 2080;
    cfg.burn_in = 1000;
    cfg.dt = 1.0 / 52.0;
    cfg.seed = derive_seed(2024, rep);
    const Path path = simulate_path(ModelSpec::ou_sv(), p, cfg);
    means.push_back(mean(path.r));
  }
  const double m = mean(means);
  const double se = sd(means) / std::sqrt(double(means.size()));
  CHECK(std::abs(m - p.alpha / p.beta) < 3.0 * se);
}

// Coupled-increment convergence check: err(dt)/err(dt/2) ~= 2^p where p
// is the strong order. With the volatility factor frozen (xi = 0) the
// noise is additive and Euler has strong order 1; with the second factor
// live the (r, h) system has non-commutative noise and the order drops
// to 1/2 (ratio sqrt(2)).
namespace {

double halving_ratio(const ParamVector& p, double h0) {
  const ModelSpec spec = ModelSpec::ou_sv();
  const double dt = 1.0 / 52.0;
  const std::size_t n = 208;  // four years
  double err_coarse = 0.0, err_fine = 0.0;
  for (std::uint64_t rep = 0; rep < 200; ++rep) {
    const auto z4 = wiener_increments(4 * n, 0.0, derive_seed(5, rep));
    // aggregate the fine increments pairwise: z = (z_a + z_b)/sqrt(2)
    std::vector<std::array<double, 2>> z2(2 * n), z1(n);
    for (std::size_t i = 0; i < 2 * n; ++i)
      for (int k = 0; k < 2; ++k)
        z2[i][k] = (z4[2 * i][k] + z4[2 * i + 1][k]) / std::sqrt(2.0);
    for (std::size_t i = 0; i < n; ++i)
      for (int k = 0; k < 2; ++k)
        z1[i][k] = (z2[2 * i][k] + z2[2 * i + 1][k]) / std::sqrt(2.0);

    auto endpoint = [&](double step, auto& z, std::size_t steps) {
      SimConfig cfg;
      cfg.n = steps;
      cfg.burn_in = 0;
      cfg.dt = step;
      cfg.r0 = 0.033;
      cfg.h0 = h0;
      return simulate_path_with_increments(spec, p, cfg, z).r.back();
    };
    const double rA = endpoint(dt, z1, n);
    const double rB = endpoint(dt / 2, z2, 2 * n);
    const double rC = endpoint(dt / 4, z4, 4 * n);
    err_coarse += std::abs(rA - rB);
    err_fine += std::abs(rB - rC);
  }
  return err_coarse / err_fine;
}

}  // namespace

TEST_CASE("strong order under dt halving") {
  SECTION("constant volatility: order one, ratio near 2") {
    ParamVector p = ou_dgp();
    p.xi = 0.0;
    p.theta0 = 0.0;
    p.theta1 = 0.0;
    const double ratio = halving_ratio(p, std::log(0.0225));
    CHECK(ratio > 1.5);
    CHECK(ratio < 2.5);
  }
  SECTION("stochastic volatility: order one-half, ratio near sqrt(2)") {
    const double ratio = halving_ratio(ou_dgp(), -3.5);
    CHECK(ratio > 1.2);
    CHECK(ratio < 1.7);
  }
}

TEST_CASE("latent log-volatility is AR(1) with slope phi1") {
  const ParamVector p = ou_dgp();
  SimConfig cfg;
  cfg.n = 100000;
  cfg.burn_in = 1000;
  cfg.dt = 1.0 / 52.0;
  cfg.seed = 77;
  const Path path = simulate_path(ModelSpec::ou_sv(), p, cfg);
  std::vector<double> h(path.sigma2.size());
  for (std::size_t i = 0; i < h.size(); ++i) h[i] = std::log(path.sigma2[i]);
  const double m = mean(h);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 1; i < h.size(); ++i) {
    num += (h[i] - m) * (h[i - 1] - m);
    den += (h[i - 1] - m) * (h[i - 1] - m);
  }
  CHECK(std::abs(num / den - 0.99) < 0.02);
}

TEST_CASE("CKLS state reflection keeps the path positive") {
  ParamVector p;
  p.alpha = 0.0;
  p.beta = 0.2;
  p.gamma = 0.0;  // additive noise within the CKLS family
  p.theta0 = 0.0;
  p.theta1 = 0.0;
  p.xi = 0.0;
  SimConfig cfg;
  cfg.n = 4000;
  cfg.burn_in = 0;
  cfg.dt = 1.0 / 52.0;
  cfg.r0 = 0.02;
  cfg.h0 = std::log(0.04);  // sigma = 0.2, large against the level
  cfg.seed = 3;
  const Path path = simulate_path(ModelSpec::ckls_sv(), p, cfg);
  CHECK(path.reflected > 0);
  for (double r : path.r) CHECK(r >= 0.0);
}

TEST_CASE("simulation config validation") {
  SimConfig cfg;
  cfg.n = 1;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.n = 10;
  cfg.dt = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}
