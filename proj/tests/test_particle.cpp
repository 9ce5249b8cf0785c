#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "svgof/models.hpp"
#include "svgof/particle.hpp"
#include "svgof/rng.hpp"
#include "svgof/util.hpp"

using namespace svgof;

TEST_CASE("resampling schemes") {
  Rng rng(3);
  SECTION("uniform weights give uniform index frequencies") {
    const std::vector<double> w(10, 0.1);
    std::vector<double> count(10, 0.0);
    const int rounds = 10000;
    for (int k = 0; k < rounds; ++k)
      for (std::size_t i : resample(w, Resampling::Multinomial, rng))
        count[i] += 1.0;
    const double expected = double(rounds);  // 10 draws per round
    double chi2 = 0.0;
    for (double c : count) chi2 += (c - expected) * (c - expected) / expected;
    CHECK(chi2 < 21.67);  // chi^2_9 at the 1% level
  }
  SECTION("one-hot weight selects a single particle") {
    std::vector<double> w(8, 0.0);
    w[5] = 1.0;
    for (auto scheme : {Resampling::Multinomial, Resampling::Systematic})
      for (std::size_t i : resample(w, scheme, rng)) CHECK(i == 5);
  }
  SECTION("systematic count variance is at most multinomial") {
    double var_sys = 0.0, var_mult = 0.0;
    for (int inst = 0; inst < 50; ++inst) {
      std::vector<double> w(50);
      double tot = 0.0;
      for (double& x : w) tot += (x = rng.uniform() + 1e-3);
      for (double& x : w) x /= tot;
      for (auto scheme : {Resampling::Systematic, Resampling::Multinomial}) {
        std::vector<double> mean_count(w.size(), 0.0), m2(w.size(), 0.0);
        const int rounds = 200;
        for (int k = 0; k < rounds; ++k) {
          std::vector<double> count(w.size(), 0.0);
          for (std::size_t i : resample(w, scheme, rng)) count[i] += 1.0;
          for (std::size_t j = 0; j < w.size(); ++j) {
            mean_count[j] += count[j];
            m2[j] += count[j] * count[j];
          }
        }
        double v = 0.0;
        for (std::size_t j = 0; j < w.size(); ++j) {
          const double mu = mean_count[j] / rounds;
          v += m2[j] / rounds - mu * mu;
        }
        (scheme == Resampling::Systematic ? var_sys : var_mult) += v;
      }
    }
    CHECK(var_sys <= var_mult);
  }
  SECTION("validation") {
    const std::vector<double> zero(4, 0.0);
    CHECK_THROWS_AS(resample(zero, Resampling::Systematic, rng),
                    std::invalid_argument);
    const std::vector<double> neg{0.5, -0.1, 0.6};
    CHECK_THROWS_AS(resample(neg, Resampling::Multinomial, rng),
                    std::invalid_argument);
  }
}

TEST_CASE("point-mass prior stays a point mass through the kernel") {
  const std::array<double, 3> theta_star{-0.01, std::atanh(0.95),
                                         std::log(0.03)};
  LwPrior prior;
  prior.draw_theta = [&](Rng&) { return theta_star; };
  prior.draw_h = [](Rng& rng) { return -3.5 + 0.5 * rng.normal(); };
  std::vector<double> y;
  Rng gen(7);
  for (int i = 0; i < 50; ++i) y.push_back(-3.5 + 2.0 * gen.normal());
  LwConfig cfg;
  cfg.l = 200;
  cfg.a = 0.98;
  cfg.seed = 11;
  const LwResult out = lw_filter(y, prior, cfg);
  CHECK(out.phi0_summary.mean == Catch::Approx(theta_star[0]).margin(1e-12));
  CHECK(out.phi0_summary.sd == Catch::Approx(0.0).margin(1e-12));
  CHECK(out.phi1_summary.mean ==
        Catch::Approx(std::tanh(theta_star[1])).margin(1e-12));
  CHECK(out.sigw2_summary.sd == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("shrinkage kernel preserves the first two moments") {
  // Liu-West identity: with m = a theta + (1-a) mean and kernel variance
  // h^2 V, the propagated cloud keeps mean and covariance in expectation.
  Rng rng(13);
  const std::size_t l = 500;
  std::vector<std::array<double, 3>> theta(l);
  for (auto& t : theta)
    t = {rng.normal(), 2.0 + 0.5 * rng.normal(), -4.0 + 2.0 * rng.normal()};
  std::array<double, 3> bar{};
  for (const auto& t : theta)
    for (int k = 0; k < 3; ++k) bar[k] += t[k] / double(l);
  std::array<std::array<double, 3>, 3> V{};
  for (const auto& t : theta)
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        V[i][j] += (t[i] - bar[i]) * (t[j] - bar[j]) / double(l);

  const double a = 0.95;
  const double h2 = 1.0 - a * a;
  auto hV = V;
  for (auto& row : hV)
    for (double& v : row) v *= h2;
  const auto L = svgof::detail::chol3(hV);

  std::array<double, 3> mean_acc{};
  std::array<std::array<double, 3>, 3> cov_acc{};
  const int rounds = 200;
  for (int round = 0; round < rounds; ++round) {
    std::vector<std::array<double, 3>> prop(l);
    for (std::size_t j = 0; j < l; ++j) {
      const double z0 = rng.normal(), z1 = rng.normal(), z2 = rng.normal();
      for (int k = 0; k < 3; ++k)
        prop[j][k] = a * theta[j][k] + (1.0 - a) * bar[k];
      prop[j][0] += L[0][0] * z0;
      prop[j][1] += L[1][0] * z0 + L[1][1] * z1;
      prop[j][2] += L[2][0] * z0 + L[2][1] * z1 + L[2][2] * z2;
    }
    std::array<double, 3> pm{};
    for (const auto& t : prop)
      for (int k = 0; k < 3; ++k) pm[k] += t[k] / double(l);
    for (int k = 0; k < 3; ++k) mean_acc[k] += pm[k] / rounds;
    for (const auto& t : prop)
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
          cov_acc[i][j] += (t[i] - pm[i]) * (t[j] - pm[j]) / double(l) / rounds;
  }
  for (int k = 0; k < 3; ++k)
    CHECK(mean_acc[k] == Catch::Approx(bar[k]).margin(0.05 * std::sqrt(V[k][k])));
  for (int k = 0; k < 3; ++k)
    CHECK(cov_acc[k][k] == Catch::Approx(V[k][k]).epsilon(0.05));
}

TEST_CASE("linear-Gaussian variant tracks the Kalman filter") {
  // replace the log chi^2_1 observation noise with a Gaussian of matched
  // moments; parameters held at a point mass so only states are filtered
  const double phi0 = -0.064, phi1 = 0.98, sigw2 = 0.04;
  const double mu_v = -1.2704, var_v = 4.9348;
  Rng gen(17);
  std::vector<double> y;
  double h = phi0 / (1.0 - phi1);
  const double m0 = h, c0 = 1.0;
  for (int i = 0; i < 300; ++i) {
    h = phi0 + phi1 * h + std::sqrt(sigw2) * gen.normal();
    y.push_back(h + mu_v + std::sqrt(var_v) * gen.normal());
  }
  LwPrior prior;
  prior.draw_theta = [&](Rng&) -> std::array<double, 3> {
    return {phi0, std::atanh(phi1), std::log(sigw2)};
  };
  prior.draw_h = [&](Rng& rng) { return m0 + std::sqrt(c0) * rng.normal(); };
  LwConfig cfg;
  cfg.l = 2000;
  cfg.a = 0.98;
  cfg.seed = 23;
  cfg.obs_logpdf = [=](double v) { return normal_logpdf(v, mu_v, var_v); };
  const LwResult out = lw_filter(y, prior, cfg);
  const auto kf = oracles::textbook_kalman(y, {}, mu_v, var_v, phi0, phi1,
                                           sigw2, m0, c0);
  double mse = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double d = out.steps[i].h_mean - kf.x_filt[i];
    mse += d * d;
  }
  const double rmse = std::sqrt(mse / double(y.size()));
  CHECK(rmse <= 3.0 / std::sqrt(double(cfg.l)));
}

TEST_CASE("filter determinism and degeneracy handling") {
  std::vector<double> y;
  Rng gen(29);
  for (int i = 0; i < 60; ++i) y.push_back(-3.0 + 2.0 * gen.normal());
  LwConfig cfg;
  cfg.l = 150;
  cfg.seed = 31;
  const LwResult a = lw_filter(y, default_lw_prior(y), cfg);
  const LwResult b = lw_filter(y, default_lw_prior(y), cfg);
  REQUIRE(a.steps.size() == b.steps.size());
  for (std::size_t i = 0; i < a.steps.size(); ++i) {
    CHECK(a.steps[i].phi1 == b.steps[i].phi1);
    CHECK(a.steps[i].ess == b.steps[i].ess);
    CHECK(a.steps[i].ess <= double(cfg.l) + 1e-9);
  }

  // an absurd observation floods the weights
  std::vector<double> bad = y;
  bad[10] = 1e8;
  CHECK_THROWS_AS(lw_filter(bad, default_lw_prior(y), cfg),
                  std::runtime_error);

  LwConfig small = cfg;
  small.l = 50;
  CHECK_THROWS_AS(lw_filter(y, default_lw_prior(y), small),
                  std::invalid_argument);
  LwConfig bada = cfg;
  bada.a = 1.0;
  CHECK_THROWS_AS(lw_filter(y, default_lw_prior(y), bada),
                  std::invalid_argument);
}
