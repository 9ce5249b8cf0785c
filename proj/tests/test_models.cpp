#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "svgof/models.hpp"
#include "svgof/rng.hpp"

using namespace svgof;

namespace {

ParamVector ckls_params() {
  ParamVector p;
  p.alpha = 0.04;
  p.beta = 0.6;
  p.gamma = 1.5;
  p.theta0 = -0.7;
  p.theta1 = 0.1;
  p.xi = 0.4;
  return p;
}

}  // namespace

TEST_CASE("drift evaluation") {
  ParamVector p = ckls_params();
  CHECK(drift_eval(ModelSpec::ckls_sv(), p, 0.05) == Catch::Approx(0.01));
  CHECK(drift_eval(ModelSpec::drift_alt(0.0), p, 0.05) == Catch::Approx(0.01));
  // at r = 1 the perturbation rho(1 - r^rho) vanishes
  CHECK(drift_eval(ModelSpec::drift_alt(0.15), p, 1.0) ==
        Catch::Approx(0.04 - 0.6));
  CHECK_THROWS_AS(drift_eval(ModelSpec::ckls_sv(), p,
                             std::numeric_limits<double>::quiet_NaN()),
                  std::domain_error);
  CHECK_THROWS_AS(drift_eval(ModelSpec::drift_alt(0.15), p, -0.1),
                  std::domain_error);
}

TEST_CASE("diffusion evaluation") {
  ParamVector p = ckls_params();
  CHECK(diffusion_eval(ModelSpec::ou_sv(), p, 123.0, 0.2) ==
        Catch::Approx(0.2));
  CHECK(diffusion_eval(ModelSpec::ckls_sv(), p, 0.04, 0.2) ==
        Catch::Approx(0.2 * std::pow(0.04, 1.5)));
  CHECK(diffusion_eval(ModelSpec::vol_alt(0.01), p, 1.0, 0.2) ==
        Catch::Approx(0.2));
  CHECK_THROWS_AS(diffusion_eval(ModelSpec::ou_sv(), p, 0.05, -0.1),
                  std::domain_error);
}

TEST_CASE("perturbed families reduce to CKLS at rho = 0") {
  ParamVector p = ckls_params();
  const ModelSpec base = ModelSpec::ckls_sv();
  const ModelSpec da = ModelSpec::drift_alt(0.0);
  const ModelSpec va = ModelSpec::vol_alt(0.0);
  Rng rng(7);
  for (int i = 0; i < 1000; ++i) {
    const double r = 0.001 + 0.3 * rng.uniform();
    const double s = 0.5 * rng.uniform();
    CHECK(drift_eval(da, p, r) == drift_eval(base, p, r));
    CHECK(diffusion_eval(va, p, r, s) == diffusion_eval(base, p, r, s));
  }
}

TEST_CASE("parameter discretization") {
  ParamVector p = ckls_params();
  const double dt = 1.0 / 52.0;
  const DiscreteParams d = discretize_params(p, dt);
  CHECK(d.phi0 == Catch::Approx(-0.7 / 52.0).epsilon(1e-12));
  CHECK(d.phi1 == Catch::Approx(1.0 - 0.1 / 52.0).epsilon(1e-12));
  CHECK(d.sigma_w2 == Catch::Approx(0.16 / 52.0).epsilon(1e-12));

  ParamVector zero;
  const DiscreteParams dz = discretize_params(zero, 0.37);
  CHECK(dz.phi0 == 0.0);
  CHECK(dz.phi1 == 1.0);
  CHECK(dz.sigma_w2 == 0.0);

  CHECK_THROWS_AS(discretize_params(p, 0.0), std::domain_error);

  const ParamVector back = undiscretize_params(d, dt, p);
  CHECK(back.theta0 == Catch::Approx(-0.7).epsilon(1e-14));
  CHECK(back.theta1 == Catch::Approx(0.1).epsilon(1e-14));
  CHECK(back.xi == Catch::Approx(0.4).epsilon(1e-14));
}

TEST_CASE("discretize/undiscretize round trip on random draws") {
  // theta1 enters through 1 - theta1 dt, so bits of theta1 dt below
  // ulp(1) are unrecoverable; valid draws keep theta1 dt away from the
  // cancellation regime (it is bounded by 2 anyway for |phi1| < 1).
  Rng rng(11);
  for (int i = 0; i < 1000; ++i) {
    const double dt = 0.001 + rng.uniform();
    ParamVector p;
    p.theta0 = -2.0 + 4.0 * rng.uniform();
    p.theta1 = (0.02 + 1.5 * rng.uniform()) / dt;
    p.xi = 0.01 + 2.0 * rng.uniform();
    const ParamVector q =
        undiscretize_params(discretize_params(p, dt), dt, p);
    CHECK(q.theta0 == Catch::Approx(p.theta0).epsilon(1e-14).margin(1e-16));
    CHECK(q.theta1 == Catch::Approx(p.theta1).epsilon(1e-14));
    CHECK(q.xi == Catch::Approx(p.xi).epsilon(1e-14));

    DiscreteParams d;
    d.phi0 = -0.5 + rng.uniform();
    d.phi1 = -0.999 + 1.998 * rng.uniform();
    d.sigma_w2 = 1e-6 + rng.uniform();
    const DiscreteParams back =
        discretize_params(undiscretize_params(d, dt), dt);
    CHECK(back.phi0 == Catch::Approx(d.phi0).epsilon(1e-14).margin(1e-16));
    CHECK(back.phi1 == Catch::Approx(d.phi1).epsilon(1e-14));
    CHECK(back.sigma_w2 == Catch::Approx(d.sigma_w2).epsilon(1e-14));
  }
}

TEST_CASE("parameter validation") {
  // DGP of the comparative OU-SV study, given in discrete terms
  ParamVector p;
  p.alpha = 0.01;
  p.beta = 0.3;
  p = undiscretize_params({-0.006, 0.99, 0.0225}, 1.0 / 52.0, p);
  CHECK_NOTHROW(validate_params(ModelSpec::ou_sv(), p));

  ParamVector bad = ckls_params();
  bad.rho_corr = -1.5;
  CHECK_THROWS_WITH(validate_params(ModelSpec::ckls_sv_corr(), bad),
                    Catch::Matchers::ContainsSubstring("rho_corr"));

  ParamVector nanxi = ckls_params();
  nanxi.xi = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_WITH(validate_params(ModelSpec::ckls_sv(), nanxi),
                    Catch::Matchers::ContainsSubstring("xi"));
}

TEST_CASE("seven-component mixture table") {
  const MixtureSpec mix = MixtureSpec::seven();
  CHECK_NOTHROW(mix.validate());
  double ws = 0.0;
  for (double w : mix.weight) ws += w;
  CHECK(std::abs(ws - 1.0) < 1e-12);
  // weighted mean matches the log chi^2_1 mean psi(1) - log 2
  CHECK(mix.mixture_mean() == Catch::Approx(-1.2704).margin(1e-3));
}

TEST_CASE("mixture validation rejects bad specs") {
  MixtureSpec m = MixtureSpec::two(-5.0, 1.0, 4.0);
  CHECK_NOTHROW(m.validate());
  m.weight = {0.6, 0.6};
  CHECK_THROWS_AS(m.validate(), std::invalid_argument);
  MixtureSpec z = MixtureSpec::single(0.0, 0.0);
  CHECK_THROWS_AS(z.validate(), std::invalid_argument);
}
