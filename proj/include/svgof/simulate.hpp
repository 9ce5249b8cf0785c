#ifndef SVGOF_SIMULATE_HPP
#define SVGOF_SIMULATE_HPP

// Euler-Maruyama simulation of the two-factor models. The volatility
// entering the observed-state increment is the left-point value
// sigma_{t_i}, i.e.
//
//   r_{i+1} = r_i + m1(r_i) dt + sigma_i nu1(r_i) sqrt(dt) z1,
//   h_{i+1} = phi0 + phi1 h_i + xi sqrt(dt) z2,      h = log sigma^2,
//
// with corr(z1, z2) = rho_corr. A burn-in prefix is simulated at the
// same dt and discarded.

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "svgof/models.hpp"
#include "svgof/rng.hpp"

namespace svgof {

struct Path {
  double dt = 0.0;
  std::vector<double> t;
  std::vector<double> r;
  std::vector<double> sigma2;  // empty for ingested data
  std::uint64_t seed = 0;
  std::size_t reflected = 0;  // r <= 0 reflections during simulation

  std::size_t n_steps() const { return r.empty() ? 0 : r.size() - 1; }

  bool has_latent() const { return !sigma2.empty(); }
};

struct SimConfig {
  std::size_t n = 0;          // number of steps; output has n+1 points
  std::size_t burn_in = 1000;
  double dt = 1.0 / 52.0;
  std::optional<double> r0;   // default alpha/beta
  std::optional<double> h0;   // default phi0/(1-phi1); 0 if phi1 == 1
  std::uint64_t seed = 0;

  void validate() const {
    if (n < 2) throw std::invalid_argument("SimConfig: n must be >= 2");
    if (!(dt > 0.0)) throw std::invalid_argument("SimConfig: dt must be > 0");
  }
};

// Correlated standard-normal pairs: z2 = rho z1 + sqrt(1-rho^2) z_perp.
inline std::vector<std::array<double, 2>> wiener_increments(std::size_t count,
                                                            double rho,
                                                            std::uint64_t seed) {
  if (!(std::abs(rho) <= 1.0))
    throw std::domain_error("wiener_increments: |rho| must be <= 1");
  Rng rng(seed);
  const double root = std::sqrt(1.0 - rho * rho);
  std::vector<std::array<double, 2>> z(count);
  for (auto& p : z) {
    const double z1 = rng.normal();
    const double zp = rng.normal();
    p = {z1, rho * z1 + root * zp};
  }
  return z;
}

namespace detail {

inline double default_r0(const ParamVector& p) {
  return p.beta != 0.0 ? p.alpha / p.beta : 0.0;
}

inline double default_h0(const ModelSpec& spec, const ParamVector& p,
                         double dt) {
  if (!spec.has_vol_drift()) return 0.0;
  const DiscreteParams d = discretize_params(p, dt);
  return d.phi1 != 1.0 ? d.phi0 / (1.0 - d.phi1) : 0.0;
}

}  // namespace detail

// Euler path driven by caller-supplied increment pairs (burn_in + n of
// them). Public entry points generate the pairs from the seed; tests use
// this overload for coupled-increment constructions.
inline Path simulate_path_with_increments(
    const ModelSpec& spec, const ParamVector& p, const SimConfig& cfg,
    std::span<const std::array<double, 2>> z) {
  cfg.validate();
  validate_params(spec, p);
  if (z.size() < cfg.burn_in + cfg.n)
    throw std::invalid_argument("simulate_path: too few increments");

  const DiscreteParams d = discretize_params(p, cfg.dt);
  const double sqrt_dt = std::sqrt(cfg.dt);
  const bool reflect = spec.has_level_effect();

  double r = cfg.r0.value_or(detail::default_r0(p));
  double h = cfg.h0.value_or(detail::default_h0(spec, p, cfg.dt));

  Path path;
  path.dt = cfg.dt;
  path.seed = cfg.seed;
  path.t.reserve(cfg.n + 1);
  path.r.reserve(cfg.n + 1);
  path.sigma2.reserve(cfg.n + 1);

  const std::size_t total = cfg.burn_in + cfg.n;
  for (std::size_t i = 0; i <= total; ++i) {
    if (i >= cfg.burn_in) {
      path.t.push_back(double(i - cfg.burn_in) * cfg.dt);
      path.r.push_back(r);
      path.sigma2.push_back(std::exp(h));
    }
    if (i == total) break;

    const double sigma = std::exp(0.5 * h);
    const double m = drift_eval(spec, p, r);
    const double s = diffusion_eval(spec, p, r, sigma);
    r = r + m * cfg.dt + s * sqrt_dt * z[i][0];
    // h = -inf encodes an exactly zero-volatility factor (xi = 0 runs);
    // keep it absorbing instead of producing 0 * inf.
    if (std::isinf(h) && h < 0.0 && p.xi == 0.0) {
      h = spec.has_vol_drift() && d.phi1 == 0.0 ? d.phi0 : h;
    } else {
      h = d.phi0 + d.phi1 * h + p.xi * sqrt_dt * z[i][1];
    }
    if (reflect && r <= 0.0) {
      r = std::abs(r);
      ++path.reflected;
    }
    if (!std::isfinite(r)) {
      throw std::runtime_error("simulate_path: state diverged at step " +
                               std::to_string(i));
    }
  }
  return path;
}

// Simulated path; a pure function of (spec, p, cfg).
inline Path simulate_path(const ModelSpec& spec, const ParamVector& p,
                          const SimConfig& cfg) {
  cfg.validate();
  const double rho = spec.has_correlation() ? p.rho_corr : 0.0;
  const auto z = wiener_increments(cfg.burn_in + cfg.n, rho, cfg.seed);
  return simulate_path_with_increments(spec, p, cfg, z);
}

}  // namespace svgof

#endif  // SVGOF_SIMULATE_HPP
