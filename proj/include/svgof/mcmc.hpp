#ifndef SVGOF_MCMC_HPP
#define SVGOF_MCMC_HPP

// Bayesian estimation of (phi0, phi1, sigma_w2) and the latent
// log-volatility path by Gibbs sampling. Latent states are updated
// one at a time with an independence Metropolis-Hastings step whose
// proposal N(mu~, nu^2) comes from a Taylor expansion of the
// log chi^2 likelihood around the conditional prior mean; the
// hyperparameters use the conjugate Normal-Inverse-Gamma update of the
// AR(1) regression of h_t on (1, h_{t-1}).
//
// State layout: s[0..n] with s[0] the unobserved pre-sample state
// (prior N(m0, c0)) and e[k] observed on s[k+1].

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "svgof/rng.hpp"
#include "svgof/util.hpp"

namespace svgof {

struct McmcConfig {
  int iterations = 5000;
  int burn_in = 1000;
  int thin_h = 10;                      // retained h-path thinning
  std::optional<double> m0;             // default log(sample var of e)
  double c0 = 10.0;
  std::array<double, 2> phi_prior_mean{0.0, 0.95};
  std::array<double, 2> v0_diag{10.0, 10.0};
  double nu0 = 10.0;
  double s0sq = 0.02;
  std::uint64_t seed = 0;

  void validate() const {
    if (burn_in < 0) throw std::invalid_argument("McmcConfig: burn_in < 0");
    if (iterations <= burn_in)
      throw std::invalid_argument("McmcConfig: no iterations after burn-in");
    if (thin_h < 1) throw std::invalid_argument("McmcConfig: thin_h < 1");
    if (!(c0 > 0.0) || !(nu0 > 0.0) || !(s0sq > 0.0) || !(v0_diag[0] > 0.0) ||
        !(v0_diag[1] > 0.0))
      throw std::invalid_argument("McmcConfig: priors must be positive");
  }
};

struct McmcOutput {
  std::vector<double> phi0, phi1, sigma_w2;  // retained draws
  std::vector<std::vector<double>> h_paths;  // thinned retained paths
  std::vector<double> accept_rate;           // per latent state s[1..n]
  std::size_t n_nonstationary = 0;           // draws with |phi1| >= 1

  PosteriorSummary phi0_summary() const { return summarize(phi0); }
  PosteriorSummary phi1_summary() const { return summarize(phi1); }
  PosteriorSummary sigw2_summary() const { return summarize(sigma_w2); }
};

// h_{t0} | h_{t1}: N(m1, c1) with c1 = (1/c0 + phi1^2/sigma_w2)^{-1},
// m1 = c1 [m0/c0 + phi1 (h1 - phi0)/sigma_w2].
inline double sample_h0(double m0, double c0, double phi0, double phi1,
                        double sigma_w2, double h1, Rng& rng) {
  if (!(c0 > 0.0) || !(sigma_w2 > 0.0))
    throw std::domain_error("sample_h0: variances must be > 0");
  const double c1 = 1.0 / (1.0 / c0 + phi1 * phi1 / sigma_w2);
  const double m1 = c1 * (m0 / c0 + phi1 * (h1 - phi0) / sigma_w2);
  return m1 + std::sqrt(c1) * rng.normal();
}

struct HMoments {
  double mean = 0.0;
  double var = 0.0;
};

// Conditional prior of an interior state given both neighbours, or of
// the terminal state given its predecessor.
inline HMoments conditional_h_moments(double h_prev,
                                      std::optional<double> h_next,
                                      double phi0, double phi1,
                                      double sigma_w2) {
  if (!h_next) return {phi0 + phi1 * h_prev, sigma_w2};
  const double d = 1.0 + phi1 * phi1;
  return {((1.0 - phi1) / d) * phi0 + (phi1 / d) * (h_prev + *h_next),
          sigma_w2 / d};
}

struct MhDraw {
  double h = 0.0;
  bool accepted = false;
};

// Independence MH for one latent state with observation e.
inline MhDraw mh_sample_h(double h_current, double e, double mu, double nu2,
                          Rng& rng) {
  if (!(nu2 > 0.0)) throw std::domain_error("mh_sample_h: nu2 must be > 0");
  const double e2 = e * e;
  const double mu_tilde = mu + 0.5 * nu2 * (e2 * std::exp(-mu) - 1.0);
  const double proposal = mu_tilde + std::sqrt(nu2) * rng.normal();

  auto log_target = [&](double h) {
    return -0.5 * (h - mu) * (h - mu) / nu2 - 0.5 * h -
           0.5 * e2 * std::exp(-h);
  };
  auto log_proposal = [&](double h) {
    return -0.5 * (h - mu_tilde) * (h - mu_tilde) / nu2;
  };
  const double log_alpha = log_target(proposal) - log_target(h_current) -
                           log_proposal(proposal) + log_proposal(h_current);
  if (std::log(rng.uniform_pos()) < log_alpha) return {proposal, true};
  return {h_current, false};
}

struct PhiSigmaDraw {
  double phi0 = 0.0;
  double phi1 = 0.0;
  double sigma_w2 = 0.0;
};

// Conjugate NIG draw: sigma_w2 ~ IG(nu1/2, nu1 s1^2 / 2) then
// phi | sigma_w2 ~ N(phi1vec, sigma_w2 V1), regression of s[i] on
// (1, s[i-1]) for i = 1..n.
inline PhiSigmaDraw posterior_phi_sigma(std::span<const double> s,
                                        const McmcConfig& cfg, Rng& rng) {
  const std::size_t len = s.size();
  if (len < 3)
    throw std::invalid_argument("posterior_phi_sigma: path too short");
  const std::size_t n = len - 1;

  double sx = 0.0, sxx = 0.0, sy = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 1; i <= n; ++i) {
    const double x = s[i - 1];
    const double y = s[i];
    sx += x;
    sxx += x * x;
    sy += y;
    sxy += x * y;
    syy += y * y;
  }
  const double v0inv0 = 1.0 / cfg.v0_diag[0];
  const double v0inv1 = 1.0 / cfg.v0_diag[1];
  // A = V0^{-1} + X'X
  const double a = v0inv0 + double(n);
  const double b = sx;
  const double c = v0inv1 + sxx;
  const double det = a * c - b * b;
  if (!(std::abs(det) > 1e-300))
    throw std::runtime_error("posterior_phi_sigma: singular design");
  const double V1_00 = c / det, V1_01 = -b / det, V1_11 = a / det;

  const double rhs0 = v0inv0 * cfg.phi_prior_mean[0] + sy;
  const double rhs1 = v0inv1 * cfg.phi_prior_mean[1] + sxy;
  const double p0 = V1_00 * rhs0 + V1_01 * rhs1;
  const double p1 = V1_01 * rhs0 + V1_11 * rhs1;

  const double ssr = syy - 2.0 * (p0 * sy + p1 * sxy) +
                     (p0 * p0 * double(n) + 2.0 * p0 * p1 * sx + p1 * p1 * sxx);
  const double d0 = p0 - cfg.phi_prior_mean[0];
  const double d1 = p1 - cfg.phi_prior_mean[1];
  const double nu1 = cfg.nu0 + double(n);
  const double nu1s1 =
      cfg.nu0 * cfg.s0sq + ssr + d0 * d0 * v0inv0 + d1 * d1 * v0inv1;

  const double sigma_w2 = rng.inverse_gamma(0.5 * nu1, 0.5 * nu1s1);

  // Cholesky of sigma_w2 * V1
  const double l00 = std::sqrt(sigma_w2 * V1_00);
  const double l10 = sigma_w2 * V1_01 / l00;
  const double l11 = std::sqrt(std::max(0.0, sigma_w2 * V1_11 - l10 * l10));
  const double z0 = rng.normal();
  const double z1 = rng.normal();
  return {p0 + l00 * z0, p1 + l10 * z0 + l11 * z1, sigma_w2};
}

// Full Gibbs sampler on a residual series.
inline McmcOutput gibbs_run(std::span<const double> e, const McmcConfig& cfg) {
  cfg.validate();
  const std::size_t n = e.size();
  if (n < 3) throw std::invalid_argument("gibbs_run: need >= 3 residuals");
  for (double v : e)
    if (!std::isfinite(v))
      throw std::invalid_argument("gibbs_run: non-finite residual");

  Rng rng = Rng::stream(cfg.seed, 0x6d636d63);

  const double evar = std::max(variance(e), 1e-12);
  const double m0 = cfg.m0.value_or(std::log(evar));

  std::vector<double> s(n + 1, std::log(evar));
  double phi0 = cfg.phi_prior_mean[0];
  double phi1 = cfg.phi_prior_mean[1];
  double sigma_w2 = cfg.s0sq;

  McmcOutput out;
  const std::size_t retained = std::size_t(cfg.iterations - cfg.burn_in);
  out.phi0.reserve(retained);
  out.phi1.reserve(retained);
  out.sigma_w2.reserve(retained);
  std::vector<std::size_t> accept(n, 0);

  for (int sweep = 0; sweep < cfg.iterations; ++sweep) {
    s[0] = sample_h0(m0, cfg.c0, phi0, phi1, sigma_w2, s[1], rng);
    for (std::size_t i = 1; i <= n; ++i) {
      const HMoments mom =
          i < n ? conditional_h_moments(s[i - 1], s[i + 1], phi0, phi1,
                                        sigma_w2)
                : conditional_h_moments(s[i - 1], std::nullopt, phi0, phi1,
                                        sigma_w2);
      const MhDraw d = mh_sample_h(s[i], e[i - 1], mom.mean, mom.var, rng);
      s[i] = d.h;
      if (d.accepted) ++accept[i - 1];
    }
    const PhiSigmaDraw draw = posterior_phi_sigma(s, cfg, rng);
    sigma_w2 = draw.sigma_w2;
    phi0 = draw.phi0;
    phi1 = draw.phi1;
    if (!std::isfinite(phi0) || !std::isfinite(phi1) ||
        !std::isfinite(sigma_w2) || !std::isfinite(s[n])) {
      throw std::runtime_error("gibbs_run: chain diverged at sweep " +
                               std::to_string(sweep));
    }
    if (sweep >= cfg.burn_in) {
      out.phi0.push_back(phi0);
      out.phi1.push_back(phi1);
      out.sigma_w2.push_back(sigma_w2);
      if (std::abs(phi1) >= 1.0) ++out.n_nonstationary;
      if ((sweep - cfg.burn_in) % cfg.thin_h == 0)
        out.h_paths.push_back(s);
    }
  }
  out.accept_rate.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    out.accept_rate[i] = double(accept[i]) / double(cfg.iterations);
  return out;
}

}  // namespace svgof

#endif  // SVGOF_MCMC_HPP
