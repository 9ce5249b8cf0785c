#ifndef SVGOF_PARTICLE_HPP
#define SVGOF_PARTICLE_HPP

// Liu-West auxiliary particle filter with kernel-shrinkage parameter
// learning for the discretized SV model
//
//   y_t = h_t + v_t,                 v ~ log chi^2_1,
//   h_t = phi0 + phi1 h_{t-1} + w_t, w ~ N(0, sigma_w2).
//
// Parameter particles live in transformed coordinates
// (phi0, atanh phi1, log sigma_w2) so the kernel step cannot leave the
// valid region. Kernel locations are m_j = a theta_j + (1-a) theta_bar
// with a^2 + h^2 = 1; both resampling stages of the auxiliary filter
// are carried out each step.

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "svgof/rng.hpp"
#include "svgof/statespace.hpp"
#include "svgof/util.hpp"

namespace svgof {

enum class Resampling { Multinomial, Systematic };

// Draws weights.size() indices with expected count l * w_j.
inline std::vector<std::size_t> resample(std::span<const double> weights,
                                         Resampling scheme, Rng& rng) {
  const std::size_t l = weights.size();
  if (l == 0) throw std::invalid_argument("resample: empty weights");
  double total = 0.0;
  for (double w : weights) {
    if (w < 0.0 || !std::isfinite(w))
      throw std::invalid_argument("resample: invalid weight");
    total += w;
  }
  if (!(total > 0.0)) throw std::invalid_argument("resample: all-zero weights");

  std::vector<std::size_t> idx(l);
  if (scheme == Resampling::Systematic) {
    const double step = total / double(l);
    double u = rng.uniform() * step;
    double cum = weights[0];
    std::size_t j = 0;
    for (std::size_t i = 0; i < l; ++i) {
      while (u > cum && j + 1 < l) cum += weights[++j];
      idx[i] = j;
      u += step;
    }
  } else {
    std::vector<double> cum(l);
    double c = 0.0;
    for (std::size_t j = 0; j < l; ++j) cum[j] = (c += weights[j]);
    for (std::size_t i = 0; i < l; ++i) {
      const double u = rng.uniform() * total;
      std::size_t lo = 0, hi = l - 1;
      while (lo < hi) {
        const std::size_t mid = (lo + hi) / 2;
        if (cum[mid] > u) hi = mid; else lo = mid + 1;
      }
      idx[i] = lo;
    }
  }
  return idx;
}

struct LwConfig {
  std::size_t l = 5000;
  double a = 0.98;  // shrinkage; kernel dispersion h^2 = 1 - a^2
  Resampling scheme = Resampling::Systematic;
  std::uint64_t seed = 0;
  // Observation log-density as a function of (y - h); defaults to the
  // exact log chi^2_1 density.
  std::function<double(double)> obs_logpdf;
};

struct LwPrior {
  // Draws (phi0, atanh phi1, log sigma_w2).
  std::function<std::array<double, 3>(Rng&)> draw_theta;
  std::function<double(Rng&)> draw_h;
};

// Default prior: phi0 ~ N(0, 0.1^2), phi1 ~ U(0.7, 0.995),
// sigma_w2 ~ LogNormal(log 0.02, 1), h ~ N(mean(y) + 1.2704, 1).
inline LwPrior default_lw_prior(std::span<const double> y) {
  const double h_loc = mean(y) + 1.2704;
  LwPrior prior;
  prior.draw_theta = [](Rng& rng) -> std::array<double, 3> {
    return {0.1 * rng.normal(),
            std::atanh(0.7 + 0.295 * rng.uniform()),
            std::log(0.02) + rng.normal()};
  };
  prior.draw_h = [h_loc](Rng& rng) { return h_loc + rng.normal(); };
  return prior;
}

struct LwStep {
  double ess = 0.0;
  double phi0 = 0.0, phi1 = 0.0, sigw2 = 0.0;  // posterior means
  double h_mean = 0.0;                          // E[h_t | Y_t]
};

struct LwResult {
  std::vector<LwStep> steps;
  PosteriorSummary phi0_summary, phi1_summary, sigw2_summary;
};

namespace detail {

// Cholesky of a 3x3 PSD matrix; rank-deficient directions collapse to 0.
inline std::array<std::array<double, 3>, 3> chol3(
    const std::array<std::array<double, 3>, 3>& m) {
  std::array<std::array<double, 3>, 3> L{};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j <= i; ++j) {
      double s = m[i][j];
      for (int k = 0; k < j; ++k) s -= L[i][k] * L[j][k];
      if (i == j) {
        L[i][j] = s > 0.0 ? std::sqrt(s) : 0.0;
      } else {
        L[i][j] = L[j][j] > 0.0 ? s / L[j][j] : 0.0;
      }
    }
  }
  return L;
}

}  // namespace detail

inline LwResult lw_filter(std::span<const double> y, const LwPrior& prior,
                          const LwConfig& cfg) {
  if (cfg.l < 100) throw std::invalid_argument("lw_filter: l must be >= 100");
  if (!(cfg.a > 0.0 && cfg.a < 1.0))
    throw std::invalid_argument("lw_filter: a must be in (0, 1)");
  if (y.empty()) throw std::invalid_argument("lw_filter: empty series");
  std::function<double(double)> obs = cfg.obs_logpdf;
  if (!obs) obs = [](double v) { return logchi2_logpdf(v); };

  const std::size_t l = cfg.l;
  const double h2 = 1.0 - cfg.a * cfg.a;
  Rng rng = Rng::stream(cfg.seed, 0x4c57);

  std::vector<std::array<double, 3>> theta(l);  // transformed
  std::vector<double> state(l);
  for (std::size_t j = 0; j < l; ++j) {
    theta[j] = prior.draw_theta(rng);
    state[j] = prior.draw_h(rng);
  }

  std::vector<double> logw(l), w(l), mu_hat(l);
  std::vector<std::array<double, 3>> kernel_loc(l), theta_new(l);
  std::vector<double> state_new(l);

  LwResult out;
  out.steps.reserve(y.size());

  for (std::size_t t = 0; t < y.size(); ++t) {
    // Moments of the (equal-weight) parameter cloud.
    std::array<double, 3> bar{};
    for (const auto& th : theta)
      for (int k = 0; k < 3; ++k) bar[k] += th[k];
    for (int k = 0; k < 3; ++k) bar[k] /= double(l);
    std::array<std::array<double, 3>, 3> V{};
    for (const auto& th : theta)
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j <= i; ++j)
          V[i][j] += (th[i] - bar[i]) * (th[j] - bar[j]);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j <= i; ++j) {
        V[i][j] /= double(l);
        V[j][i] = V[i][j];
      }
    std::array<std::array<double, 3>, 3> hV{};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) hV[i][j] = h2 * V[i][j];
    const auto L = detail::chol3(hV);

    // Stage 1: look-ahead weights at the prior point estimates.
    for (std::size_t j = 0; j < l; ++j) {
      for (int k = 0; k < 3; ++k)
        kernel_loc[j][k] = cfg.a * theta[j][k] + (1.0 - cfg.a) * bar[k];
      const double phi0 = theta[j][0];
      const double phi1 = std::tanh(theta[j][1]);
      mu_hat[j] = phi0 + phi1 * state[j];
      logw[j] = obs(y[t] - mu_hat[j]);
    }
    double lse = logsumexp(logw);
    if (!std::isfinite(lse))
      throw std::runtime_error("lw_filter: non-finite likelihood at step " +
                               std::to_string(t));
    for (std::size_t j = 0; j < l; ++j) w[j] = std::exp(logw[j] - lse);
    const auto idx1 = resample(w, cfg.scheme, rng);

    // Propagate parameters through the shrinkage kernel, then states.
    for (std::size_t j = 0; j < l; ++j) {
      const std::size_t k = idx1[j];
      const double z0 = rng.normal(), z1 = rng.normal(), z2 = rng.normal();
      theta_new[j][0] = kernel_loc[k][0] + L[0][0] * z0;
      theta_new[j][1] = kernel_loc[k][1] + L[1][0] * z0 + L[1][1] * z1;
      theta_new[j][2] =
          kernel_loc[k][2] + L[2][0] * z0 + L[2][1] * z1 + L[2][2] * z2;
      const double phi0 = theta_new[j][0];
      const double phi1 = std::tanh(theta_new[j][1]);
      const double sw = std::exp(0.5 * theta_new[j][2]);
      state_new[j] = phi0 + phi1 * state[k] + sw * rng.normal();
      // Stage 2 weight: correct the look-ahead approximation.
      logw[j] = obs(y[t] - state_new[j]) - obs(y[t] - mu_hat[k]);
    }
    lse = logsumexp(logw);
    if (!std::isfinite(lse))
      throw std::runtime_error("lw_filter: non-finite likelihood at step " +
                               std::to_string(t));
    double sumsq = 0.0;
    for (std::size_t j = 0; j < l; ++j) {
      w[j] = std::exp(logw[j] - lse);
      sumsq += w[j] * w[j];
    }
    const double ess = 1.0 / sumsq;
    if (ess < 2.0)
      throw std::runtime_error("lw_filter: weight degeneracy at step " +
                               std::to_string(t));

    LwStep step;
    step.ess = ess;
    for (std::size_t j = 0; j < l; ++j) {
      step.phi0 += w[j] * theta_new[j][0];
      step.phi1 += w[j] * std::tanh(theta_new[j][1]);
      step.sigw2 += w[j] * std::exp(theta_new[j][2]);
      step.h_mean += w[j] * state_new[j];
    }
    out.steps.push_back(step);

    const auto idx2 = resample(w, cfg.scheme, rng);
    for (std::size_t j = 0; j < l; ++j) {
      theta[j] = theta_new[idx2[j]];
      state[j] = state_new[idx2[j]];
    }
  }

  std::vector<double> phi0s(l), phi1s(l), sws(l);
  for (std::size_t j = 0; j < l; ++j) {
    phi0s[j] = theta[j][0];
    phi1s[j] = std::tanh(theta[j][1]);
    sws[j] = std::exp(theta[j][2]);
  }
  out.phi0_summary = summarize(phi0s);
  out.phi1_summary = summarize(phi1s);
  out.sigw2_summary = summarize(sws);
  return out;
}

}  // namespace svgof

#endif  // SVGOF_PARTICLE_HPP
