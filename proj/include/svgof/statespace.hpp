#ifndef SVGOF_STATESPACE_HPP
#define SVGOF_STATESPACE_HPP

// Linearized state-space form of the stochastic volatility model and the
// Gaussian-mixture Kalman filter.
//
// With e_i the sqrt(dt)-normalized drift-regression residuals and
// h = log sigma^2, the observation y_i = log e_i^2 satisfies
//
//   y_i = h_i + 2 gamma log r_i + v_i,       v ~ log chi^2_1,
//   h_{i+1} = phi0 + phi1 h_i + w_i,         w ~ N(0, sigma_w2),
//
// and v is approximated by a Gaussian mixture. The filter below runs in
// one-step-ahead form: the reported gain K_j = phi1 P / Sigma_j folds the
// transition into the update, matching the recursion
//
//   h_{i+1|i} = phi0 + phi1 h_{i|i-1} + sum_j pi_j K_j eps_j,
//   P_{i+1|i} = phi1^2 P_{i|i-1} + sigma_w2 - sum_j pi_j K_j^2 Sigma_j.
//
// A time-varying linearized variant handles correlated Wiener errors: the
// state shock gains the term rho sigma_w e exp(-h/2) r^{-gamma}, the
// propagated variance uses the derivative g(h) = phi1 - shock/2 and the
// innovation variance shrinks to sigma_w2 (1 - rho^2).

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "svgof/models.hpp"
#include "svgof/simulate.hpp"
#include "svgof/util.hpp"

namespace svgof {

// log chi^2_1 density: f(x) = (2 pi)^{-1/2} exp(-(exp(x) - x)/2).
inline double logchi2_logpdf(double x) {
  return -0.5 * kLog2Pi - 0.5 * (std::exp(x) - x);
}

inline double logchi2_pdf(double x) { return std::exp(logchi2_logpdf(x)); }

inline double mixture_pdf(const MixtureSpec& mix, double x) {
  mix.validate();
  double f = 0.0;
  for (std::size_t j = 0; j < mix.size(); ++j)
    f += mix.weight[j] * normal_pdf(x, mix.mu[j], mix.var[j]);
  return f;
}

struct OlsDriftFit {
  double alpha = 0.0;
  double beta = 0.0;
  double se_alpha = 0.0;
  double se_beta = 0.0;
  std::vector<double> e;  // e_i = [r_{i+1} - alpha dt - (1 - beta dt) r_i]/sqrt(dt)
};

// First-stage drift regression u_i = (r_{i+1} - r_i)/dt on (1, r_i).
inline OlsDriftFit ols_drift_residuals(const Path& path) {
  const std::size_t n = path.n_steps();
  if (n < 3)
    throw std::invalid_argument("ols_drift_residuals: need at least 3 steps");
  double sr = 0.0, srr = 0.0, su = 0.0, sru = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = path.r[i];
    const double u = (path.r[i + 1] - path.r[i]) / path.dt;
    sr += r;
    srr += r * r;
    su += u;
    sru += r * u;
  }
  const double nn = double(n);
  const double det = nn * srr - sr * sr;
  const double rvar = srr / nn - (sr / nn) * (sr / nn);
  if (!(rvar > 1e-14 * std::max(1.0, srr / nn)))
    throw std::runtime_error("ols_drift_residuals: degenerate regressor");
  const double slope = (nn * sru - sr * su) / det;
  const double icept = (su - slope * sr) / nn;

  OlsDriftFit fit;
  fit.alpha = icept;
  fit.beta = -slope;
  fit.e.resize(n);
  const double sqrt_dt = std::sqrt(path.dt);
  double rss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double resid_u = (path.r[i + 1] - path.r[i]) / path.dt -
                           (fit.alpha - fit.beta * path.r[i]);
    fit.e[i] = resid_u * sqrt_dt;
    rss += resid_u * resid_u;
  }
  const double s2 = rss / double(n - 2);
  fit.se_alpha = std::sqrt(s2 * srr / det);
  fit.se_beta = std::sqrt(s2 * nn / det);
  return fit;
}

struct LinearizedSeries {
  std::vector<double> y;      // log(max(e^2, floor))
  std::vector<double> log_r;  // left-point log state; empty without level effect
  std::vector<double> e;      // source residuals
  std::size_t floor_count = 0;

  std::size_t size() const { return y.size(); }
};

// y_i = log(max(e_i^2, floor)). Pass the left-point state series r_left
// (same length as e) when the model has a level effect.
inline LinearizedSeries log_square_transform(std::span<const double> e,
                                             double floor = 1e-12,
                                             std::span<const double> r_left = {}) {
  if (!(floor > 0.0))
    throw std::invalid_argument("log_square_transform: floor must be > 0");
  if (!r_left.empty() && r_left.size() != e.size())
    throw std::invalid_argument("log_square_transform: length mismatch");
  LinearizedSeries s;
  s.e.assign(e.begin(), e.end());
  s.y.resize(e.size());
  for (std::size_t i = 0; i < e.size(); ++i) {
    double e2 = e[i] * e[i];
    if (e2 < floor) {
      e2 = floor;
      ++s.floor_count;
    }
    s.y[i] = std::log(e2);
  }
  if (!r_left.empty()) {
    s.log_r.resize(r_left.size());
    for (std::size_t i = 0; i < r_left.size(); ++i)
      s.log_r[i] = std::log(r_left[i]);
  }
  return s;
}

struct H0Prior {
  double m0 = 0.0;
  double c0 = 1.0;
};

struct KfParams {
  double phi0 = 0.0;
  double phi1 = 0.0;
  double sigma_w2 = 0.0;
  double gamma = 0.0;  // level-effect exponent; 0 disables the offset
  double rho = 0.0;    // Wiener correlation; used by the corr filter only
};

struct FilterOutput {
  std::size_t n = 0;
  std::size_t J = 0;
  std::vector<double> h_pred, P_pred, h_filt, P_filt, loglik_step, offset;
  // Per-component arrays, indexed [i*J + j].
  std::vector<double> innov, innov_var, gain, post_weight;
  double loglik = 0.0;
  KfParams params;
  MixtureSpec mix;
};

namespace detail {

// Default h0 prior: m0 = mean(y - offset) - mixture mean, c0 = var(y - offset).
inline H0Prior default_prior(const LinearizedSeries& s, const KfParams& p,
                             const MixtureSpec& mix) {
  const std::size_t n = s.size();
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double v = s.y[i];
    if (p.gamma != 0.0 && !s.log_r.empty()) v -= 2.0 * p.gamma * s.log_r[i];
    m += v;
  }
  m /= double(n);
  double c = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double v = s.y[i];
    if (p.gamma != 0.0 && !s.log_r.empty()) v -= 2.0 * p.gamma * s.log_r[i];
    c += (v - m) * (v - m);
  }
  c = n > 1 ? c / double(n - 1) : 1.0;
  return {m - mix.mixture_mean(), c};
}

template <bool Record, bool Corr>
double kf_core(const LinearizedSeries& s, const KfParams& p,
               const MixtureSpec& mix, std::optional<H0Prior> prior,
               FilterOutput* out) {
  const std::size_t n = s.size();
  const std::size_t J = mix.size();
  if (n == 0) throw std::invalid_argument("kf_filter: empty series");
  if (p.sigma_w2 < 0.0)
    throw std::invalid_argument("kf_filter: sigma_w2 must be >= 0");
  const bool offset_on = p.gamma != 0.0 && !s.log_r.empty();
  if constexpr (Corr) {
    if (!(std::abs(p.rho) < 1.0))
      throw std::domain_error("kf_corr_filter: |rho| must be < 1");
    if (s.log_r.size() != n || s.e.size() != n)
      throw std::invalid_argument("kf_corr_filter: needs residuals and state");
  }
  if (Corr || offset_on) {
    for (std::size_t i = 0; i < n; ++i) {
      if (!std::isfinite(s.log_r[i]))
        throw std::domain_error("kf_filter: state r <= 0 at step " +
                                std::to_string(i));
    }
  }

  const H0Prior pr = prior ? *prior : default_prior(s, p, mix);
  if (pr.c0 < 0.0) throw std::invalid_argument("kf_filter: c0 must be >= 0");

  if constexpr (Record) {
    out->n = n;
    out->J = J;
    out->h_pred.resize(n);
    out->P_pred.resize(n);
    out->h_filt.resize(n);
    out->P_filt.resize(n);
    out->loglik_step.resize(n);
    out->offset.resize(n);
    out->innov.resize(n * J);
    out->innov_var.resize(n * J);
    out->gain.resize(n * J);
    out->post_weight.resize(n * J);
    out->params = p;
    out->mix = mix;
  }

  double log_pi[16];
  double lw[16];
  if (J > 16) throw std::invalid_argument("kf_filter: too many components");
  for (std::size_t j = 0; j < J; ++j) log_pi[j] = std::log(mix.weight[j]);

  const double sigma_w = std::sqrt(p.sigma_w2);
  const double trans_var =
      Corr ? p.sigma_w2 * (1.0 - p.rho * p.rho) : p.sigma_w2;

  double hp = pr.m0;
  double Pp = pr.c0;
  double loglik = 0.0;

  for (std::size_t i = 0; i < n; ++i) {
    const double off = offset_on ? 2.0 * p.gamma * s.log_r[i] : 0.0;

    double lmax = -1e300;
    for (std::size_t j = 0; j < J; ++j) {
      const double Sig = Pp + mix.var[j];
      if (!(Sig > 0.0)) {
        if constexpr (Record)
          throw std::runtime_error("kf_filter: degenerate innovation variance");
        else
          return -std::numeric_limits<double>::infinity();
      }
      const double eps = s.y[i] - hp - off - mix.mu[j];
      lw[j] = log_pi[j] - 0.5 * (kLog2Pi + std::log(Sig) + eps * eps / Sig);
      if (lw[j] > lmax) lmax = lw[j];
    }
    double sum = 0.0;
    for (std::size_t j = 0; j < J; ++j) sum += std::exp(lw[j] - lmax);
    const double ll_i = lmax + std::log(sum);

    double mean_upd = 0.0;
    double var_upd = 0.0;
    for (std::size_t j = 0; j < J; ++j) {
      const double Sig = Pp + mix.var[j];
      const double eps = s.y[i] - hp - off - mix.mu[j];
      const double post = std::exp(lw[j] - ll_i);
      mean_upd += post * (Pp / Sig) * eps;
      var_upd += post * Pp * Pp / Sig;
      if constexpr (Record) {
        out->innov[i * J + j] = eps;
        out->innov_var[i * J + j] = Sig;
        out->gain[i * J + j] = p.phi1 * Pp / Sig;
        out->post_weight[i * J + j] = post;
      }
    }
    const double h_filt = hp + mean_upd;
    const double P_filt = Pp - var_upd;

    if constexpr (Record) {
      out->h_pred[i] = hp;
      out->P_pred[i] = Pp;
      out->h_filt[i] = h_filt;
      out->P_filt[i] = P_filt;
      out->loglik_step[i] = ll_i;
      out->offset[i] = off;
    }
    loglik += ll_i;

    if constexpr (Corr) {
      const double shock = p.rho * sigma_w * s.e[i] *
                           std::exp(-0.5 * h_filt - p.gamma * s.log_r[i]);
      const double g = p.phi1 - 0.5 * shock;
      hp = p.phi0 + p.phi1 * h_filt + shock;
      Pp = g * g * P_filt + trans_var;
    } else {
      hp = p.phi0 + p.phi1 * h_filt;
      Pp = p.phi1 * p.phi1 * P_filt + trans_var;
    }
    if (!std::isfinite(hp) || !std::isfinite(Pp)) {
      if constexpr (Record)
        throw std::runtime_error("kf_filter: state diverged at step " +
                                 std::to_string(i));
      else
        return -std::numeric_limits<double>::infinity();
    }
  }
  if constexpr (Record) out->loglik = loglik;
  return loglik;
}

}  // namespace detail

inline FilterOutput kf_filter(const LinearizedSeries& s, const KfParams& p,
                              const MixtureSpec& mix,
                              std::optional<H0Prior> prior = {}) {
  mix.validate();
  FilterOutput out;
  detail::kf_core<true, false>(s, p, mix, prior, &out);
  return out;
}

inline double kf_loglik(const LinearizedSeries& s, const KfParams& p,
                        const MixtureSpec& mix,
                        std::optional<H0Prior> prior = {}) {
  return detail::kf_core<false, false>(s, p, mix, prior, nullptr);
}

// Time-varying linearized filter for the correlated-error model. The
// series must carry both the residuals e and the left-point log state.
inline FilterOutput kf_corr_filter(const LinearizedSeries& s, const KfParams& p,
                                   const MixtureSpec& mix,
                                   std::optional<H0Prior> prior = {}) {
  mix.validate();
  FilterOutput out;
  detail::kf_core<true, true>(s, p, mix, prior, &out);
  return out;
}

inline double kf_corr_loglik(const LinearizedSeries& s, const KfParams& p,
                             const MixtureSpec& mix,
                             std::optional<H0Prior> prior = {}) {
  return detail::kf_core<false, true>(s, p, mix, prior, nullptr);
}

// Filtered volatility series exp(h_{i|i}).
inline std::vector<double> volatility_estimate(const FilterOutput& f) {
  std::vector<double> s2(f.n);
  for (std::size_t i = 0; i < f.n; ++i) s2[i] = std::exp(f.h_filt[i]);
  return s2;
}

}  // namespace svgof

#endif  // SVGOF_STATESPACE_HPP
