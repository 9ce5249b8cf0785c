#ifndef SVGOF_MLE_HPP
#define SVGOF_MLE_HPP

// Maximum likelihood for the mixture Kalman filter.
//
// The search runs in unconstrained coordinates: phi1 = tanh(u),
// variance-like parameters through log, rho = tanh(w). The TWO_MIX mode
// estimates the mixture components (mu1, var0, var1) jointly; SEVEN_MIX
// keeps the fixed seven-component table and, when the model has a level
// effect, profiles gamma on a [0,3] grid with step 0.01 followed by a
// local golden-section refinement. Warm restarts (bootstrap refits) skip
// the grid and include gamma as a free Nelder-Mead coordinate.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "svgof/models.hpp"
#include "svgof/optim.hpp"
#include "svgof/rng.hpp"
#include "svgof/statespace.hpp"

namespace svgof {

enum class KfMode { TwoMix, SevenMix };

struct MleOptions {
  KfMode mode = KfMode::SevenMix;
  bool estimate_gamma = false;
  double gamma = 0.0;        // fixed offset exponent when !estimate_gamma
  bool fix_state_rw = false; // random-walk state: phi0 = 0, phi1 = 1 fixed
  bool corr = false;         // correlated-error filter; rho estimated
  int multistarts = 5;
  NmOptions nm{};
  std::uint64_t seed = 0;
  std::optional<H0Prior> prior;
  std::optional<std::vector<double>> warm_start;  // transformed coordinates
  bool compute_se = true;
  double gamma_lo = 0.0, gamma_hi = 3.0, gamma_step = 0.01;
};

struct MleResult {
  KfParams params;
  MixtureSpec mix;
  double loglik = -std::numeric_limits<double>::infinity();
  bool converged = false;
  bool at_boundary = false;
  int iterations = 0;
  std::vector<std::string> names;
  std::vector<double> estimates;
  std::vector<double> se;
  std::vector<double> xt;  // optimum in transformed coordinates
};

namespace detail {

struct MleLayout {
  bool fix_rw = false;
  bool two_mix = false;
  bool corr = false;
  bool with_gamma = false;
  double gamma_lo = 0.0;
  double gamma_hi = 3.0;

  std::size_t dim() const {
    return (fix_rw ? 1 : 3) + (two_mix ? 3 : 0) + (corr ? 1 : 0) +
           (with_gamma ? 1 : 0);
  }

  KfParams unpack(const std::vector<double>& x, double gamma_fixed,
                  MixtureSpec* mix) const {
    KfParams p;
    std::size_t k = 0;
    if (fix_rw) {
      p.phi0 = 0.0;
      p.phi1 = 1.0;
      p.sigma_w2 = std::exp(x[k++]);
    } else {
      p.phi0 = x[k++];
      p.phi1 = std::tanh(x[k++]);
      p.sigma_w2 = std::exp(x[k++]);
    }
    if (two_mix) {
      const double mu1 = x[k++];
      const double v0 = std::exp(x[k++]);
      const double v1 = std::exp(x[k++]);
      if (mix) *mix = MixtureSpec::two(mu1, v0, v1);
    }
    if (corr) {
      // tanh rounds to +/-1 for large |x|; keep strictly inside
      constexpr double cap = 1.0 - 1e-10;
      p.rho = std::clamp(std::tanh(x[k++]), -cap, cap);
    }
    p.gamma =
        with_gamma ? std::clamp(x[k++], gamma_lo, gamma_hi) : gamma_fixed;
    return p;
  }
};

inline double mle_objective(const LinearizedSeries& s, const MleLayout& lay,
                            double gamma_fixed, const MixtureSpec& mix7,
                            const std::optional<H0Prior>& prior, bool corr,
                            const std::vector<double>& x) {
  try {
    MixtureSpec mix2;
    const KfParams p =
        lay.unpack(x, gamma_fixed, lay.two_mix ? &mix2 : nullptr);
    const MixtureSpec& mix = lay.two_mix ? mix2 : mix7;
    const double ll = corr ? kf_corr_loglik(s, p, mix, prior)
                           : kf_loglik(s, p, mix, prior);
    double penalty = 0.0;
    if (lay.with_gamma) {
      const double g = x.back();
      const double excess =
          g < lay.gamma_lo ? lay.gamma_lo - g
                           : (g > lay.gamma_hi ? g - lay.gamma_hi : 0.0);
      penalty = 1e3 * excess * excess;
    }
    return std::isfinite(ll) ? -ll + penalty : 1e300;
  } catch (const std::exception&) {
    return 1e300;
  }
}

inline std::vector<double> mle_start(const MleLayout& lay, Rng& rng,
                                     bool randomize) {
  std::vector<double> x;
  auto ru = [&](double lo, double hi) { return lo + (hi - lo) * rng.uniform(); };
  if (lay.fix_rw) {
    x.push_back(randomize ? ru(std::log(1e-4), std::log(0.5))
                          : std::log(2e-2));
  } else {
    x.push_back(randomize ? 0.2 * rng.normal() : 0.0);
    x.push_back(std::atanh(randomize ? ru(0.3, 0.995) : 0.95));
    x.push_back(randomize ? ru(std::log(1e-4), std::log(0.5))
                          : std::log(2e-2));
  }
  if (lay.two_mix) {
    x.push_back(randomize ? ru(-9.0, -2.0) : -5.0);
    x.push_back(randomize ? ru(std::log(0.3), std::log(4.0)) : std::log(1.5));
    x.push_back(randomize ? ru(std::log(1.0), std::log(9.0)) : std::log(5.0));
  }
  if (lay.corr) x.push_back(std::atanh(randomize ? ru(-0.8, 0.8) : -0.2));
  if (lay.with_gamma) x.push_back(randomize ? ru(0.0, 3.0) : 1.5);
  return x;
}

// Multistart Nelder-Mead over a fixed layout.
inline NmResult mle_search(const std::function<double(const std::vector<double>&)>& obj,
                           const MleLayout& lay, const MleOptions& opt,
                           const std::optional<std::vector<double>>& warm,
                           int* iterations) {
  NmResult best;
  Rng rng = Rng::stream(opt.seed, 0x4d4c45);
  const int starts = warm ? 1 : std::max(1, opt.multistarts);
  for (int s = 0; s < starts; ++s) {
    std::vector<double> x0 =
        warm ? *warm : mle_start(lay, rng, /*randomize=*/s > 0);
    NmOptions nm = opt.nm;
    if (warm) nm.init_step = 0.05;
    NmResult r = nelder_mead(obj, std::move(x0), nm);
    *iterations += r.iterations;
    if (r.f < best.f) best = std::move(r);
  }
  return best;
}

inline std::vector<std::vector<double>> invert_spd(
    std::vector<std::vector<double>> a) {
  const std::size_t k = a.size();
  std::vector<std::vector<double>> inv(k, std::vector<double>(k, 0.0));
  for (std::size_t i = 0; i < k; ++i) inv[i][i] = 1.0;
  for (std::size_t col = 0; col < k; ++col) {
    std::size_t piv = col;
    for (std::size_t rr = col + 1; rr < k; ++rr)
      if (std::abs(a[rr][col]) > std::abs(a[piv][col])) piv = rr;
    if (a[piv][col] == 0.0) throw std::runtime_error("singular matrix");
    std::swap(a[piv], a[col]);
    std::swap(inv[piv], inv[col]);
    const double d = a[col][col];
    for (std::size_t j = 0; j < k; ++j) {
      a[col][j] /= d;
      inv[col][j] /= d;
    }
    for (std::size_t rr = 0; rr < k; ++rr) {
      if (rr == col) continue;
      const double f = a[rr][col];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < k; ++j) {
        a[rr][j] -= f * a[col][j];
        inv[rr][j] -= f * inv[col][j];
      }
    }
  }
  return inv;
}

}  // namespace detail

inline MleResult kf_mle(const LinearizedSeries& s, MleOptions opt) {
  if (s.size() < 20)
    throw std::invalid_argument("kf_mle: series too short (need >= 20)");
  if (opt.warm_start && opt.warm_start->empty())
    throw std::invalid_argument("kf_mle: empty warm start");
  const MixtureSpec mix7 = MixtureSpec::seven();

  detail::MleLayout lay;
  lay.fix_rw = opt.fix_state_rw;
  lay.two_mix = opt.mode == KfMode::TwoMix;
  lay.corr = opt.corr;
  // gamma joins the search vector except in the grid-profiled case.
  const bool grid_profile = opt.estimate_gamma && !opt.corr && !opt.warm_start;
  lay.with_gamma = opt.estimate_gamma && !grid_profile;

  MleResult res;
  int iterations = 0;
  NmResult best;
  double gamma_hat = opt.gamma;

  if (grid_profile) {
    // Profile likelihood over gamma: the offset 2 gamma log r is a
    // known-coefficient regressor for each candidate.
    std::optional<std::vector<double>> warm;
    double best_gamma = opt.gamma_lo;
    NmResult best_inner;
    auto profile_at = [&](double g, const std::optional<std::vector<double>>& w)
        -> NmResult {
      auto obj = [&, g](const std::vector<double>& x) {
        return detail::mle_objective(s, lay, g, mix7, opt.prior, opt.corr, x);
      };
      return detail::mle_search(obj, lay, opt, w, &iterations);
    };
    for (double g = opt.gamma_lo; g <= opt.gamma_hi + 1e-12;
         g += opt.gamma_step) {
      NmResult r = profile_at(g, warm);
      warm = r.x;
      if (r.f < best_inner.f) {
        best_inner = r;
        best_gamma = g;
      }
    }
    // Local refinement by golden section around the best grid point.
    double lo = std::max(opt.gamma_lo, best_gamma - opt.gamma_step);
    double hi = std::min(opt.gamma_hi, best_gamma + opt.gamma_step);
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double g1 = hi - gr * (hi - lo), g2 = lo + gr * (hi - lo);
    NmResult r1 = profile_at(g1, best_inner.x);
    NmResult r2 = profile_at(g2, best_inner.x);
    for (int it = 0; it < 24; ++it) {
      if (r1.f < r2.f) {
        hi = g2;
        g2 = g1;
        r2 = r1;
        g1 = hi - gr * (hi - lo);
        r1 = profile_at(g1, r2.x);
      } else {
        lo = g1;
        g1 = g2;
        r1 = r2;
        g2 = lo + gr * (hi - lo);
        r2 = profile_at(g2, r1.x);
      }
    }
    const NmResult& rb = r1.f < r2.f ? r1 : r2;
    if (rb.f < best_inner.f) {
      best_inner = rb;
      best_gamma = r1.f < r2.f ? g1 : g2;
    }
    gamma_hat = best_gamma;
    best = best_inner;
    // Expose the optimum in joint layout so refits can warm-start.
    best.x.push_back(gamma_hat);
    lay.with_gamma = true;
  } else {
    auto obj = [&](const std::vector<double>& x) {
      return detail::mle_objective(s, lay, opt.gamma, mix7, opt.prior,
                                   opt.corr, x);
    };
    best = detail::mle_search(obj, lay, opt, opt.warm_start, &iterations);
  }

  MixtureSpec mix2;
  res.params = lay.unpack(best.x, gamma_hat,
                          lay.two_mix ? &mix2 : nullptr);
  res.mix = lay.two_mix ? mix2 : mix7;
  res.loglik = -best.f;
  res.converged = best.converged;
  res.iterations = iterations;
  res.xt = best.x;
  res.at_boundary = std::abs(res.params.phi1) > 1.0 - 1e-6 ||
                    (lay.corr && std::abs(res.params.rho) > 1.0 - 1e-6);

  if (!lay.fix_rw) {
    res.names = {"phi0", "phi1", "sigma_w2"};
    res.estimates = {res.params.phi0, res.params.phi1, res.params.sigma_w2};
  } else {
    res.names = {"sigma_w2"};
    res.estimates = {res.params.sigma_w2};
  }
  if (lay.two_mix) {
    res.names.insert(res.names.end(), {"mu1", "var0", "var1"});
    res.estimates.insert(res.estimates.end(),
                         {res.mix.mu[1], res.mix.var[0], res.mix.var[1]});
  }
  if (lay.corr) {
    res.names.push_back("rho");
    res.estimates.push_back(res.params.rho);
  }
  if (opt.estimate_gamma) {
    res.names.push_back("gamma");
    res.estimates.push_back(res.params.gamma);
  }

  if (opt.compute_se) {
    // Central-difference Hessian of -loglik in transformed coords,
    // step 1e-4; natural-scale SEs by the delta method.
    const std::size_t k = best.x.size();
    auto obj = [&](const std::vector<double>& x) {
      return detail::mle_objective(s, lay, gamma_hat, mix7, opt.prior,
                                   opt.corr, x);
    };
    const double h = 1e-4;
    std::vector<std::vector<double>> H(k, std::vector<double>(k));
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = i; j < k; ++j) {
        std::vector<double> xpp = best.x, xpm = best.x, xmp = best.x,
                            xmm = best.x;
        xpp[i] += h; xpp[j] += h;
        xpm[i] += h; xpm[j] -= h;
        xmp[i] -= h; xmp[j] += h;
        xmm[i] -= h; xmm[j] -= h;
        H[i][j] = H[j][i] =
            (obj(xpp) - obj(xpm) - obj(xmp) + obj(xmm)) / (4.0 * h * h);
      }
    }
    res.se.assign(res.estimates.size(),
                  std::numeric_limits<double>::quiet_NaN());
    try {
      const auto cov = detail::invert_spd(H);
      std::vector<double> jac(k, 1.0);  // d(natural)/d(transformed)
      std::size_t c = 0;
      if (!lay.fix_rw) {
        jac[c++] = 1.0;                                      // phi0
        jac[c] = 1.0 - res.params.phi1 * res.params.phi1; ++c;  // phi1
        jac[c++] = res.params.sigma_w2;                      // sigma_w2
      } else {
        jac[c++] = res.params.sigma_w2;
      }
      if (lay.two_mix) {
        jac[c++] = 1.0;              // mu1
        jac[c] = res.mix.var[0]; ++c;
        jac[c] = res.mix.var[1]; ++c;
      }
      if (lay.corr) {
        jac[c] = 1.0 - res.params.rho * res.params.rho;
        ++c;
      }
      if (lay.with_gamma) jac[c++] = 1.0;
      for (std::size_t i = 0; i < k && i < res.se.size(); ++i) {
        const double v = cov[i][i];
        res.se[i] = v > 0.0 ? std::abs(jac[i]) * std::sqrt(v)
                            : std::numeric_limits<double>::quiet_NaN();
      }
    } catch (const std::exception&) {
      // singular Hessian: SEs stay NaN
    }
  }
  return res;
}

}  // namespace svgof

#endif  // SVGOF_MLE_HPP
