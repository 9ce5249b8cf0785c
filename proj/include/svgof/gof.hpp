#ifndef SVGOF_GOF_HPP
#define SVGOF_GOF_HPP

// Residual-marked empirical processes and bootstrap-calibrated
// goodness-of-fit tests for the drift and diffusion functions.
//
// Drift test:  R_n^m(r)    = n^{-1/2} sum_i 1{r_i <= r} (u_i - m1(r_i))
// Vol test:    R_n^v(r, x) = n^{-1/2} sum_i 1{r_i <= r, s2_i <= x}
//                            [ (u_i - m1(r_i))^2 - s2_i nu1^2(r_i)/dt ]
// with u_i = (r_{i+1} - r_i)/dt and s2_i the filtered volatility.
// Statistics are the Kolmogorov-Smirnov sup and the Cramer-von Mises
// integral against the empirical measure; their null distribution is
// approximated by the state-space innovation bootstrap.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "svgof/mle.hpp"
#include "svgof/models.hpp"
#include "svgof/rng.hpp"
#include "svgof/simulate.hpp"
#include "svgof/statespace.hpp"
#include "svgof/util.hpp"

namespace svgof {

enum class GofKind { Drift, Vol };
enum class Functional { KS, CvM };

inline const char* functional_name(Functional f) {
  return f == Functional::KS ? "ks" : "cvm";
}

// m_i = (r_{i+1} - r_i)/dt - m1(r_i, theta)
inline std::vector<double> drift_marks(const Path& path, const ModelSpec& spec,
                                       const ParamVector& p) {
  const std::size_t n = path.n_steps();
  std::vector<double> m(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = (path.r[i + 1] - path.r[i]) / path.dt;
    m[i] = u - drift_eval(spec, p, path.r[i]);
  }
  return m;
}

// v_i = (u_i - m1)^2 - s2_i nu1^2(r_i)/dt
inline std::vector<double> vol_marks(const Path& path, const ModelSpec& spec,
                                     const ParamVector& p,
                                     std::span<const double> sigma2_hat) {
  const std::size_t n = path.n_steps();
  if (sigma2_hat.size() != n)
    throw std::invalid_argument("vol_marks: sigma2 length mismatch");
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(sigma2_hat[i] > 0.0))
      throw std::invalid_argument("vol_marks: sigma2 must be positive");
    const double u = (path.r[i + 1] - path.r[i]) / path.dt;
    const double resid = u - drift_eval(spec, p, path.r[i]);
    const double nu1 = level_eval(spec, p, path.r[i]);
    v[i] = resid * resid - sigma2_hat[i] * nu1 * nu1 / path.dt;
  }
  return v;
}

struct MarkedProcessEval {
  std::vector<double> marks;
  std::vector<double> coord_r;
  std::vector<double> coord_x;  // empty in the 1-D case
  std::vector<double> R;        // process at each observed point
  double scale = 0.0;           // 1/sqrt(n)
  double total = 0.0;           // value at the componentwise maximum
  bool two_d = false;
};

// 1-D marked process evaluated at the observed coordinates.
inline MarkedProcessEval process_eval(std::span<const double> marks,
                                      std::span<const double> r) {
  const std::size_t n = marks.size();
  if (n == 0 || r.size() != n)
    throw std::invalid_argument("process_eval: bad inputs");
  MarkedProcessEval ev;
  ev.marks.assign(marks.begin(), marks.end());
  ev.coord_r.assign(r.begin(), r.end());
  ev.scale = 1.0 / std::sqrt(double(n));
  ev.R.resize(n);

  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(),
            [&](std::size_t a, std::size_t b) { return r[a] < r[b]; });
  double cum = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && r[idx[j]] == r[idx[i]]) cum += marks[idx[j++]];
    for (std::size_t k = i; k < j; ++k) ev.R[idx[k]] = ev.scale * cum;
    i = j;
  }
  ev.total = ev.scale * cum;
  return ev;
}

namespace detail {

struct Fenwick {
  std::vector<double> tree;
  explicit Fenwick(std::size_t n) : tree(n + 1, 0.0) {}
  void add(std::size_t i, double v) {
    for (++i; i < tree.size(); i += i & (~i + 1)) tree[i] += v;
  }
  double prefix(std::size_t i) const {  // sum of ranks [0, i]
    double s = 0.0;
    for (++i; i > 0; i -= i & (~i + 1)) s += tree[i];
    return s;
  }
};

inline std::vector<std::size_t> ranks(std::span<const double> x,
                                      std::vector<double>* sorted_unique) {
  std::vector<double> u(x.begin(), x.end());
  std::sort(u.begin(), u.end());
  u.erase(std::unique(u.begin(), u.end()), u.end());
  std::vector<std::size_t> rk(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    rk[i] = std::size_t(std::lower_bound(u.begin(), u.end(), x[i]) - u.begin());
  if (sorted_unique) *sorted_unique = std::move(u);
  return rk;
}

}  // namespace detail

// 2-D marked process at the observed pairs, O(n log n).
inline MarkedProcessEval process_eval(std::span<const double> marks,
                                      std::span<const double> r,
                                      std::span<const double> x) {
  const std::size_t n = marks.size();
  if (n == 0 || r.size() != n || x.size() != n)
    throw std::invalid_argument("process_eval: bad inputs");
  MarkedProcessEval ev;
  ev.two_d = true;
  ev.marks.assign(marks.begin(), marks.end());
  ev.coord_r.assign(r.begin(), r.end());
  ev.coord_x.assign(x.begin(), x.end());
  ev.scale = 1.0 / std::sqrt(double(n));
  ev.R.resize(n);

  const auto xrank = detail::ranks(x, nullptr);
  const std::size_t nx = 1 + *std::max_element(xrank.begin(), xrank.end());
  detail::Fenwick bit(nx);

  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(),
            [&](std::size_t a, std::size_t b) { return r[a] < r[b]; });
  double total = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && r[idx[j]] == r[idx[i]]) {
      bit.add(xrank[idx[j]], marks[idx[j]]);
      total += marks[idx[j]];
      ++j;
    }
    for (std::size_t k = i; k < j; ++k)
      ev.R[idx[k]] = ev.scale * bit.prefix(xrank[idx[k]]);
    i = j;
  }
  ev.total = ev.scale * total;
  return ev;
}

// Kolmogorov-Smirnov functional over the observed evaluation points.
inline double ks_statistic(const MarkedProcessEval& ev) {
  if (ev.R.empty()) throw std::invalid_argument("ks_statistic: empty eval");
  double m = 0.0;
  for (double v : ev.R) m = std::max(m, std::abs(v));
  return m;
}

// Exact sup over the full observed-r x observed-x product grid, O(n^2).
inline double ks_statistic_exact(const MarkedProcessEval& ev) {
  if (ev.R.empty()) throw std::invalid_argument("ks_statistic: empty eval");
  if (!ev.two_d) return ks_statistic(ev);
  const std::size_t n = ev.marks.size();
  std::vector<double> xs;
  const auto xrank = detail::ranks(ev.coord_x, &xs);
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return ev.coord_r[a] < ev.coord_r[b];
  });
  std::vector<double> acc(xs.size(), 0.0);
  double best = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && ev.coord_r[idx[j]] == ev.coord_r[idx[i]]) {
      acc[xrank[idx[j]]] += ev.marks[idx[j]];
      ++j;
    }
    double run = 0.0;
    for (double a : acc) {
      run += a;
      best = std::max(best, std::abs(run));
    }
    i = j;
  }
  return ev.scale * best;
}

// Cramer-von Mises functional against the empirical measure F_n.
inline double cvm_statistic(const MarkedProcessEval& ev) {
  if (ev.R.empty()) throw std::invalid_argument("cvm_statistic: empty eval");
  double s = 0.0;
  for (double v : ev.R) s += v * v;
  return s / double(ev.R.size());
}

// State-space innovation bootstrap: one (y*, h*) draw around the fitted
// one-step predictions, resampling the standardized innovations of each
// mixture component with replacement.
struct BootstrapSeries {
  std::vector<double> y;  // exp(y*) = bootstrap squared residuals
  std::vector<double> h;  // length n+1, h[0] = fitted initial prediction
};

inline BootstrapSeries bootstrap_resample(const FilterOutput& f, Rng& rng) {
  const std::size_t n = f.n, J = f.J;
  if (n == 0) throw std::invalid_argument("bootstrap_resample: empty filter");
  BootstrapSeries out;
  out.y.resize(n);
  out.h.resize(n + 1);
  out.h[0] = f.h_pred[0];
  for (std::size_t i = 0; i < n; ++i) {
    // one resampled time index per step, shared across components, so
    // the cross-component structure of the innovation vector survives
    const std::size_t pick = std::size_t(rng.uniform() * double(n));
    const std::size_t k = std::min(pick, n - 1);
    double y = f.h_pred[i] + f.offset[i];
    double hnext = f.params.phi0 + f.params.phi1 * f.h_pred[i];
    for (std::size_t j = 0; j < J; ++j) {
      const double sd_i = std::sqrt(f.innov_var[i * J + j]);
      const double std_innov =
          f.innov[k * J + j] / std::sqrt(f.innov_var[k * J + j]);
      const double w = f.post_weight[i * J + j];
      y += w * (f.mix.mu[j] + sd_i * std_innov);
      hnext += w * f.gain[i * J + j] * sd_i * std_innov;
    }
    out.y[i] = y;
    out.h[i + 1] = hnext;
  }
  return out;
}

struct GofOptions {
  ModelSpec null_spec = ModelSpec::ckls_sv();
  KfMode mode = KfMode::SevenMix;
  bool simple_gamma = false;  // gamma known under the null
  double gamma0 = 1.5;
  std::size_t B = 1000;
  double alpha = 0.05;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  double floor = 1e-12;
  int multistarts = 5;
};

struct GofResult {
  GofKind kind = GofKind::Drift;
  Functional functional = Functional::KS;
  double statistic = 0.0;
  double p_value = 0.0;
  double critical = 0.0;
  bool reject = false;
  double alpha = 0.05;
  std::size_t B = 0;
  std::size_t dropped = 0;
  bool drop_warning = false;
  std::vector<double> boot;  // kept bootstrap replicate statistics
  double alpha_hat = 0.0, beta_hat = 0.0;
  KfParams theta_hat;
  KfParams boot_theta_mean;  // mean bootstrap refit (vol test)
};

// Both functionals from one bootstrap pass; gof_test() selects one.
struct GofRun {
  double stat_ks = 0.0, stat_cvm = 0.0;
  std::vector<double> boot_ks, boot_cvm;
  std::size_t dropped = 0;
  double alpha_hat = 0.0, beta_hat = 0.0;
  KfParams theta_hat;
  KfParams boot_theta_mean;
  bool fit_converged = true;
};

namespace detail {

struct Line {
  double intercept = 0.0, slope = 0.0;
};

inline Line ols_line(std::span<const double> x, std::span<const double> y) {
  const double n = double(x.size());
  double sx = 0.0, sxx = 0.0, sy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sxx += x[i] * x[i];
    sy += y[i];
    sxy += x[i] * y[i];
  }
  const double det = n * sxx - sx * sx;
  if (!(std::abs(det) > 1e-300))
    throw std::runtime_error("ols_line: degenerate regressor");
  Line ln;
  ln.slope = (n * sxy - sx * sy) / det;
  ln.intercept = (sy - ln.slope * sx) / n;
  return ln;
}

}  // namespace detail

inline GofRun gof_run(const Path& path, GofKind kind, const GofOptions& opt) {
  const std::size_t n = path.n_steps();
  if (n < 100)
    throw std::invalid_argument("gof: path must have at least 100 steps");
  if (opt.B < 100) throw std::invalid_argument("gof: B must be >= 100");
  if (!(opt.alpha > 0.0 && opt.alpha < 1.0))
    throw std::invalid_argument("gof: alpha must be in (0, 1)");

  const bool level = opt.null_spec.has_level_effect();
  const bool fix_rw = opt.null_spec.family == Family::CklsNull;

  GofRun run;
  const OlsDriftFit ols = ols_drift_residuals(path);
  run.alpha_hat = ols.alpha;
  run.beta_hat = ols.beta;

  const std::span<const double> r_left(path.r.data(), n);
  const LinearizedSeries series = log_square_transform(
      ols.e, opt.floor, level ? r_left : std::span<const double>{});

  MleOptions mopt;
  mopt.mode = opt.mode;
  mopt.estimate_gamma = level && !opt.simple_gamma;
  mopt.gamma = opt.simple_gamma && level ? opt.gamma0 : 0.0;
  mopt.fix_state_rw = fix_rw;
  mopt.multistarts = opt.multistarts;
  mopt.seed = derive_seed(opt.seed, 0xF17);
  mopt.compute_se = false;
  const MleResult fit = kf_mle(series, mopt);
  run.theta_hat = fit.params;
  run.fit_converged = fit.converged;

  const FilterOutput filt = kf_filter(series, fit.params, fit.mix);

  ParamVector pv;
  pv.alpha = ols.alpha;
  pv.beta = ols.beta;
  pv.gamma = fit.params.gamma;

  const double sqrt_dt = std::sqrt(path.dt);

  if (kind == GofKind::Drift) {
    const auto marks = drift_marks(path, opt.null_spec, pv);
    const auto ev = process_eval(marks, r_left);
    run.stat_ks = ks_statistic(ev);
    run.stat_cvm = cvm_statistic(ev);
  } else {
    const auto s2 = volatility_estimate(filt);
    const auto marks = vol_marks(path, opt.null_spec, pv, s2);
    const auto ev = process_eval(marks, r_left, s2);
    run.stat_ks = ks_statistic(ev);
    run.stat_cvm = cvm_statistic(ev);
  }

  // Bootstrap replicates. Slot results by replicate index so the worker
  // count never affects the outcome.
  std::vector<double> bks(opt.B, std::numeric_limits<double>::quiet_NaN());
  std::vector<double> bcvm(opt.B, std::numeric_limits<double>::quiet_NaN());
  std::vector<KfParams> brefit(opt.B);
  std::vector<char> ok(opt.B, 0);

  const auto replicate = [&](std::size_t b) {
    Rng rng = Rng::stream(opt.seed, b);
    const BootstrapSeries bs = bootstrap_resample(filt, rng);
    if (kind == GofKind::Drift) {
      std::vector<double> ustar(n);
      for (std::size_t i = 0; i < n; ++i) {
        const double e = std::sqrt(std::exp(bs.y[i]));
        const double sgn = rng.uniform() < 0.5 ? -1.0 : 1.0;
        ustar[i] = drift_eval(opt.null_spec, pv, path.r[i]) + sgn * e / sqrt_dt;
      }
      const detail::Line ln = detail::ols_line(r_left, ustar);
      std::vector<double> marks(n);
      for (std::size_t i = 0; i < n; ++i)
        marks[i] = ustar[i] - (ln.intercept + ln.slope * path.r[i]);
      const auto ev = process_eval(marks, r_left);
      bks[b] = ks_statistic(ev);
      bcvm[b] = cvm_statistic(ev);
      ok[b] = 1;
      return;
    }
    // Volatility test: refit, re-filter, rebuild the 2-D process.
    LinearizedSeries bser;
    bser.y = bs.y;
    bser.log_r = series.log_r;
    MleOptions ropt = mopt;
    ropt.warm_start = fit.xt;
    ropt.seed = derive_seed(opt.seed, 0xB00 + b);
    MleResult refit = kf_mle(bser, ropt);
    if (!refit.converged) {
      MleOptions r2 = mopt;
      r2.multistarts = 1;
      r2.seed = derive_seed(opt.seed, 0xBAD + b);
      if (mopt.estimate_gamma) {
        // keep the joint layout on retry, jittering the warm start
        r2.warm_start = fit.xt;
        Rng jit = Rng::stream(opt.seed, 0xCAFE + b);
        for (double& v : *r2.warm_start) v += 0.1 * jit.normal();
      }
      refit = kf_mle(bser, r2);
      if (!refit.converged) return;  // dropped
    }
    const FilterOutput bfilt = kf_filter(bser, refit.params, refit.mix);
    std::vector<double> s2(n);
    for (std::size_t i = 0; i < n; ++i) s2[i] = std::exp(bfilt.h_filt[i]);
    ParamVector pvb = pv;
    pvb.gamma = refit.params.gamma;
    std::vector<double> marks(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double nu1 = level_eval(opt.null_spec, pvb, path.r[i]);
      marks[i] = (std::exp(bs.y[i]) - s2[i] * nu1 * nu1) / path.dt;
    }
    const auto ev = process_eval(marks, r_left, s2);
    bks[b] = ks_statistic(ev);
    bcvm[b] = cvm_statistic(ev);
    brefit[b] = refit.params;
    ok[b] = 1;
  };
  parallel_for(opt.B, opt.workers, replicate);

  KfParams acc;
  std::size_t kept = 0;
  for (std::size_t b = 0; b < opt.B; ++b) {
    if (!ok[b]) {
      ++run.dropped;
      continue;
    }
    run.boot_ks.push_back(bks[b]);
    run.boot_cvm.push_back(bcvm[b]);
    acc.phi0 += brefit[b].phi0;
    acc.phi1 += brefit[b].phi1;
    acc.sigma_w2 += brefit[b].sigma_w2;
    acc.gamma += brefit[b].gamma;
    ++kept;
  }
  if (kept == 0) throw std::runtime_error("gof: all bootstrap replicates failed");
  run.boot_theta_mean = {acc.phi0 / double(kept), acc.phi1 / double(kept),
                         acc.sigma_w2 / double(kept), acc.gamma / double(kept),
                         0.0};
  return run;
}

namespace detail {

inline GofResult finalize(const GofRun& run, GofKind kind, Functional fn,
                          const GofOptions& opt) {
  GofResult res;
  res.kind = kind;
  res.functional = fn;
  res.alpha = opt.alpha;
  res.B = opt.B;
  res.dropped = run.dropped;
  res.drop_warning = double(run.dropped) > 0.05 * double(opt.B);
  res.statistic = fn == Functional::KS ? run.stat_ks : run.stat_cvm;
  res.boot = fn == Functional::KS ? run.boot_ks : run.boot_cvm;
  res.alpha_hat = run.alpha_hat;
  res.beta_hat = run.beta_hat;
  res.theta_hat = run.theta_hat;
  res.boot_theta_mean = run.boot_theta_mean;

  const std::size_t B = res.boot.size();
  std::size_t exceed = 0;
  for (double v : res.boot)
    if (v > res.statistic) ++exceed;
  res.p_value = double(exceed) / double(B);

  std::vector<double> sorted = res.boot;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t ord = std::size_t(
      std::ceil(double(B) * (1.0 - opt.alpha)));  // 1-based order statistic
  res.critical = sorted[std::min(ord, B) - 1];
  res.reject = res.statistic > res.critical;
  return res;
}

}  // namespace detail

inline GofResult gof_test(const Path& path, GofKind kind, Functional fn,
                          const GofOptions& opt) {
  const GofRun run = gof_run(path, kind, opt);
  return detail::finalize(run, kind, fn, opt);
}

// Monte Carlo size/power study over one DGP and a list of sample sizes.
struct McDesign {
  ModelSpec dgp_spec = ModelSpec::ckls_sv();
  ParamVector dgp_params;
  GofKind kind = GofKind::Vol;
  GofOptions gof;
  std::vector<std::size_t> n_list{500};
  std::size_t replicates = 1000;
  double dt = 1.0 / 52.0;
  std::size_t burn_in = 1000;
  unsigned workers = 1;
  std::uint64_t seed = 0;
};

struct McCell {
  std::size_t n = 0;
  double reject_ks = 0.0, reject_cvm = 0.0;
  double se_ks = 0.0, se_cvm = 0.0;
  std::size_t failures = 0;
};

inline std::vector<McCell> mc_study(const McDesign& design) {
  if (design.replicates == 0)
    throw std::invalid_argument("mc_study: replicates must be >= 1");
  if (design.gof.B < 100)
    throw std::invalid_argument("mc_study: B must be >= 100");
  validate_params(design.dgp_spec, design.dgp_params);

  std::vector<McCell> table;
  for (std::size_t ni = 0; ni < design.n_list.size(); ++ni) {
    const std::size_t n = design.n_list[ni];
    std::vector<char> rej_ks(design.replicates, 0), rej_cvm(design.replicates, 0);
    std::vector<char> failed(design.replicates, 0);
    parallel_for(design.replicates, design.workers, [&](std::size_t rep) {
      const std::uint64_t rep_seed =
          derive_seed(design.seed, ni * design.replicates + rep);
      try {
        SimConfig sc;
        sc.n = n;
        sc.burn_in = design.burn_in;
        sc.dt = design.dt;
        sc.seed = rep_seed;
        const Path path =
            simulate_path(design.dgp_spec, design.dgp_params, sc);
        GofOptions g = design.gof;
        g.seed = derive_seed(rep_seed, 0x60F);
        g.workers = 1;
        const GofRun run = gof_run(path, design.kind, g);
        rej_ks[rep] =
            detail::finalize(run, design.kind, Functional::KS, g).reject;
        rej_cvm[rep] =
            detail::finalize(run, design.kind, Functional::CvM, g).reject;
      } catch (const std::exception&) {
        failed[rep] = 1;
      }
    });
    McCell cell;
    cell.n = n;
    std::size_t kept = 0, ks = 0, cvm = 0;
    for (std::size_t rep = 0; rep < design.replicates; ++rep) {
      if (failed[rep]) {
        ++cell.failures;
        continue;
      }
      ks += rej_ks[rep];
      cvm += rej_cvm[rep];
      ++kept;
    }
    if (kept == 0) throw std::runtime_error("mc_study: all replicates failed");
    cell.reject_ks = double(ks) / double(kept);
    cell.reject_cvm = double(cvm) / double(kept);
    cell.se_ks =
        std::sqrt(cell.reject_ks * (1.0 - cell.reject_ks) / double(kept));
    cell.se_cvm =
        std::sqrt(cell.reject_cvm * (1.0 - cell.reject_cvm) / double(kept));
    table.push_back(cell);
  }
  return table;
}

}  // namespace svgof

#endif  // SVGOF_GOF_HPP
