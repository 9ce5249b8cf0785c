#ifndef SVGOF_CLI_HPP
#define SVGOF_CLI_HPP

// Command orchestration shared by the command-line tool and the tests:
// CSV ingestion, config -> module plumbing, artifact emission. Every run
// writes a manifest with the fully resolved configuration, tool version,
// RNG algorithm and a config hash, so reruns are bit-reproducible and
// the worker count never changes numerical output.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "svgof/config.hpp"
#include "svgof/gof.hpp"
#include "svgof/io.hpp"
#include "svgof/mcmc.hpp"
#include "svgof/mle.hpp"
#include "svgof/models.hpp"
#include "svgof/particle.hpp"
#include "svgof/simulate.hpp"
#include "svgof/statespace.hpp"
#include "svgof/util.hpp"
#include "svgof/version.hpp"

namespace svgof {

// ---------------------------------------------------------------------
// CSV ingestion

namespace detail {

// Days since 1970-01-01 (days-from-civil).
inline long days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const long era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = unsigned(y - era * 400);
  const unsigned doy =
      (153u * unsigned(m + (m > 2 ? -3 : 9)) + 2u) / 5u + unsigned(d) - 1u;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + long(doe) - 719468;
}

inline long parse_date(const std::string& s, std::size_t lineno) {
  int y = 0, m = 0, d = 0;
  if (std::sscanf(s.c_str(), "%d-%d-%d", &y, &m, &d) != 3 || m < 1 || m > 12 ||
      d < 1 || d > 31)
    throw std::runtime_error("csv line " + std::to_string(lineno) +
                             ": cannot parse date: " + s);
  return days_from_civil(y, m, d);
}

inline double parse_num(const std::string& s, std::size_t lineno) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::runtime_error("");
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("csv line " + std::to_string(lineno) +
                             ": cannot parse number: " + s);
  }
}

inline std::string strip(std::string s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace detail

// Reads `t,r` (or `t,r,sigma2`) and `date,rate` CSV files. Numeric-time
// files must be equispaced within gap_tol (relative) and dt defaults to
// the first gap; date files use the index grid scaled by the calendar
// convention dt, with calendar gaps limited to date_gap_max times the
// smallest observed gap.
inline Path ingest_csv(const std::string& file,
                       std::optional<double> dt = std::nullopt,
                       double gap_tol = 1e-6, double date_gap_max = 10.0) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot open csv: " + file);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("csv is empty: " + file);
  const std::string header = detail::strip(line);
  bool date_mode = false;
  if (header == "date,rate") {
    date_mode = true;
  } else if (header != "t,r" && header != "t,r,sigma2") {
    throw std::runtime_error("csv header must be `t,r` or `date,rate`, got: " +
                             header);
  }

  std::vector<double> tv, rv;
  std::vector<long> days;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string row = detail::strip(line);
    if (row.empty()) continue;
    const auto comma = row.find(',');
    if (comma == std::string::npos)
      throw std::runtime_error("csv line " + std::to_string(lineno) +
                               ": expected two columns");
    const std::string c0 = detail::strip(row.substr(0, comma));
    std::string rest = detail::strip(row.substr(comma + 1));
    const auto comma2 = rest.find(',');
    if (comma2 != std::string::npos) rest = detail::strip(rest.substr(0, comma2));
    if (date_mode) {
      const long d = detail::parse_date(c0, lineno);
      if (!days.empty() && d <= days.back())
        throw std::runtime_error("csv line " + std::to_string(lineno) +
                                 ": non-increasing date");
      days.push_back(d);
    } else {
      const double t = detail::parse_num(c0, lineno);
      if (!tv.empty() && t <= tv.back())
        throw std::runtime_error("csv line " + std::to_string(lineno) +
                                 ": non-increasing time");
      tv.push_back(t);
    }
    rv.push_back(detail::parse_num(rest, lineno));
  }
  if (rv.size() < 2) throw std::runtime_error("csv has fewer than 2 rows");

  Path path;
  path.r = std::move(rv);
  if (date_mode) {
    long min_gap = 0;
    for (std::size_t i = 1; i < days.size(); ++i) {
      const long g = days[i] - days[i - 1];
      if (min_gap == 0 || g < min_gap) min_gap = g;
    }
    for (std::size_t i = 1; i < days.size(); ++i) {
      if (double(days[i] - days[i - 1]) > date_gap_max * double(min_gap))
        throw std::runtime_error("csv: calendar gap too large before row " +
                                 std::to_string(i + 2));
    }
    path.dt = dt.value_or(1.0 / 252.0);
    path.t.resize(path.r.size());
    for (std::size_t i = 0; i < path.t.size(); ++i)
      path.t[i] = double(i) * path.dt;
  } else {
    const double gap = tv[1] - tv[0];
    if (!(gap > 0.0)) throw std::runtime_error("csv: non-positive time step");
    for (std::size_t i = 1; i < tv.size(); ++i) {
      const double g = tv[i] - tv[i - 1];
      if (std::abs(g - gap) > gap_tol * std::abs(gap))
        throw std::runtime_error("csv: non-uniform time grid at row " +
                                 std::to_string(i + 2));
    }
    path.dt = dt.value_or(gap);
    path.t = std::move(tv);
  }
  return path;
}

// ---------------------------------------------------------------------
// Run orchestration

struct RunConfig {
  Config cfg;
  std::string command;  // simulate | estimate | gof | mc-study
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed_override;
  std::optional<unsigned> workers_override;
};

namespace detail {

struct ModelBlock {
  ModelSpec spec;
  ParamVector params;
};

inline ModelSpec parse_family(const std::string& name, double rho_pert) {
  if (name == "ou_sv") return ModelSpec::ou_sv();
  if (name == "ckls_sv") return ModelSpec::ckls_sv();
  if (name == "ckls_sv_corr") return ModelSpec::ckls_sv_corr();
  if (name == "ckls_null") return ModelSpec::ckls_null();
  if (name == "drift_alt") return ModelSpec::drift_alt(rho_pert);
  if (name == "vol_alt") return ModelSpec::vol_alt(rho_pert);
  throw std::runtime_error("unknown model family: " + name);
}

// [model]-style block. Continuous-time parameters are the source of
// truth; phi0/phi1/sigma_w2 keys, when present, override through dt.
inline ModelBlock read_model(const ConfigView& v, const Config& cfg,
                             const std::string& sec, double dt) {
  ModelBlock mb;
  mb.spec = parse_family(v.get(sec, "family", "ckls_sv"),
                         v.num(sec, "rho_pert", 0.0));
  mb.params.alpha = v.num(sec, "alpha", 0.0);
  mb.params.beta = v.num(sec, "beta", 0.0);
  mb.params.gamma = v.num(sec, "gamma", 0.0);
  mb.params.theta0 = v.num(sec, "theta0", 0.0);
  mb.params.theta1 = v.num(sec, "theta1", 0.0);
  mb.params.xi = v.num(sec, "xi", 0.0);
  mb.params.rho_corr = v.num(sec, "rho_corr", 0.0);
  if (cfg.has(sec, "phi0") || cfg.has(sec, "phi1") || cfg.has(sec, "sigma_w2")) {
    DiscreteParams d = discretize_params(mb.params, dt);
    d.phi0 = v.num(sec, "phi0", d.phi0);
    d.phi1 = v.num(sec, "phi1", d.phi1);
    d.sigma_w2 = v.num(sec, "sigma_w2", d.sigma_w2);
    mb.params = undiscretize_params(d, dt, mb.params);
  }
  validate_params(mb.spec, mb.params);
  return mb;
}

struct LoadedData {
  Path path;
  bool simulated = false;
};

inline LoadedData load_data(const ConfigView& v, const Config& cfg,
                            const ModelBlock& model, double dt,
                            std::uint64_t seed) {
  LoadedData data;
  if (cfg.has("data", "csv")) {
    const std::string file = v.require("data", "csv");
    if (!std::filesystem::exists(file))
      throw std::runtime_error("data file does not exist: " + file);
    std::optional<double> dt_override;
    if (cfg.has("data", "delta")) dt_override = v.dt("data", "delta", "daily");
    data.path = ingest_csv(file, dt_override, v.num("data", "gap_tol", 1e-6),
                           v.num("data", "date_gap_max", 10.0));
    return data;
  }
  SimConfig sc;
  sc.n = std::size_t(v.integer("sim", "n", 2080));
  sc.burn_in = std::size_t(v.integer("sim", "burn_in", 1000));
  sc.dt = dt;
  sc.seed = v.u64("sim", "seed", seed);
  const std::string r0 = v.get("sim", "r0", "auto");
  if (r0 != "auto") sc.r0 = std::stod(r0);
  const std::string h0 = v.get("sim", "h0", "auto");
  if (h0 != "auto") sc.h0 = std::stod(h0);
  data.path = simulate_path(model.spec, model.params, sc);
  data.simulated = true;
  return data;
}

inline void write_manifest(const std::string& out_dir, const RunConfig& rc,
                           const ConfigView& v) {
  std::string body;
  body += "command = " + rc.command + "\n";
  body += "tool_version = " + std::string(kVersion) + "\n";
  body += "rng_algorithm = " + std::string(kRngAlgorithm) + "\n";
  for (const auto& [k, val] : v.resolved()) body += k + " = " + val + "\n";
  const std::string hash = std::to_string(fnv1a(body));
  write_text_file(out_dir + "/manifest.txt",
                  body + "config_hash = " + hash + "\n");
}

inline std::string dgp_label(const ModelBlock& mb) {
  std::string label = family_name(mb.spec.family);
  if (mb.spec.family == Family::DriftAlt || mb.spec.family == Family::VolAlt)
    label += "_rho" + fmt17(mb.spec.rho_pert);
  return label;
}

}  // namespace detail

inline int run(const RunConfig& rc) {
  ConfigView v(rc.cfg);
  const std::string out_dir =
      rc.out_dir.empty() ? v.get("run", "out", "out") : rc.out_dir;
  std::filesystem::create_directories(out_dir);
  const std::uint64_t seed =
      rc.seed_override ? *rc.seed_override : v.u64("run", "seed", 1);
  unsigned workers = rc.workers_override
                         ? *rc.workers_override
                         : unsigned(v.integer("run", "workers", 0));
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  v.note("run.seed(resolved)", std::to_string(seed));
  v.note("run.workers(resolved)", std::to_string(workers));

  const double dt = v.dt("model", "delta", "weekly");
  const detail::ModelBlock model = detail::read_model(v, rc.cfg, "model", dt);

  std::vector<std::pair<std::string, std::string>> report;
  report.emplace_back("command", rc.command);
  report.emplace_back("seed", std::to_string(seed));

  if (rc.command == "simulate") {
    detail::LoadedData data = detail::load_data(v, rc.cfg, model, dt, seed);
    if (!data.simulated)
      throw std::runtime_error("simulate: config must use a [sim] block");
    write_path_csv(out_dir + "/results.csv", data.path);
    report.emplace_back("family", family_name(model.spec.family));
    report.emplace_back("n", std::to_string(data.path.n_steps()));
    report.emplace_back("delta", fmt17(data.path.dt));
    report.emplace_back("reflected_steps", std::to_string(data.path.reflected));
    const bool warn =
        double(data.path.reflected) > 0.001 * double(data.path.n_steps());
    report.emplace_back("reflected_warning", warn ? "true" : "false");
    write_kv_report(out_dir + "/report.txt", report);
    detail::write_manifest(out_dir, rc, v);
    return 0;
  }

  if (rc.command == "estimate") {
    detail::LoadedData data = detail::load_data(v, rc.cfg, model, dt, seed);
    const Path& path = data.path;
    const std::string estimator = v.get("estimate", "estimator", "kf7");
    const OlsDriftFit ols = ols_drift_residuals(path);
    report.emplace_back("estimator", estimator);
    report.emplace_back("n", std::to_string(path.n_steps()));
    report.emplace_back("delta", fmt17(path.dt));
    report.emplace_back("alpha_hat", fmt17(ols.alpha));
    report.emplace_back("alpha_se", fmt17(ols.se_alpha));
    report.emplace_back("beta_hat", fmt17(ols.beta));
    report.emplace_back("beta_se", fmt17(ols.se_beta));

    const bool level = model.spec.has_level_effect();
    const std::size_t n = path.n_steps();
    const std::span<const double> r_left(path.r.data(), n);
    const double floor = v.num("estimate", "floor", 1e-12);
    const LinearizedSeries series = log_square_transform(
        ols.e, floor, level ? r_left : std::span<const double>{});
    report.emplace_back("floor_count", std::to_string(series.floor_count));

    if (estimator == "kf2" || estimator == "kf7" || estimator == "kf-corr") {
      MleOptions mo;
      mo.mode = estimator == "kf2" ? KfMode::TwoMix : KfMode::SevenMix;
      mo.corr = estimator == "kf-corr";
      mo.fix_state_rw = model.spec.family == Family::CklsNull;
      mo.estimate_gamma = v.flag("estimate", "estimate_gamma", level);
      if (!mo.estimate_gamma) mo.gamma = v.num("estimate", "gamma", 0.0);
      mo.multistarts = int(v.integer("estimate", "multistarts", 5));
      mo.seed = seed;
      const MleResult fit = kf_mle(series, mo);
      const FilterOutput filt = mo.corr
                                    ? kf_corr_filter(series, fit.params, fit.mix)
                                    : kf_filter(series, fit.params, fit.mix);
      report.emplace_back("loglik", fmt17(fit.loglik));
      report.emplace_back("converged", fit.converged ? "true" : "false");
      report.emplace_back("at_boundary", fit.at_boundary ? "true" : "false");
      report.emplace_back("iterations", std::to_string(fit.iterations));
      for (std::size_t i = 0; i < fit.names.size(); ++i) {
        report.emplace_back(fit.names[i] + "_hat", fmt17(fit.estimates[i]));
        if (i < fit.se.size())
          report.emplace_back(fit.names[i] + "_se", fmt17(fit.se[i]));
      }
      const ParamVector cont = undiscretize_params(
          {fit.params.phi0, fit.params.phi1, fit.params.sigma_w2}, path.dt);
      report.emplace_back("theta0_hat", fmt17(cont.theta0));
      report.emplace_back("theta1_hat", fmt17(cont.theta1));
      report.emplace_back("xi_hat", fmt17(cont.xi));
      write_filter_csv(out_dir + "/results.csv", filt);
      // Filtered log-volatility with a 95% band (plot-ready).
      std::string plot = "i,t,h_filt,lo95,hi95\n";
      for (std::size_t i = 0; i < filt.n; ++i) {
        const double half = 1.959963984540054 * std::sqrt(filt.P_filt[i]);
        plot += std::to_string(i) + ',' + fmt17(path.t[i]) + ',' +
                fmt17(filt.h_filt[i]) + ',' + fmt17(filt.h_filt[i] - half) +
                ',' + fmt17(filt.h_filt[i] + half) + '\n';
      }
      write_text_file(out_dir + "/plotdata_logvol.csv", plot);
    } else if (estimator == "mcmc") {
      McmcConfig mc;
      mc.iterations = int(v.integer("mcmc", "iterations", 5000));
      mc.burn_in = int(v.integer("mcmc", "burn_in", 1000));
      mc.thin_h = int(v.integer("mcmc", "thin_h", 10));
      mc.c0 = v.num("mcmc", "c0", 10.0);
      mc.phi_prior_mean = {v.num("mcmc", "phi0_prior", 0.0),
                           v.num("mcmc", "phi1_prior", 0.95)};
      mc.v0_diag = {v.num("mcmc", "v0_phi0", 10.0),
                    v.num("mcmc", "v0_phi1", 10.0)};
      mc.nu0 = v.num("mcmc", "nu0", 10.0);
      mc.s0sq = v.num("mcmc", "s0sq", 0.02);
      mc.seed = seed;
      const McmcOutput out = gibbs_run(ols.e, mc);
      std::string chain = "sweep,phi0,phi1,sigma_w2\n";
      for (std::size_t i = 0; i < out.phi0.size(); ++i)
        chain += std::to_string(i) + ',' + fmt17(out.phi0[i]) + ',' +
                 fmt17(out.phi1[i]) + ',' + fmt17(out.sigma_w2[i]) + '\n';
      write_text_file(out_dir + "/results.csv", chain);
      auto add_summary = [&report](const char* name, const PosteriorSummary& s) {
        report.emplace_back(std::string(name) + "_mean", fmt17(s.mean));
        report.emplace_back(std::string(name) + "_sd", fmt17(s.sd));
        report.emplace_back(std::string(name) + "_q05", fmt17(s.q05));
        report.emplace_back(std::string(name) + "_q50", fmt17(s.q50));
        report.emplace_back(std::string(name) + "_q95", fmt17(s.q95));
      };
      add_summary("phi0", out.phi0_summary());
      add_summary("phi1", out.phi1_summary());
      add_summary("sigma_w2", out.sigw2_summary());
      report.emplace_back("accept_rate_mean", fmt17(mean(out.accept_rate)));
      report.emplace_back("nonstationary_draws",
                          std::to_string(out.n_nonstationary));
      // Posterior mean latent path with 95% band from thinned draws.
      std::string plot = "i,t,h_mean,lo95,hi95\n";
      const std::size_t npath = n;
      std::vector<double> slot(out.h_paths.size());
      for (std::size_t i = 1; i <= npath; ++i) {
        for (std::size_t d = 0; d < out.h_paths.size(); ++d)
          slot[d] = out.h_paths[d][i];
        plot += std::to_string(i - 1) + ',' + fmt17(path.t[i - 1]) + ',' +
                fmt17(mean(slot)) + ',' + fmt17(quantile(slot, 0.025)) + ',' +
                fmt17(quantile(slot, 0.975)) + '\n';
      }
      write_text_file(out_dir + "/plotdata_logvol.csv", plot);
    } else if (estimator == "pf") {
      if (level)
        throw std::runtime_error(
            "pf estimator supports the ou_sv family only");
      LwConfig lw;
      lw.l = std::size_t(v.integer("pf", "particles", 5000));
      lw.a = v.num("pf", "shrinkage", 0.98);
      lw.scheme = v.get("pf", "resampling", "systematic") == "multinomial"
                      ? Resampling::Multinomial
                      : Resampling::Systematic;
      lw.seed = seed;
      const LwResult out = lw_filter(series.y, default_lw_prior(series.y), lw);
      std::string csv = "i,ess,phi0_mean,phi1_mean,sigw2_mean\n";
      for (std::size_t i = 0; i < out.steps.size(); ++i) {
        const LwStep& s = out.steps[i];
        csv += std::to_string(i) + ',' + fmt17(s.ess) + ',' + fmt17(s.phi0) +
               ',' + fmt17(s.phi1) + ',' + fmt17(s.sigw2) + '\n';
      }
      write_text_file(out_dir + "/results.csv", csv);
      auto add_summary = [&report](const char* name, const PosteriorSummary& s) {
        report.emplace_back(std::string(name) + "_mean", fmt17(s.mean));
        report.emplace_back(std::string(name) + "_sd", fmt17(s.sd));
        report.emplace_back(std::string(name) + "_q05", fmt17(s.q05));
        report.emplace_back(std::string(name) + "_q50", fmt17(s.q50));
        report.emplace_back(std::string(name) + "_q95", fmt17(s.q95));
      };
      add_summary("phi0", out.phi0_summary);
      add_summary("phi1", out.phi1_summary);
      add_summary("sigma_w2", out.sigw2_summary);
      std::string plot = "i,t,h_mean\n";
      for (std::size_t i = 0; i < out.steps.size(); ++i)
        plot += std::to_string(i) + ',' + fmt17(path.t[i]) + ',' +
                fmt17(out.steps[i].h_mean) + '\n';
      write_text_file(out_dir + "/plotdata_logvol.csv", plot);
    } else {
      throw std::runtime_error("unknown estimator: " + estimator);
    }
    write_kv_report(out_dir + "/report.txt", report);
    detail::write_manifest(out_dir, rc, v);
    return 0;
  }

  if (rc.command == "gof") {
    detail::LoadedData data = detail::load_data(v, rc.cfg, model, dt, seed);
    GofOptions g;
    g.null_spec = detail::parse_family(
        v.get("null", "family", family_name(model.spec.family)), 0.0);
    g.mode = v.get("gof", "mixture", "seven") == "two" ? KfMode::TwoMix
                                                       : KfMode::SevenMix;
    g.simple_gamma = v.flag("null", "simple_gamma", false);
    g.gamma0 = v.num("null", "gamma0", 1.5);
    g.B = std::size_t(v.integer("gof", "B", 1000));
    g.alpha = v.num("gof", "alpha", 0.05);
    g.multistarts = int(v.integer("gof", "multistarts", 5));
    g.seed = seed;
    g.workers = workers;
    const GofKind kind =
        v.get("gof", "kind", "vol") == "drift" ? GofKind::Drift : GofKind::Vol;
    const Functional fn = v.get("gof", "functional", "ks") == "cvm"
                              ? Functional::CvM
                              : Functional::KS;
    const GofResult res = gof_test(data.path, kind, fn, g);
    report.emplace_back("kind", kind == GofKind::Drift ? "drift" : "vol");
    report.emplace_back("functional", functional_name(fn));
    report.emplace_back("statistic", fmt17(res.statistic));
    report.emplace_back("p_value", fmt17(res.p_value));
    report.emplace_back("critical_value", fmt17(res.critical));
    report.emplace_back("reject", res.reject ? "true" : "false");
    report.emplace_back("alpha", fmt17(res.alpha));
    report.emplace_back("B", std::to_string(res.B));
    report.emplace_back("dropped_replicates", std::to_string(res.dropped));
    report.emplace_back("drop_warning", res.drop_warning ? "true" : "false");
    report.emplace_back("alpha_hat", fmt17(res.alpha_hat));
    report.emplace_back("beta_hat", fmt17(res.beta_hat));
    report.emplace_back("phi0_hat", fmt17(res.theta_hat.phi0));
    report.emplace_back("phi1_hat", fmt17(res.theta_hat.phi1));
    report.emplace_back("sigma_w2_hat", fmt17(res.theta_hat.sigma_w2));
    report.emplace_back("gamma_hat", fmt17(res.theta_hat.gamma));
    std::string csv = "b,stat\n";
    for (std::size_t b = 0; b < res.boot.size(); ++b)
      csv += std::to_string(b) + ',' + fmt17(res.boot[b]) + '\n';
    write_text_file(out_dir + "/results.csv", csv);
    write_kv_report(out_dir + "/report.txt", report);
    detail::write_manifest(out_dir, rc, v);
    return 0;
  }

  if (rc.command == "mc-study") {
    McDesign d;
    d.dgp_spec = model.spec;
    d.dgp_params = model.params;
    d.dt = dt;
    d.burn_in = std::size_t(v.integer("mc", "burn_in", 1000));
    d.kind = v.get("gof", "kind", "vol") == "drift" ? GofKind::Drift
                                                    : GofKind::Vol;
    d.gof.null_spec = detail::parse_family(
        v.get("null", "family", family_name(model.spec.family)), 0.0);
    d.gof.mode = v.get("gof", "mixture", "seven") == "two" ? KfMode::TwoMix
                                                           : KfMode::SevenMix;
    d.gof.simple_gamma = v.flag("null", "simple_gamma", false);
    d.gof.gamma0 = v.num("null", "gamma0", 1.5);
    d.gof.B = std::size_t(v.integer("mc", "B", 1000));
    d.gof.alpha = v.num("mc", "alpha", 0.05);
    d.gof.multistarts = int(v.integer("mc", "multistarts", 5));
    d.replicates = std::size_t(v.integer("mc", "replicates", 1000));
    d.workers = workers;
    d.seed = seed;
    d.n_list.clear();
    for (const std::string& s : v.list("mc", "n_list", "500"))
      d.n_list.push_back(std::size_t(std::stoul(s)));
    const auto table = mc_study(d);
    const std::string label = detail::dgp_label(model);
    std::vector<std::string> header{"dgp"};
    std::vector<std::string> row{label};
    for (const McCell& c : table) {
      header.push_back("ks_n" + std::to_string(c.n));
      row.push_back(fmt17(c.reject_ks));
    }
    for (const McCell& c : table) {
      header.push_back("cvm_n" + std::to_string(c.n));
      row.push_back(fmt17(c.reject_cvm));
    }
    write_table_csv(out_dir + "/results.csv", header, {row});
    report.emplace_back("dgp", label);
    for (const McCell& c : table) {
      const std::string nk = std::to_string(c.n);
      report.emplace_back("reject_ks_n" + nk, fmt17(c.reject_ks));
      report.emplace_back("se_ks_n" + nk, fmt17(c.se_ks));
      report.emplace_back("reject_cvm_n" + nk, fmt17(c.reject_cvm));
      report.emplace_back("se_cvm_n" + nk, fmt17(c.se_cvm));
      report.emplace_back("failures_n" + nk, std::to_string(c.failures));
    }
    write_kv_report(out_dir + "/report.txt", report);
    detail::write_manifest(out_dir, rc, v);
    return 0;
  }

  throw std::runtime_error("unknown command: " + rc.command);
}

}  // namespace svgof

#endif  // SVGOF_CLI_HPP
