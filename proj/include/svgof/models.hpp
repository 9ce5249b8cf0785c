#ifndef SVGOF_MODELS_HPP
#define SVGOF_MODELS_HPP

// Two-factor stochastic volatility diffusion families
//
//   dr_t      = m1(r_t) dt + sigma_t nu1(r_t) dW1,
//   d log s2  = (theta0 - theta1 log s2) dt + xi dW2,   dW1 dW2 = rho dt,
//
// with nu1 = 1 (OU) or r^gamma (CKLS level effect), plus perturbed
// alternatives used as goodness-of-fit power scenarios. Parameters live
// in continuous time; the AR(1) form of the discretized log-volatility
// equation (phi0, phi1, sigma_w2) is derived lazily per time step.

#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace svgof {

enum class Family : std::uint8_t {
  OuSv,        // nu1 = 1
  CklsSv,      // nu1 = r^gamma
  CklsSvCorr,  // CKLS with correlated Wiener processes
  CklsNull,    // CKLS diffusion, driftless log-volatility (random walk)
  DriftAlt,    // CKLS drift perturbed by rho_pert (1 - r^rho_pert)
  VolAlt,      // CKLS diffusion perturbed by rho_pert (1 - r^rho_pert)
};

inline const char* family_name(Family f) {
  switch (f) {
    case Family::OuSv: return "ou_sv";
    case Family::CklsSv: return "ckls_sv";
    case Family::CklsSvCorr: return "ckls_sv_corr";
    case Family::CklsNull: return "ckls_null";
    case Family::DriftAlt: return "drift_alt";
    case Family::VolAlt: return "vol_alt";
  }
  return "?";
}

struct ModelSpec {
  Family family = Family::CklsSv;
  double rho_pert = 0.0;  // perturbation index, DriftAlt / VolAlt only

  bool has_level_effect() const { return family != Family::OuSv; }
  bool has_vol_drift() const { return family != Family::CklsNull; }
  bool has_correlation() const { return family == Family::CklsSvCorr; }

  static ModelSpec ou_sv() { return {Family::OuSv, 0.0}; }
  static ModelSpec ckls_sv() { return {Family::CklsSv, 0.0}; }
  static ModelSpec ckls_sv_corr() { return {Family::CklsSvCorr, 0.0}; }
  static ModelSpec ckls_null() { return {Family::CklsNull, 0.0}; }
  static ModelSpec drift_alt(double rho) { return {Family::DriftAlt, rho}; }
  static ModelSpec vol_alt(double rho) { return {Family::VolAlt, rho}; }
};

// Continuous-time parameter vector. Units: alpha, theta0, theta1 are
// 1/time, beta is 1/time, xi is 1/sqrt(time), gamma and rho_corr are
// dimensionless.
struct ParamVector {
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  double theta0 = 0.0;
  double theta1 = 0.0;
  double xi = 0.0;
  double rho_corr = 0.0;
};

struct DiscreteParams {
  double phi0 = 0.0;
  double phi1 = 1.0;
  double sigma_w2 = 0.0;
};

// phi0 = theta0*dt, phi1 = 1 - theta1*dt, sigma_w2 = dt*xi^2.
inline DiscreteParams discretize_params(const ParamVector& p, double dt) {
  if (!(dt > 0.0)) throw std::domain_error("discretize_params: dt must be > 0");
  return {p.theta0 * dt, 1.0 - p.theta1 * dt, dt * p.xi * p.xi};
}

// Inverse of discretize_params for the log-volatility block; the other
// fields are copied from `base`.
inline ParamVector undiscretize_params(const DiscreteParams& d, double dt,
                                       ParamVector base = {}) {
  if (!(dt > 0.0))
    throw std::domain_error("undiscretize_params: dt must be > 0");
  if (d.sigma_w2 < 0.0)
    throw std::domain_error("undiscretize_params: sigma_w2 must be >= 0");
  base.theta0 = d.phi0 / dt;
  base.theta1 = (1.0 - d.phi1) / dt;
  base.xi = std::sqrt(d.sigma_w2 / dt);
  return base;
}

namespace detail {

inline bool is_integer(double x) { return x == std::floor(x); }

inline double perturbation(double rho, double r, const char* op) {
  if (rho == 0.0) return 0.0;
  if (r <= 0.0 && !is_integer(rho)) {
    throw std::domain_error(std::string(op) +
                            ": r <= 0 with non-integer perturbation exponent");
  }
  return rho * (1.0 - std::pow(r, rho));
}

}  // namespace detail

// Drift m1(r). All families share alpha - beta r; DriftAlt adds the
// non-linear departure rho (1 - r^rho).
inline double drift_eval(const ModelSpec& spec, const ParamVector& p, double r) {
  if (!std::isfinite(r)) throw std::domain_error("drift_eval: non-finite r");
  if (!std::isfinite(p.alpha) || !std::isfinite(p.beta))
    throw std::domain_error("drift_eval: non-finite parameters");
  double m = p.alpha - p.beta * r;
  if (spec.family == Family::DriftAlt)
    m += detail::perturbation(spec.rho_pert, r, "drift_eval");
  return m;
}

// Level function nu1(r): 1 for OU, r^gamma otherwise.
inline double level_eval(const ModelSpec& spec, const ParamVector& p, double r) {
  if (!spec.has_level_effect()) return 1.0;
  if (r <= 0.0 && !detail::is_integer(p.gamma))
    throw std::domain_error("level_eval: r <= 0 with non-integer gamma");
  return std::pow(r, p.gamma);
}

// Full diffusion coefficient sigma nu1(r) (+ perturbation for VolAlt).
inline double diffusion_eval(const ModelSpec& spec, const ParamVector& p,
                             double r, double sigma) {
  if (sigma < 0.0) throw std::domain_error("diffusion_eval: sigma must be >= 0");
  double d = sigma * level_eval(spec, p, r);
  if (spec.family == Family::VolAlt)
    d += detail::perturbation(spec.rho_pert, r, "diffusion_eval");
  return d;
}

// Log-volatility drift m2(h) = theta0 - theta1 h (zero for CklsNull).
inline double vol_drift_eval(const ModelSpec& spec, const ParamVector& p,
                             double h) {
  if (!spec.has_vol_drift()) return 0.0;
  return p.theta0 - p.theta1 * h;
}

// Validation for a family: all relevant fields finite, |rho_corr| <= 1.
// Throws std::invalid_argument naming every violated field.
inline ParamVector validate_params(const ModelSpec& spec, const ParamVector& p) {
  std::string bad;
  auto require_finite = [&bad](double v, const char* name) {
    if (!std::isfinite(v)) bad += std::string(name) + ": not finite; ";
  };
  require_finite(p.alpha, "alpha");
  require_finite(p.beta, "beta");
  require_finite(p.xi, "xi");
  if (spec.has_level_effect()) require_finite(p.gamma, "gamma");
  if (spec.has_vol_drift()) {
    require_finite(p.theta0, "theta0");
    require_finite(p.theta1, "theta1");
  }
  if (spec.has_correlation()) {
    require_finite(p.rho_corr, "rho_corr");
    if (std::abs(p.rho_corr) > 1.0) bad += "rho_corr: |rho| > 1; ";
  }
  if (spec.family == Family::DriftAlt || spec.family == Family::VolAlt) {
    if (!std::isfinite(spec.rho_pert) || spec.rho_pert < 0.0)
      bad += "rho_pert: must be finite and >= 0; ";
  }
  if (!bad.empty())
    throw std::invalid_argument("validate_params: " + bad);
  return p;
}

// Gaussian mixture approximation to the log chi^2_1 observation noise.
struct MixtureSpec {
  std::vector<double> weight;
  std::vector<double> mu;
  std::vector<double> var;

  std::size_t size() const { return weight.size(); }

  double mixture_mean() const {
    return std::inner_product(weight.begin(), weight.end(), mu.begin(), 0.0);
  }

  void validate() const {
    if (weight.empty() || mu.size() != weight.size() ||
        var.size() != weight.size())
      throw std::invalid_argument("MixtureSpec: inconsistent component arrays");
    double s = 0.0;
    for (std::size_t j = 0; j < weight.size(); ++j) {
      if (!(var[j] > 0.0))
        throw std::invalid_argument("MixtureSpec: variances must be > 0");
      s += weight[j];
    }
    if (std::abs(s - 1.0) > 1e-12)
      throw std::invalid_argument("MixtureSpec: weights must sum to 1");
  }

  static MixtureSpec single(double mean, double variance) {
    return {{1.0}, {mean}, {variance}};
  }

  // Two components, one centered at zero; (mu1, var0, var1) estimable.
  static MixtureSpec two(double mu1, double var0, double var1) {
    return {{0.5, 0.5}, {0.0, mu1}, {var0, var1}};
  }

  // Kim-Shephard-Chib seven-component approximation of log chi^2_1.
  static MixtureSpec seven() {
    return {{0.00730, 0.10556, 0.00002, 0.04395, 0.34001, 0.24566, 0.25750},
            {-11.400, -5.2432, -9.8373, 1.5075, -0.6510, 0.5248, -2.3586},
            {5.7960, 2.6137, 5.1795, 0.1674, 0.6401, 0.3402, 1.2626}};
  }
};

}  // namespace svgof

#endif  // SVGOF_MODELS_HPP
