#ifndef SVGOF_OPTIM_HPP
#define SVGOF_OPTIM_HPP

// Nelder-Mead simplex minimizer over unconstrained coordinates.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

namespace svgof {

struct NmOptions {
  double tol = 1e-8;      // convergence tolerance on simplex spread
  int max_iter = 2000;
  double init_step = 0.25;
};

struct NmResult {
  std::vector<double> x;
  double f = std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool converged = false;
};

inline NmResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                            std::vector<double> x0, NmOptions opt = {}) {
  const std::size_t d = x0.size();
  const std::size_t m = d + 1;
  std::vector<std::vector<double>> simplex(m, x0);
  std::vector<double> fv(m);
  for (std::size_t i = 0; i < d; ++i) {
    const double step =
        opt.init_step * std::max(1.0, std::abs(x0[i])) * (x0[i] >= 0 ? 1 : -1);
    simplex[i + 1][i] += step;
  }
  for (std::size_t i = 0; i < m; ++i) fv[i] = f(simplex[i]);

  std::vector<std::size_t> order(m);
  std::vector<double> centroid(d), trial(d), trial2(d);
  NmResult res;

  int iter = 0;
  for (; iter < opt.max_iter; ++iter) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
    const std::size_t best = order[0], worst = order[m - 1],
                      second = order[m - 2];

    double fspread = std::abs(fv[worst] - fv[best]);
    double xspread = 0.0;
    for (std::size_t i = 0; i < d; ++i)
      xspread = std::max(xspread,
                         std::abs(simplex[worst][i] - simplex[best][i]));
    if ((fspread <= opt.tol * (std::abs(fv[best]) + opt.tol) &&
         xspread <= opt.tol) ||
        xspread <= opt.tol * opt.tol) {
      res.converged = true;
      break;
    }

    for (std::size_t i = 0; i < d; ++i) {
      double c = 0.0;
      for (std::size_t k = 0; k < m; ++k)
        if (k != worst) c += simplex[k][i];
      centroid[i] = c / double(d);
    }

    auto blend = [&](std::vector<double>& out, double coef) {
      for (std::size_t i = 0; i < d; ++i)
        out[i] = centroid[i] + coef * (simplex[worst][i] - centroid[i]);
    };

    blend(trial, -1.0);  // reflection
    const double fr = f(trial);
    if (fr < fv[best]) {
      blend(trial2, -2.0);  // expansion
      const double fe = f(trial2);
      if (fe < fr) {
        simplex[worst] = trial2;
        fv[worst] = fe;
      } else {
        simplex[worst] = trial;
        fv[worst] = fr;
      }
    } else if (fr < fv[second]) {
      simplex[worst] = trial;
      fv[worst] = fr;
    } else {
      const bool outside = fr < fv[worst];
      blend(trial2, outside ? -0.5 : 0.5);  // contraction
      const double fc = f(trial2);
      if (fc < std::min(fr, fv[worst])) {
        simplex[worst] = trial2;
        fv[worst] = fc;
      } else {
        // shrink toward the best vertex
        for (std::size_t k = 0; k < m; ++k) {
          if (k == best) continue;
          for (std::size_t i = 0; i < d; ++i)
            simplex[k][i] =
                simplex[best][i] + 0.5 * (simplex[k][i] - simplex[best][i]);
          fv[k] = f(simplex[k]);
        }
      }
    }
  }

  const std::size_t best = std::size_t(
      std::min_element(fv.begin(), fv.end()) - fv.begin());
  res.x = simplex[best];
  res.f = fv[best];
  res.iterations = iter;
  return res;
}

}  // namespace svgof

#endif  // SVGOF_OPTIM_HPP
