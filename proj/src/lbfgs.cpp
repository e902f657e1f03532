#include "alwb/lbfgs.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

namespace alwb {

LbfgsResult lbfgs_minimize(const Objective& f, Eigen::VectorXd x0, const LbfgsOptions& options) {
  using Eigen::VectorXd;
  LbfgsResult res;
  VectorXd x = std::move(x0);
  VectorXd g(x.size());
  double fx = f(x, g);
  res.trace.push_back(fx);

  std::deque<VectorXd> s_hist;
  std::deque<VectorXd> y_hist;
  std::deque<double> rho_hist;
  VectorXd x_new(x.size());
  VectorXd g_new(x.size());
  std::vector<double> alpha(static_cast<std::size_t>(options.history));

  for (int iter = 0; iter < options.max_iterations; ++iter) {
    if (!std::isfinite(fx) || g.norm() <= options.gradient_tolerance) {
      res.converged = std::isfinite(fx);
      break;
    }
    // two-loop recursion
    VectorXd d = -g;
    const auto m = s_hist.size();
    for (std::size_t k = m; k-- > 0;) {
      alpha[k] = rho_hist[k] * s_hist[k].dot(d);
      d -= alpha[k] * y_hist[k];
    }
    if (m > 0) d *= s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
    for (std::size_t k = 0; k < m; ++k) {
      const double beta = rho_hist[k] * y_hist[k].dot(d);
      d += (alpha[k] - beta) * s_hist[k];
    }
    double slope = g.dot(d);
    if (slope >= 0) {
      // not a descent direction: restart from steepest descent
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      d = -g;
      slope = -g.squaredNorm();
    }

    double step = m == 0 ? std::min(1.0, 1.0 / d.norm()) : 1.0;
    double f_new = fx;
    bool accepted = false;
    for (int ls = 0; ls < options.max_line_search; ++ls) {
      x_new = x + step * d;
      f_new = f(x_new, g_new);
      if (std::isfinite(f_new) && f_new <= fx + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      // safeguarded quadratic interpolation of the step
      double next = 0.5 * step;
      if (std::isfinite(f_new)) {
        const double denom = 2.0 * (f_new - fx - slope * step);
        if (denom > 0) next = -slope * step * step / denom;
      }
      step = std::clamp(next, 0.1 * step, 0.5 * step);
    }
    if (!accepted) break;

    VectorXd s = x_new - x;
    VectorXd y = g_new - g;
    const double sy = s.dot(y);
    const double prev = fx;
    x.swap(x_new);
    g.swap(g_new);
    fx = f_new;
    res.trace.push_back(fx);
    res.iterations = iter + 1;
    if (sy > 1e-12 * s.norm() * y.norm()) {
      if (static_cast<int>(s_hist.size()) == options.history) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
      rho_hist.push_back(1.0 / sy);
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(y));
    }
    if (std::abs(prev - fx) / std::max(1.0, std::abs(fx)) < options.relative_tolerance) {
      res.converged = true;
      break;
    }
  }
  res.x = std::move(x);
  res.value = fx;
  return res;
}

}  // namespace alwb
