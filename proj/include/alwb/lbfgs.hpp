#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace alwb {

struct LbfgsOptions {
  int history = 10;
  int max_iterations = 300;
  /// Stop when |f_prev - f| / max(1, |f|) falls below this.
  double relative_tolerance = 1e-6;
  double gradient_tolerance = 1e-10;
  int max_line_search = 40;
};

struct LbfgsResult {
  Eigen::VectorXd x;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> trace;  ///< objective after each accepted step
};

/// Returns f(x) and writes its gradient into `grad`.
using Objective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd& grad)>;

/// Limited-memory BFGS minimization with a backtracking Armijo line search.
LbfgsResult lbfgs_minimize(const Objective& f, Eigen::VectorXd x0, const LbfgsOptions& options = {});

}  // namespace alwb
