#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace laneirl::optim {

// Objective callback: returns f(x) and fills grad (same size as x). May return
// +inf to reject a point; the line search then backtracks.
using BoxObjective = std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)>;

struct BoxOptimOptions {
  int max_iterations = 500;
  double grad_tol = 1e-8;   // on the projected gradient norm
  double step_tol = 1e-12;  // relative objective decrease
  int memory = 10;
  int max_linesearch = 50;
};

struct BoxOptimResult {
  Eigen::VectorXd x;
  double f = 0.0;
  double grad_norm = 0.0;  // projected gradient norm at x
  int iterations = 0;
  bool converged = false;            // projected gradient reached grad_tol
  std::string message;
  std::vector<double> f_history;     // accepted objective values, non-increasing
};

// Projected L-BFGS with Armijo backtracking for min f(x) s.t. lo <= x <= hi.
// Deterministic; accepted objective values are monotonically non-increasing.
BoxOptimResult minimize_box(const BoxObjective& fn, Eigen::VectorXd x0,
                            const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                            const BoxOptimOptions& options);

}  // namespace laneirl::optim
