#include "laneirl/optim.hpp"

#include <cmath>
#include <deque>

#include "laneirl/errors.hpp"

namespace laneirl::optim {

namespace {

Eigen::VectorXd clamp(const Eigen::VectorXd& x, const Eigen::VectorXd& lo,
                      const Eigen::VectorXd& hi) {
  return x.cwiseMax(lo).cwiseMin(hi);
}

struct Pair {
  Eigen::VectorXd s;
  Eigen::VectorXd y;
  double rho;
};

}  // namespace

BoxOptimResult minimize_box(const BoxObjective& fn, Eigen::VectorXd x0,
                            const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                            const BoxOptimOptions& options) {
  if (options.max_iterations < 0 || !(options.grad_tol > 0.0) || !(options.step_tol > 0.0)) {
    throw InvalidValueError("minimize_box: tolerances must be > 0 and iterations >= 0");
  }
  const Eigen::Index n = x0.size();
  if (lo.size() != n || hi.size() != n || (lo.array() > hi.array()).any()) {
    throw InvalidValueError("minimize_box: inconsistent bounds");
  }

  BoxOptimResult res;
  res.x = clamp(x0, lo, hi);
  Eigen::VectorXd g(n);
  res.f = fn(res.x, g);
  if (!std::isfinite(res.f)) {
    throw NumericalError("minimize_box: objective not finite at the initial point");
  }
  res.f_history.push_back(res.f);

  std::deque<Pair> pairs;
  constexpr double kArmijo = 1e-4;

  auto projected_gradient_norm = [&](const Eigen::VectorXd& x, const Eigen::VectorXd& grad) {
    return (x - clamp(x - grad, lo, hi)).norm();
  };

  res.grad_norm = projected_gradient_norm(res.x, g);
  for (int iter = 0; iter < options.max_iterations; ++iter) {
    if (res.grad_norm <= options.grad_tol) {
      res.converged = true;
      res.message = "projected gradient below tolerance";
      return res;
    }

    // Components pinned at a bound with the gradient pushing outward are frozen
    // for this iteration.
    Eigen::Array<bool, Eigen::Dynamic, 1> active(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      active[i] = (res.x[i] <= lo[i] && g[i] > 0.0) || (res.x[i] >= hi[i] && g[i] < 0.0);
    }
    Eigen::VectorXd gm = g;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (active[i]) gm[i] = 0.0;
    }

    // Two-loop recursion on the free subspace.
    Eigen::VectorXd d = -gm;
    if (!pairs.empty()) {
      std::vector<double> alpha_hist(pairs.size());
      for (std::size_t i = pairs.size(); i-- > 0;) {
        alpha_hist[i] = pairs[i].rho * pairs[i].s.dot(d);
        d -= alpha_hist[i] * pairs[i].y;
      }
      const Pair& last = pairs.back();
      d *= last.s.dot(last.y) / last.y.squaredNorm();
      for (std::size_t i = 0; i < pairs.size(); ++i) {
        const double beta = pairs[i].rho * pairs[i].y.dot(d);
        d += (alpha_hist[i] - beta) * pairs[i].s;
      }
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      if (active[i]) d[i] = 0.0;
    }
    if (d.dot(g) >= -1e-14 * d.norm() * g.norm()) d = -gm;  // not a descent direction

    // Projected backtracking line search.
    double alpha = 1.0;
    bool accepted = false;
    Eigen::VectorXd xn(n);
    Eigen::VectorXd gn(n);
    double fnew = res.f;
    for (int ls = 0; ls < options.max_linesearch; ++ls) {
      xn = clamp(res.x + alpha * d, lo, hi);
      const Eigen::VectorXd delta = xn - res.x;
      if (delta.lpNorm<Eigen::Infinity>() == 0.0) break;
      fnew = fn(xn, gn);
      if (std::isfinite(fnew) && fnew <= res.f + kArmijo * g.dot(delta)) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      res.message = "line search failed";
      return res;
    }

    const Eigen::VectorXd s = xn - res.x;
    const Eigen::VectorXd y = gn - g;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      pairs.push_back({s, y, 1.0 / sy});
      if (static_cast<int>(pairs.size()) > options.memory) pairs.pop_front();
    }

    const double prev_f = res.f;
    res.x = xn;
    res.f = fnew;
    g = gn;
    res.f_history.push_back(res.f);
    res.iterations = iter + 1;
    res.grad_norm = projected_gradient_norm(res.x, g);
    if (std::abs(prev_f - res.f) <= options.step_tol * (1.0 + std::abs(prev_f))) {
      res.converged = res.grad_norm <= options.grad_tol;
      res.message = "objective change below step tolerance";
      return res;
    }
  }
  res.converged = res.grad_norm <= options.grad_tol;
  res.message = res.converged ? "projected gradient below tolerance"
                              : "iteration limit reached";
  return res;
}

}  // namespace laneirl::optim
