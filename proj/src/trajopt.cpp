#include "laneirl/trajopt.hpp"

#include <cmath>
#include <random>

#include "laneirl/dynamics.hpp"
#include "laneirl/feature_derivatives.hpp"
#include "laneirl/optim.hpp"

namespace laneirl::trajopt {

void OptimizerSettings::validate() const {
  if (max_iterations < 1) throw ConfigError("optimizer: max_iterations must be >= 1");
  if (!(grad_tol > 0.0) || !(step_tol > 0.0)) {
    throw ConfigError("optimizer: tolerances must be > 0");
  }
  if (restarts < 0) throw ConfigError("optimizer: restarts must be >= 0");
  if (!(v_min >= 0.0) || !(v_max > v_min) || !(omega_max > 0.0)) {
    throw ConfigError("optimizer: invalid control bounds");
  }
}

Eigen::VectorXd pack_controls(const Trajectory& traj) {
  Eigen::VectorXd u(2 * traj.horizon());
  for (int k = 0; k < traj.horizon(); ++k) {
    u[2 * k] = traj.controls[static_cast<std::size_t>(k)].v;
    u[2 * k + 1] = traj.controls[static_cast<std::size_t>(k)].omega;
  }
  return u;
}

std::vector<Control> unpack_controls(const Eigen::VectorXd& u) {
  std::vector<Control> controls(static_cast<std::size_t>(u.size() / 2));
  for (std::size_t k = 0; k < controls.size(); ++k) {
    controls[k] = Control{u[static_cast<Eigen::Index>(2 * k)],
                          u[static_cast<Eigen::Index>(2 * k + 1)]};
  }
  return controls;
}

double reward_of(const Trajectory& traj, const Scenario& scenario,
                 const features::ThetaWeights& theta, const features::FeatureConfig& cfg,
                 const features::NormalizationConstants& norm,
                 const prediction::ZSeriesSet* z, Eigen::VectorXd* grad) {
  return features::reward_value_gradient(traj, scenario, z, cfg, norm, theta, grad);
}

OptimizeResult optimize(const Scenario& scenario, const features::ThetaWeights& theta,
                        const features::FeatureConfig& cfg,
                        const features::NormalizationConstants& norm,
                        const prediction::ZSeriesSet* z, const OptimizerSettings& settings) {
  settings.validate();
  theta.validate();
  cfg.validate();
  if (theta.variant == features::RewardVariant::kUnpredictabilityAware && z == nullptr) {
    throw ConfigError("optimize: unpredictability variant needs a precomputed z series");
  }

  const int k_steps = scenario.ego.horizon();
  const double dt = scenario.ego.dt;
  const State x0 = scenario.ego.x0;
  const int du = 2 * k_steps;

  Eigen::VectorXd lo(du);
  Eigen::VectorXd hi(du);
  for (int k = 0; k < k_steps; ++k) {
    lo[2 * k] = settings.v_min;
    hi[2 * k] = settings.v_max;
    lo[2 * k + 1] = -settings.omega_max;
    hi[2 * k + 1] = settings.omega_max;
  }

  const auto objective = [&](const Eigen::VectorXd& u, Eigen::VectorXd& grad) {
    Trajectory traj = dynamics::make_trajectory(x0, unpack_controls(u), dt);
    Eigen::VectorXd reward_grad;
    const double reward =
        features::reward_value_gradient(traj, scenario, z, cfg, norm, theta, &reward_grad);
    grad = -reward_grad;
    return -reward;
  };

  // Initial guess: the ego's observed initial speed, zero steering.
  Eigen::VectorXd base = Eigen::VectorXd::Zero(du);
  const double v0 = scenario.ego.controls.empty() ? 0.0 : scenario.ego.controls[0].v;
  for (int k = 0; k < k_steps; ++k) base[2 * k] = v0;

  optim::BoxOptimOptions box;
  box.max_iterations = settings.max_iterations;
  box.grad_tol = settings.grad_tol;
  box.step_tol = settings.step_tol;

  std::mt19937_64 rng(settings.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  OptimizeResult best;
  bool have_best = false;
  for (int attempt = 0; attempt <= settings.restarts; ++attempt) {
    Eigen::VectorXd guess = base;
    if (attempt > 0) {
      for (int k = 0; k < k_steps; ++k) {
        guess[2 * k] += settings.restart_noise_v * gauss(rng);
        guess[2 * k + 1] += settings.restart_noise_omega * gauss(rng);
      }
    }
    const optim::BoxOptimResult res = optim::minimize_box(objective, guess, lo, hi, box);
    OptimizeResult candidate;
    candidate.trajectory = dynamics::make_trajectory(x0, unpack_controls(res.x), dt);
    candidate.reward = -res.f;
    candidate.report.iterations = res.iterations;
    candidate.report.grad_norm = res.grad_norm;
    candidate.report.reward = candidate.reward;
    candidate.report.converged = res.converged;
    candidate.report.restarts_used = settings.restarts;
    candidate.report.best_restart = attempt;
    candidate.report.message = res.message;
    if (!have_best || candidate.reward > best.reward) {
      best = candidate;
      have_best = true;
    }
  }
  return best;
}

}  // namespace laneirl::trajopt
