#pragma once

#include <cstdint>
#include <string>

#include <Eigen/Core>

#include "laneirl/features.hpp"
#include "laneirl/prediction.hpp"
#include "laneirl/types.hpp"

namespace laneirl::trajopt {

struct OptimizerSettings {
  int max_iterations = 400;
  double grad_tol = 1e-8;
  double step_tol = 1e-12;
  int restarts = 0;                 // extra perturbed initial guesses, best kept
  double restart_noise_v = 0.5;     // m/s
  double restart_noise_omega = 0.02;  // rad/s
  std::uint64_t seed = 0;
  double v_min = 0.0;               // control bounds, enforced by projection
  double v_max = 60.0;
  double omega_max = 1.0;

  void validate() const;
};

struct ConvergenceReport {
  int iterations = 0;
  double grad_norm = 0.0;
  double reward = 0.0;
  bool converged = false;  // gradient tolerance reached (iteration cap otherwise)
  int restarts_used = 0;
  int best_restart = 0;    // 0 = unperturbed initial guess
  std::string message;
};

struct OptimizeResult {
  Trajectory trajectory;
  double reward = 0.0;
  ConvergenceReport report;
};

// Maximizes the summed normalized reward over the lifted control vector by
// single shooting from the scenario's initial state. The initial guess holds
// the ego's observed initial speed with zero steering; z is held fixed during
// the search (predictions concern the adjacent cars, not the ego plan).
OptimizeResult optimize(const Scenario& scenario, const features::ThetaWeights& theta,
                        const features::FeatureConfig& cfg,
                        const features::NormalizationConstants& norm,
                        const prediction::ZSeriesSet* z, const OptimizerSettings& settings);

// theta^T (normalized feature sums) and its gradient w.r.t. the lifted controls.
double reward_of(const Trajectory& traj, const Scenario& scenario,
                 const features::ThetaWeights& theta, const features::FeatureConfig& cfg,
                 const features::NormalizationConstants& norm,
                 const prediction::ZSeriesSet* z, Eigen::VectorXd* grad);

// Lifted-vector packing used by the optimizer: [v_0, omega_0, v_1, omega_1, ...].
Eigen::VectorXd pack_controls(const Trajectory& traj);
std::vector<Control> unpack_controls(const Eigen::VectorXd& u);

}  // namespace laneirl::trajopt
