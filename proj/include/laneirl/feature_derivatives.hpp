#pragma once

#include <vector>

#include <Eigen/Core>

#include "laneirl/features.hpp"
#include "laneirl/types.hpp"

namespace laneirl::features {

// Raw per-feature trajectory sums with first (and optionally second)
// derivatives w.r.t. the lifted control vector u = [v_0, w_0, ..., v_{K-1}, w_{K-1}].
struct FeatureSumDerivatives {
  Eigen::VectorXd values;             // per feature
  std::vector<Eigen::VectorXd> grad;  // per feature, 2K
  std::vector<Eigen::MatrixXd> hess;  // per feature, 2K x 2K; empty if not requested
};

// Per-step partials are produced by forward-mode AD in the 5 step variables
// (x, y, psi, v, omega); the chain through the rollout uses the analytic
// state sensitivities of the unicycle (heading is linear in the steering
// inputs, so the only second-order state terms are the position curvatures).
FeatureSumDerivatives feature_sum_derivatives(const Trajectory& traj,
                                              const Scenario& scenario,
                                              const prediction::ZSeriesSet* z,
                                              const FeatureConfig& cfg,
                                              RewardVariant variant,
                                              bool with_hessian);

// Value and gradient of theta^T (normalized feature sums) for a candidate
// control vector; the fast path used by the trajectory optimizer.
double reward_value_gradient(const Trajectory& traj, const Scenario& scenario,
                             const prediction::ZSeriesSet* z, const FeatureConfig& cfg,
                             const NormalizationConstants& norm,
                             const ThetaWeights& theta, Eigen::VectorXd* grad);

}  // namespace laneirl::features
