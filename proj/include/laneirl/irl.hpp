#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "laneirl/features.hpp"
#include "laneirl/prediction.hpp"
#include "laneirl/trajopt.hpp"
#include "laneirl/types.hpp"

namespace laneirl::irl {

inline const std::vector<double> kLambdaLadder = {0.0, 1e-8, 1e-6, 1e-4, 1e-2, 1.0};

// First and second derivatives of each normalized feature sum w.r.t. the
// expert's lifted controls. By linearity of the reward, g(theta) = sum theta_i g_i
// and H(theta) = sum theta_i H_i.
struct PerFeatureDerivatives {
  features::RewardVariant variant = features::RewardVariant::kBaseline;
  int d_u = 0;
  Eigen::VectorXd values;             // normalized feature sums at the expert
  std::vector<Eigen::VectorXd> g;     // per feature, d_u
  std::vector<Eigen::MatrixXd> h;     // per feature, d_u x d_u
};

PerFeatureDerivatives per_feature_derivatives(const Scenario& scenario,
                                              const prediction::ZSeriesSet* z,
                                              const features::FeatureConfig& cfg,
                                              const features::NormalizationConstants& norm,
                                              features::RewardVariant variant);

struct LikelihoodParts {
  Eigen::VectorXd g;      // reward gradient at the expert controls
  Eigen::MatrixXd h;      // reward Hessian (unregularized)
  Eigen::MatrixXd chol;   // lower Cholesky factor of -(H - lambda I)
  double lambda = 0.0;    // regularization actually applied
  double loglik = 0.0;
};

// Laplace-approximated log-likelihood of one expert demonstration:
//   L = 1/2 g^T H_reg^{-1} g + 1/2 log|-H_reg| - d_u/2 log(2 pi),
// with log|-H_reg| = 2 sum_i log L_ii from the Cholesky factor. Escalates
// lambda through kLambdaLadder until -(H - lambda I) factorizes; throws
// NonPositiveDefiniteError (with the lambda history) if the ladder is exhausted.
LikelihoodParts log_likelihood(const PerFeatureDerivatives& parts,
                               const features::ThetaWeights& theta);

// dL/dtheta_j = g_j^T H^{-1} g - 1/2 g^T H^{-1} H_j H^{-1} g + 1/2 tr(H^{-1} H_j)
// evaluated at the regularized H.
Eigen::VectorXd log_likelihood_grad(const PerFeatureDerivatives& parts,
                                    const features::ThetaWeights& theta);

struct FitSettings {
  int max_iterations = 300;
  double grad_tol = 1e-6;
  double step_tol = 1e-10;
  double theta_max = 1e3;          // box upper bound; theta >= 0 below
  Eigen::VectorXd init_theta;      // empty: all-ones scaled until L is finite
  std::uint64_t seed = 0;          // recorded in the report (the fit is deterministic)
  int jobs = 1;                    // workers for the per-scenario derivative cache
};

struct FitIterate {
  int iteration = 0;
  double loglik = 0.0;
  double grad_norm = 0.0;
  double lambda_max = 0.0;  // largest regularization applied across scenarios
};

struct FitResult {
  features::ThetaWeights theta;
  features::NormalizationConstants norm;
  std::vector<FitIterate> iterates;
  double final_loglik = 0.0;
  double grad_norm = 0.0;
  bool converged = false;
  std::uint64_t seed = 0;
  std::string message;
};

// Maximum likelihood fit of theta >= 0 over a training set: sums the Laplace
// log-likelihood across scenarios (deterministic order) and ascends with the
// projected quasi-Newton optimizer. Normalization constants are computed from
// the training split and frozen into the result.
FitResult fit(const std::vector<Scenario>& train, features::RewardVariant variant,
              const features::FeatureConfig& cfg, const FitSettings& settings,
              prediction::PredictorKind predictor,
              const std::vector<prediction::ZSeriesSet>* precomputed_z = nullptr);

struct SweepPoint {
  features::FeatureConfig cfg;
  double avg_mee = 0.0;   // training-set average MEE of regenerated trajectories
  double final_loglik = 0.0;
};

struct SweepResult {
  features::FeatureConfig best;
  int best_index = 0;
  std::vector<SweepPoint> points;
};

// Fits theta per grid point and scores each by the training-set average MEE of
// regenerated trajectories; ties break toward smaller c_p + c_f, then grid order.
SweepResult hyperparameter_sweep(const std::vector<Scenario>& train,
                                 features::RewardVariant variant,
                                 const std::vector<features::FeatureConfig>& grid,
                                 const FitSettings& fit_settings,
                                 const trajopt::OptimizerSettings& regen_settings,
                                 prediction::PredictorKind predictor);

}  // namespace laneirl::irl
