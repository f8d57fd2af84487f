#include "laneirl/irl.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Cholesky>

#include "laneirl/eval.hpp"
#include "laneirl/feature_derivatives.hpp"
#include "laneirl/optim.hpp"
#include "laneirl/parallel.hpp"

namespace laneirl::irl {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

struct Factorization {
  Eigen::LLT<Eigen::MatrixXd> llt;
  double lambda = 0.0;
};

// Cholesky of -(H - lambda I), escalating lambda until it succeeds.
Factorization factor_neg_hessian(const Eigen::MatrixXd& h) {
  std::vector<double> tried;
  for (double lambda : kLambdaLadder) {
    Eigen::MatrixXd a = -h;
    a.diagonal().array() += lambda;
    Factorization f;
    f.llt.compute(a);
    f.lambda = lambda;
    tried.push_back(lambda);
    if (f.llt.info() == Eigen::Success) return f;
  }
  throw NonPositiveDefiniteError(tried);
}

void check_theta(const PerFeatureDerivatives& parts, const features::ThetaWeights& theta) {
  theta.validate();
  if (theta.variant != parts.variant) {
    throw InvalidValueError("log_likelihood: theta variant does not match derivatives");
  }
}

}  // namespace

PerFeatureDerivatives per_feature_derivatives(const Scenario& scenario,
                                              const prediction::ZSeriesSet* z,
                                              const features::FeatureConfig& cfg,
                                              const features::NormalizationConstants& norm,
                                              features::RewardVariant variant) {
  const features::FeatureSumDerivatives raw = features::feature_sum_derivatives(
      scenario.ego, scenario, z, cfg, variant, /*with_hessian=*/true);
  const int p = features::feature_count(variant);
  PerFeatureDerivatives out;
  out.variant = variant;
  out.d_u = 2 * scenario.ego.horizon();
  out.values = features::normalized_sums(raw.values, scenario.ego.horizon(), norm);
  out.g.resize(static_cast<std::size_t>(p));
  out.h.resize(static_cast<std::size_t>(p));
  for (int i = 0; i < p; ++i) {
    const double sc = norm.scale(i);
    out.g[static_cast<std::size_t>(i)] = sc * raw.grad[static_cast<std::size_t>(i)];
    out.h[static_cast<std::size_t>(i)] = sc * raw.hess[static_cast<std::size_t>(i)];
    if (!out.g[static_cast<std::size_t>(i)].allFinite() ||
        !out.h[static_cast<std::size_t>(i)].allFinite()) {
      throw NumericalError("per_feature_derivatives: non-finite derivative for feature '" +
                           std::string(features::feature_name(features::features_of(variant)[
                               static_cast<std::size_t>(i)])) +
                           "' in scenario '" + scenario.id + "'");
    }
  }
  return out;
}

LikelihoodParts log_likelihood(const PerFeatureDerivatives& parts,
                               const features::ThetaWeights& theta) {
  check_theta(parts, theta);
  const int p = static_cast<int>(parts.g.size());
  LikelihoodParts out;
  out.g = Eigen::VectorXd::Zero(parts.d_u);
  out.h = Eigen::MatrixXd::Zero(parts.d_u, parts.d_u);
  for (int i = 0; i < p; ++i) {
    out.g.noalias() += theta.theta[i] * parts.g[static_cast<std::size_t>(i)];
    out.h.noalias() += theta.theta[i] * parts.h[static_cast<std::size_t>(i)];
  }
  const Factorization f = factor_neg_hessian(out.h);
  out.lambda = f.lambda;
  out.chol = f.llt.matrixL();
  // g^T H_reg^{-1} g = -g^T (-H_reg)^{-1} g; log|-H_reg| = 2 sum log L_ii.
  const Eigen::VectorXd y = f.llt.solve(out.g);
  double logdet = 0.0;
  for (int i = 0; i < parts.d_u; ++i) logdet += std::log(out.chol(i, i));
  out.loglik = -0.5 * out.g.dot(y) + logdet - 0.5 * parts.d_u * kLog2Pi;
  return out;
}

Eigen::VectorXd log_likelihood_grad(const PerFeatureDerivatives& parts,
                                    const features::ThetaWeights& theta) {
  check_theta(parts, theta);
  const int p = static_cast<int>(parts.g.size());
  Eigen::VectorXd g = Eigen::VectorXd::Zero(parts.d_u);
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(parts.d_u, parts.d_u);
  for (int i = 0; i < p; ++i) {
    g.noalias() += theta.theta[i] * parts.g[static_cast<std::size_t>(i)];
    h.noalias() += theta.theta[i] * parts.h[static_cast<std::size_t>(i)];
  }
  const Factorization f = factor_neg_hessian(h);
  // u = H_reg^{-1} g and the explicit inverse for the trace terms.
  const Eigen::VectorXd u = -f.llt.solve(g);
  const Eigen::MatrixXd hinv =
      -f.llt.solve(Eigen::MatrixXd::Identity(parts.d_u, parts.d_u));
  Eigen::VectorXd grad(p);
  for (int j = 0; j < p; ++j) {
    const Eigen::MatrixXd& hj = parts.h[static_cast<std::size_t>(j)];
    const double term1 = parts.g[static_cast<std::size_t>(j)].dot(u);
    const double term2 = -0.5 * u.dot(hj * u);
    const double term3 = 0.5 * hinv.cwiseProduct(hj).sum();
    grad[j] = term1 + term2 + term3;
  }
  return grad;
}

FitResult fit(const std::vector<Scenario>& train, features::RewardVariant variant,
              const features::FeatureConfig& cfg, const FitSettings& settings,
              prediction::PredictorKind predictor,
              const std::vector<prediction::ZSeriesSet>* precomputed_z) {
  if (train.empty()) throw InvalidValueError("fit: need at least one training scenario");
  cfg.validate();
  const int p = features::feature_count(variant);
  const bool needs_z = variant == features::RewardVariant::kUnpredictabilityAware;

  // z once per scenario, then normalization over the whole split, then the
  // cached per-scenario likelihood parts (computed concurrently, consumed in
  // deterministic scenario order).
  std::vector<prediction::ZSeriesSet> z_local;
  const std::vector<prediction::ZSeriesSet>* z = precomputed_z;
  if (needs_z && z == nullptr) {
    z_local.resize(train.size());
    parallel_for(train.size(), settings.jobs, [&](std::size_t i) {
      z_local[i] = prediction::compute_z(train[i], predictor);
    });
    z = &z_local;
  }
  if (needs_z && z->size() != train.size()) {
    throw InvalidValueError("fit: z list does not match scenarios");
  }

  FitResult res;
  res.seed = settings.seed;
  res.norm = features::compute_normalization(
      train, needs_z ? std::span<const prediction::ZSeriesSet>(*z)
                     : std::span<const prediction::ZSeriesSet>(),
      cfg, variant);

  std::vector<PerFeatureDerivatives> cache(train.size());
  parallel_for(train.size(), settings.jobs, [&](std::size_t i) {
    cache[i] = per_feature_derivatives(train[i], needs_z ? &(*z)[i] : nullptr, cfg,
                                       res.norm, variant);
  });

  double lambda_max_seen = 0.0;
  const auto objective = [&](const Eigen::VectorXd& theta_vec, Eigen::VectorXd& grad) {
    features::ThetaWeights theta{variant, theta_vec};
    grad = Eigen::VectorXd::Zero(p);
    double total = 0.0;
    double lambda_max = 0.0;
    try {
      for (const PerFeatureDerivatives& parts : cache) {
        const LikelihoodParts lp = log_likelihood(parts, theta);
        total += lp.loglik;
        lambda_max = std::max(lambda_max, lp.lambda);
        grad.noalias() -= log_likelihood_grad(parts, theta);
      }
    } catch (const NonPositiveDefiniteError&) {
      return std::numeric_limits<double>::infinity();
    }
    lambda_max_seen = std::max(lambda_max_seen, lambda_max);
    return -total;
  };

  // Initialization: all-ones scaled down until the likelihood is finite.
  Eigen::VectorXd theta0;
  if (settings.init_theta.size() > 0) {
    if (settings.init_theta.size() != p) {
      throw ConfigError("fit: init_theta size does not match variant");
    }
    theta0 = settings.init_theta;
  } else {
    theta0 = Eigen::VectorXd::Ones(p);
    Eigen::VectorXd scratch(p);
    int attempts = 0;
    while (!std::isfinite(objective(theta0, scratch))) {
      theta0 *= 0.1;
      if (++attempts > 40) {
        throw DivergenceError("fit: could not find a finite initial likelihood");
      }
    }
  }

  optim::BoxOptimOptions box;
  box.max_iterations = settings.max_iterations;
  box.grad_tol = settings.grad_tol;
  box.step_tol = settings.step_tol;
  const Eigen::VectorXd lo = Eigen::VectorXd::Zero(p);
  const Eigen::VectorXd hi = Eigen::VectorXd::Constant(p, settings.theta_max);

  const optim::BoxOptimResult opt = optim::minimize_box(objective, theta0, lo, hi, box);

  res.theta = features::ThetaWeights{variant, opt.x};
  res.final_loglik = -opt.f;
  res.grad_norm = opt.grad_norm;
  res.converged = opt.converged;
  res.message = opt.message;
  res.iterates.reserve(opt.f_history.size());
  for (std::size_t i = 0; i < opt.f_history.size(); ++i) {
    FitIterate it;
    it.iteration = static_cast<int>(i);
    it.loglik = -opt.f_history[i];
    it.lambda_max = lambda_max_seen;
    res.iterates.push_back(it);
  }
  if (!res.iterates.empty()) res.iterates.back().grad_norm = opt.grad_norm;
  return res;
}

SweepResult hyperparameter_sweep(const std::vector<Scenario>& train,
                                 features::RewardVariant variant,
                                 const std::vector<features::FeatureConfig>& grid,
                                 const FitSettings& fit_settings,
                                 const trajopt::OptimizerSettings& regen_settings,
                                 prediction::PredictorKind predictor) {
  if (grid.empty()) throw ConfigError("hyperparameter_sweep: empty grid");
  const bool needs_z = variant == features::RewardVariant::kUnpredictabilityAware;

  // z does not depend on the feature config, so share it across grid points.
  std::vector<prediction::ZSeriesSet> z;
  if (needs_z) {
    z.resize(train.size());
    parallel_for(train.size(), fit_settings.jobs, [&](std::size_t i) {
      z[i] = prediction::compute_z(train[i], predictor);
    });
  }

  SweepResult out;
  out.points.reserve(grid.size());
  double best_score = std::numeric_limits<double>::infinity();
  double best_tiebreak = std::numeric_limits<double>::infinity();
  for (std::size_t gi = 0; gi < grid.size(); ++gi) {
    const features::FeatureConfig& cfg = grid[gi];
    const FitResult fitted = fit(train, variant, cfg, fit_settings, predictor,
                                 needs_z ? &z : nullptr);
    std::vector<double> mees(train.size());
    parallel_for(train.size(), fit_settings.jobs, [&](std::size_t i) {
      const trajopt::OptimizeResult gen =
          trajopt::optimize(train[i], fitted.theta, cfg, fitted.norm,
                            needs_z ? &z[i] : nullptr, regen_settings);
      mees[i] = eval::mee(gen.trajectory, train[i].ego);
    });
    const eval::MeanStd score = eval::avg_mee(mees);

    SweepPoint point;
    point.cfg = cfg;
    point.avg_mee = score.mean;
    point.final_loglik = fitted.final_loglik;
    out.points.push_back(point);

    const double tiebreak = cfg.c_p + cfg.c_f;
    if (score.mean < best_score ||
        (score.mean == best_score && tiebreak < best_tiebreak)) {
      best_score = score.mean;
      best_tiebreak = tiebreak;
      out.best = cfg;
      out.best_index = static_cast<int>(gi);
    }
  }
  return out;
}

}  // namespace laneirl::irl
