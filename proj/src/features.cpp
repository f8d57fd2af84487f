#include "laneirl/features.hpp"

#include <cmath>

namespace laneirl::features {

namespace {

constexpr std::array<Feature, 5> kBaselineFeatures = {
    Feature::kLatDev, Feature::kSpeedDev, Feature::kAngSpeed, Feature::kTtcPreceding,
    Feature::kTtcFollowing};
constexpr std::array<Feature, 7> kUnpredFeatures = {
    Feature::kLatDev,          Feature::kSpeedDev,
    Feature::kAngSpeed,        Feature::kTtcPreceding,
    Feature::kTtcFollowing,    Feature::kTtcPrecedingUnpred,
    Feature::kTtcFollowingUnpred};

}  // namespace

int feature_count(RewardVariant variant) {
  return variant == RewardVariant::kBaseline ? 5 : 7;
}

std::span<const Feature> features_of(RewardVariant variant) {
  if (variant == RewardVariant::kBaseline) return kBaselineFeatures;
  return kUnpredFeatures;
}

const char* feature_name(Feature f) {
  switch (f) {
    case Feature::kLatDev:
      return "lat_dev";
    case Feature::kSpeedDev:
      return "speed_dev";
    case Feature::kAngSpeed:
      return "ang_speed";
    case Feature::kTtcPreceding:
      return "ttc_preceding";
    case Feature::kTtcFollowing:
      return "ttc_following";
    case Feature::kTtcPrecedingUnpred:
      return "ttc_preceding_unpred";
    case Feature::kTtcFollowingUnpred:
      return "ttc_following_unpred";
  }
  return "unknown";
}

const char* to_string(RewardVariant variant) {
  return variant == RewardVariant::kBaseline ? "baseline" : "unpredictability-aware";
}

RewardVariant variant_from_string(const std::string& name) {
  if (name == "baseline") return RewardVariant::kBaseline;
  if (name == "unpredictability-aware" || name == "unpred") {
    return RewardVariant::kUnpredictabilityAware;
  }
  throw InvalidValueError("unknown reward variant '" + name + "'");
}

void FeatureConfig::validate() const {
  if (!(t_p > 0.0) || !(t_f > 0.0)) {
    throw InvalidValueError("feature config: t_p and t_f must be > 0");
  }
  if (!(c >= 0.0) || !(c_p >= 0.0) || !(c_f >= 0.0)) {
    throw InvalidValueError("feature config: c, c_p, c_f must be >= 0");
  }
  if (!(v_eps > 0.0)) throw InvalidValueError("feature config: v_eps must be > 0");
  for (double value : {c, t_p, t_f, c_p, c_f, v_eps}) {
    if (!std::isfinite(value)) throw InvalidValueError("feature config: non-finite value");
  }
}

void ThetaWeights::validate() const {
  if (theta.size() != feature_count(variant)) {
    throw InvalidValueError("theta: size does not match variant");
  }
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    if (!std::isfinite(theta[i]) || theta[i] < 0.0) {
      throw InvalidValueError("theta: weights must be finite and >= 0");
    }
  }
}

NormalizationConstants NormalizationConstants::identity(RewardVariant variant) {
  NormalizationConstants norm;
  norm.variant = variant;
  const int p = feature_count(variant);
  norm.min = Eigen::VectorXd::Zero(p);
  norm.max = Eigen::VectorXd::Ones(p);
  return norm;
}

double NormalizationConstants::scale(int i) const {
  const double range = max[i] - min[i];
  return range > 0.0 ? 1.0 / range : 0.0;
}

void NormalizationConstants::validate() const {
  const int p = feature_count(variant);
  if (min.size() != p || max.size() != p) {
    throw InvalidValueError("normalization: size does not match variant");
  }
  for (int i = 0; i < p; ++i) {
    if (!std::isfinite(min[i]) || !std::isfinite(max[i]) || max[i] < min[i]) {
      throw InvalidValueError("normalization: max must be >= min and finite");
    }
  }
}

StepContext make_step_context(const Scenario& scenario,
                              const prediction::ZSeriesSet* z, int k) {
  StepContext ctx;
  ctx.v_d = scenario.v_d;
  const auto fill = [&](StepNeighbor& out, AdjacentRole role) {
    const AdjacentTrack& track = scenario.track(role);
    const auto idx = static_cast<std::size_t>(k);
    if (k < 0 || k >= track.horizon() || !track.present[idx]) {
      out.present = false;
      return;
    }
    out.present = true;
    out.pos = track.positions[idx];
    out.speed = track.speeds[idx];
    out.z = 0.0;
    if (z != nullptr) {
      const auto& series = (*z)[static_cast<std::size_t>(role)];
      if (idx < series.values.size()) out.z = series.values[idx];
    }
  };
  fill(ctx.preceding[0], AdjacentRole::kPrecedingCurrent);
  fill(ctx.preceding[1], AdjacentRole::kPrecedingTarget);
  fill(ctx.follower, AdjacentRole::kFollowingTarget);
  return ctx;
}

double phi_d(const State& x, const LaneGeometry& lanes) {
  return phi_lat_dev(make_ego_step(x, Control{}), lanes);
}

double phi_v(const Control& u, double v_d) {
  return phi_speed_dev(make_ego_step(State{}, u), v_d);
}

double phi_a(const Control& u) { return phi_ang_speed(make_ego_step(State{}, u)); }

double phi_p(const State& x, const Control& u, const std::array<StepNeighbor, 2>& preceding,
             const FeatureConfig& cfg) {
  StepContext ctx;
  ctx.preceding = preceding;
  return phi_ttc_preceding(make_ego_step(x, u), ctx, cfg, 0.0);
}

double phi_f(const State& x, const StepNeighbor& follower, const LaneGeometry& lanes,
             const FeatureConfig& cfg) {
  StepContext ctx;
  ctx.follower = follower;
  return phi_ttc_following(make_ego_step(x, Control{}), ctx, lanes, cfg, 0.0);
}

double phi_pz(const State& x, const Control& u, const std::array<StepNeighbor, 2>& preceding,
              const FeatureConfig& cfg) {
  StepContext ctx;
  ctx.preceding = preceding;
  return phi_ttc_preceding(make_ego_step(x, u), ctx, cfg, cfg.c_p);
}

double phi_fz(const State& x, const StepNeighbor& follower, const LaneGeometry& lanes,
              const FeatureConfig& cfg) {
  StepContext ctx;
  ctx.follower = follower;
  return phi_ttc_following(make_ego_step(x, Control{}), ctx, lanes, cfg, cfg.c_f);
}

Eigen::VectorXd step_features(const Trajectory& traj, const Scenario& scenario,
                              const prediction::ZSeriesSet* z, int k,
                              const FeatureConfig& cfg, RewardVariant variant) {
  const StepContext ctx = make_step_context(scenario, z, k);
  const EgoStep<double> e =
      make_ego_step(traj.state_at(k), traj.controls[static_cast<std::size_t>(k)]);
  const auto feats = features_of(variant);
  Eigen::VectorXd values(static_cast<Eigen::Index>(feats.size()));
  for (std::size_t i = 0; i < feats.size(); ++i) {
    values[static_cast<Eigen::Index>(i)] =
        eval_step_feature(feats[i], e, ctx, scenario.lanes, cfg);
  }
  return values;
}

FeatureVector feature_sums(const Trajectory& traj, const Scenario& scenario,
                           const prediction::ZSeriesSet* z, const FeatureConfig& cfg,
                           RewardVariant variant) {
  const int k_steps = traj.horizon();
  const auto feats = features_of(variant);
  FeatureVector out;
  out.variant = variant;
  out.values = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(feats.size()));
  for (int k = 0; k < k_steps; ++k) {
    const Eigen::VectorXd step = step_features(traj, scenario, z, k, cfg, variant);
    for (Eigen::Index i = 0; i < step.size(); ++i) {
      if (!std::isfinite(step[i])) {
        throw FeatureEvalError(feature_name(feats[static_cast<std::size_t>(i)]), k);
      }
    }
    out.values += step;
  }
  return out;
}

Eigen::VectorXd normalize(const Eigen::VectorXd& step_values,
                          const NormalizationConstants& norm) {
  Eigen::VectorXd out(step_values.size());
  for (Eigen::Index i = 0; i < step_values.size(); ++i) {
    out[i] = (step_values[i] - norm.min[i]) * norm.scale(static_cast<int>(i));
  }
  return out;
}

Eigen::VectorXd normalized_sums(const Eigen::VectorXd& raw_sums, int horizon,
                                const NormalizationConstants& norm) {
  Eigen::VectorXd out(raw_sums.size());
  for (Eigen::Index i = 0; i < raw_sums.size(); ++i) {
    out[i] = (raw_sums[i] - horizon * norm.min[i]) * norm.scale(static_cast<int>(i));
  }
  return out;
}

double reward(const FeatureVector& normalized, const ThetaWeights& theta) {
  if (normalized.variant != theta.variant) {
    throw InvalidValueError("reward: feature vector and theta variants differ");
  }
  return theta.theta.dot(normalized.values);
}

NormalizationConstants compute_normalization(std::span<const Scenario> scenarios,
                                             std::span<const prediction::ZSeriesSet> z,
                                             const FeatureConfig& cfg,
                                             RewardVariant variant) {
  if (scenarios.empty()) {
    throw InvalidValueError("compute_normalization: empty scenario list");
  }
  if (!z.empty() && z.size() != scenarios.size()) {
    throw InvalidValueError("compute_normalization: z list does not match scenarios");
  }
  const int p = feature_count(variant);
  NormalizationConstants norm;
  norm.variant = variant;
  norm.min = Eigen::VectorXd::Constant(p, std::numeric_limits<double>::infinity());
  norm.max = Eigen::VectorXd::Constant(p, -std::numeric_limits<double>::infinity());
  for (std::size_t s = 0; s < scenarios.size(); ++s) {
    const Scenario& scenario = scenarios[s];
    const prediction::ZSeriesSet* zs = z.empty() ? nullptr : &z[s];
    for (int k = 0; k < scenario.ego.horizon(); ++k) {
      const Eigen::VectorXd step = step_features(scenario.ego, scenario, zs, k, cfg, variant);
      norm.min = norm.min.cwiseMin(step);
      norm.max = norm.max.cwiseMax(step);
    }
  }
  return norm;
}

double trajectory_reward(const Trajectory& traj, const Scenario& scenario,
                         const prediction::ZSeriesSet* z, const FeatureConfig& cfg,
                         const NormalizationConstants& norm, const ThetaWeights& theta) {
  const FeatureVector sums = feature_sums(traj, scenario, z, cfg, theta.variant);
  FeatureVector normalized;
  normalized.variant = theta.variant;
  normalized.values = normalized_sums(sums.values, traj.horizon(), norm);
  return reward(normalized, theta);
}

}  // namespace laneirl::features
