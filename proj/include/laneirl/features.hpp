#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "laneirl/dual.hpp"
#include "laneirl/prediction.hpp"
#include "laneirl/types.hpp"

namespace laneirl::features {

enum class Feature : int {
  kLatDev = 0,             // -exp(d/w), distance to the target centerline
  kSpeedDev = 1,           // -(v - v_d)^2
  kAngSpeed = 2,           // -omega^2
  kTtcPreceding = 3,       // soft TTC with the two preceding cars
  kTtcFollowing = 4,       // soft TTC with the target-lane follower
  kTtcPrecedingUnpred = 5, // preceding TTC with c_p * z^2 proximity inflation
  kTtcFollowingUnpred = 6, // follower TTC with c_f * z^2 proximity inflation
};

enum class RewardVariant : int { kBaseline = 0, kUnpredictabilityAware = 1 };

int feature_count(RewardVariant variant);
std::span<const Feature> features_of(RewardVariant variant);
const char* feature_name(Feature f);
const char* to_string(RewardVariant variant);
RewardVariant variant_from_string(const std::string& name);

struct FeatureConfig {
  double c = 1.0;      // preceding-angle decay
  double t_p = 2.0;    // preceding TTC scale (s)
  double t_f = 2.0;    // following TTC scale (s)
  double c_p = 10.0;   // preceding unpredictability gain
  double c_f = 10.0;   // following unpredictability gain
  double v_eps = 0.1;  // speed floor (m/s)

  void validate() const;
};

struct ThetaWeights {
  RewardVariant variant = RewardVariant::kBaseline;
  Eigen::VectorXd theta;

  void validate() const;  // size matches variant, entries finite and >= 0
};

// Per-feature min/max of per-step feature values over the training split,
// frozen into the model artifact.
struct NormalizationConstants {
  RewardVariant variant = RewardVariant::kBaseline;
  Eigen::VectorXd min;
  Eigen::VectorXd max;

  static NormalizationConstants identity(RewardVariant variant);
  // 1/(max-min); 0 when the range is degenerate (feature maps to constant 0).
  double scale(int i) const;
  void validate() const;
};

struct FeatureVector {
  RewardVariant variant = RewardVariant::kBaseline;
  Eigen::VectorXd values;
};

// One adjacent car frozen at a step: position, speed and unpredictability are
// constants with respect to the ego plan.
struct StepNeighbor {
  bool present = false;
  Vec2 pos;
  double speed = 0.0;
  double z = 0.0;
};

struct StepContext {
  std::array<StepNeighbor, 2> preceding;  // preceding-current, preceding-target
  StepNeighbor follower;                  // following-target
  double v_d = 0.0;
};

StepContext make_step_context(const Scenario& scenario,
                              const prediction::ZSeriesSet* z, int k);

// ---- per-step kernels, templated over the scalar type for AD ----

template <class T>
struct EgoStep {
  T x, y, psi, v, omega;
};

inline EgoStep<double> make_ego_step(const State& x, const Control& u) {
  return {x.x, x.y, x.psi, u.v, u.omega};
}

namespace detail {

inline void wrap_value(double& a) { a = wrap_angle(a); }
template <int N>
void wrap_value(ad::Dual1<N>& a) {
  a.v = wrap_angle(a.v);
}
template <int N>
void wrap_value(ad::Dual2<N>& a) {
  a.v = wrap_angle(a.v);
}

inline double value_of(double a) { return a; }
template <int N>
double value_of(const ad::Dual1<N>& a) {
  return a.v;
}
template <int N>
double value_of(const ad::Dual2<N>& a) {
  return a.v;
}

// Signed perpendicular offset from a unit-direction line.
template <class T>
T line_offset(const T& x, const T& y, const Line2& line) {
  return line.dir.x * (y - line.point.y) - line.dir.y * (x - line.point.x);
}

}  // namespace detail

template <class T>
T phi_lat_dev(const EgoStep<T>& e, const LaneGeometry& lanes) {
  T off = detail::line_offset(e.x, e.y, lanes.target_line);
  return -ad::exp(ad::abs(off) / lanes.w);
}

template <class T>
T phi_speed_dev(const EgoStep<T>& e, double v_d) {
  T dv = e.v - v_d;
  return -(dv * dv);
}

template <class T>
T phi_ang_speed(const EgoStep<T>& e) {
  return -(e.omega * e.omega);
}

// Soft TTC with the preceding cars; unpred_gain = 0 gives the baseline feature,
// unpred_gain = c_p the unpredictability-weighted one. h1 gates cars that are
// not in front (|alpha| > pi/2) to exactly zero.
template <class T>
T phi_ttc_preceding(const EgoStep<T>& e, const StepContext& ctx,
                    const FeatureConfig& cfg, double unpred_gain) {
  T total(0.0);
  for (const StepNeighbor& car : ctx.preceding) {
    if (!car.present) continue;
    T dx = car.pos.x - e.x;
    T dy = car.pos.y - e.y;
    T alpha = ad::atan2(dy, dx) - e.psi;
    detail::wrap_value(alpha);
    if (std::abs(detail::value_of(alpha)) > kPi / 2.0) continue;
    T h1 = ad::exp((-cfg.c) * ad::abs(alpha));
    T vm = ad::max(e.v, cfg.v_eps);
    T numer = dx * dx + dy * dy - unpred_gain * car.z * car.z;
    T expo = -(numer / (cfg.t_p * cfg.t_p * (vm * vm)));
    total = total + h1 * ad::exp(expo);
  }
  return -total;
}

// Soft TTC with the target-lane follower, gated by h2 = d^2/w^2 so it vanishes
// once the ego sits on the target centerline.
template <class T>
T phi_ttc_following(const EgoStep<T>& e, const StepContext& ctx,
                    const LaneGeometry& lanes, const FeatureConfig& cfg,
                    double unpred_gain) {
  const StepNeighbor& car = ctx.follower;
  if (!car.present) return T(0.0);
  T off = detail::line_offset(e.x, e.y, lanes.target_line);
  T h2 = (off * off) / (lanes.w * lanes.w);
  T dx = car.pos.x - e.x;
  T dy = car.pos.y - e.y;
  const double vf = car.speed >= cfg.v_eps ? car.speed : cfg.v_eps;
  T numer = dx * dx + dy * dy - unpred_gain * car.z * car.z;
  T expo = -(numer / (cfg.t_f * cfg.t_f * vf * vf));
  return -(h2 * ad::exp(expo));
}

template <class T>
T eval_step_feature(Feature f, const EgoStep<T>& e, const StepContext& ctx,
                    const LaneGeometry& lanes, const FeatureConfig& cfg) {
  switch (f) {
    case Feature::kLatDev:
      return phi_lat_dev(e, lanes);
    case Feature::kSpeedDev:
      return phi_speed_dev(e, ctx.v_d);
    case Feature::kAngSpeed:
      return phi_ang_speed(e);
    case Feature::kTtcPreceding:
      return phi_ttc_preceding(e, ctx, cfg, 0.0);
    case Feature::kTtcFollowing:
      return phi_ttc_following(e, ctx, lanes, cfg, 0.0);
    case Feature::kTtcPrecedingUnpred:
      return phi_ttc_preceding(e, ctx, cfg, cfg.c_p);
    case Feature::kTtcFollowingUnpred:
      return phi_ttc_following(e, ctx, lanes, cfg, cfg.c_f);
  }
  throw InvalidValueError("unknown feature");
}

// ---- plain-double wrappers matching the per-feature contracts ----

double phi_d(const State& x, const LaneGeometry& lanes);
double phi_v(const Control& u, double v_d);
double phi_a(const Control& u);
double phi_p(const State& x, const Control& u, const std::array<StepNeighbor, 2>& preceding,
             const FeatureConfig& cfg);
double phi_f(const State& x, const StepNeighbor& follower, const LaneGeometry& lanes,
             const FeatureConfig& cfg);
double phi_pz(const State& x, const Control& u, const std::array<StepNeighbor, 2>& preceding,
              const FeatureConfig& cfg);
double phi_fz(const State& x, const StepNeighbor& follower, const LaneGeometry& lanes,
              const FeatureConfig& cfg);

// Per-step raw feature values for trajectory step k.
Eigen::VectorXd step_features(const Trajectory& traj, const Scenario& scenario,
                              const prediction::ZSeriesSet* z, int k,
                              const FeatureConfig& cfg, RewardVariant variant);

// Raw per-feature sums over k = 0..K-1. Throws FeatureEvalError (naming the
// feature and step) if any per-step value is non-finite.
FeatureVector feature_sums(const Trajectory& traj, const Scenario& scenario,
                           const prediction::ZSeriesSet* z, const FeatureConfig& cfg,
                           RewardVariant variant);

// Min-max map (phi - min)/(max - min) per feature; degenerate ranges map to 0.
Eigen::VectorXd normalize(const Eigen::VectorXd& step_values,
                          const NormalizationConstants& norm);

// Normalized trajectory sums: (Phi_i - K*min_i) * scale_i.
Eigen::VectorXd normalized_sums(const Eigen::VectorXd& raw_sums, int horizon,
                                const NormalizationConstants& norm);

// theta^T phi.
double reward(const FeatureVector& normalized, const ThetaWeights& theta);

// Per-step min/max over the expert trajectories of a training split.
NormalizationConstants compute_normalization(std::span<const Scenario> scenarios,
                                             std::span<const prediction::ZSeriesSet> z,
                                             const FeatureConfig& cfg,
                                             RewardVariant variant);

// theta^T (normalized feature sums) of a candidate trajectory in a scenario.
double trajectory_reward(const Trajectory& traj, const Scenario& scenario,
                         const prediction::ZSeriesSet* z, const FeatureConfig& cfg,
                         const NormalizationConstants& norm, const ThetaWeights& theta);

}  // namespace laneirl::features
