#include "laneirl/synth.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

#include "laneirl/dynamics.hpp"

namespace laneirl::synth {

namespace {

struct Motion {
  Vec2 pos;
  double speed = 0.0;
};

// Closed-form scripted motion for an adjacent car. `lane_x` is the car's home
// centerline, `other_x` the opposite lane (for cut-ins); y0 its longitudinal
// start.
Motion behavior_motion(const BehaviorSpec& b, double lane_x, double other_x, double y0,
                       double speed, double t) {
  Motion m;
  switch (b.kind) {
    case BehaviorKind::kConstantVelocity: {
      m.pos = Vec2{lane_x, y0 + speed * t};
      m.speed = speed;
      return m;
    }
    case BehaviorKind::kZigzag: {
      const double phase = 2.0 * kPi / b.period;
      m.pos = Vec2{lane_x + b.amplitude * std::sin(phase * t), y0 + speed * t};
      const double vx = b.amplitude * phase * std::cos(phase * t);
      m.speed = std::hypot(vx, speed);
      return m;
    }
    case BehaviorKind::kCutIn: {
      // Smoothstep lateral blend into the other lane over [t_start, t_start+duration].
      double s = (t - b.t_start) / b.duration;
      s = std::clamp(s, 0.0, 1.0);
      const double blend = s * s * (3.0 - 2.0 * s);
      m.pos = Vec2{lane_x + (other_x - lane_x) * blend, y0 + speed * t};
      double vx = 0.0;
      if (t > b.t_start && t < b.t_start + b.duration) {
        vx = (other_x - lane_x) * 6.0 * s * (1.0 - s) / b.duration;
      }
      m.speed = std::hypot(vx, speed);
      return m;
    }
    case BehaviorKind::kSpeedUp: {
      const double tau = std::max(0.0, t - b.t_start);
      m.pos = Vec2{lane_x, y0 + speed * t + 0.5 * b.accel * tau * tau};
      m.speed = speed + b.accel * tau;
      return m;
    }
  }
  throw InvalidValueError("unknown behavior kind");
}

bool is_preceding(AdjacentRole role) {
  return role == AdjacentRole::kPrecedingCurrent || role == AdjacentRole::kPrecedingTarget;
}

bool is_target_lane(AdjacentRole role) {
  return role == AdjacentRole::kPrecedingTarget || role == AdjacentRole::kFollowingTarget;
}

}  // namespace

const char* to_string(BehaviorKind kind) {
  switch (kind) {
    case BehaviorKind::kConstantVelocity:
      return "constant";
    case BehaviorKind::kZigzag:
      return "zigzag";
    case BehaviorKind::kCutIn:
      return "cutin";
    case BehaviorKind::kSpeedUp:
      return "speedup";
  }
  return "unknown";
}

BehaviorKind behavior_from_string(const std::string& name) {
  if (name == "constant" || name == "constant-velocity") return BehaviorKind::kConstantVelocity;
  if (name == "zigzag") return BehaviorKind::kZigzag;
  if (name == "cutin" || name == "cut-in") return BehaviorKind::kCutIn;
  if (name == "speedup" || name == "speed-up") return BehaviorKind::kSpeedUp;
  throw InvalidValueError("unknown behavior '" + name + "'");
}

Scenario make_scene(const SceneSpec& spec, std::uint64_t seed) {
  if (spec.horizon < 1 || !(spec.dt > 0.0) || !(spec.w > 0.0)) {
    throw InvalidValueError("make_scene: invalid spec");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);

  Scenario s;
  s.id = spec.id_prefix + "_" + std::to_string(seed);
  s.source = spec.id_prefix;
  s.lanes.current_line = make_line(Vec2{0.0, 0.0}, Vec2{0.0, 1.0});
  s.lanes.target_line = make_line(Vec2{spec.w, 0.0}, Vec2{0.0, 1.0});
  s.lanes.w = spec.w;
  s.metadata["seed"] = std::to_string(seed);

  const double ego_v0 = spec.ego_v0 + spec.ego_v0_jitter * unit(rng);
  const int k_steps = spec.horizon;

  double speed_sum = 0.0;
  long speed_count = 0;
  for (int slot = 0; slot < kNumAdjacent; ++slot) {
    const AdjacentRole role = kAllRoles[static_cast<std::size_t>(slot)];
    const AdjacentSpec& a = spec.adjacent[static_cast<std::size_t>(slot)];
    AdjacentTrack& track = s.adjacent[static_cast<std::size_t>(slot)];
    track.role = role;
    track.positions.assign(static_cast<std::size_t>(k_steps), Vec2{});
    track.speeds.assign(static_cast<std::size_t>(k_steps), 0.0);
    track.present.assign(static_cast<std::size_t>(k_steps), 0);
    // Draw jitters in slot order regardless of presence, so presence toggles do
    // not reshuffle the other cars.
    const double speed = a.speed + a.speed_jitter * unit(rng);
    const double gap = std::abs(a.gap + a.gap_jitter * unit(rng));
    if (!a.present) continue;
    const double lane_x = is_target_lane(role) ? spec.w : 0.0;
    const double other_x = is_target_lane(role) ? 0.0 : spec.w;
    const double y0 = is_preceding(role) ? gap : -gap;
    for (int k = 0; k < k_steps; ++k) {
      const Motion m = behavior_motion(a.behavior, lane_x, other_x, y0, speed,
                                       k * spec.dt);
      track.positions[static_cast<std::size_t>(k)] = m.pos;
      track.speeds[static_cast<std::size_t>(k)] = m.speed;
      track.present[static_cast<std::size_t>(k)] = 1;
      speed_sum += m.speed;
      ++speed_count;
    }
  }
  s.v_d = speed_count > 0 ? speed_sum / static_cast<double>(speed_count) : ego_v0;

  // Placeholder ego: constant-speed straight line from the origin along +y.
  s.ego.dt = spec.dt;
  s.ego.x0 = State{0.0, 0.0, kPi / 2.0};
  s.ego.controls.assign(static_cast<std::size_t>(k_steps), Control{ego_v0, 0.0});
  s.ego.states = dynamics::rollout(s.ego.x0, s.ego.controls, spec.dt);
  validate_scenario(s);
  return s;
}

Scenario make_expert(Scenario scenario, const features::ThetaWeights& theta_star,
                     const features::FeatureConfig& cfg,
                     const features::NormalizationConstants& norm, double noise,
                     const trajopt::OptimizerSettings& settings,
                     prediction::PredictorKind predictor, std::uint64_t noise_seed) {
  prediction::ZSeriesSet z;
  const prediction::ZSeriesSet* zp = nullptr;
  if (theta_star.variant == features::RewardVariant::kUnpredictabilityAware) {
    z = prediction::compute_z(scenario, predictor);
    zp = &z;
  }
  trajopt::OptimizeResult opt =
      trajopt::optimize(scenario, theta_star, cfg, norm, zp, settings);
  if (noise > 0.0) {
    std::mt19937_64 rng(noise_seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<Control> controls = opt.trajectory.controls;
    for (Control& u : controls) {
      u.v = std::clamp(u.v + noise * gauss(rng), settings.v_min, settings.v_max);
      u.omega = std::clamp(u.omega + 0.1 * noise * gauss(rng), -settings.omega_max,
                           settings.omega_max);
    }
    opt.trajectory = dynamics::make_trajectory(scenario.ego.x0, controls, scenario.ego.dt);
  }
  scenario.ego = opt.trajectory;

  char buf[64];
  std::string theta_str;
  for (Eigen::Index i = 0; i < theta_star.theta.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g", theta_star.theta[i]);
    if (i > 0) theta_str += " ";
    theta_str += buf;
  }
  scenario.metadata["theta_star"] = theta_str;
  scenario.metadata["theta_star_variant"] = features::to_string(theta_star.variant);
  std::snprintf(buf, sizeof(buf), "%.17g", opt.reward);
  scenario.metadata["expert_reward"] = buf;
  validate_scenario(scenario);
  return scenario;
}

std::vector<ingest::RawTrack> make_fixture_tracks(const FixtureSpec& spec) {
  const int n_frames = static_cast<int>(std::lround(spec.total_time / spec.dt)) + 1;
  std::vector<ingest::RawTrack> tracks;

  // Ego: lane 1 at x = 0, linear lateral ramp to x = w; the lane label flips
  // when the midline is crossed.
  ingest::RawTrack ego;
  ego.vehicle_id = 1;
  for (int f = 0; f < n_frames; ++f) {
    const double t = f * spec.dt;
    double x = 0.0;
    if (t >= spec.ramp_start) {
      x = spec.w * std::clamp((t - spec.ramp_start) / spec.ramp_duration, 0.0, 1.0);
    }
    ego.frames.push_back(f);
    ego.positions.push_back(Vec2{x, spec.ego_speed * t});
    ego.lane_ids.push_back(x < spec.w / 2.0 ? 1 : 2);
  }
  tracks.push_back(std::move(ego));

  struct Neighbor {
    long id;
    double x;
    int lane;
    double y0;
    double speed;
  };
  const Neighbor neighbors[] = {
      {2, 0.0, 1, 25.0, spec.ego_speed},         // preceding, current lane
      {3, spec.w, 2, 35.0, spec.ego_speed - 1},  // preceding, target lane
      {4, 0.0, 1, -25.0, spec.ego_speed},        // following, current lane
      {5, spec.w, 2, -30.0, spec.ego_speed + 1}, // following, target lane
  };
  for (const Neighbor& nb : neighbors) {
    ingest::RawTrack track;
    track.vehicle_id = nb.id;
    for (int f = 0; f < n_frames; ++f) {
      const double t = f * spec.dt;
      track.frames.push_back(f);
      track.positions.push_back(Vec2{nb.x, nb.y0 + nb.speed * t});
      track.lane_ids.push_back(nb.lane);
    }
    tracks.push_back(std::move(track));
  }
  return tracks;
}

std::vector<ingest::RawTrack> scenario_to_tracks(const Scenario& scenario) {
  std::vector<ingest::RawTrack> tracks;
  const int k_steps = scenario.ego.horizon();
  const auto lane_of = [&](const Vec2& p) {
    return lateral_distance(p, scenario.lanes.current_line) <=
                   lateral_distance(p, scenario.lanes.target_line)
               ? 1
               : 2;
  };
  ingest::RawTrack ego;
  ego.vehicle_id = 1;
  for (int k = 0; k <= k_steps; ++k) {
    const Vec2 p = k == 0 ? scenario.ego.x0.position()
                          : scenario.ego.states[static_cast<std::size_t>(k - 1)].position();
    ego.frames.push_back(k);
    ego.positions.push_back(p);
    ego.lane_ids.push_back(lane_of(p));
  }
  tracks.push_back(std::move(ego));
  for (int slot = 0; slot < kNumAdjacent; ++slot) {
    const AdjacentTrack& track = scenario.adjacent[static_cast<std::size_t>(slot)];
    if (!track.any_present()) continue;
    ingest::RawTrack raw;
    raw.vehicle_id = 2 + slot;
    for (int k = 0; k < k_steps; ++k) {
      if (!track.present[static_cast<std::size_t>(k)]) continue;
      const Vec2& p = track.positions[static_cast<std::size_t>(k)];
      raw.frames.push_back(k);
      raw.positions.push_back(p);
      raw.lane_ids.push_back(lane_of(p));
    }
    tracks.push_back(std::move(raw));
  }
  return tracks;
}

void export_fixture(std::span<const ingest::RawTrack> tracks, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("export_fixture: cannot open '" + path + "' for writing");
  out << "vehicle_id,frame,x,y,lane_id\n";
  char buf[64];
  for (const ingest::RawTrack& track : tracks) {
    for (std::size_t i = 0; i < track.frames.size(); ++i) {
      out << track.vehicle_id << ',' << track.frames[i] << ',';
      std::snprintf(buf, sizeof(buf), "%.17g", track.positions[i].x);
      out << buf << ',';
      std::snprintf(buf, sizeof(buf), "%.17g", track.positions[i].y);
      out << buf << ',' << track.lane_ids[i] << '\n';
    }
  }
}

}  // namespace laneirl::synth
