#include "laneirl/types.hpp"

#include <cmath>

#include "laneirl/dynamics.hpp"

namespace laneirl {

double wrap_angle(double a) {
  if (!std::isfinite(a)) {
    throw InvalidValueError("wrap_angle: non-finite angle");
  }
  double r = std::remainder(a, 2.0 * kPi);
  if (r <= -kPi) r += 2.0 * kPi;
  return r;
}

Line2 make_line(Vec2 point, Vec2 dir) {
  const double n = dir.norm();
  if (!(n > 1e-12) || !std::isfinite(n)) {
    throw InvalidGeometryError("make_line: degenerate direction");
  }
  return Line2{point, {dir.x / n, dir.y / n}};
}

double lateral_offset(const Vec2& p, const Line2& line) {
  const double n = line.dir.norm();
  if (!(n > 1e-12) || !std::isfinite(n)) {
    throw InvalidGeometryError("lateral_offset: degenerate line direction");
  }
  return line.dir.cross(p - line.point) / n;
}

double lateral_distance(const Vec2& p, const Line2& line) {
  return std::abs(lateral_offset(p, line));
}

const char* to_string(AdjacentRole role) {
  switch (role) {
    case AdjacentRole::kPrecedingCurrent:
      return "preceding-current";
    case AdjacentRole::kPrecedingTarget:
      return "preceding-target";
    case AdjacentRole::kFollowingCurrent:
      return "following-current";
    case AdjacentRole::kFollowingTarget:
      return "following-target";
  }
  return "unknown";
}

AdjacentRole role_from_string(const std::string& name) {
  for (AdjacentRole role : kAllRoles) {
    if (name == to_string(role)) return role;
  }
  throw InvalidValueError("unknown adjacent role '" + name + "'");
}

const char* to_string(Split split) {
  switch (split) {
    case Split::kTrain:
      return "train";
    case Split::kValidation:
      return "validation";
    case Split::kTest:
      return "test";
  }
  return "unknown";
}

bool AdjacentTrack::any_present() const {
  for (std::uint8_t p : present) {
    if (p) return true;
  }
  return false;
}

void validate_trajectory(const Trajectory& traj, double pos_tol, double psi_tol) {
  const int k_steps = traj.horizon();
  if (k_steps < 1) throw InvalidValueError("trajectory: horizon K must be >= 1");
  if (!(traj.dt > 0.0)) throw InvalidValueError("trajectory: dt must be > 0");
  if (traj.states.size() != traj.controls.size()) {
    throw InvalidValueError("trajectory: states and controls must have equal length");
  }
  for (const Control& u : traj.controls) {
    if (!std::isfinite(u.v) || !std::isfinite(u.omega)) {
      throw InvalidValueError("trajectory: non-finite control");
    }
    if (u.v < 0.0) throw InvalidValueError("trajectory: control speed v must be >= 0");
  }
  const std::vector<State> replay = dynamics::rollout(traj.x0, traj.controls, traj.dt);
  for (int k = 0; k < k_steps; ++k) {
    const State& a = traj.states[static_cast<std::size_t>(k)];
    const State& b = replay[static_cast<std::size_t>(k)];
    if (!std::isfinite(a.x) || !std::isfinite(a.y) || !std::isfinite(a.psi)) {
      throw InvalidValueError("trajectory: non-finite state at step " + std::to_string(k));
    }
    if (std::abs(a.x - b.x) > pos_tol || std::abs(a.y - b.y) > pos_tol ||
        std::abs(wrap_angle(a.psi - b.psi)) > psi_tol) {
      throw InvalidValueError("trajectory: states are not the rollout of controls (step " +
                              std::to_string(k) + ")");
    }
  }
}

void validate_scenario(const Scenario& scenario) {
  validate_trajectory(scenario.ego);
  const int k_steps = scenario.ego.horizon();
  if (!(scenario.v_d >= 0.0)) throw InvalidValueError("scenario: v_d must be >= 0");
  if (!(scenario.lanes.w > 0.0)) {
    throw InvalidGeometryError("scenario: lane spacing w must be > 0");
  }
  (void)make_line(scenario.lanes.current_line.point, scenario.lanes.current_line.dir);
  (void)make_line(scenario.lanes.target_line.point, scenario.lanes.target_line.dir);
  for (int i = 0; i < kNumAdjacent; ++i) {
    const AdjacentTrack& t = scenario.adjacent[static_cast<std::size_t>(i)];
    if (t.role != kAllRoles[static_cast<std::size_t>(i)]) {
      throw InvalidValueError("scenario: adjacent track " + std::to_string(i) +
                              " has role " + to_string(t.role));
    }
    if (t.horizon() != k_steps || static_cast<int>(t.speeds.size()) != k_steps ||
        static_cast<int>(t.present.size()) != k_steps) {
      throw InvalidValueError("scenario: adjacent track '" + std::string(to_string(t.role)) +
                              "' does not share the ego horizon");
    }
    for (int k = 0; k < k_steps; ++k) {
      if (!t.present[static_cast<std::size_t>(k)]) continue;
      const Vec2& p = t.positions[static_cast<std::size_t>(k)];
      if (!std::isfinite(p.x) || !std::isfinite(p.y) ||
          !std::isfinite(t.speeds[static_cast<std::size_t>(k)])) {
        throw InvalidValueError("scenario: non-finite adjacent sample");
      }
      if (t.speeds[static_cast<std::size_t>(k)] < 0.0) {
        throw InvalidValueError("scenario: adjacent speed must be >= 0");
      }
    }
  }
}

void validate_dataset(const Dataset& dataset) {
  std::map<std::string, int> seen;
  for (const Scenario& s : dataset.scenarios) {
    if (++seen[s.id] > 1) {
      throw InvalidValueError("dataset: duplicate scenario id '" + s.id + "'");
    }
  }
}

}  // namespace laneirl
