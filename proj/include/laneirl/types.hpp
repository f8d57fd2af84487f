#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "laneirl/errors.hpp"

namespace laneirl {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kDefaultDt = 0.1;   // sampling period (s)
inline constexpr int kDefaultHorizon = 70;  // 7 s lane-change window at 10 Hz

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  Vec2& operator+=(const Vec2& o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  Vec2& operator-=(const Vec2& o) {
    x -= o.x;
    y -= o.y;
    return *this;
  }
  double dot(const Vec2& o) const { return x * o.x + y * o.y; }
  double cross(const Vec2& o) const { return x * o.y - y * o.x; }
  double squared_norm() const { return x * x + y * y; }
  double norm() const { return std::hypot(x, y); }
};

inline Vec2 operator*(double s, const Vec2& v) { return v * s; }

// Maps an angle to (-pi, pi]. Throws InvalidValueError on non-finite input.
double wrap_angle(double a);

// Ego pose: lateral position x (m), longitudinal position y (m), heading psi (rad).
struct State {
  double x = 0.0;
  double y = 0.0;
  double psi = 0.0;

  Vec2 position() const { return {x, y}; }
};

// Longitudinal speed input v (m/s, nonnegative) and heading-rate input omega (rad/s).
struct Control {
  double v = 0.0;
  double omega = 0.0;
};

// Infinite straight line: a point on it plus a unit direction.
struct Line2 {
  Vec2 point;
  Vec2 dir{0.0, 1.0};
};

// Builds a line with a normalized direction. Throws InvalidGeometryError if the
// direction is (numerically) zero.
Line2 make_line(Vec2 point, Vec2 dir);

// Signed perpendicular offset of p from the line (positive on the side where
// dir x (p - point) > 0).
double lateral_offset(const Vec2& p, const Line2& line);

// Nonnegative perpendicular distance of p from the line.
double lateral_distance(const Vec2& p, const Line2& line);

struct LaneGeometry {
  Line2 current_line;
  Line2 target_line;
  double w = 3.7;  // mean centerline spacing (m)
};

enum class AdjacentRole : int {
  kPrecedingCurrent = 0,
  kPrecedingTarget = 1,
  kFollowingCurrent = 2,
  kFollowingTarget = 3,
};

inline constexpr int kNumAdjacent = 4;
inline constexpr std::array<AdjacentRole, kNumAdjacent> kAllRoles = {
    AdjacentRole::kPrecedingCurrent, AdjacentRole::kPrecedingTarget,
    AdjacentRole::kFollowingCurrent, AdjacentRole::kFollowingTarget};

const char* to_string(AdjacentRole role);
AdjacentRole role_from_string(const std::string& name);  // throws InvalidValueError

// One adjacent vehicle over the scenario window. `present[k]` is false where the
// vehicle has no data; positions/speeds are zero there and must be ignored.
struct AdjacentTrack {
  AdjacentRole role = AdjacentRole::kPrecedingCurrent;
  std::vector<Vec2> positions;
  std::vector<double> speeds;
  std::vector<std::uint8_t> present;

  bool any_present() const;
  int horizon() const { return static_cast<int>(positions.size()); }
};

// Dynamically consistent trajectory: states[k] is the state reached after
// applying controls[k] (states[k] == rollout state k+1; the initial state x0 is
// stored separately).
struct Trajectory {
  State x0;
  std::vector<Control> controls;
  std::vector<State> states;
  double dt = kDefaultDt;

  int horizon() const { return static_cast<int>(controls.size()); }

  // State entering step k, i.e. the x_k paired with controls[k] in the reward sum.
  const State& state_at(int k) const { return k == 0 ? x0 : states[k - 1]; }
};

// One lane-change instance in the scenario-local frame (ego starts at [0,0,psi0]).
struct Scenario {
  std::string id;
  std::string source;  // dataset label, e.g. "us101_t1" or "synthetic"
  Trajectory ego;
  std::array<AdjacentTrack, kNumAdjacent> adjacent;  // indexed by AdjacentRole
  LaneGeometry lanes;
  double v_d = 0.0;  // mean traffic speed of the four adjacent vehicles (m/s)
  std::map<std::string, std::string> metadata;

  const AdjacentTrack& track(AdjacentRole role) const {
    return adjacent[static_cast<int>(role)];
  }
  AdjacentTrack& track(AdjacentRole role) {
    return adjacent[static_cast<int>(role)];
  }
};

enum class Split : int { kTrain = 0, kValidation = 1, kTest = 2 };

const char* to_string(Split split);

struct Dataset {
  std::vector<Scenario> scenarios;
  Split split = Split::kTrain;
  std::string source;
};

// Structural checks. Throw InvalidValueError/InvalidGeometryError on violations.
void validate_trajectory(const Trajectory& traj, double pos_tol = 1e-9,
                         double psi_tol = 1e-9);
void validate_scenario(const Scenario& scenario);
void validate_dataset(const Dataset& dataset);  // unique ids

}  // namespace laneirl
