#include <doctest.h>

#include <random>

#include "laneirl/dynamics.hpp"
#include "laneirl/types.hpp"

using namespace laneirl;

TEST_CASE("wrap_angle maps into (-pi, pi]") {
  CHECK(wrap_angle(0.0) == doctest::Approx(0.0));
  CHECK(wrap_angle(3.0 * kPi) == doctest::Approx(kPi));
  CHECK(wrap_angle(-kPi) == doctest::Approx(kPi));
  CHECK(wrap_angle(kPi) == doctest::Approx(kPi));
  CHECK(wrap_angle(2.0 * kPi) == doctest::Approx(0.0));
  CHECK_THROWS_AS(wrap_angle(std::numeric_limits<double>::quiet_NaN()), InvalidValueError);
  CHECK_THROWS_AS(wrap_angle(std::numeric_limits<double>::infinity()), InvalidValueError);
}

TEST_CASE("wrap_angle is idempotent") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  for (int i = 0; i < 500; ++i) {
    const double a = u(rng);
    const double w = wrap_angle(a);
    CHECK(w > -kPi);
    CHECK(w <= kPi);
    CHECK(wrap_angle(w) == w);
  }
}

TEST_CASE("lateral_distance basics") {
  const Line2 y_axis = make_line(Vec2{0.0, 0.0}, Vec2{0.0, 1.0});
  CHECK(lateral_distance(Vec2{0.0, 3.0}, y_axis) == doctest::Approx(0.0));
  CHECK(lateral_distance(Vec2{1.0, 0.0}, y_axis) == doctest::Approx(1.0));

  // Point on a slanted line, then pushed out along the normal by 2.
  const Line2 slant = make_line(Vec2{0.0, 0.0}, Vec2{0.6, 0.8});
  CHECK(lateral_distance(Vec2{3.0, 4.0}, slant) == doctest::Approx(0.0).epsilon(1e-12));
  const Vec2 normal{-0.8, 0.6};
  const Vec2 moved = Vec2{3.0, 4.0} + 2.0 * normal;
  // Independent oracle: distance via projection residual.
  const Vec2 rel = moved - slant.point;
  const double along = rel.dot(slant.dir);
  const Vec2 residual = rel - along * slant.dir;
  CHECK(residual.norm() == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(lateral_distance(moved, slant) == doctest::Approx(residual.norm()).epsilon(1e-12));
}

TEST_CASE("lateral_distance rejects a degenerate line") {
  CHECK_THROWS_AS(make_line(Vec2{0.0, 0.0}, Vec2{0.0, 0.0}), InvalidGeometryError);
  Line2 broken;
  broken.dir = Vec2{0.0, 0.0};
  CHECK_THROWS_AS(lateral_distance(Vec2{1.0, 1.0}, broken), InvalidGeometryError);
}

TEST_CASE("lateral_distance is translation invariant") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-20.0, 20.0);
  for (int i = 0; i < 200; ++i) {
    const Vec2 p{u(rng), u(rng)};
    const Vec2 shift{u(rng), u(rng)};
    Vec2 dir{u(rng), u(rng)};
    if (dir.norm() < 1e-6) dir = Vec2{1.0, 0.0};
    const Line2 line = make_line(Vec2{u(rng), u(rng)}, dir);
    const Line2 shifted = make_line(line.point + shift, line.dir);
    CHECK(lateral_distance(p + shift, shifted) ==
          doctest::Approx(lateral_distance(p, line)).epsilon(1e-9));
  }
}

TEST_CASE("trajectory validation checks the rollout invariant") {
  Trajectory traj;
  traj.x0 = State{0.0, 0.0, 0.0};
  traj.dt = 0.1;
  traj.controls.assign(5, Control{2.0, 0.1});
  traj.states = dynamics::rollout(traj.x0, traj.controls, traj.dt);
  CHECK_NOTHROW(validate_trajectory(traj));

  traj.states[3].x += 1e-6;
  CHECK_THROWS_AS(validate_trajectory(traj), InvalidValueError);

  Trajectory negative_speed = traj;
  negative_speed.states = dynamics::rollout(traj.x0, traj.controls, traj.dt);
  negative_speed.controls[0].v = -1.0;
  CHECK_THROWS_AS(validate_trajectory(negative_speed), InvalidValueError);
}

TEST_CASE("dataset ids must be unique") {
  Dataset ds;
  Scenario a;
  a.id = "one";
  Scenario b;
  b.id = "one";
  ds.scenarios = {a, b};
  CHECK_THROWS_AS(validate_dataset(ds), InvalidValueError);
}

TEST_CASE("adjacent role names round-trip") {
  for (AdjacentRole role : kAllRoles) {
    CHECK(role_from_string(to_string(role)) == role);
  }
  CHECK_THROWS_AS(role_from_string("bogus"), InvalidValueError);
}
