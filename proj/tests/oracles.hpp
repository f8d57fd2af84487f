// Test-only helpers: finite-difference oracles and random instance builders.
// These stay independent of the chain-rule implementation they check.
#pragma once

#include <functional>
#include <random>
#include <vector>

#include <Eigen/Core>

#include "laneirl/dynamics.hpp"
#include "laneirl/features.hpp"
#include "laneirl/trajopt.hpp"
#include "laneirl/types.hpp"

namespace oracles {

using laneirl::AdjacentRole;
using laneirl::AdjacentTrack;
using laneirl::Control;
using laneirl::Scenario;
using laneirl::State;
using laneirl::Trajectory;
using laneirl::Vec2;

using ScalarFn = std::function<double(const Eigen::VectorXd&)>;

inline Eigen::VectorXd fd_gradient(const ScalarFn& f, const Eigen::VectorXd& x, double h) {
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd xp = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    xp[i] = x[i] + h;
    const double fp = f(xp);
    xp[i] = x[i] - h;
    const double fm = f(xp);
    xp[i] = x[i];
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

inline Eigen::MatrixXd fd_hessian(const ScalarFn& f, const Eigen::VectorXd& x, double h) {
  const Eigen::Index n = x.size();
  Eigen::MatrixXd hess(n, n);
  Eigen::VectorXd xp = x;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      xp[i] += h;
      xp[j] += h;
      const double fpp = f(xp);
      xp[j] -= 2.0 * h;
      const double fpm = f(xp);
      xp[i] -= 2.0 * h;
      const double fmm = f(xp);
      xp[j] += 2.0 * h;
      const double fmp = f(xp);
      xp[i] = x[i];
      xp[j] = x[j];
      hess(i, j) = hess(j, i) = (fpp - fpm - fmp + fmm) / (4.0 * h * h);
    }
  }
  return hess;
}

// Well-separated random scenario: preceding cars clearly ahead, follower
// clearly behind, speeds away from the v_eps floor, so every feature is smooth
// at the evaluation point (the gates and |.| kinks sit at measure-zero sets the
// generator stays away from).
inline Scenario random_scenario(std::mt19937_64& rng, int k_steps = 10) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const double dt = 0.1;
  const double w = 3.2 + u01(rng);

  Scenario s;
  s.id = "random";
  s.source = "random";
  s.lanes.current_line = laneirl::make_line(Vec2{0.0, 0.0}, Vec2{0.0, 1.0});
  s.lanes.target_line = laneirl::make_line(Vec2{w, 0.0}, Vec2{0.0, 1.0});
  s.lanes.w = w;
  s.v_d = 8.0 + 6.0 * u01(rng);

  s.ego.dt = dt;
  // Ego between the lanes and near the mean speed: keeps the feature sums small
  // so finite-difference curvature checks stay well conditioned.
  s.ego.x0 =
      State{w * (0.25 + 0.5 * u01(rng)), 0.0, laneirl::kPi / 2.0 + 0.2 * (u01(rng) - 0.5)};
  const double v0 = s.v_d + 1.0 * (u01(rng) - 0.5);
  for (int k = 0; k < k_steps; ++k) {
    s.ego.controls.push_back(
        Control{v0 + 1.0 * (u01(rng) - 0.5), 0.1 * (u01(rng) - 0.5)});
  }
  s.ego.states = laneirl::dynamics::rollout(s.ego.x0, s.ego.controls, dt);

  for (int slot = 0; slot < laneirl::kNumAdjacent; ++slot) {
    const AdjacentRole role = laneirl::kAllRoles[static_cast<std::size_t>(slot)];
    AdjacentTrack& track = s.adjacent[static_cast<std::size_t>(slot)];
    track.role = role;
    const bool preceding = slot == 0 || slot == 1;
    const bool target_lane = slot == 1 || slot == 3;
    const double x_lane = target_lane ? w : 0.0;
    const double speed = 7.0 + 6.0 * u01(rng);
    // Gaps sized so preceding cars stay in front and the follower stays behind
    // over the whole (short) horizon.
    const double gap = (preceding ? 1.0 : -1.0) * (18.0 + 10.0 * u01(rng));
    for (int k = 0; k < k_steps; ++k) {
      track.positions.push_back(
          Vec2{x_lane + 0.2 * (u01(rng) - 0.5), gap + speed * k * dt});
      track.speeds.push_back(speed);
      track.present.push_back(1);
    }
  }
  return s;
}

inline Eigen::VectorXd pack(const Trajectory& traj) {
  return laneirl::trajopt::pack_controls(traj);
}

inline Trajectory with_controls(const Trajectory& base, const Eigen::VectorXd& u) {
  return laneirl::dynamics::make_trajectory(
      base.x0, laneirl::trajopt::unpack_controls(u), base.dt);
}

}  // namespace oracles
