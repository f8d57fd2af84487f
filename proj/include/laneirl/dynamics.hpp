#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "laneirl/types.hpp"

namespace laneirl::dynamics {

// One forward-Euler step of the kinematic unicycle:
//   [x + dt*v*cos(psi), y + dt*v*sin(psi), wrap(psi + dt*omega)].
State step(const State& x, const Control& u, double dt);

// States reached after each control: result[k] = step(result[k-1], controls[k]).
std::vector<State> rollout(const State& x0, std::span<const Control> controls,
                           double dt);

// Jacobian of all rollout states w.r.t. the lifted control vector, 3K x 2K.
// Row block 3k..3k+2 is d(states[k])/du with u interleaved as
// [v_0, omega_0, v_1, omega_1, ...]. Block lower-triangular: states[k] depends
// only on controls 0..k. Heading is treated as unwrapped, so the Jacobian is
// smooth across the +-pi seam.
Eigen::MatrixXd rollout_sensitivity(const State& x0,
                                    std::span<const Control> controls, double dt);

// Builds a dynamically consistent trajectory from controls.
Trajectory make_trajectory(const State& x0, std::vector<Control> controls, double dt);

}  // namespace laneirl::dynamics
