#include "laneirl/dynamics.hpp"

#include <cmath>
#include <string>

namespace laneirl::dynamics {

namespace {

void check_inputs(const State& x, const Control& u, double dt) {
  if (!(dt > 0.0)) throw InvalidValueError("dynamics::step: dt must be > 0");
  if (!std::isfinite(x.x) || !std::isfinite(x.y) || !std::isfinite(x.psi)) {
    throw InvalidValueError("dynamics::step: non-finite state");
  }
  if (!std::isfinite(u.v) || !std::isfinite(u.omega)) {
    throw InvalidValueError("dynamics::step: non-finite control");
  }
}

}  // namespace

State step(const State& x, const Control& u, double dt) {
  check_inputs(x, u, dt);
  State next;
  next.x = x.x + dt * u.v * std::cos(x.psi);
  next.y = x.y + dt * u.v * std::sin(x.psi);
  next.psi = wrap_angle(x.psi + dt * u.omega);
  return next;
}

std::vector<State> rollout(const State& x0, std::span<const Control> controls,
                           double dt) {
  if (controls.empty()) throw InvalidValueError("dynamics::rollout: empty controls");
  std::vector<State> states;
  states.reserve(controls.size());
  State cur = x0;
  for (std::size_t k = 0; k < controls.size(); ++k) {
    try {
      cur = step(cur, controls[k], dt);
    } catch (const InvalidValueError& e) {
      throw InvalidValueError("dynamics::rollout at step " + std::to_string(k) + ": " +
                              e.what());
    }
    states.push_back(cur);
  }
  return states;
}

Eigen::MatrixXd rollout_sensitivity(const State& x0,
                                    std::span<const Control> controls, double dt) {
  if (controls.empty()) {
    throw InvalidValueError("dynamics::rollout_sensitivity: empty controls");
  }
  const int k_steps = static_cast<int>(controls.size());
  const int du = 2 * k_steps;
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(3 * k_steps, du);

  // J_{k+1} = F_k J_k + B_k E_k with
  //   F_k = [[1,0,-dt*v*sin psi],[0,1,dt*v*cos psi],[0,0,1]]
  //   B_k = [[dt*cos psi,0],[dt*sin psi,0],[0,dt]]
  Eigen::Matrix<double, 3, Eigen::Dynamic> jk = Eigen::MatrixXd::Zero(3, du);
  State cur = x0;
  for (int k = 0; k < k_steps; ++k) {
    const Control& u = controls[static_cast<std::size_t>(k)];
    check_inputs(cur, u, dt);
    const double c = std::cos(cur.psi);
    const double s = std::sin(cur.psi);

    const int ncols = 2 * k;  // J_k has nonzero columns only left of this step
    if (ncols > 0) {
      jk.row(0).head(ncols) += (-dt * u.v * s) * jk.row(2).head(ncols);
      jk.row(1).head(ncols) += (dt * u.v * c) * jk.row(2).head(ncols);
    }
    jk(0, 2 * k) = dt * c;
    jk(1, 2 * k) = dt * s;
    jk(2, 2 * k + 1) = dt;

    jac.middleRows(3 * k, 3) = jk;
    cur = step(cur, u, dt);
  }
  return jac;
}

Trajectory make_trajectory(const State& x0, std::vector<Control> controls, double dt) {
  Trajectory traj;
  traj.x0 = x0;
  traj.states = rollout(x0, controls, dt);
  traj.controls = std::move(controls);
  traj.dt = dt;
  return traj;
}

}  // namespace laneirl::dynamics
