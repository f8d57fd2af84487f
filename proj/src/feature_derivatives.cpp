#include "laneirl/feature_derivatives.hpp"

#include <cmath>

#include "laneirl/dynamics.hpp"

namespace laneirl::features {

namespace {

using Grad5 = Eigen::Matrix<double, 5, 1>;
using Hess5 = Eigen::Matrix<double, 5, 5>;

template <class T>
EgoStep<T> seeded_step(const State& x, const Control& u) {
  EgoStep<T> e{T::variable(x.x, 0), T::variable(x.y, 1), T::variable(x.psi, 2),
               T::variable(u.v, 3), T::variable(u.omega, 4)};
  return e;
}

// Backward adjoint pass turning per-step partials rho_k = d(phi_k)/d(x,y,psi,v,w)
// into the gradient of sum_k phi_k w.r.t. the lifted controls.
Eigen::VectorXd assemble_gradient(const Trajectory& traj,
                                  const std::vector<Grad5>& rho) {
  const int k_steps = traj.horizon();
  const double dt = traj.dt;
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(2 * k_steps);
  Eigen::Vector3d lambda = Eigen::Vector3d::Zero();  // dPhi/d(state k+1)
  for (int k = k_steps - 1; k >= 0; --k) {
    const State& s = traj.state_at(k);
    const double v = traj.controls[static_cast<std::size_t>(k)].v;
    const double c = std::cos(s.psi);
    const double sn = std::sin(s.psi);
    const Grad5& r = rho[static_cast<std::size_t>(k)];
    grad[2 * k] = r[3] + dt * (lambda[0] * c + lambda[1] * sn);
    grad[2 * k + 1] = r[4] + dt * lambda[2];
    const double l0 = lambda[0];
    const double l1 = lambda[1];
    lambda[0] = l0 + r[0];
    lambda[1] = l1 + r[1];
    lambda[2] = lambda[2] + r[2] + dt * v * (-sn * l0 + c * l1);
  }
  return grad;
}

// Full Hessian of sum_k phi_k w.r.t. the lifted controls:
//   H = sum_k Ghat_k^T P_k Ghat_k  +  sum_k sum_a rho_{k,a} d2 s_{k,a} / du2,
// where Ghat_k stacks the state sensitivity J_k = ds_k/du with the control
// selector, P_k is the 5x5 per-step Hessian, and the curvature (tensor) term
// has the closed form coming from x_k = x_0 + dt * sum_{j<k} v_j cos(psi_j)
// with psi linear in the steering inputs.
Eigen::MatrixXd assemble_hessian(const Trajectory& traj, const std::vector<Grad5>& rho,
                                 const std::vector<Hess5>& pk,
                                 const Eigen::MatrixXd& rollout_jac) {
  const int k_steps = traj.horizon();
  const int du = 2 * k_steps;
  const double dt = traj.dt;
  Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(du, du);

  // Sandwich terms Ghat_k^T P_k Ghat_k, restricted to the active columns.
  Eigen::MatrixXd ghat(5, du);
  for (int k = 0; k < k_steps; ++k) {
    const int ncols = 2 * k + 2;
    ghat.leftCols(ncols).setZero();
    if (k > 0) {
      ghat.topLeftCorner(3, 2 * k) = rollout_jac.block(3 * (k - 1), 0, 3, 2 * k);
    }
    ghat(3, 2 * k) = 1.0;
    ghat(4, 2 * k + 1) = 1.0;
    const Eigen::MatrixXd m = pk[static_cast<std::size_t>(k)] * ghat.leftCols(ncols);
    hess.topLeftCorner(ncols, ncols).noalias() +=
        ghat.leftCols(ncols).transpose() * m;
  }

  // Curvature term. With suffix sums Lx_j = sum_{k>j} rho_{k,x} (same for y):
  //   d2Phi/dv_j dw_m = dt^2 (-sin(psi_j) Lx_j + cos(psi_j) Ly_j)   for m < j
  //   d2Phi/dw_m dw_n = -dt^3 * SW(max(m,n)+1),
  //     SW(t) = sum_{j>=t} v_j (cos(psi_j) Lx_j + sin(psi_j) Ly_j).
  std::vector<double> lx(static_cast<std::size_t>(k_steps) + 1, 0.0);
  std::vector<double> ly(static_cast<std::size_t>(k_steps) + 1, 0.0);
  for (int j = k_steps - 1; j >= 0; --j) {
    lx[static_cast<std::size_t>(j)] =
        lx[static_cast<std::size_t>(j) + 1] + rho[static_cast<std::size_t>(j)][0];
    ly[static_cast<std::size_t>(j)] =
        ly[static_cast<std::size_t>(j) + 1] + rho[static_cast<std::size_t>(j)][1];
  }
  std::vector<double> cj(static_cast<std::size_t>(k_steps));
  std::vector<double> sj(static_cast<std::size_t>(k_steps));
  std::vector<double> sw(static_cast<std::size_t>(k_steps) + 1, 0.0);
  for (int j = k_steps - 1; j >= 0; --j) {
    const State& s = traj.state_at(j);
    cj[static_cast<std::size_t>(j)] = std::cos(s.psi);
    sj[static_cast<std::size_t>(j)] = std::sin(s.psi);
    const double w = traj.controls[static_cast<std::size_t>(j)].v *
                     (cj[static_cast<std::size_t>(j)] * lx[static_cast<std::size_t>(j) + 1] +
                      sj[static_cast<std::size_t>(j)] * ly[static_cast<std::size_t>(j) + 1]);
    sw[static_cast<std::size_t>(j)] = sw[static_cast<std::size_t>(j) + 1] + w;
  }
  for (int j = 1; j < k_steps; ++j) {
    const double val = dt * dt *
                       (-sj[static_cast<std::size_t>(j)] * lx[static_cast<std::size_t>(j) + 1] +
                        cj[static_cast<std::size_t>(j)] * ly[static_cast<std::size_t>(j) + 1]);
    if (val == 0.0) continue;
    for (int m = 0; m < j; ++m) {
      hess(2 * j, 2 * m + 1) += val;
      hess(2 * m + 1, 2 * j) += val;
    }
  }
  const double dt3 = dt * dt * dt;
  for (int m = 0; m < k_steps; ++m) {
    for (int n = m; n < k_steps; ++n) {
      const double val = -dt3 * sw[static_cast<std::size_t>(n) + 1];
      hess(2 * m + 1, 2 * n + 1) += val;
      if (n != m) hess(2 * n + 1, 2 * m + 1) += val;
    }
  }
  return hess;
}

}  // namespace

FeatureSumDerivatives feature_sum_derivatives(const Trajectory& traj,
                                              const Scenario& scenario,
                                              const prediction::ZSeriesSet* z,
                                              const FeatureConfig& cfg,
                                              RewardVariant variant,
                                              bool with_hessian) {
  using D2 = ad::Dual2<5>;
  const int k_steps = traj.horizon();
  const auto feats = features_of(variant);
  const std::size_t nf = feats.size();

  FeatureSumDerivatives out;
  out.values = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(nf));
  std::vector<std::vector<Grad5>> rho(nf, std::vector<Grad5>(static_cast<std::size_t>(k_steps)));
  std::vector<std::vector<Hess5>> pk;
  if (with_hessian) {
    pk.assign(nf, std::vector<Hess5>(static_cast<std::size_t>(k_steps)));
  }

  for (int k = 0; k < k_steps; ++k) {
    const StepContext ctx = make_step_context(scenario, z, k);
    const EgoStep<D2> e =
        seeded_step<D2>(traj.state_at(k), traj.controls[static_cast<std::size_t>(k)]);
    for (std::size_t i = 0; i < nf; ++i) {
      const D2 value = eval_step_feature(feats[i], e, ctx, scenario.lanes, cfg);
      if (!std::isfinite(value.v)) throw FeatureEvalError(feature_name(feats[i]), k);
      out.values[static_cast<Eigen::Index>(i)] += value.v;
      rho[i][static_cast<std::size_t>(k)] = value.g;
      if (with_hessian) pk[i][static_cast<std::size_t>(k)] = value.h;
    }
  }

  Eigen::MatrixXd jac;
  if (with_hessian) {
    jac = dynamics::rollout_sensitivity(traj.x0, traj.controls, traj.dt);
  }
  out.grad.resize(nf);
  if (with_hessian) out.hess.resize(nf);
  for (std::size_t i = 0; i < nf; ++i) {
    out.grad[i] = assemble_gradient(traj, rho[i]);
    if (with_hessian) out.hess[i] = assemble_hessian(traj, rho[i], pk[i], jac);
  }
  return out;
}

double reward_value_gradient(const Trajectory& traj, const Scenario& scenario,
                             const prediction::ZSeriesSet* z, const FeatureConfig& cfg,
                             const NormalizationConstants& norm,
                             const ThetaWeights& theta, Eigen::VectorXd* grad) {
  using D1 = ad::Dual1<5>;
  theta.validate();
  const int k_steps = traj.horizon();
  const auto feats = features_of(theta.variant);
  const std::size_t nf = feats.size();

  // Weighted per-step scalar with weights theta_i * scale_i; the affine offset
  // from min-max normalization is constant in u and added at the end.
  std::vector<double> weights(nf);
  double offset = 0.0;
  for (std::size_t i = 0; i < nf; ++i) {
    const double sc = norm.scale(static_cast<int>(i));
    weights[i] = theta.theta[static_cast<Eigen::Index>(i)] * sc;
    offset -= theta.theta[static_cast<Eigen::Index>(i)] * sc * k_steps *
              norm.min[static_cast<Eigen::Index>(i)];
  }

  double value = 0.0;
  std::vector<Grad5> rho(static_cast<std::size_t>(k_steps), Grad5::Zero());
  for (int k = 0; k < k_steps; ++k) {
    const StepContext ctx = make_step_context(scenario, z, k);
    const EgoStep<D1> e =
        seeded_step<D1>(traj.state_at(k), traj.controls[static_cast<std::size_t>(k)]);
    D1 step(0.0);
    for (std::size_t i = 0; i < nf; ++i) {
      if (weights[i] == 0.0 && theta.theta[static_cast<Eigen::Index>(i)] == 0.0) {
        continue;
      }
      const D1 phi = eval_step_feature(feats[i], e, ctx, scenario.lanes, cfg);
      if (!std::isfinite(phi.v)) throw FeatureEvalError(feature_name(feats[i]), k);
      step = step + weights[i] * phi;
    }
    value += step.v;
    rho[static_cast<std::size_t>(k)] = step.g;
  }
  if (grad != nullptr) *grad = assemble_gradient(traj, rho);
  return value + offset;
}

}  // namespace laneirl::features
