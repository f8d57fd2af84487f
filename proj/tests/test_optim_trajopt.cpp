#include <doctest.h>

#include <random>

#include "laneirl/optim.hpp"
#include "laneirl/prediction.hpp"
#include "laneirl/trajopt.hpp"
#include "oracles.hpp"

using namespace laneirl;
using features::FeatureConfig;
using features::NormalizationConstants;
using features::RewardVariant;
using features::ThetaWeights;

TEST_CASE("minimize_box solves a bound-constrained quadratic") {
  // min (x - c)^T D (x - c) with some targets outside the box.
  const int n = 6;
  Eigen::VectorXd c(n);
  c << 0.5, -3.0, 2.0, 0.0, 5.0, -0.2;
  Eigen::VectorXd d(n);
  d << 1.0, 4.0, 0.5, 2.0, 1.5, 3.0;
  const auto fn = [&](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
    g = 2.0 * d.cwiseProduct(x - c);
    return (x - c).cwiseProduct(d.cwiseProduct(x - c)).sum();
  };
  const Eigen::VectorXd lo = Eigen::VectorXd::Constant(n, -1.0);
  const Eigen::VectorXd hi = Eigen::VectorXd::Constant(n, 1.0);
  optim::BoxOptimOptions opt;
  opt.grad_tol = 1e-10;
  const optim::BoxOptimResult res =
      optim::minimize_box(fn, Eigen::VectorXd::Zero(n), lo, hi, opt);
  CHECK(res.converged);
  for (int i = 0; i < n; ++i) {
    CHECK(res.x[i] == doctest::Approx(std::clamp(c[i], -1.0, 1.0)).epsilon(1e-7));
  }
  for (std::size_t i = 1; i < res.f_history.size(); ++i) {
    CHECK(res.f_history[i] <= res.f_history[i - 1]);
  }
}

TEST_CASE("minimize_box on a nonconvex scalar stays monotone and stationary") {
  const auto fn = [](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
    const double v = x[0];
    g.resize(1);
    g[0] = std::cos(v) + 0.2 * v;
    return std::sin(v) + 0.1 * v * v;
  };
  Eigen::VectorXd x0(1);
  x0 << 2.0;
  const optim::BoxOptimResult res = optim::minimize_box(
      fn, x0, Eigen::VectorXd::Constant(1, -10.0), Eigen::VectorXd::Constant(1, 10.0),
      optim::BoxOptimOptions{});
  CHECK(res.converged);
  CHECK(std::abs(std::cos(res.x[0]) + 0.2 * res.x[0]) < 1e-7);
}

namespace {

Scenario two_lane_scene(std::uint64_t seed = 1, int k_steps = 40) {
  std::mt19937_64 rng(seed);
  Scenario s = oracles::random_scenario(rng, k_steps);
  s.ego.x0.x = 0.0;  // start on the current centerline
  s.ego.x0.psi = kPi / 2.0;
  s.ego.states = dynamics::rollout(s.ego.x0, s.ego.controls, s.ego.dt);
  return s;
}

}  // namespace

TEST_CASE("one-hot ang-speed weight drives steering to zero") {
  const Scenario s = two_lane_scene(2);
  Eigen::VectorXd t = Eigen::VectorXd::Zero(5);
  t[2] = 1.0;
  const ThetaWeights theta{RewardVariant::kBaseline, t};
  trajopt::OptimizerSettings settings;
  const trajopt::OptimizeResult res =
      trajopt::optimize(s, theta, FeatureConfig{},
                        NormalizationConstants::identity(RewardVariant::kBaseline),
                        nullptr, settings);
  CHECK(res.report.grad_norm < 1e-8);
  CHECK(res.report.converged);
  for (const Control& u : res.trajectory.controls) {
    CHECK(std::abs(u.omega) < 1e-9);
  }
}

TEST_CASE("one-hot speed-deviation weight tracks the mean traffic speed") {
  const Scenario s = two_lane_scene(3);
  Eigen::VectorXd t = Eigen::VectorXd::Zero(5);
  t[1] = 1.0;
  const ThetaWeights theta{RewardVariant::kBaseline, t};
  trajopt::OptimizerSettings settings;
  const trajopt::OptimizeResult res =
      trajopt::optimize(s, theta, FeatureConfig{},
                        NormalizationConstants::identity(RewardVariant::kBaseline),
                        nullptr, settings);
  for (const Control& u : res.trajectory.controls) {
    CHECK(u.v == doctest::Approx(s.v_d).epsilon(1e-6));
  }
}

TEST_CASE("lat-dev plus ang-speed weight moves toward the target lane") {
  const Scenario s = two_lane_scene(4);
  Eigen::VectorXd t = Eigen::VectorXd::Zero(5);
  t[0] = 1.0;
  t[2] = 5.0;
  const ThetaWeights theta{RewardVariant::kBaseline, t};
  const NormalizationConstants norm =
      NormalizationConstants::identity(RewardVariant::kBaseline);
  trajopt::OptimizerSettings settings;
  const trajopt::OptimizeResult res =
      trajopt::optimize(s, theta, FeatureConfig{}, norm, nullptr, settings);

  // Straight-line oracle: the unoptimized initial guess.
  Trajectory straight;
  straight.dt = s.ego.dt;
  straight.x0 = s.ego.x0;
  straight.controls.assign(static_cast<std::size_t>(s.ego.horizon()),
                           Control{s.ego.controls[0].v, 0.0});
  straight.states = dynamics::rollout(straight.x0, straight.controls, straight.dt);

  const double d_initial = lateral_distance(s.ego.x0.position(), s.lanes.target_line);
  const double d_final = lateral_distance(
      res.trajectory.states.back().position(), s.lanes.target_line);
  CHECK(d_final < d_initial);

  const FeatureConfig cfg;
  const double phi_d_opt =
      features::feature_sums(res.trajectory, s, nullptr, cfg, RewardVariant::kBaseline)
          .values[0];
  const double phi_d_straight =
      features::feature_sums(straight, s, nullptr, cfg, RewardVariant::kBaseline).values[0];
  CHECK(phi_d_opt > phi_d_straight);  // strictly smaller penalty magnitude
}

TEST_CASE("reward_of: zero weights, linearity in theta, FD gradient") {
  std::mt19937_64 rng(71);
  const Scenario s = oracles::random_scenario(rng, 10);
  const FeatureConfig cfg;
  const NormalizationConstants norm =
      NormalizationConstants::identity(RewardVariant::kBaseline);

  Eigen::VectorXd grad;
  const ThetaWeights zero{RewardVariant::kBaseline, Eigen::VectorXd::Zero(5)};
  CHECK(trajopt::reward_of(s.ego, s, zero, cfg, norm, nullptr, &grad) == 0.0);
  CHECK(grad.cwiseAbs().maxCoeff() == 0.0);

  Eigen::VectorXd t1(5);
  t1 << 1.0, 0.0, 2.0, 0.0, 0.5;
  Eigen::VectorXd t2(5);
  t2 << 0.0, 0.3, 1.0, 0.7, 0.0;
  const double r1 = trajopt::reward_of(s.ego, s, ThetaWeights{RewardVariant::kBaseline, t1},
                                       cfg, norm, nullptr, nullptr);
  const double r2 = trajopt::reward_of(s.ego, s, ThetaWeights{RewardVariant::kBaseline, t2},
                                       cfg, norm, nullptr, nullptr);
  const double r12 =
      trajopt::reward_of(s.ego, s, ThetaWeights{RewardVariant::kBaseline, t1 + t2}, cfg,
                         norm, nullptr, nullptr);
  CHECK(r12 == doctest::Approx(r1 + r2).epsilon(1e-12));

  const ThetaWeights theta{RewardVariant::kBaseline, t1 + t2};
  trajopt::reward_of(s.ego, s, theta, cfg, norm, nullptr, &grad);
  const Eigen::VectorXd u0 = oracles::pack(s.ego);
  const auto value_of = [&](const Eigen::VectorXd& u) {
    const Trajectory traj = oracles::with_controls(s.ego, u);
    return trajopt::reward_of(traj, s, theta, cfg, norm, nullptr, nullptr);
  };
  const Eigen::VectorXd fd = oracles::fd_gradient(value_of, u0, 1e-6);
  CHECK((grad - fd).cwiseAbs().maxCoeff() < 1e-5);
}

TEST_CASE("returned trajectories are dynamically feasible and scale invariant") {
  const Scenario s = two_lane_scene(6, 30);
  Eigen::VectorXd t(5);
  t << 1.0, 0.05, 4.0, 0.5, 0.5;
  const ThetaWeights theta{RewardVariant::kBaseline, t};
  const FeatureConfig cfg;
  const NormalizationConstants norm =
      NormalizationConstants::identity(RewardVariant::kBaseline);
  trajopt::OptimizerSettings settings;
  const trajopt::OptimizeResult res =
      trajopt::optimize(s, theta, cfg, norm, nullptr, settings);

  CHECK_NOTHROW(validate_trajectory(res.trajectory));

  // g(s*theta) = s * g(theta) exactly, so the s=1 solution is stationary under
  // the scaled reward with the gradient norm scaled by s.
  Eigen::VectorXd g1;
  trajopt::reward_of(res.trajectory, s, theta, cfg, norm, nullptr, &g1);
  const double scale = 7.0;
  Eigen::VectorXd gs;
  trajopt::reward_of(res.trajectory, s,
                     ThetaWeights{RewardVariant::kBaseline, scale * t}, cfg, norm,
                     nullptr, &gs);
  CHECK((gs - scale * g1).cwiseAbs().maxCoeff() < 1e-12 * std::max(1.0, gs.cwiseAbs().maxCoeff()));
}

TEST_CASE("unpredictability variant requires a z series") {
  const Scenario s = two_lane_scene(8, 10);
  Eigen::VectorXd t = Eigen::VectorXd::Ones(7);
  CHECK_THROWS_AS(
      trajopt::optimize(s, ThetaWeights{RewardVariant::kUnpredictabilityAware, t},
                        FeatureConfig{},
                        NormalizationConstants::identity(RewardVariant::kUnpredictabilityAware),
                        nullptr, trajopt::OptimizerSettings{}),
      ConfigError);
}

TEST_CASE("optimizer settings are validated") {
  trajopt::OptimizerSettings bad;
  bad.max_iterations = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = trajopt::OptimizerSettings{};
  bad.v_max = -1.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}
