#include <doctest.h>

#include <cmath>
#include <random>

#include "laneirl/features.hpp"
#include "laneirl/prediction.hpp"
#include "oracles.hpp"

using namespace laneirl;
using features::FeatureConfig;
using features::FeatureVector;
using features::NormalizationConstants;
using features::RewardVariant;
using features::StepNeighbor;
using features::ThetaWeights;

namespace {

// Independent re-implementations straight from the formulas, used as oracles
// against the templated kernels.
double oracle_phi_p(const State& x, const Control& u,
                    const std::array<StepNeighbor, 2>& cars, const FeatureConfig& cfg,
                    double gain) {
  double total = 0.0;
  for (const StepNeighbor& car : cars) {
    if (!car.present) continue;
    const double dx = car.pos.x - x.x;
    const double dy = car.pos.y - x.y;
    const double alpha = wrap_angle(std::atan2(dy, dx) - x.psi);
    if (std::abs(alpha) > kPi / 2.0) continue;
    const double h1 = std::exp(-cfg.c * std::abs(alpha));
    const double v = std::max(u.v, cfg.v_eps);
    const double num = dx * dx + dy * dy - gain * car.z * car.z;
    total += h1 * std::exp(-num / (cfg.t_p * cfg.t_p * v * v));
  }
  return -total;
}

double oracle_phi_f(const State& x, const StepNeighbor& car, const LaneGeometry& lanes,
                    const FeatureConfig& cfg, double gain) {
  if (!car.present) return 0.0;
  const double d = lateral_distance(x.position(), lanes.target_line);
  const double h2 = d * d / (lanes.w * lanes.w);
  const double dx = car.pos.x - x.x;
  const double dy = car.pos.y - x.y;
  const double vf = std::max(car.speed, cfg.v_eps);
  const double num = dx * dx + dy * dy - gain * car.z * car.z;
  return -h2 * std::exp(-num / (cfg.t_f * cfg.t_f * vf * vf));
}

LaneGeometry default_lanes(double w = 3.7) {
  return LaneGeometry{make_line(Vec2{0, 0}, Vec2{0, 1}), make_line(Vec2{w, 0}, Vec2{0, 1}),
                      w};
}

}  // namespace

TEST_CASE("phi_d lateral deviation") {
  const LaneGeometry lanes = default_lanes(3.7);
  CHECK(features::phi_d(State{3.7, 10.0, kPi / 2}, lanes) == doctest::Approx(-1.0));
  CHECK(features::phi_d(State{0.0, 5.0, kPi / 2}, lanes) ==
        doctest::Approx(-std::exp(1.0)).epsilon(1e-12));
  CHECK(features::phi_d(State{3.7 - 1.85, 0.0, kPi / 2}, lanes) ==
        doctest::Approx(-std::exp(0.5)).epsilon(1e-12));
}

TEST_CASE("phi_v speed deviation") {
  CHECK(features::phi_v(Control{10.5, 0}, 10.5) == doctest::Approx(0.0));
  CHECK(features::phi_v(Control{11.5, 0}, 10.5) == doctest::Approx(-1.0));
  CHECK(features::phi_v(Control{8.0, 0}, 10.5) == doctest::Approx(-6.25).epsilon(1e-12));
}

TEST_CASE("phi_a angular speed") {
  CHECK(features::phi_a(Control{5.0, 0.0}) == doctest::Approx(0.0));
  CHECK(features::phi_a(Control{5.0, 0.2}) == doctest::Approx(-0.04).epsilon(1e-12));
  CHECK(features::phi_a(Control{5.0, -0.2}) == doctest::Approx(-0.04).epsilon(1e-12));
}

TEST_CASE("phi_p preceding TTC") {
  FeatureConfig cfg;
  cfg.c = 1.0;
  cfg.t_p = 2.0;
  const State ego{0, 0, kPi / 2};  // heading +y

  // Cars behind the ego gate to exactly zero.
  std::array<StepNeighbor, 2> behind = {StepNeighbor{true, Vec2{0.0, -8.0}, 10.0, 0.0},
                                        StepNeighbor{true, Vec2{1.0, -15.0}, 10.0, 0.0}};
  CHECK(features::phi_p(ego, Control{10, 0}, behind, cfg) == 0.0);

  // One car directly ahead at distance t_p * v.
  std::array<StepNeighbor, 2> ahead = {StepNeighbor{true, Vec2{0.0, 20.0}, 10.0, 0.0},
                                       StepNeighbor{false, Vec2{}, 0.0, 0.0}};
  CHECK(features::phi_p(ego, Control{10, 0}, ahead, cfg) ==
        doctest::Approx(-std::exp(-1.0)).epsilon(1e-12));

  // Car 20 m ahead at alpha = 0.3 rad, v = 10:
  // -exp(-0.3) * exp(-400/(4*100)) = -exp(-1.3).
  const double alpha = 0.3;
  const Vec2 dir{std::cos(kPi / 2 - alpha), std::sin(kPi / 2 - alpha)};
  std::array<StepNeighbor, 2> off = {StepNeighbor{true, 20.0 * dir, 10.0, 0.0},
                                     StepNeighbor{false, Vec2{}, 0.0, 0.0}};
  CHECK(features::phi_p(ego, Control{10, 0}, off, cfg) ==
        doctest::Approx(-std::exp(-1.3)).epsilon(1e-10));
  CHECK(features::phi_p(ego, Control{10, 0}, off, cfg) ==
        doctest::Approx(oracle_phi_p(ego, Control{10, 0}, off, cfg, 0.0)).epsilon(1e-14));
}

TEST_CASE("phi_f following TTC") {
  FeatureConfig cfg;
  cfg.t_f = 2.0;
  const LaneGeometry lanes = default_lanes(4.0);

  // On the target centerline the h2 gate vanishes.
  const StepNeighbor follower{true, Vec2{4.0, -10.0}, 12.0, 0.0};
  CHECK(features::phi_f(State{4.0, 0.0, kPi / 2}, follower, lanes, cfg) == 0.0);

  // d = w with the follower at distance t_f * v_f.
  const StepNeighbor at_scale{true, Vec2{0.0, -24.0}, 12.0, 0.0};
  CHECK(features::phi_f(State{0.0, 0.0, kPi / 2}, at_scale, lanes, cfg) ==
        doctest::Approx(-std::exp(-1.0)).epsilon(1e-12));

  // d = 2, w = 4, follower 15 m away at v_f = 12: -0.25 * exp(-225/576).
  const StepNeighbor near{true, Vec2{2.0, -15.0}, 12.0, 0.0};
  const State ego{2.0, 0.0, kPi / 2};
  CHECK(features::phi_f(ego, near, lanes, cfg) ==
        doctest::Approx(-0.25 * std::exp(-225.0 / 576.0)).epsilon(1e-12));
  CHECK(features::phi_f(ego, near, lanes, cfg) ==
        doctest::Approx(oracle_phi_f(ego, near, lanes, cfg, 0.0)).epsilon(1e-14));
}

TEST_CASE("phi_pz reduces to phi_p at z = 0 and inflates proximity otherwise") {
  FeatureConfig cfg;
  cfg.c = 1.0;
  cfg.t_p = 2.0;
  cfg.c_p = 25.0;
  const State ego{0, 0, kPi / 2};
  const Control u{10, 0};

  std::array<StepNeighbor, 2> cars = {StepNeighbor{true, Vec2{-2.0, 12.0}, 10.0, 0.0},
                                      StepNeighbor{true, Vec2{3.0, 25.0}, 10.0, 0.0}};
  CHECK(features::phi_pz(ego, u, cars, cfg) == features::phi_p(ego, u, cars, cfg));

  // Cancellation: c_p z^2 = ||dx||^2 with the car straight ahead -> -1.
  std::array<StepNeighbor, 2> cancel = {
      StepNeighbor{true, Vec2{0.0, 10.0}, 10.0, std::sqrt(100.0 / 25.0)},
      StepNeighbor{false, Vec2{}, 0.0, 0.0}};
  CHECK(features::phi_pz(ego, u, cancel, cfg) == doctest::Approx(-1.0).epsilon(1e-12));

  // phi_p case 3 plus z = 2, c_p = 25: -exp(-0.3)*exp(-(400-100)/400) = -exp(-1.05).
  const double alpha = 0.3;
  const Vec2 dir{std::cos(kPi / 2 - alpha), std::sin(kPi / 2 - alpha)};
  std::array<StepNeighbor, 2> off = {StepNeighbor{true, 20.0 * dir, 10.0, 2.0},
                                     StepNeighbor{false, Vec2{}, 0.0, 0.0}};
  CHECK(features::phi_pz(ego, u, off, cfg) ==
        doctest::Approx(-std::exp(-1.05)).epsilon(1e-10));
  CHECK(features::phi_pz(ego, u, off, cfg) ==
        doctest::Approx(oracle_phi_p(ego, u, off, cfg, cfg.c_p)).epsilon(1e-14));
}

TEST_CASE("phi_fz reduces to phi_f at z = 0 and respects the h2 gate") {
  FeatureConfig cfg;
  cfg.t_f = 2.0;
  cfg.c_f = 9.0;
  const LaneGeometry lanes = default_lanes(4.0);

  const StepNeighbor plain{true, Vec2{1.0, -9.0}, 11.0, 0.0};
  CHECK(features::phi_fz(State{1.5, 0, kPi / 2}, plain, lanes, cfg) ==
        features::phi_f(State{1.5, 0, kPi / 2}, plain, lanes, cfg));

  const StepNeighbor zed{true, Vec2{4.0, -7.0}, 11.0, 3.0};
  CHECK(features::phi_fz(State{4.0, 0, kPi / 2}, zed, lanes, cfg) == 0.0);

  // phi_f case 3 plus z_f = 3, c_f = 9: -0.25 * exp(-(225-81)/576).
  const StepNeighbor near{true, Vec2{2.0, -15.0}, 12.0, 3.0};
  const State ego{2.0, 0.0, kPi / 2};
  CHECK(features::phi_fz(ego, near, lanes, cfg) ==
        doctest::Approx(-0.25 * std::exp(-144.0 / 576.0)).epsilon(1e-12));
  CHECK(features::phi_fz(ego, near, lanes, cfg) ==
        doctest::Approx(oracle_phi_f(ego, near, lanes, cfg, cfg.c_f)).epsilon(1e-14));
}

TEST_CASE("feature_sums: K = 1 equals the single step and static scenes add up") {
  std::mt19937_64 rng(31);
  Scenario s = oracles::random_scenario(rng, 1);
  const FeatureConfig cfg;
  const FeatureVector sums =
      features::feature_sums(s.ego, s, nullptr, cfg, RewardVariant::kBaseline);
  const Eigen::VectorXd step =
      features::step_features(s.ego, s, nullptr, 0, cfg, RewardVariant::kBaseline);
  for (int i = 0; i < 5; ++i) CHECK(sums.values[i] == step[i]);

  // Static configuration: zero speed, frozen neighbors; doubling the horizon
  // doubles every sum.
  const auto make_static = [&](int k_steps) {
    Scenario st;
    st.id = "static";
    st.source = "static";
    st.lanes = default_lanes();
    st.v_d = 5.0;
    st.ego.dt = 0.1;
    st.ego.x0 = State{1.0, 0.0, kPi / 2};
    st.ego.controls.assign(static_cast<std::size_t>(k_steps), Control{0.0, 0.0});
    st.ego.states = dynamics::rollout(st.ego.x0, st.ego.controls, 0.1);
    for (int slot = 0; slot < kNumAdjacent; ++slot) {
      AdjacentTrack& t = st.adjacent[static_cast<std::size_t>(slot)];
      t.role = kAllRoles[static_cast<std::size_t>(slot)];
      const bool preceding = slot < 2;
      t.positions.assign(static_cast<std::size_t>(k_steps),
                         Vec2{slot % 2 ? 3.7 : 0.0, preceding ? 12.0 : -12.0});
      t.speeds.assign(static_cast<std::size_t>(k_steps), 8.0);
      t.present.assign(static_cast<std::size_t>(k_steps), 1);
    }
    return st;
  };
  const Scenario s5 = make_static(5);
  const Scenario s10 = make_static(10);
  const FeatureVector f5 =
      features::feature_sums(s5.ego, s5, nullptr, cfg, RewardVariant::kBaseline);
  const FeatureVector f10 =
      features::feature_sums(s10.ego, s10, nullptr, cfg, RewardVariant::kBaseline);
  for (int i = 0; i < 5; ++i) {
    CHECK(f10.values[i] == doctest::Approx(2.0 * f5.values[i]).epsilon(1e-12));
  }
}

TEST_CASE("feature_sums matches an independent loop oracle on random scenarios") {
  std::mt19937_64 rng(37);
  const FeatureConfig cfg;
  for (int inst = 0; inst < 10; ++inst) {
    Scenario s = oracles::random_scenario(rng, 10);
    const prediction::ZSeriesSet z =
        prediction::compute_z(s, prediction::PredictorKind::kConstantVelocity, 2);
    const FeatureVector sums =
        features::feature_sums(s.ego, s, &z, cfg, RewardVariant::kUnpredictabilityAware);

    Eigen::VectorXd expected = Eigen::VectorXd::Zero(7);
    for (int k = 0; k < 10; ++k) {
      const State& x = s.ego.state_at(k);
      const Control& u = s.ego.controls[static_cast<std::size_t>(k)];
      std::array<StepNeighbor, 2> prec;
      for (int i = 0; i < 2; ++i) {
        const AdjacentTrack& t = s.adjacent[static_cast<std::size_t>(i)];
        prec[static_cast<std::size_t>(i)] =
            StepNeighbor{t.present[static_cast<std::size_t>(k)] != 0,
                         t.positions[static_cast<std::size_t>(k)],
                         t.speeds[static_cast<std::size_t>(k)],
                         z[static_cast<std::size_t>(i)].values[static_cast<std::size_t>(k)]};
      }
      const AdjacentTrack& ft = s.track(AdjacentRole::kFollowingTarget);
      const StepNeighbor foll{
          ft.present[static_cast<std::size_t>(k)] != 0,
          ft.positions[static_cast<std::size_t>(k)], ft.speeds[static_cast<std::size_t>(k)],
          z[static_cast<std::size_t>(AdjacentRole::kFollowingTarget)]
              .values[static_cast<std::size_t>(k)]};
      expected[0] += -std::exp(lateral_distance(x.position(), s.lanes.target_line) / s.lanes.w);
      expected[1] += -(u.v - s.v_d) * (u.v - s.v_d);
      expected[2] += -u.omega * u.omega;
      expected[3] += oracle_phi_p(x, u, prec, cfg, 0.0);
      expected[4] += oracle_phi_f(x, foll, s.lanes, cfg, 0.0);
      expected[5] += oracle_phi_p(x, u, prec, cfg, cfg.c_p);
      expected[6] += oracle_phi_f(x, foll, s.lanes, cfg, cfg.c_f);
    }
    for (int i = 0; i < 7; ++i) {
      CHECK(sums.values[i] == doctest::Approx(expected[i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("per-step feature values are never positive") {
  std::mt19937_64 rng(41);
  const FeatureConfig cfg;
  for (int inst = 0; inst < 20; ++inst) {
    Scenario s = oracles::random_scenario(rng, 8);
    const prediction::ZSeriesSet z =
        prediction::compute_z(s, prediction::PredictorKind::kConstantVelocity, 2);
    for (int k = 0; k < 8; ++k) {
      const Eigen::VectorXd step = features::step_features(
          s.ego, s, &z, k, cfg, RewardVariant::kUnpredictabilityAware);
      for (int i = 0; i < 7; ++i) CHECK(step[i] <= 0.0);
    }
  }
}

TEST_CASE("phi_pz is non-increasing in z for a car in front") {
  FeatureConfig cfg;
  cfg.c_p = 10.0;
  const State ego{0, 0, kPi / 2};
  const Control u{10, 0};
  double prev = 0.0;
  for (int i = 0; i <= 10; ++i) {
    const double z = 0.4 * i;
    std::array<StepNeighbor, 2> cars = {StepNeighbor{true, Vec2{1.0, 18.0}, 10.0, z},
                                        StepNeighbor{false, Vec2{}, 0.0, 0.0}};
    const double val = features::phi_pz(ego, u, cars, cfg);
    if (i > 0) CHECK(val <= prev);
    prev = val;
  }
}

TEST_CASE("normalization maps min/max/midpoint and degenerate ranges") {
  NormalizationConstants norm;
  norm.variant = RewardVariant::kBaseline;
  norm.min = Eigen::VectorXd::Zero(5);
  norm.max = Eigen::VectorXd::Zero(5);
  norm.min << -2.0, -4.0, -1.0, -3.0, -5.0;
  norm.max << 0.0, -1.0, -1.0, 0.0, 0.0;  // feature 2 is degenerate

  Eigen::VectorXd at_min = norm.min;
  Eigen::VectorXd at_max = norm.max;
  const Eigen::VectorXd lo = features::normalize(at_min, norm);
  const Eigen::VectorXd hi = features::normalize(at_max, norm);
  for (int i = 0; i < 5; ++i) {
    if (i == 2) {
      CHECK(lo[i] == 0.0);
      CHECK(hi[i] == 0.0);
    } else {
      CHECK(lo[i] == doctest::Approx(0.0));
      CHECK(hi[i] == doctest::Approx(1.0));
    }
  }
  const Eigen::VectorXd mid = features::normalize(0.5 * (norm.min + norm.max), norm);
  CHECK(mid[0] == doctest::Approx(0.5));
  CHECK(mid[4] == doctest::Approx(0.5));
}

TEST_CASE("reward is a plain dot product") {
  FeatureVector phi;
  phi.variant = RewardVariant::kBaseline;
  phi.values = Eigen::VectorXd::Zero(5);
  phi.values << 0.3, 0.5, 0.1, 0.2, 0.4;

  ThetaWeights zero{RewardVariant::kBaseline, Eigen::VectorXd::Zero(5)};
  CHECK(features::reward(phi, zero) == 0.0);

  Eigen::VectorXd e2 = Eigen::VectorXd::Zero(5);
  e2[1] = 1.0;
  CHECK(features::reward(phi, ThetaWeights{RewardVariant::kBaseline, e2}) ==
        doctest::Approx(0.5));

  Eigen::VectorXd t = Eigen::VectorXd::Zero(5);
  t << 1.0, 2.0, 0.0, 0.0, 0.0;
  CHECK(features::reward(phi, ThetaWeights{RewardVariant::kBaseline, t}) ==
        doctest::Approx(1.3));
}

TEST_CASE("theta validation enforces nonnegative weights") {
  Eigen::VectorXd t = Eigen::VectorXd::Ones(5);
  t[3] = -0.1;
  CHECK_THROWS_AS((ThetaWeights{RewardVariant::kBaseline, t}.validate()), InvalidValueError);
  CHECK_THROWS_AS((ThetaWeights{RewardVariant::kBaseline, Eigen::VectorXd::Ones(7)}.validate()),
                  InvalidValueError);
}

TEST_CASE("baseline reduction: 7-feature reward with zero unpred weights equals baseline") {
  std::mt19937_64 rng(43);
  const FeatureConfig cfg;
  for (int inst = 0; inst < 5; ++inst) {
    Scenario s = oracles::random_scenario(rng, 10);
    // Constant-velocity neighbors in random_scenario have tiny lateral jitter,
    // so force z to exactly zero to exercise the reduction identity.
    prediction::ZSeriesSet z;
    for (int car = 0; car < kNumAdjacent; ++car) {
      z[static_cast<std::size_t>(car)].t_n = 2;
      z[static_cast<std::size_t>(car)].values.assign(10, 0.0);
    }
    Eigen::VectorXd t5(5);
    t5 << 1.0, 0.2, 3.0, 0.7, 0.5;
    Eigen::VectorXd t7(7);
    t7 << 1.0, 0.2, 3.0, 0.7, 0.5, 0.0, 0.0;

    const NormalizationConstants n5 = NormalizationConstants::identity(RewardVariant::kBaseline);
    const NormalizationConstants n7 =
        NormalizationConstants::identity(RewardVariant::kUnpredictabilityAware);
    const double r5 = features::trajectory_reward(
        s.ego, s, nullptr, cfg, n5, ThetaWeights{RewardVariant::kBaseline, t5});
    const double r7 = features::trajectory_reward(
        s.ego, s, &z, cfg, n7, ThetaWeights{RewardVariant::kUnpredictabilityAware, t7});
    CHECK(r7 == doctest::Approx(r5).epsilon(1e-14));
  }
}
