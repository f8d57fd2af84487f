#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>

#include "laneirl/io.hpp"
#include "laneirl/prediction.hpp"
#include "oracles.hpp"

using namespace laneirl;
using prediction::PredictionTrace;
using prediction::UnpredictabilitySeries;

namespace {

AdjacentTrack track_from_positions(std::vector<Vec2> positions,
                                   AdjacentRole role = AdjacentRole::kPrecedingCurrent) {
  AdjacentTrack t;
  t.role = role;
  t.speeds.assign(positions.size(), 10.0);
  t.present.assign(positions.size(), 1);
  t.positions = std::move(positions);
  return t;
}

Scenario scenario_with_track(AdjacentTrack track) {
  Scenario s;
  s.id = "pred";
  s.source = "pred";
  const int k_steps = track.horizon();
  s.lanes.current_line = make_line(Vec2{0, 0}, Vec2{0, 1});
  s.lanes.target_line = make_line(Vec2{3.7, 0}, Vec2{0, 1});
  s.ego.dt = 0.1;
  s.ego.x0 = State{0, 0, kPi / 2};
  s.ego.controls.assign(static_cast<std::size_t>(k_steps), Control{10.0, 0.0});
  s.ego.states = dynamics::rollout(s.ego.x0, s.ego.controls, 0.1);
  for (int slot = 0; slot < kNumAdjacent; ++slot) {
    AdjacentTrack& t = s.adjacent[static_cast<std::size_t>(slot)];
    t.role = kAllRoles[static_cast<std::size_t>(slot)];
    t.positions.assign(static_cast<std::size_t>(k_steps), Vec2{});
    t.speeds.assign(static_cast<std::size_t>(k_steps), 0.0);
    t.present.assign(static_cast<std::size_t>(k_steps), 0);
  }
  s.adjacent[static_cast<std::size_t>(track.role)] = std::move(track);
  return s;
}

}  // namespace

TEST_CASE("cv_predict matches constant-velocity motion exactly") {
  std::vector<Vec2> history;
  for (int k = 0; k < 5; ++k) history.push_back(Vec2{0.0, 10.0 * 0.1 * k});
  const auto preds = prediction::cv_predict(history, 3, 0.1);
  for (int j = 1; j <= 3; ++j) {
    CHECK(preds[static_cast<std::size_t>(j - 1)].x == doctest::Approx(0.0));
    CHECK(preds[static_cast<std::size_t>(j - 1)].y ==
          doctest::Approx(10.0 * 0.1 * (4 + j)).epsilon(1e-12));
  }
}

TEST_CASE("cv_predict keeps a stationary car in place") {
  std::vector<Vec2> history(4, Vec2{2.0, -3.0});
  const auto preds = prediction::cv_predict(history, 2, 0.1);
  for (const Vec2& p : preds) {
    CHECK(p.x == doctest::Approx(2.0));
    CHECK(p.y == doctest::Approx(-3.0));
  }
}

TEST_CASE("cv_predict error under constant acceleration follows the kinematics oracle") {
  // Car accelerating at a = 2 m/s^2 along y, sampled at dt = 0.1: the
  // two-sample velocity estimate is the average speed over the last interval,
  // v(t_q) - a*dt/2. Horizon-2 error is therefore
  //   1/2*a*Dt^2 + a*(dt/2)*Dt   with Dt = 0.2.
  const double a = 2.0;
  const double dt = 0.1;
  std::vector<Vec2> history;
  const int q = 6;
  for (int k = 0; k <= q; ++k) {
    const double t = k * dt;
    history.push_back(Vec2{0.0, 0.5 * a * t * t});
  }
  const auto preds = prediction::cv_predict(history, 2, dt);
  const double t_future = (q + 2) * dt;
  const double truth = 0.5 * a * t_future * t_future;
  const double expected_error = 0.5 * a * 0.2 * 0.2 + a * (dt / 2.0) * 0.2;
  CHECK(std::abs(preds[1].y - truth) == doctest::Approx(expected_error).epsilon(1e-12));
}

TEST_CASE("ca_predict is exact for constant-acceleration motion") {
  const double a = 1.7;
  const double dt = 0.1;
  std::vector<Vec2> history;
  for (int k = 0; k <= 8; ++k) {
    const double t = k * dt;
    history.push_back(Vec2{0.3 * t, 4.0 * t + 0.5 * a * t * t});
  }
  const auto preds = prediction::ca_predict(history, 4, dt);
  for (int j = 1; j <= 4; ++j) {
    const double t = (8 + j) * dt;
    CHECK(preds[static_cast<std::size_t>(j - 1)].x ==
          doctest::Approx(0.3 * t).epsilon(1e-10));
    CHECK(preds[static_cast<std::size_t>(j - 1)].y ==
          doctest::Approx(4.0 * t + 0.5 * a * t * t).epsilon(1e-10));
  }
}

TEST_CASE("predictors demand enough history") {
  std::vector<Vec2> one{Vec2{0, 0}};
  CHECK_THROWS_AS(prediction::cv_predict(one, 2, 0.1), NotEnoughHistoryError);
  std::vector<Vec2> two{Vec2{0, 0}, Vec2{0, 1}};
  CHECK_THROWS_AS(prediction::ca_predict(two, 2, 0.1), NotEnoughHistoryError);
}

TEST_CASE("unpredictability: perfect predictions give z = 0") {
  std::vector<Vec2> positions;
  for (int k = 0; k < 20; ++k) positions.push_back(Vec2{1.0, 8.0 * 0.1 * k});
  const Scenario s = scenario_with_track(track_from_positions(positions));
  const auto z = prediction::compute_z(s, prediction::PredictorKind::kConstantVelocity, 2);
  for (double v : z[0].values) CHECK(std::abs(v) < 1e-12);
}

TEST_CASE("unpredictability: constant 1 m offset gives z = 1") {
  const int k_steps = 15;
  const int t_n = 2;
  std::vector<Vec2> positions;
  for (int k = 0; k < k_steps; ++k) positions.push_back(Vec2{0.0, 5.0 * 0.1 * k});
  const AdjacentTrack truth = track_from_positions(positions);
  PredictionTrace trace;
  trace.horizon = t_n;
  for (int q = 0; q + 1 < k_steps; ++q) {
    std::vector<Vec2> preds;
    for (int j = 1; j <= t_n; ++j) {
      preds.push_back(positions[static_cast<std::size_t>(std::min(q + j, k_steps - 1))] +
                      Vec2{1.0, 0.0});
    }
    trace.per_car[0].emplace(q, std::move(preds));
  }
  const UnpredictabilitySeries z = prediction::unpredictability(trace, truth, t_n);
  for (int k = 0; k < k_steps; ++k) {
    if (k < t_n) {
      CHECK(z.values[static_cast<std::size_t>(k)] == 0.0);
    } else {
      CHECK(z.values[static_cast<std::size_t>(k)] == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("unpredictability matches a direct summation oracle on a zigzag") {
  // Zigzag truth x(t) = 0.5 sin(2 pi t / 2) under the cv predictor.
  const int k_steps = 40;
  const int t_n = 2;
  const double dt = 0.1;
  std::vector<Vec2> positions;
  for (int k = 0; k < k_steps; ++k) {
    const double t = k * dt;
    positions.push_back(Vec2{0.5 * std::sin(2.0 * kPi * t / 2.0), 9.0 * t});
  }
  const AdjacentTrack truth = track_from_positions(positions);
  const Scenario s = scenario_with_track(truth);
  const PredictionTrace trace =
      prediction::build_trace(s, prediction::PredictorKind::kConstantVelocity, t_n);
  const UnpredictabilitySeries z = prediction::unpredictability(trace, truth, t_n);

  for (int k = 0; k < k_steps; ++k) {
    double expected = 0.0;
    if (k >= t_n) {
      const int issue = k - t_n;
      const auto& preds = trace.per_car[0].at(issue);
      double total = 0.0;
      for (int j = issue + 1; j <= k; ++j) {
        const double dx = positions[static_cast<std::size_t>(j)].x -
                          preds[static_cast<std::size_t>(j - issue - 1)].x;
        const double dy = positions[static_cast<std::size_t>(j)].y -
                          preds[static_cast<std::size_t>(j - issue - 1)].y;
        total += std::sqrt(dx * dx + dy * dy);
      }
      expected = total / t_n;
    }
    CHECK(z.values[static_cast<std::size_t>(k)] == doctest::Approx(expected).epsilon(1e-12));
    if (k >= t_n) CHECK(z.values[static_cast<std::size_t>(k)] > 0.0);
  }
}

TEST_CASE("z is invariant under rigid translation and scales with the errors") {
  const int k_steps = 25;
  const int t_n = 3;
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Vec2> positions;
  for (int k = 0; k < k_steps; ++k) {
    positions.push_back(Vec2{u(rng), 6.0 * 0.1 * k + 0.3 * u(rng)});
  }
  const AdjacentTrack truth = track_from_positions(positions);
  const Scenario s = scenario_with_track(truth);
  const PredictionTrace trace =
      prediction::build_trace(s, prediction::PredictorKind::kConstantVelocity, t_n);
  const UnpredictabilitySeries z = prediction::unpredictability(trace, truth, t_n);

  const Vec2 shift{12.0, -60.0};
  std::vector<Vec2> moved;
  for (const Vec2& p : positions) moved.push_back(p + shift);
  AdjacentTrack truth_moved = track_from_positions(moved);
  PredictionTrace trace_moved = trace;
  for (auto& [q, preds] : trace_moved.per_car[0]) {
    (void)q;
    for (Vec2& p : preds) p += shift;
  }
  const UnpredictabilitySeries z_moved =
      prediction::unpredictability(trace_moved, truth_moved, t_n);
  for (int k = 0; k < k_steps; ++k) {
    CHECK(z_moved.values[static_cast<std::size_t>(k)] ==
          doctest::Approx(z.values[static_cast<std::size_t>(k)]).epsilon(1e-12));
  }

  const double scale = 2.5;
  PredictionTrace trace_scaled = trace;
  for (auto& [q, preds] : trace_scaled.per_car[0]) {
    for (std::size_t j = 0; j < preds.size(); ++j) {
      const std::size_t step = static_cast<std::size_t>(q) + 1 + j;
      if (step >= positions.size()) continue;
      const Vec2 err = preds[j] - positions[step];
      preds[j] = positions[step] + scale * err;
    }
  }
  const UnpredictabilitySeries z_scaled =
      prediction::unpredictability(trace_scaled, truth, t_n);
  for (int k = t_n; k < k_steps; ++k) {
    CHECK(z_scaled.values[static_cast<std::size_t>(k)] ==
          doctest::Approx(scale * z.values[static_cast<std::size_t>(k)]).epsilon(1e-12));
    CHECK(z_scaled.values[static_cast<std::size_t>(k)] >= 0.0);
  }
}

TEST_CASE("z stays exactly zero for constant-velocity tracks at any lookback") {
  std::vector<Vec2> positions;
  for (int k = 0; k < 30; ++k) positions.push_back(Vec2{-1.5 + 0.2 * k, 3.0 + 1.1 * k});
  const AdjacentTrack truth = track_from_positions(positions);
  const Scenario s = scenario_with_track(truth);
  for (int t_n : {1, 2, 3, 5, 8}) {
    const auto z =
        prediction::compute_z(s, prediction::PredictorKind::kConstantVelocity, t_n);
    for (double v : z[0].values) CHECK(std::abs(v) < 1e-9);
  }
}

TEST_CASE("unpredictability reports trace gaps but tolerates absent cars") {
  const int k_steps = 10;
  std::vector<Vec2> positions;
  for (int k = 0; k < k_steps; ++k) positions.push_back(Vec2{0.0, 1.0 * k});
  AdjacentTrack truth = track_from_positions(positions);
  PredictionTrace trace;
  trace.horizon = 2;
  for (int q = 0; q + 1 < k_steps; ++q) {
    if (q == 4) continue;  // hole in the trace
    std::vector<Vec2> preds(2, Vec2{0.0, 0.0});
    trace.per_car[0].emplace(q, std::move(preds));
  }
  CHECK_THROWS_AS(prediction::unpredictability(trace, truth, 2), TraceGapError);

  // The same hole is fine when the car is absent there.
  truth.present[4] = 0;
  const UnpredictabilitySeries z = prediction::unpredictability(trace, truth, 2);
  CHECK(z.values[6] == 0.0);  // issue step 4 missing but the car was absent
}

TEST_CASE("trace files round-trip and reject malformed rows") {
  std::vector<Vec2> positions;
  for (int k = 0; k < 12; ++k) positions.push_back(Vec2{0.1 * k, 2.0 * k});
  const Scenario s = scenario_with_track(track_from_positions(positions));
  const PredictionTrace trace =
      prediction::build_trace(s, prediction::PredictorKind::kConstantVelocity, 2);

  const std::string path =
      (std::filesystem::temp_directory_path() / "laneirl_trace.csv").string();
  prediction::save_trace(trace, path);
  const PredictionTrace loaded = prediction::load_trace(path);
  REQUIRE(loaded.horizon == trace.horizon);
  for (int car = 0; car < kNumAdjacent; ++car) {
    REQUIRE(loaded.per_car[static_cast<std::size_t>(car)].size() ==
            trace.per_car[static_cast<std::size_t>(car)].size());
    for (const auto& [q, preds] : trace.per_car[static_cast<std::size_t>(car)]) {
      const auto& got = loaded.per_car[static_cast<std::size_t>(car)].at(q);
      for (std::size_t j = 0; j < preds.size(); ++j) {
        CHECK(got[j].x == preds[j].x);
        CHECK(got[j].y == preds[j].y);
      }
    }
  }

  const std::string bad =
      (std::filesystem::temp_directory_path() / "laneirl_bad_trace.csv").string();
  io::write_text_file(bad, "car_id,issue_step,future_step,x_hat,y_hat\n"
                           "preceding-current,0,1,0.0,0.0\n"
                           "preceding-current,0,3,0.0,0.0\n");
  CHECK_THROWS_AS(prediction::load_trace(bad), ParseError);
  io::write_text_file(bad, "nonsense-role,0,1,0.0,0.0\n");
  CHECK_THROWS_AS(prediction::load_trace(bad), ParseError);
  io::write_text_file(bad, "preceding-current,0,1,zzz,0.0\n");
  CHECK_THROWS_AS(prediction::load_trace(bad), ParseError);
}
