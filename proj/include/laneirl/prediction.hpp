#pragma once

#include <array>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "laneirl/types.hpp"

namespace laneirl::prediction {

inline constexpr int kDefaultLookback = 2;  // t_n = 0.2 s at 10 Hz

// Rolling mean Euclidean predictive error z for one adjacent car.
// values[k] >= 0 per step; 0 for k < t_n (no evidence yet).
struct UnpredictabilitySeries {
  int t_n = kDefaultLookback;
  std::vector<double> values;
};

using ZSeriesSet = std::array<UnpredictabilitySeries, kNumAdjacent>;

// Constant-velocity extrapolation from the last two history samples:
// p_hat(j) = p_last + j*dt*v_hat for j = 1..horizon.
// Throws NotEnoughHistoryError if fewer than 2 samples.
std::vector<Vec2> cv_predict(std::span<const Vec2> history, int horizon, double dt);

// Constant-acceleration extrapolation from the last three history samples
// (second-order backward differences, exact for quadratic motion).
// Throws NotEnoughHistoryError if fewer than 3 samples.
std::vector<Vec2> ca_predict(std::span<const Vec2> history, int horizon, double dt);

enum class PredictorKind : int { kConstantVelocity = 0, kConstantAcceleration = 1 };

const char* to_string(PredictorKind kind);
PredictorKind predictor_from_string(const std::string& name);

// Predictions issued per adjacent car and per issue step: entry (car, q) holds
// predicted positions for steps q+1 .. q+horizon.
struct PredictionTrace {
  int horizon = kDefaultLookback;
  std::array<std::map<int, std::vector<Vec2>>, kNumAdjacent> per_car;
};

// Runs the predictor over every adjacent track of the scenario, issuing a
// prediction at every step where the car has enough observed history. Issue
// step 0 uses the first forward difference so that step t_n is already covered
// (constant-velocity tracks still produce exactly zero error).
PredictionTrace build_trace(const Scenario& scenario, PredictorKind kind, int horizon);

// Eq.-style rolling error: z_k = (1/t_n) * sum_{j=k-t_n+1..k} ||truth_j - pred_j||
// using only the prediction issued at k - t_n. Steps where the car is absent
// anywhere in [k-t_n, k] get z = 0. Throws TraceGapError when the car is
// present but the trace lacks the required issue step.
UnpredictabilitySeries unpredictability(const PredictionTrace& trace,
                                        const AdjacentTrack& truth, int t_n);

ZSeriesSet unpredictability_all(const PredictionTrace& trace, const Scenario& scenario,
                                int t_n);

// build_trace + unpredictability_all with horizon = t_n.
ZSeriesSet compute_z(const Scenario& scenario, PredictorKind kind,
                     int t_n = kDefaultLookback);

// Tabular trace file: one row per (car_id, issue_step, future_step, x_hat, y_hat).
PredictionTrace load_trace(const std::string& path);
void save_trace(const PredictionTrace& trace, const std::string& path);

}  // namespace laneirl::prediction
