#pragma once

#include <span>
#include <string>
#include <vector>

#include "laneirl/types.hpp"

namespace laneirl::eval {

// Per-step mean Euclidean positional error between two trajectories with equal
// horizon and dt: (1/K) sum_k ||pos_gen,k - pos_exp,k|| over the K rollout states.
double mee(const Trajectory& generated, const Trajectory& expert);

// Summed (un-averaged) variant, emitted alongside the per-step mean in the
// machine-readable report.
double mee_sum(const Trajectory& generated, const Trajectory& expert);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // (n-1)-denominator; 0 by convention for n = 1
  int n = 0;
};

MeanStd avg_mee(std::span<const double> mees);

// 100 * (mee_w - mee_wplus) / mee_w.
double improvement(double mee_w, double mee_wplus);

struct MinDistance {
  double distance = 0.0;
  bool valid = false;  // false when the car is absent at every step
};

// Minimum Euclidean distance between the ego positions x_0..x_{K-1} and the
// adjacent car where present. Absent everywhere: +inf with valid = false.
MinDistance min_distance(const Trajectory& traj, const AdjacentTrack& track);

// One report row: a dataset compared under model A (and optionally model B).
struct ReportRow {
  std::string dataset;
  int n = 0;
  MeanStd mee_a;
  MeanStd mee_b;
  MeanStd mee_sum_a;
  MeanStd mee_sum_b;
  double improvement_pct = 0.0;
  bool has_b = false;
};

struct ScenarioComparison {
  std::string id;
  std::string dataset;
  const Trajectory* expert = nullptr;
  const Trajectory* gen_a = nullptr;
  const Trajectory* gen_b = nullptr;  // optional
};

// Groups comparisons by dataset label and builds the table rows in
// deterministic (sorted) dataset order.
std::vector<ReportRow> build_report(std::span<const ScenarioComparison> comparisons);

std::string format_report_text(std::span<const ReportRow> rows);
std::string format_report_csv(std::span<const ReportRow> rows);

// Per-step mean and std of each state component across scenarios, for the
// expert and each model; columns documented in the header row.
std::string format_timeseries_csv(std::span<const ScenarioComparison> comparisons);

}  // namespace laneirl::eval
