#pragma once

#include <span>
#include <string>
#include <vector>

#include "laneirl/types.hpp"

namespace laneirl::snapshot {

struct NamedTrajectory {
  std::string label;
  const Trajectory* trajectory = nullptr;
};

struct SnapshotOptions {
  double time = 3.0;        // s into the window
  double car_length = 4.5;  // m
  double car_width = 1.8;   // m
  double history = 3.0;     // s of opacity-faded trail
  double scale = 8.0;       // px per meter
};

// Sketch of the scene at `time`: lane centerlines, car rectangles, fading
// history trails. The expert ego draws blue, generated trajectories red then
// green, adjacent cars gray.
std::string render_svg(const Scenario& scenario,
                       std::span<const NamedTrajectory> generated,
                       const SnapshotOptions& options);

// Per-step table: ego expert and generated states plus adjacent positions.
std::string timeseries_csv(const Scenario& scenario,
                           std::span<const NamedTrajectory> generated);

}  // namespace laneirl::snapshot
