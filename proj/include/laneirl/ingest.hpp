#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "laneirl/types.hpp"

namespace laneirl::ingest {

// One vehicle's raw recording at 10 Hz: frames strictly increasing, positions
// in meters after schema unit conversion.
struct RawTrack {
  long vehicle_id = 0;
  std::vector<long> frames;
  std::vector<Vec2> positions;
  std::vector<int> lane_ids;
};

// Column mapping for the tabular input. Columns are resolved by header name
// when a header row is present, otherwise by position.
struct TableSchema {
  std::string vehicle_id = "vehicle_id";
  std::string frame = "frame";
  std::string x = "x";
  std::string y = "y";
  std::string lane_id = "lane_id";
  bool feet_to_meters = false;  // NGSIM sources record feet

  // NGSIM column names (Vehicle_ID, Frame_ID, Local_X, Local_Y, Lane_ID) with
  // the feet flag set.
  static TableSchema ngsim();
};

// Comma-separated tabular text -> tracks grouped by vehicle. Throws ParseError
// with the offending row on missing columns, non-numeric fields, or
// non-monotone frames.
std::vector<RawTrack> parse(const std::string& path, const TableSchema& schema);

// Symmetric exponentially-weighted moving average over +-window seconds with
// decay constant window/3; endpoint weights are truncated and renormalized.
std::vector<Vec2> smooth(std::span<const Vec2> positions, double window, double dt);

struct DifferentiatedTrack {
  std::vector<double> psi;    // heading, carry-forward convention when stationary
  std::vector<double> v;      // speed magnitude
  std::vector<double> omega;  // rate of the unwrapped heading
};

// Central differences (one-sided at the endpoints); throws
// InsufficientDataError for tracks shorter than 3 frames.
DifferentiatedTrack differentiate(std::span<const Vec2> positions, double dt);

struct ExtractionSettings {
  double dt = kDefaultDt;
  double window_before = 2.0;   // s before the lane-label change
  double window_after = 5.0;    // s after
  double smooth_window = 0.5;   // s
  double vicinity = 100.0;      // m longitudinal, for lane fitting
  double rollout_tolerance = 0.05;  // m, replayed controls vs recorded positions
  int min_lane_points = 10;
  std::string source_label = "unknown";
};

struct ExtractionLogEntry {
  long vehicle_id = 0;
  long frame = 0;
  bool accepted = false;
  std::string detail;  // scenario id or skip reason
};

struct ExtractionResult {
  std::vector<Scenario> scenarios;
  std::vector<ExtractionLogEntry> log;
};

// Scans every track for lane-label changes and builds one Scenario per change
// with full window coverage: smoothed ego trajectory with finite-difference
// controls, the four adjacent vehicles identified at the window start, total
// least squares lane lines, v_d, and origin normalization.
ExtractionResult extract_lane_changes(std::span<const RawTrack> tracks,
                                      const ExtractionSettings& settings);

// Total-least-squares line over all positions of vehicles carrying `lane_id`
// within +-vicinity of the longitudinal lane-change coordinate. Throws
// InsufficientDataError below `min_points`.
Line2 fit_lane_line(std::span<const RawTrack> tracks,
                    std::span<const std::vector<Vec2>> smoothed, int lane_id,
                    double y_center, double vicinity, int min_points);

struct SplitSpec {
  // scenario id -> split; ids absent from the map use the hash fallback.
  std::map<std::string, Split> assignment;
  std::string source = "hash-70-15-15";
  std::uint64_t seed = 0;
};

// Deterministic split. With an explicit assignment, unknown ids in the spec are
// warnings (returned), not failures; scenarios missing from the spec fall back
// to the seeded 70/15/15 hash of their id.
struct SplitResult {
  std::array<Dataset, 3> datasets;  // train, validation, test
  std::vector<std::string> warnings;
};

SplitResult split(std::vector<Scenario> scenarios, const SplitSpec& spec);

// Stable FNV-1a hash used by the fallback split.
std::uint64_t stable_hash(const std::string& s, std::uint64_t seed);

}  // namespace laneirl::ingest
