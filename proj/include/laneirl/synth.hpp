#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "laneirl/features.hpp"
#include "laneirl/ingest.hpp"
#include "laneirl/trajopt.hpp"
#include "laneirl/types.hpp"

namespace laneirl::synth {

enum class BehaviorKind : int {
  kConstantVelocity = 0,
  kZigzag = 1,    // lateral sinusoid on a constant longitudinal speed
  kCutIn = 2,     // smooth lane change into the other lane mid-window
  kSpeedUp = 3,   // constant longitudinal acceleration from t_start
};

const char* to_string(BehaviorKind kind);
BehaviorKind behavior_from_string(const std::string& name);

struct BehaviorSpec {
  BehaviorKind kind = BehaviorKind::kConstantVelocity;
  double amplitude = 0.5;  // zigzag lateral amplitude (m)
  double period = 2.0;     // zigzag period (s)
  double t_start = 2.0;    // cut-in / speed-up onset (s)
  double duration = 2.5;   // cut-in merge duration (s)
  double accel = 2.0;      // speed-up acceleration (m/s^2)
};

struct AdjacentSpec {
  bool present = true;
  BehaviorSpec behavior;
  double speed = 20.0;        // initial longitudinal speed (m/s)
  double gap = 15.0;          // |longitudinal offset| from the ego at t = 0 (m)
  double speed_jitter = 0.0;  // uniform +- jitter applied per instance seed
  double gap_jitter = 0.0;
};

struct SceneSpec {
  double w = 3.7;  // lane spacing (m)
  double dt = kDefaultDt;
  int horizon = kDefaultHorizon;
  double ego_v0 = 20.0;
  double ego_v0_jitter = 0.0;
  std::array<AdjacentSpec, kNumAdjacent> adjacent;  // indexed by AdjacentRole
  std::string id_prefix = "synthetic";
};

// Straight two-lane scene: current centerline x = 0, target x = w, traffic
// along +y, ego starting at the origin heading +y. The ego trajectory is a
// constant-speed straight line placeholder until make_expert replaces it.
// Deterministic given the seed (jitters use it).
Scenario make_scene(const SceneSpec& spec, std::uint64_t seed);

// Replaces the ego with the trajopt optimum under theta_star (optionally with
// seeded Gaussian control noise of scale `noise` on v and noise/10 on omega),
// and records theta_star in the scenario metadata.
Scenario make_expert(Scenario scenario, const features::ThetaWeights& theta_star,
                     const features::FeatureConfig& cfg,
                     const features::NormalizationConstants& norm, double noise,
                     const trajopt::OptimizerSettings& settings,
                     prediction::PredictorKind predictor,
                     std::uint64_t noise_seed = 0);

// Scripted raw-table scene for exercising the ingest pipeline: an ego that
// ramps laterally across the lane boundary (flipping its lane label once) plus
// four constant-velocity neighbors, all with margin frames around the window.
struct FixtureSpec {
  double w = 3.7;
  double dt = kDefaultDt;
  double ego_speed = 20.0;
  double ramp_start = 2.5;     // s
  double ramp_duration = 5.0;  // s to traverse the full lane offset
  double total_time = 11.6;    // s of recording
};

std::vector<ingest::RawTrack> make_fixture_tracks(const FixtureSpec& spec);

// Scenario -> raw tracks (ego id 1, adjacent ids 2..5 where present); lane
// labels come from the nearest centerline. Lets any scene round-trip through
// the ingest parser.
std::vector<ingest::RawTrack> scenario_to_tracks(const Scenario& scenario);

// NGSIM-column fixture file (vehicle_id, frame, x, y, lane_id), meters.
void export_fixture(std::span<const ingest::RawTrack> tracks, const std::string& path);

}  // namespace laneirl::synth
