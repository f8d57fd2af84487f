#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "laneirl/features.hpp"
#include "laneirl/ingest.hpp"
#include "laneirl/irl.hpp"
#include "laneirl/synth.hpp"
#include "laneirl/trajopt.hpp"
#include "laneirl/types.hpp"

namespace laneirl::io {

using Json = nlohmann::ordered_json;

// Deterministic JSON text: insertion key order, 2-space indent, every double
// rendered with 17 significant digits.
std::string dump_json(const Json& j);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

// ---- scenario files (one per lane change, "<id>.scenario.json") ----

Json scenario_to_json(const Scenario& scenario);
Scenario scenario_from_json(const Json& j, const std::string& context);

void save_scenario(const Scenario& scenario, const std::string& path);
Scenario load_scenario(const std::string& path);

// All "*.scenario.json" files in a directory, sorted by filename.
std::vector<Scenario> load_scenario_dir(const std::string& dir);

std::string scenario_filename(const std::string& id);

// ---- model artifact ----

struct ModelArtifact {
  features::ThetaWeights theta;
  features::FeatureConfig cfg;
  features::NormalizationConstants norm;
  std::map<std::string, std::string> training;  // free-form provenance
};

void save_model(const ModelArtifact& model, const std::string& path);
ModelArtifact load_model(const std::string& path);

// ---- auxiliary inputs ----

ingest::SplitSpec load_split_spec(const std::string& path);
features::ThetaWeights load_theta(const std::string& path);
synth::SceneSpec load_scene_spec(const std::string& path);

// Cartesian sweep grid from per-field value lists (missing fields keep the
// default as a single grid value); iteration order is c, t_p, t_f, c_p, c_f.
std::vector<features::FeatureConfig> load_sweep_grid(const std::string& path);

// ---- reports ----

void save_fit_report(const irl::FitResult& fit, const irl::SweepResult* sweep,
                     const std::string& path);
void save_convergence_report(const trajopt::ConvergenceReport& report,
                             const std::string& scenario_id, const std::string& path);

}  // namespace laneirl::io
