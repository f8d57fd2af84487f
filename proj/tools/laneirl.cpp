// laneirl: learn lane-change rewards from trajectories and generate
// trajectories under them. Subcommands: ingest, train, generate, eval, synth,
// plot. Every flag has a config-file counterpart (flags > config > defaults);
// all commands are deterministic given their --seed and inputs.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "laneirl/dynamics.hpp"
#include "laneirl/eval.hpp"
#include "laneirl/ingest.hpp"
#include "laneirl/io.hpp"
#include "laneirl/irl.hpp"
#include "laneirl/parallel.hpp"
#include "laneirl/prediction.hpp"
#include "laneirl/snapshot.hpp"
#include "laneirl/synth.hpp"
#include "laneirl/trajopt.hpp"

namespace fs = std::filesystem;
using namespace laneirl;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitNumerical = 3;

io::Json g_config;  // loaded config file, possibly empty

const io::Json* config_section(const std::string& name) {
  if (g_config.contains(name) && g_config[name].is_object()) return &g_config[name];
  return nullptr;
}

// Flags win over the config file, which wins over defaults.
template <class T>
void apply_config(const CLI::App* cmd, const std::string& flag, const io::Json* section,
                  const std::string& key, T& value) {
  if (section == nullptr || cmd->count(flag) > 0 || !section->contains(key)) return;
  value = (*section)[key].get<T>();
}

void apply_common(const CLI::App* cmd, const std::string& flag, const std::string& key,
                  int& value) {
  apply_config(cmd, flag, config_section("common"), key, value);
}

prediction::ZSeriesSet z_for_scenario(const Scenario& scenario,
                                      const std::string& trace_dir,
                                      prediction::PredictorKind predictor, int t_n) {
  if (!trace_dir.empty()) {
    const fs::path path = fs::path(trace_dir) / (io::scenario_filename(scenario.id) + ".trace.csv");
    const fs::path alt = fs::path(trace_dir) / (scenario.id + ".trace.csv");
    const std::string chosen = fs::exists(path) ? path.string() : alt.string();
    const prediction::PredictionTrace trace = prediction::load_trace(chosen);
    return prediction::unpredictability_all(trace, scenario, t_n);
  }
  return prediction::compute_z(scenario, predictor, t_n);
}

struct IngestArgs {
  std::string input;
  std::string schema = "default";
  std::string units = "m";
  std::string out_dir;
  std::string source;
  double vicinity = 100.0;
  double smooth_window = 0.5;
};

int run_ingest(const CLI::App* cmd, IngestArgs& args) {
  const io::Json* section = config_section("ingest");
  apply_config(cmd, "--schema", section, "schema", args.schema);
  apply_config(cmd, "--units", section, "units", args.units);
  apply_config(cmd, "--vicinity", section, "vicinity", args.vicinity);
  apply_config(cmd, "--smooth-window", section, "smooth_window", args.smooth_window);

  ingest::TableSchema schema =
      args.schema == "ngsim" ? ingest::TableSchema::ngsim() : ingest::TableSchema{};
  if (args.units == "ft") {
    schema.feet_to_meters = true;
  } else if (args.units == "m") {
    if (args.schema != "ngsim") schema.feet_to_meters = false;
  } else {
    throw ConfigError("ingest: --units must be 'm' or 'ft'");
  }

  ingest::ExtractionSettings settings;
  settings.vicinity = args.vicinity;
  settings.smooth_window = args.smooth_window;
  settings.source_label =
      args.source.empty() ? fs::path(args.input).stem().string() : args.source;

  const std::vector<ingest::RawTrack> tracks = ingest::parse(args.input, schema);
  const ingest::ExtractionResult result = ingest::extract_lane_changes(tracks, settings);

  fs::create_directories(args.out_dir);
  for (const Scenario& s : result.scenarios) {
    io::save_scenario(s, (fs::path(args.out_dir) / io::scenario_filename(s.id)).string());
  }
  std::string log;
  for (const ingest::ExtractionLogEntry& e : result.log) {
    log += (e.accepted ? "accepted" : "skipped");
    log += " vehicle " + std::to_string(e.vehicle_id) + " frame " +
           std::to_string(e.frame) + ": " + e.detail + "\n";
  }
  io::write_text_file((fs::path(args.out_dir) / "extraction_log.txt").string(), log);
  std::cout << "ingest: " << result.scenarios.size() << " scenario(s) from "
            << tracks.size() << " track(s); log at " << args.out_dir
            << "/extraction_log.txt\n";
  return kExitOk;
}

struct TrainArgs {
  std::string data_dir;
  std::string split_spec;
  std::string variant = "baseline";
  std::string sweep_grid;
  std::uint64_t seed = 0;
  std::string out_model;
  std::string report;
  std::string predictor = "cv";
  std::string trace_dir;
  int max_iters = 300;
  double theta_max = 1e3;
  int lookback = prediction::kDefaultLookback;
  int jobs = 1;
};

int run_train(const CLI::App* cmd, TrainArgs& args) {
  const io::Json* section = config_section("train");
  apply_config(cmd, "--variant", section, "variant", args.variant);
  apply_config(cmd, "--seed", section, "seed", args.seed);
  apply_config(cmd, "--max-iters", section, "max_iters", args.max_iters);
  apply_config(cmd, "--theta-max", section, "theta_max", args.theta_max);
  apply_config(cmd, "--predictor", section, "predictor", args.predictor);
  apply_config(cmd, "--lookback", section, "lookback", args.lookback);
  apply_common(cmd, "--jobs", "jobs", args.jobs);

  const features::RewardVariant variant = features::variant_from_string(args.variant);
  const prediction::PredictorKind predictor =
      prediction::predictor_from_string(args.predictor);

  std::vector<Scenario> scenarios = io::load_scenario_dir(args.data_dir);
  if (scenarios.empty()) throw InputError("train: no scenarios in '" + args.data_dir + "'");
  ingest::SplitSpec spec;
  if (!args.split_spec.empty()) spec = io::load_split_spec(args.split_spec);
  ingest::SplitResult splits = ingest::split(std::move(scenarios), spec);
  for (const std::string& w : splits.warnings) std::cerr << "warning: " << w << "\n";
  const std::vector<Scenario>& train = splits.datasets[0].scenarios;
  if (train.empty()) throw InputError("train: training split is empty");

  irl::FitSettings fit_settings;
  fit_settings.max_iterations = args.max_iters;
  fit_settings.theta_max = args.theta_max;
  fit_settings.seed = args.seed;
  fit_settings.jobs = args.jobs;

  std::optional<std::vector<prediction::ZSeriesSet>> z;
  if (variant == features::RewardVariant::kUnpredictabilityAware) {
    z.emplace(train.size());
    parallel_for(train.size(), args.jobs, [&](std::size_t i) {
      (*z)[i] = z_for_scenario(train[i], args.trace_dir, predictor, args.lookback);
    });
  }

  features::FeatureConfig cfg;
  std::optional<irl::SweepResult> sweep;
  if (!args.sweep_grid.empty()) {
    const std::vector<features::FeatureConfig> grid = io::load_sweep_grid(args.sweep_grid);
    trajopt::OptimizerSettings regen;
    regen.seed = args.seed;
    sweep = irl::hyperparameter_sweep(train, variant, grid, fit_settings, regen, predictor);
    cfg = sweep->best;
  }

  const irl::FitResult fit =
      irl::fit(train, variant, cfg, fit_settings, predictor, z ? &*z : nullptr);

  io::ModelArtifact model;
  model.theta = fit.theta;
  model.cfg = cfg;
  model.norm = fit.norm;
  model.training["seed"] = std::to_string(args.seed);
  model.training["n_train"] = std::to_string(train.size());
  model.training["converged"] = fit.converged ? "true" : "false";
  model.training["predictor"] = args.predictor;
  io::save_model(model, args.out_model);
  if (!args.report.empty()) {
    io::save_fit_report(fit, sweep ? &*sweep : nullptr, args.report);
  }
  std::cout << "train: fitted " << features::to_string(variant) << " model on "
            << train.size() << " scenario(s); loglik " << fit.final_loglik
            << (fit.converged ? " (converged)" : " (iteration cap)") << "\n";
  return kExitOk;
}

struct GenerateArgs {
  std::string model;
  std::string scenario;
  std::string data_dir;
  std::string out_dir;
  int restarts = 0;
  std::uint64_t seed = 0;
  std::string predictor = "cv";
  std::string trace_dir;
  int max_iters = 400;
  int lookback = prediction::kDefaultLookback;
  int jobs = 1;
};

int run_generate(const CLI::App* cmd, GenerateArgs& args) {
  const io::Json* section = config_section("generate");
  apply_config(cmd, "--restarts", section, "restarts", args.restarts);
  apply_config(cmd, "--seed", section, "seed", args.seed);
  apply_config(cmd, "--predictor", section, "predictor", args.predictor);
  apply_config(cmd, "--max-iters", section, "max_iters", args.max_iters);
  apply_config(cmd, "--lookback", section, "lookback", args.lookback);
  apply_common(cmd, "--jobs", "jobs", args.jobs);

  if (args.scenario.empty() == args.data_dir.empty()) {
    throw ConfigError("generate: give exactly one of --scenario or --data-dir");
  }
  const io::ModelArtifact model = io::load_model(args.model);
  const prediction::PredictorKind predictor =
      prediction::predictor_from_string(args.predictor);

  std::vector<Scenario> scenarios;
  if (!args.scenario.empty()) {
    scenarios.push_back(io::load_scenario(args.scenario));
  } else {
    scenarios = io::load_scenario_dir(args.data_dir);
  }
  if (scenarios.empty()) throw InputError("generate: no scenarios to process");

  trajopt::OptimizerSettings settings;
  settings.restarts = args.restarts;
  settings.seed = args.seed;
  settings.max_iterations = args.max_iters;

  fs::create_directories(args.out_dir);
  std::vector<Scenario> outputs(scenarios.size());
  std::vector<trajopt::ConvergenceReport> reports(scenarios.size());
  parallel_for(scenarios.size(), args.jobs, [&](std::size_t i) {
    const Scenario& scenario = scenarios[i];
    prediction::ZSeriesSet z;
    const prediction::ZSeriesSet* zp = nullptr;
    if (model.theta.variant == features::RewardVariant::kUnpredictabilityAware) {
      z = z_for_scenario(scenario, args.trace_dir, predictor, args.lookback);
      zp = &z;
    }
    const trajopt::OptimizeResult res =
        trajopt::optimize(scenario, model.theta, model.cfg, model.norm, zp, settings);
    Scenario out = scenario;
    out.ego = res.trajectory;
    out.metadata["generated_by"] = features::to_string(model.theta.variant);
    outputs[i] = std::move(out);
    reports[i] = res.report;
  });
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    const std::string base = io::scenario_filename(outputs[i].id);
    io::save_scenario(outputs[i], (fs::path(args.out_dir) / base).string());
    io::save_convergence_report(
        reports[i], outputs[i].id,
        (fs::path(args.out_dir) / (base + ".report.json")).string());
  }
  std::cout << "generate: wrote " << outputs.size() << " trajectory file(s) to "
            << args.out_dir << "\n";
  return kExitOk;
}

struct EvalArgs {
  std::string expert_dir;
  std::string gen_dir_a;
  std::string gen_dir_b;
  std::string out = "eval_report";
};

int run_eval(const CLI::App*, EvalArgs& args) {
  const std::vector<Scenario> experts = io::load_scenario_dir(args.expert_dir);
  const std::vector<Scenario> gen_a = io::load_scenario_dir(args.gen_dir_a);
  std::vector<Scenario> gen_b;
  if (!args.gen_dir_b.empty()) gen_b = io::load_scenario_dir(args.gen_dir_b);

  std::map<std::string, const Scenario*> a_by_id;
  for (const Scenario& s : gen_a) a_by_id[s.id] = &s;
  std::map<std::string, const Scenario*> b_by_id;
  for (const Scenario& s : gen_b) b_by_id[s.id] = &s;

  std::vector<eval::ScenarioComparison> comparisons;
  for (const Scenario& expert : experts) {
    const auto ita = a_by_id.find(expert.id);
    if (ita == a_by_id.end()) continue;
    eval::ScenarioComparison c;
    c.id = expert.id;
    c.dataset = expert.source;
    c.expert = &expert.ego;
    c.gen_a = &ita->second->ego;
    const auto itb = b_by_id.find(expert.id);
    if (itb != b_by_id.end()) c.gen_b = &itb->second->ego;
    comparisons.push_back(c);
  }
  if (comparisons.empty()) {
    throw InputError("eval: no matching scenario ids between expert and generated dirs");
  }
  const std::vector<eval::ReportRow> rows = eval::build_report(comparisons);
  const std::string text = eval::format_report_text(rows);
  io::write_text_file(args.out + ".txt", text);
  io::write_text_file(args.out + ".csv", eval::format_report_csv(rows));
  io::write_text_file(args.out + "_timeseries.csv",
                      eval::format_timeseries_csv(comparisons));
  std::cout << text;
  return kExitOk;
}

struct SynthArgs {
  std::string spec;
  std::string theta_star;
  int n = 1;
  std::uint64_t seed = 0;
  std::string out_dir;
  std::string fixture_format = "none";
  double noise = 0.0;
  int jobs = 1;
};

int run_synth(const CLI::App* cmd, SynthArgs& args) {
  const io::Json* section = config_section("synth");
  apply_config(cmd, "--n", section, "n", args.n);
  apply_config(cmd, "--seed", section, "seed", args.seed);
  apply_config(cmd, "--noise", section, "noise", args.noise);
  apply_config(cmd, "--fixture-format", section, "fixture_format", args.fixture_format);
  apply_common(cmd, "--jobs", "jobs", args.jobs);

  synth::SceneSpec spec;
  if (!args.spec.empty()) spec = io::load_scene_spec(args.spec);

  std::optional<features::ThetaWeights> theta;
  if (!args.theta_star.empty()) theta = io::load_theta(args.theta_star);

  fs::create_directories(args.out_dir);
  std::vector<Scenario> scenes(static_cast<std::size_t>(args.n));
  parallel_for(scenes.size(), args.jobs, [&](std::size_t i) {
    Scenario scene = synth::make_scene(spec, args.seed + i);
    if (theta) {
      trajopt::OptimizerSettings settings;
      settings.seed = args.seed + i;
      scene = synth::make_expert(scene, *theta, features::FeatureConfig{},
                                 features::NormalizationConstants::identity(theta->variant),
                                 args.noise, settings,
                                 prediction::PredictorKind::kConstantVelocity,
                                 args.seed + i);
    }
    scenes[i] = std::move(scene);
  });
  for (const Scenario& scene : scenes) {
    const std::string base = io::scenario_filename(scene.id);
    io::save_scenario(scene, (fs::path(args.out_dir) / base).string());
    if (args.fixture_format == "ngsim") {
      synth::export_fixture(synth::scenario_to_tracks(scene),
                            (fs::path(args.out_dir) / (base + ".fixture.csv")).string());
    } else if (args.fixture_format != "none") {
      throw ConfigError("synth: unknown --fixture-format '" + args.fixture_format + "'");
    }
  }
  std::cout << "synth: wrote " << scenes.size() << " scenario(s) to " << args.out_dir
            << "\n";
  return kExitOk;
}

struct PlotArgs {
  std::string scenario;
  std::vector<std::string> gen;
  double time = 3.0;
  std::string out = "snapshot";
};

int run_plot(const CLI::App*, PlotArgs& args) {
  const Scenario scenario = io::load_scenario(args.scenario);
  std::vector<Scenario> generated;
  generated.reserve(args.gen.size());
  for (const std::string& path : args.gen) generated.push_back(io::load_scenario(path));
  std::vector<snapshot::NamedTrajectory> named;
  for (std::size_t i = 0; i < generated.size(); ++i) {
    named.push_back({"gen" + std::to_string(i + 1), &generated[i].ego});
  }
  snapshot::SnapshotOptions options;
  options.time = args.time;
  io::write_text_file(args.out + ".svg", snapshot::render_svg(scenario, named, options));
  io::write_text_file(args.out + ".csv", snapshot::timeseries_csv(scenario, named));
  std::cout << "plot: wrote " << args.out << ".svg and " << args.out << ".csv\n";
  return kExitOk;
}

void print_error(const char* kind, const std::string& message) {
  io::Json j = io::Json::object();
  io::Json e = io::Json::object();
  e["kind"] = kind;
  e["message"] = message;
  j["error"] = e;
  std::cerr << io::dump_json(j);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lane-change reward learning and trajectory generation"};
  app.require_subcommand(1);

  std::string config_path;
  if (const char* env = std::getenv("LANEIRL_CONFIG")) config_path = env;
  app.add_option("--config", config_path, "JSON config file with per-command sections");

  IngestArgs ingest_args;
  CLI::App* ingest_cmd = app.add_subcommand("ingest", "extract lane-change scenarios");
  ingest_cmd->add_option("--input", ingest_args.input, "tabular trajectory file")->required();
  ingest_cmd->add_option("--schema", ingest_args.schema, "column schema: default | ngsim");
  ingest_cmd->add_option("--units", ingest_args.units, "position units: m | ft");
  ingest_cmd->add_option("--out-dir", ingest_args.out_dir, "scenario output directory")->required();
  ingest_cmd->add_option("--vicinity", ingest_args.vicinity, "lane-fit vicinity (m)");
  ingest_cmd->add_option("--smooth-window", ingest_args.smooth_window, "smoothing half-window (s)");
  ingest_cmd->add_option("--source", ingest_args.source, "dataset label (default: file stem)");

  TrainArgs train_args;
  CLI::App* train_cmd = app.add_subcommand("train", "fit reward weights by MaxEnt IRL");
  train_cmd->add_option("--data-dir", train_args.data_dir, "scenario directory")->required();
  train_cmd->add_option("--split-spec", train_args.split_spec, "split assignment file");
  train_cmd->add_option("--variant", train_args.variant, "baseline | unpred");
  train_cmd->add_option("--sweep-grid", train_args.sweep_grid, "hyperparameter grid file");
  train_cmd->add_option("--seed", train_args.seed, "seed recorded in the model");
  train_cmd->add_option("--out-model", train_args.out_model, "model artifact path")->required();
  train_cmd->add_option("--report", train_args.report, "training report path");
  train_cmd->add_option("--predictor", train_args.predictor, "cv | ca");
  train_cmd->add_option("--trace-dir", train_args.trace_dir, "precomputed prediction traces");
  train_cmd->add_option("--max-iters", train_args.max_iters, "fit iteration cap");
  train_cmd->add_option("--theta-max", train_args.theta_max, "upper bound on theta");
  train_cmd->add_option("--lookback", train_args.lookback, "unpredictability lookback t_n (steps)");
  train_cmd->add_option("--jobs", train_args.jobs, "worker threads");

  GenerateArgs gen_args;
  CLI::App* gen_cmd = app.add_subcommand("generate", "optimize trajectories under a model");
  gen_cmd->add_option("--model", gen_args.model, "model artifact")->required();
  gen_cmd->add_option("--scenario", gen_args.scenario, "single scenario file");
  gen_cmd->add_option("--data-dir", gen_args.data_dir, "scenario directory");
  gen_cmd->add_option("--out-dir", gen_args.out_dir, "output directory")->required();
  gen_cmd->add_option("--restarts", gen_args.restarts, "perturbed restarts");
  gen_cmd->add_option("--seed", gen_args.seed, "restart noise seed");
  gen_cmd->add_option("--predictor", gen_args.predictor, "cv | ca");
  gen_cmd->add_option("--trace-dir", gen_args.trace_dir, "precomputed prediction traces");
  gen_cmd->add_option("--max-iters", gen_args.max_iters, "optimizer iteration cap");
  gen_cmd->add_option("--lookback", gen_args.lookback, "unpredictability lookback t_n (steps)");
  gen_cmd->add_option("--jobs", gen_args.jobs, "worker threads");

  EvalArgs eval_args;
  CLI::App* eval_cmd = app.add_subcommand("eval", "compare generated vs expert trajectories");
  eval_cmd->add_option("--expert-dir", eval_args.expert_dir, "expert scenarios")->required();
  eval_cmd->add_option("--gen-dir-a", eval_args.gen_dir_a, "generated set A")->required();
  eval_cmd->add_option("--gen-dir-b", eval_args.gen_dir_b, "generated set B (optional)");
  eval_cmd->add_option("--out", eval_args.out, "report path prefix");

  SynthArgs synth_args;
  CLI::App* synth_cmd = app.add_subcommand("synth", "generate synthetic scenarios");
  synth_cmd->add_option("--spec", synth_args.spec, "scene spec file");
  synth_cmd->add_option("--theta-star", synth_args.theta_star, "reward for synthetic experts");
  synth_cmd->add_option("--n", synth_args.n, "number of scenarios");
  synth_cmd->add_option("--seed", synth_args.seed, "base seed");
  synth_cmd->add_option("--out-dir", synth_args.out_dir, "output directory")->required();
  synth_cmd->add_option("--fixture-format", synth_args.fixture_format, "none | ngsim");
  synth_cmd->add_option("--noise", synth_args.noise, "expert control noise (m/s)");
  synth_cmd->add_option("--jobs", synth_args.jobs, "worker threads");

  PlotArgs plot_args;
  CLI::App* plot_cmd = app.add_subcommand("plot", "snapshot a scenario as SVG + CSV");
  plot_cmd->add_option("--scenario", plot_args.scenario, "scenario file")->required();
  plot_cmd->add_option("--gen", plot_args.gen, "generated trajectory file(s)");
  plot_cmd->add_option("--time", plot_args.time, "snapshot time (s)");
  plot_cmd->add_option("--out", plot_args.out, "output path prefix");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }

  try {
    if (!config_path.empty()) {
      g_config = io::Json::parse(io::read_text_file(config_path));
    }
    if (*ingest_cmd) return run_ingest(ingest_cmd, ingest_args);
    if (*train_cmd) return run_train(train_cmd, train_args);
    if (*gen_cmd) return run_generate(gen_cmd, gen_args);
    if (*eval_cmd) return run_eval(eval_cmd, eval_args);
    if (*synth_cmd) return run_synth(synth_cmd, synth_args);
    if (*plot_cmd) return run_plot(plot_cmd, plot_args);
  } catch (const InputError& e) {
    print_error("input", e.what());
    return kExitInput;
  } catch (const NumericalError& e) {
    print_error("numerical", e.what());
    return kExitNumerical;
  } catch (const nlohmann::json::exception& e) {
    print_error("input", e.what());
    return kExitInput;
  } catch (const std::exception& e) {
    print_error("internal", e.what());
    return kExitNumerical;
  }
  return kExitOk;
}
