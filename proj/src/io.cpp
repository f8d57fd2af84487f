#include "laneirl/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace laneirl::io {

namespace {

void dump_value(const Json& j, std::ostringstream& out, int indent) {
  const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  const std::string pad_in(static_cast<std::size_t>(indent + 1) * 2, ' ');
  switch (j.type()) {
    case Json::value_t::null:
      out << "null";
      return;
    case Json::value_t::boolean:
      out << (j.get<bool>() ? "true" : "false");
      return;
    case Json::value_t::number_integer:
      out << j.get<long long>();
      return;
    case Json::value_t::number_unsigned:
      out << j.get<unsigned long long>();
      return;
    case Json::value_t::number_float: {
      const double v = j.get<double>();
      if (!std::isfinite(v)) throw InvalidValueError("dump_json: non-finite number");
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%.17g", v);
      out << buf;
      return;
    }
    case Json::value_t::string:
      out << Json(j.get<std::string>()).dump();  // reuse the escaping rules
      return;
    case Json::value_t::array: {
      if (j.empty()) {
        out << "[]";
        return;
      }
      // Arrays of scalars stay on one line; arrays of containers get one entry
      // per line for readable scenario files.
      const bool nested = j.front().is_array() || j.front().is_object();
      out << '[';
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (nested) out << '\n' << pad_in;
        dump_value(j[i], out, indent + 1);
        if (i + 1 < j.size()) out << (nested ? "," : ", ");
      }
      if (nested) out << '\n' << pad;
      out << ']';
      return;
    }
    case Json::value_t::object: {
      if (j.empty()) {
        out << "{}";
        return;
      }
      out << "{\n";
      std::size_t i = 0;
      for (auto it = j.begin(); it != j.end(); ++it, ++i) {
        out << pad_in << Json(it.key()).dump() << ": ";
        dump_value(it.value(), out, indent + 1);
        if (i + 1 < j.size()) out << ',';
        out << '\n';
      }
      out << pad << '}';
      return;
    }
    default:
      throw InvalidValueError("dump_json: unsupported value type");
  }
}

double get_double(const Json& j, const std::string& key, const std::string& context) {
  if (!j.contains(key) || !j[key].is_number()) {
    throw InputError(context + ": missing or non-numeric field '" + key + "'");
  }
  return j[key].get<double>();
}

int get_int(const Json& j, const std::string& key, const std::string& context) {
  if (!j.contains(key) || !j[key].is_number_integer()) {
    throw InputError(context + ": missing or non-integer field '" + key + "'");
  }
  return j[key].get<int>();
}

std::string get_string(const Json& j, const std::string& key, const std::string& context) {
  if (!j.contains(key) || !j[key].is_string()) {
    throw InputError(context + ": missing or non-string field '" + key + "'");
  }
  return j[key].get<std::string>();
}

const Json& get_node(const Json& j, const std::string& key, const std::string& context) {
  if (!j.contains(key)) throw InputError(context + ": missing field '" + key + "'");
  return j[key];
}

Json vec2_json(const Vec2& v) { return Json::array({v.x, v.y}); }

Vec2 vec2_from(const Json& j, const std::string& context) {
  if (!j.is_array() || j.size() != 2) throw InputError(context + ": expected [x, y]");
  return Vec2{j[0].get<double>(), j[1].get<double>()};
}

Json state_json(const State& s) { return Json::array({s.x, s.y, s.psi}); }

State state_from(const Json& j, const std::string& context) {
  if (!j.is_array() || j.size() != 3) throw InputError(context + ": expected [x, y, psi]");
  return State{j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

Json vector_json(const Eigen::VectorXd& v) {
  Json arr = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

Eigen::VectorXd vector_from(const Json& j, const std::string& context) {
  if (!j.is_array()) throw InputError(context + ": expected an array of numbers");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw InputError(context + ": non-numeric array entry");
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

Json parse_file(const std::string& path) {
  const std::string text = read_text_file(path);
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(path + ": invalid JSON: " + e.what());
  }
}

Json config_json(const features::FeatureConfig& cfg) {
  Json j = Json::object();
  j["c"] = cfg.c;
  j["t_p"] = cfg.t_p;
  j["t_f"] = cfg.t_f;
  j["c_p"] = cfg.c_p;
  j["c_f"] = cfg.c_f;
  j["v_eps"] = cfg.v_eps;
  return j;
}

features::FeatureConfig config_from(const Json& j, const std::string& context) {
  features::FeatureConfig cfg;
  cfg.c = get_double(j, "c", context);
  cfg.t_p = get_double(j, "t_p", context);
  cfg.t_f = get_double(j, "t_f", context);
  cfg.c_p = get_double(j, "c_p", context);
  cfg.c_f = get_double(j, "c_f", context);
  cfg.v_eps = get_double(j, "v_eps", context);
  cfg.validate();
  return cfg;
}

}  // namespace

std::string dump_json(const Json& j) {
  std::ostringstream out;
  dump_value(j, out, 0);
  out << '\n';
  return out.str();
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot open '" + path + "' for writing");
  out << content;
  if (!out) throw InputError("failed writing '" + path + "'");
}

Json scenario_to_json(const Scenario& scenario) {
  Json j = Json::object();
  j["format"] = "laneirl-scenario";
  j["version"] = 1;
  j["id"] = scenario.id;
  j["source"] = scenario.source;
  j["dt"] = scenario.ego.dt;
  j["horizon"] = scenario.ego.horizon();
  j["v_d"] = scenario.v_d;

  Json lanes = Json::object();
  for (const auto& [name, line] :
       {std::pair<const char*, const Line2*>{"current", &scenario.lanes.current_line},
        std::pair<const char*, const Line2*>{"target", &scenario.lanes.target_line}}) {
    Json l = Json::object();
    l["point"] = vec2_json(line->point);
    l["dir"] = vec2_json(line->dir);
    lanes[name] = l;
  }
  lanes["spacing"] = scenario.lanes.w;
  j["lanes"] = lanes;

  Json ego = Json::object();
  ego["x0"] = state_json(scenario.ego.x0);
  Json controls = Json::array();
  for (const Control& u : scenario.ego.controls) {
    controls.push_back(Json::array({u.v, u.omega}));
  }
  ego["controls"] = controls;
  Json states = Json::array();
  for (const State& s : scenario.ego.states) states.push_back(state_json(s));
  ego["states"] = states;
  j["ego"] = ego;

  Json adjacent = Json::array();
  for (const AdjacentTrack& track : scenario.adjacent) {
    Json t = Json::object();
    t["role"] = to_string(track.role);
    Json present = Json::array();
    Json positions = Json::array();
    Json speeds = Json::array();
    for (int k = 0; k < track.horizon(); ++k) {
      present.push_back(track.present[static_cast<std::size_t>(k)] != 0);
      positions.push_back(vec2_json(track.positions[static_cast<std::size_t>(k)]));
      speeds.push_back(track.speeds[static_cast<std::size_t>(k)]);
    }
    t["present"] = present;
    t["positions"] = positions;
    t["speeds"] = speeds;
    adjacent.push_back(t);
  }
  j["adjacent"] = adjacent;

  Json metadata = Json::object();
  for (const auto& [k, v] : scenario.metadata) metadata[k] = v;
  j["metadata"] = metadata;
  return j;
}

Scenario scenario_from_json(const Json& j, const std::string& context) {
  if (get_string(j, "format", context) != "laneirl-scenario") {
    throw InputError(context + ": not a laneirl scenario file");
  }
  Scenario s;
  s.id = get_string(j, "id", context);
  s.source = get_string(j, "source", context);
  const double dt = get_double(j, "dt", context);
  const int horizon = get_int(j, "horizon", context);
  s.v_d = get_double(j, "v_d", context);

  const Json& lanes = get_node(j, "lanes", context);
  const auto read_line = [&](const char* name) {
    const Json& l = get_node(lanes, name, context);
    return make_line(vec2_from(get_node(l, "point", context), context),
                     vec2_from(get_node(l, "dir", context), context));
  };
  s.lanes.current_line = read_line("current");
  s.lanes.target_line = read_line("target");
  s.lanes.w = get_double(lanes, "spacing", context);

  const Json& ego = get_node(j, "ego", context);
  s.ego.dt = dt;
  s.ego.x0 = state_from(get_node(ego, "x0", context), context);
  const Json& controls = get_node(ego, "controls", context);
  const Json& states = get_node(ego, "states", context);
  if (!controls.is_array() || static_cast<int>(controls.size()) != horizon ||
      !states.is_array() || static_cast<int>(states.size()) != horizon) {
    throw InputError(context + ": ego controls/states must have 'horizon' entries");
  }
  for (const auto& u : controls) {
    if (!u.is_array() || u.size() != 2) throw InputError(context + ": bad control entry");
    s.ego.controls.push_back(Control{u[0].get<double>(), u[1].get<double>()});
  }
  for (const auto& st : states) s.ego.states.push_back(state_from(st, context));

  const Json& adjacent = get_node(j, "adjacent", context);
  if (!adjacent.is_array() || adjacent.size() != kNumAdjacent) {
    throw InputError(context + ": expected 4 adjacent tracks");
  }
  for (const auto& t : adjacent) {
    const AdjacentRole role = role_from_string(get_string(t, "role", context));
    AdjacentTrack& track = s.track(role);
    track.role = role;
    const Json& present = get_node(t, "present", context);
    const Json& positions = get_node(t, "positions", context);
    const Json& speeds = get_node(t, "speeds", context);
    if (static_cast<int>(present.size()) != horizon ||
        static_cast<int>(positions.size()) != horizon ||
        static_cast<int>(speeds.size()) != horizon) {
      throw InputError(context + ": adjacent track '" + to_string(role) +
                       "' must have 'horizon' entries");
    }
    for (int k = 0; k < horizon; ++k) {
      track.present.push_back(present[static_cast<std::size_t>(k)].get<bool>() ? 1 : 0);
      track.positions.push_back(vec2_from(positions[static_cast<std::size_t>(k)], context));
      track.speeds.push_back(speeds[static_cast<std::size_t>(k)].get<double>());
    }
  }

  if (j.contains("metadata")) {
    for (auto it = j["metadata"].begin(); it != j["metadata"].end(); ++it) {
      s.metadata[it.key()] = it.value().get<std::string>();
    }
  }
  validate_scenario(s);
  return s;
}

void save_scenario(const Scenario& scenario, const std::string& path) {
  write_text_file(path, dump_json(scenario_to_json(scenario)));
}

Scenario load_scenario(const std::string& path) {
  return scenario_from_json(parse_file(path), path);
}

std::string scenario_filename(const std::string& id) {
  std::string safe = id;
  for (char& c : safe) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_') c = '_';
  }
  return safe + ".scenario.json";
}

std::vector<Scenario> load_scenario_dir(const std::string& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw InputError("'" + dir + "' is not a directory");
  std::vector<std::string> paths;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name.size() > 14 && name.substr(name.size() - 14) == ".scenario.json") {
      paths.push_back(entry.path().string());
    }
  }
  std::sort(paths.begin(), paths.end());
  std::vector<Scenario> scenarios;
  scenarios.reserve(paths.size());
  for (const std::string& p : paths) scenarios.push_back(load_scenario(p));
  return scenarios;
}

void save_model(const ModelArtifact& model, const std::string& path) {
  model.theta.validate();
  model.cfg.validate();
  model.norm.validate();
  Json j = Json::object();
  j["format"] = "laneirl-model";
  j["version"] = 1;
  j["variant"] = features::to_string(model.theta.variant);
  Json names = Json::array();
  for (features::Feature f : features::features_of(model.theta.variant)) {
    names.push_back(features::feature_name(f));
  }
  j["features"] = names;
  j["theta"] = vector_json(model.theta.theta);
  j["config"] = config_json(model.cfg);
  Json norm = Json::object();
  norm["min"] = vector_json(model.norm.min);
  norm["max"] = vector_json(model.norm.max);
  j["normalization"] = norm;
  Json training = Json::object();
  for (const auto& [k, v] : model.training) training[k] = v;
  j["training"] = training;
  write_text_file(path, dump_json(j));
}

ModelArtifact load_model(const std::string& path) {
  const Json j = parse_file(path);
  if (get_string(j, "format", path) != "laneirl-model") {
    throw InputError(path + ": not a laneirl model file");
  }
  ModelArtifact model;
  const features::RewardVariant variant =
      features::variant_from_string(get_string(j, "variant", path));
  model.theta.variant = variant;
  model.theta.theta = vector_from(get_node(j, "theta", path), path);
  model.cfg = config_from(get_node(j, "config", path), path);
  const Json& norm = get_node(j, "normalization", path);
  model.norm.variant = variant;
  model.norm.min = vector_from(get_node(norm, "min", path), path);
  model.norm.max = vector_from(get_node(norm, "max", path), path);
  if (j.contains("training")) {
    for (auto it = j["training"].begin(); it != j["training"].end(); ++it) {
      model.training[it.key()] = it.value().get<std::string>();
    }
  }
  model.theta.validate();
  model.norm.validate();
  return model;
}

ingest::SplitSpec load_split_spec(const std::string& path) {
  const Json j = parse_file(path);
  ingest::SplitSpec spec;
  spec.source = path;
  const auto read_ids = [&](const char* key, Split split) {
    if (!j.contains(key)) return;
    if (!j[key].is_array()) throw InputError(path + ": '" + key + "' must be an array");
    for (const auto& id : j[key]) {
      const std::string sid = id.get<std::string>();
      if (spec.assignment.count(sid) != 0) {
        throw InputError(path + ": scenario '" + sid + "' assigned to multiple splits");
      }
      spec.assignment[sid] = split;
    }
  };
  read_ids("train", Split::kTrain);
  read_ids("validation", Split::kValidation);
  read_ids("test", Split::kTest);
  if (j.contains("seed")) spec.seed = j["seed"].get<std::uint64_t>();
  return spec;
}

features::ThetaWeights load_theta(const std::string& path) {
  const Json j = parse_file(path);
  features::ThetaWeights theta;
  theta.variant = features::variant_from_string(get_string(j, "variant", path));
  theta.theta = vector_from(get_node(j, "theta", path), path);
  theta.validate();
  return theta;
}

synth::SceneSpec load_scene_spec(const std::string& path) {
  const Json j = parse_file(path);
  synth::SceneSpec spec;
  if (j.contains("w")) spec.w = j["w"].get<double>();
  if (j.contains("dt")) spec.dt = j["dt"].get<double>();
  if (j.contains("horizon")) spec.horizon = j["horizon"].get<int>();
  if (j.contains("ego_v0")) spec.ego_v0 = j["ego_v0"].get<double>();
  if (j.contains("ego_v0_jitter")) spec.ego_v0_jitter = j["ego_v0_jitter"].get<double>();
  if (j.contains("id_prefix")) spec.id_prefix = j["id_prefix"].get<std::string>();
  if (j.contains("adjacent")) {
    const Json& adj = j["adjacent"];
    for (auto it = adj.begin(); it != adj.end(); ++it) {
      const AdjacentRole role = role_from_string(it.key());
      synth::AdjacentSpec& a = spec.adjacent[static_cast<std::size_t>(role)];
      const Json& aj = it.value();
      if (aj.contains("present")) a.present = aj["present"].get<bool>();
      if (aj.contains("speed")) a.speed = aj["speed"].get<double>();
      if (aj.contains("gap")) a.gap = aj["gap"].get<double>();
      if (aj.contains("speed_jitter")) a.speed_jitter = aj["speed_jitter"].get<double>();
      if (aj.contains("gap_jitter")) a.gap_jitter = aj["gap_jitter"].get<double>();
      if (aj.contains("behavior")) {
        const Json& bj = aj["behavior"];
        if (bj.contains("kind")) {
          a.behavior.kind = synth::behavior_from_string(bj["kind"].get<std::string>());
        }
        if (bj.contains("amplitude")) a.behavior.amplitude = bj["amplitude"].get<double>();
        if (bj.contains("period")) a.behavior.period = bj["period"].get<double>();
        if (bj.contains("t_start")) a.behavior.t_start = bj["t_start"].get<double>();
        if (bj.contains("duration")) a.behavior.duration = bj["duration"].get<double>();
        if (bj.contains("accel")) a.behavior.accel = bj["accel"].get<double>();
      }
    }
  }
  return spec;
}

std::vector<features::FeatureConfig> load_sweep_grid(const std::string& path) {
  const Json j = parse_file(path);
  const auto values = [&](const char* key, double fallback) {
    std::vector<double> v;
    if (j.contains(key)) {
      for (const auto& x : j[key]) v.push_back(x.get<double>());
    }
    if (v.empty()) v.push_back(fallback);
    return v;
  };
  const features::FeatureConfig defaults;
  const auto cs = values("c", defaults.c);
  const auto tps = values("t_p", defaults.t_p);
  const auto tfs = values("t_f", defaults.t_f);
  const auto cps = values("c_p", defaults.c_p);
  const auto cfs = values("c_f", defaults.c_f);
  std::vector<features::FeatureConfig> grid;
  for (double c : cs) {
    for (double tp : tps) {
      for (double tf : tfs) {
        for (double cp : cps) {
          for (double cf : cfs) {
            features::FeatureConfig cfg = defaults;
            cfg.c = c;
            cfg.t_p = tp;
            cfg.t_f = tf;
            cfg.c_p = cp;
            cfg.c_f = cf;
            cfg.validate();
            grid.push_back(cfg);
          }
        }
      }
    }
  }
  if (grid.empty()) throw ConfigError(path + ": empty sweep grid");
  return grid;
}

void save_fit_report(const irl::FitResult& fit, const irl::SweepResult* sweep,
                     const std::string& path) {
  Json j = Json::object();
  j["format"] = "laneirl-training-report";
  j["version"] = 1;
  j["variant"] = features::to_string(fit.theta.variant);
  j["seed"] = fit.seed;
  j["converged"] = fit.converged;
  j["message"] = fit.message;
  j["final_loglik"] = fit.final_loglik;
  j["grad_norm"] = fit.grad_norm;
  j["theta"] = vector_json(fit.theta.theta);
  Json iters = Json::array();
  for (const irl::FitIterate& it : fit.iterates) {
    Json row = Json::object();
    row["iteration"] = it.iteration;
    row["loglik"] = it.loglik;
    row["grad_norm"] = it.grad_norm;
    row["lambda_max"] = it.lambda_max;
    iters.push_back(row);
  }
  j["iterations"] = iters;
  if (sweep != nullptr) {
    Json points = Json::array();
    for (const irl::SweepPoint& p : sweep->points) {
      Json row = Json::object();
      row["config"] = config_json(p.cfg);
      row["avg_mee"] = p.avg_mee;
      row["final_loglik"] = p.final_loglik;
      points.push_back(row);
    }
    j["sweep"] = points;
    j["sweep_best_index"] = sweep->best_index;
  }
  write_text_file(path, dump_json(j));
}

void save_convergence_report(const trajopt::ConvergenceReport& report,
                             const std::string& scenario_id, const std::string& path) {
  Json j = Json::object();
  j["format"] = "laneirl-convergence-report";
  j["version"] = 1;
  j["scenario"] = scenario_id;
  j["iterations"] = report.iterations;
  j["grad_norm"] = report.grad_norm;
  j["reward"] = report.reward;
  j["converged"] = report.converged;
  j["restarts_used"] = report.restarts_used;
  j["best_restart"] = report.best_restart;
  j["message"] = report.message;
  write_text_file(path, dump_json(j));
}

}  // namespace laneirl::io
