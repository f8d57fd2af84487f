#include "laneirl/prediction.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace laneirl::prediction {

namespace {

std::vector<Vec2> extrapolate(const Vec2& base, const Vec2& velocity, const Vec2& accel,
                              int horizon, double dt) {
  std::vector<Vec2> preds;
  preds.reserve(static_cast<std::size_t>(horizon));
  for (int j = 1; j <= horizon; ++j) {
    const double t = j * dt;
    preds.push_back(base + t * velocity + (0.5 * t * t) * accel);
  }
  return preds;
}

}  // namespace

std::vector<Vec2> cv_predict(std::span<const Vec2> history, int horizon, double dt) {
  if (history.size() < 2) {
    throw NotEnoughHistoryError("cv_predict: need at least 2 history samples");
  }
  if (horizon < 1) throw InvalidValueError("cv_predict: horizon must be >= 1");
  const Vec2& last = history[history.size() - 1];
  const Vec2& prev = history[history.size() - 2];
  const Vec2 vel = (last - prev) * (1.0 / dt);
  return extrapolate(last, vel, Vec2{}, horizon, dt);
}

std::vector<Vec2> ca_predict(std::span<const Vec2> history, int horizon, double dt) {
  if (history.size() < 3) {
    throw NotEnoughHistoryError("ca_predict: need at least 3 history samples");
  }
  if (horizon < 1) throw InvalidValueError("ca_predict: horizon must be >= 1");
  const Vec2& p0 = history[history.size() - 3];
  const Vec2& p1 = history[history.size() - 2];
  const Vec2& p2 = history[history.size() - 1];
  // Second-order backward differences: exact for quadratic motion.
  const Vec2 vel = (3.0 * p2 - 4.0 * p1 + p0) * (1.0 / (2.0 * dt));
  const Vec2 acc = (p2 - 2.0 * p1 + p0) * (1.0 / (dt * dt));
  return extrapolate(p2, vel, acc, horizon, dt);
}

const char* to_string(PredictorKind kind) {
  return kind == PredictorKind::kConstantVelocity ? "cv" : "ca";
}

PredictorKind predictor_from_string(const std::string& name) {
  if (name == "cv" || name == "constant-velocity") return PredictorKind::kConstantVelocity;
  if (name == "ca" || name == "constant-acceleration") {
    return PredictorKind::kConstantAcceleration;
  }
  throw InvalidValueError("unknown predictor '" + name + "'");
}

PredictionTrace build_trace(const Scenario& scenario, PredictorKind kind, int horizon) {
  if (horizon < 1) throw InvalidValueError("build_trace: horizon must be >= 1");
  PredictionTrace trace;
  trace.horizon = horizon;
  const double dt = scenario.ego.dt;
  for (int car = 0; car < kNumAdjacent; ++car) {
    const AdjacentTrack& track = scenario.adjacent[static_cast<std::size_t>(car)];
    const int k_steps = track.horizon();
    auto present = [&](int k) {
      return k >= 0 && k < k_steps && track.present[static_cast<std::size_t>(k)] != 0;
    };
    for (int q = 0; q + 1 < k_steps; ++q) {
      std::vector<Vec2> preds;
      if (q == 0) {
        if (!present(0) || !present(1)) continue;
        // First issue step: only one past sample exists, fall back to the first
        // forward difference so step t_n is covered.
        const Vec2 vel = (track.positions[1] - track.positions[0]) * (1.0 / dt);
        preds = extrapolate(track.positions[0], vel, Vec2{}, horizon, dt);
      } else if (kind == PredictorKind::kConstantVelocity) {
        if (!present(q) || !present(q - 1)) continue;
        const std::array<Vec2, 2> hist = {track.positions[static_cast<std::size_t>(q - 1)],
                                          track.positions[static_cast<std::size_t>(q)]};
        preds = cv_predict(hist, horizon, dt);
      } else {
        if (!present(q) || !present(q - 1)) continue;
        if (present(q - 2)) {
          const std::array<Vec2, 3> hist = {track.positions[static_cast<std::size_t>(q - 2)],
                                            track.positions[static_cast<std::size_t>(q - 1)],
                                            track.positions[static_cast<std::size_t>(q)]};
          preds = ca_predict(hist, horizon, dt);
        } else {
          const std::array<Vec2, 2> hist = {track.positions[static_cast<std::size_t>(q - 1)],
                                            track.positions[static_cast<std::size_t>(q)]};
          preds = cv_predict(hist, horizon, dt);
        }
      }
      trace.per_car[static_cast<std::size_t>(car)].emplace(q, std::move(preds));
    }
  }
  return trace;
}

UnpredictabilitySeries unpredictability(const PredictionTrace& trace,
                                        const AdjacentTrack& truth, int t_n) {
  if (t_n < 1) throw InvalidValueError("unpredictability: t_n must be >= 1");
  if (trace.horizon < t_n) {
    throw InvalidValueError("unpredictability: trace horizon is shorter than t_n");
  }
  const int car = static_cast<int>(truth.role);
  const int k_steps = truth.horizon();
  UnpredictabilitySeries series;
  series.t_n = t_n;
  series.values.assign(static_cast<std::size_t>(k_steps), 0.0);
  const auto& issued = trace.per_car[static_cast<std::size_t>(car)];
  for (int k = t_n; k < k_steps; ++k) {
    const int issue = k - t_n;
    bool covered = true;
    for (int j = issue; j <= k; ++j) {
      if (!truth.present[static_cast<std::size_t>(j)]) {
        covered = false;
        break;
      }
    }
    if (!covered) continue;  // absent car contributes no evidence: z stays 0
    const auto it = issued.find(issue);
    if (it == issued.end()) throw TraceGapError(car, k);
    const std::vector<Vec2>& preds = it->second;
    double total = 0.0;
    for (int j = issue + 1; j <= k; ++j) {
      const Vec2 err =
          truth.positions[static_cast<std::size_t>(j)] - preds[static_cast<std::size_t>(j - issue - 1)];
      total += err.norm();
    }
    series.values[static_cast<std::size_t>(k)] = total / t_n;
  }
  return series;
}

ZSeriesSet unpredictability_all(const PredictionTrace& trace, const Scenario& scenario,
                                int t_n) {
  ZSeriesSet out;
  for (int car = 0; car < kNumAdjacent; ++car) {
    out[static_cast<std::size_t>(car)] =
        unpredictability(trace, scenario.adjacent[static_cast<std::size_t>(car)], t_n);
  }
  return out;
}

ZSeriesSet compute_z(const Scenario& scenario, PredictorKind kind, int t_n) {
  return unpredictability_all(build_trace(scenario, kind, t_n), scenario, t_n);
}

void save_trace(const PredictionTrace& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("save_trace: cannot open '" + path + "' for writing");
  out << "car_id,issue_step,future_step,x_hat,y_hat\n";
  char buf[64];
  for (int car = 0; car < kNumAdjacent; ++car) {
    const char* id = to_string(static_cast<AdjacentRole>(car));
    for (const auto& [issue, preds] : trace.per_car[static_cast<std::size_t>(car)]) {
      for (std::size_t j = 0; j < preds.size(); ++j) {
        out << id << ',' << issue << ',' << issue + 1 + static_cast<int>(j);
        std::snprintf(buf, sizeof(buf), "%.17g", preds[j].x);
        out << ',' << buf;
        std::snprintf(buf, sizeof(buf), "%.17g", preds[j].y);
        out << ',' << buf << '\n';
      }
    }
  }
}

PredictionTrace load_trace(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("load_trace: cannot open '" + path + "'");
  PredictionTrace trace;
  trace.horizon = 0;
  std::string line;
  long row = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    if (!header_seen) {
      header_seen = true;
      if (line.find("car_id") != std::string::npos) continue;  // optional header
    }
    std::stringstream ss(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != 5) {
      throw ParseError(path, row, "expected 5 fields (car_id,issue_step,future_step,x_hat,y_hat)");
    }
    AdjacentRole role;
    try {
      role = role_from_string(fields[0]);
    } catch (const InvalidValueError&) {
      throw ParseError(path, row, "unknown car_id '" + fields[0] + "'");
    }
    int issue = 0;
    int future = 0;
    double x = 0.0;
    double y = 0.0;
    try {
      issue = std::stoi(fields[1]);
      future = std::stoi(fields[2]);
      x = std::stod(fields[3]);
      y = std::stod(fields[4]);
    } catch (const std::exception&) {
      throw ParseError(path, row, "non-numeric field");
    }
    if (future <= issue) throw ParseError(path, row, "future_step must exceed issue_step");
    if (!std::isfinite(x) || !std::isfinite(y)) {
      throw ParseError(path, row, "non-finite prediction");
    }
    auto& entry = trace.per_car[static_cast<std::size_t>(role)][issue];
    const std::size_t slot = static_cast<std::size_t>(future - issue - 1);
    if (entry.size() <= slot) entry.resize(slot + 1, Vec2{std::nan(""), std::nan("")});
    entry[slot] = Vec2{x, y};
    trace.horizon = std::max(trace.horizon, future - issue);
  }
  // Shape check: every issued prediction covers future steps issue+1..issue+h
  // for one uniform horizon h.
  for (int car = 0; car < kNumAdjacent; ++car) {
    for (const auto& [issue, preds] : trace.per_car[static_cast<std::size_t>(car)]) {
      if (static_cast<int>(preds.size()) != trace.horizon) {
        throw ParseError(path, 0,
                         "car '" + std::string(to_string(static_cast<AdjacentRole>(car))) +
                             "' issue " + std::to_string(issue) + " covers " +
                             std::to_string(preds.size()) + " steps, expected " +
                             std::to_string(trace.horizon));
      }
      for (const Vec2& p : preds) {
        if (std::isnan(p.x) || std::isnan(p.y)) {
          throw ParseError(path, 0,
                           "missing future step in issue " + std::to_string(issue));
        }
      }
    }
  }
  return trace;
}

}  // namespace laneirl::prediction
