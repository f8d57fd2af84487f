#include "laneirl/ingest.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "laneirl/dynamics.hpp"

namespace laneirl::ingest {

namespace {

constexpr double kFeetToMeters = 0.3048;

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) {
    // trim surrounding whitespace
    const auto b = field.find_first_not_of(" \t\r");
    const auto e = field.find_last_not_of(" \t\r");
    fields.push_back(b == std::string::npos ? "" : field.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

bool looks_like_header(const std::vector<std::string>& fields) {
  for (const std::string& f : fields) {
    if (f.empty()) continue;
    char* end = nullptr;
    std::strtod(f.c_str(), &end);
    if (end == f.c_str() || *end != '\0') return true;  // non-numeric token
  }
  return false;
}

}  // namespace

TableSchema TableSchema::ngsim() {
  TableSchema s;
  s.vehicle_id = "Vehicle_ID";
  s.frame = "Frame_ID";
  s.x = "Local_X";
  s.y = "Local_Y";
  s.lane_id = "Lane_ID";
  s.feet_to_meters = true;
  return s;
}

std::vector<RawTrack> parse(const std::string& path, const TableSchema& schema) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");

  std::string line;
  long row = 0;
  // Column resolution: by header name when the first row is non-numeric,
  // otherwise positional (vehicle_id, frame, x, y, lane_id).
  std::array<int, 5> cols = {0, 1, 2, 3, 4};
  bool resolved = false;
  std::map<long, RawTrack> by_vehicle;
  std::vector<long> order;  // first-seen vehicle order

  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_csv_line(line);
    if (!resolved) {
      resolved = true;
      if (looks_like_header(fields)) {
        const std::array<const std::string*, 5> names = {&schema.vehicle_id, &schema.frame,
                                                         &schema.x, &schema.y,
                                                         &schema.lane_id};
        for (int c = 0; c < 5; ++c) {
          const auto it = std::find(fields.begin(), fields.end(), *names[c]);
          if (it == fields.end()) {
            throw ParseError(path, row, "missing column '" + *names[c] + "'");
          }
          cols[static_cast<std::size_t>(c)] = static_cast<int>(it - fields.begin());
        }
        continue;
      }
    }
    const int needed = *std::max_element(cols.begin(), cols.end());
    if (static_cast<int>(fields.size()) <= needed) {
      throw ParseError(path, row, "expected at least " + std::to_string(needed + 1) +
                                      " columns, got " + std::to_string(fields.size()));
    }
    long vehicle = 0;
    long frame = 0;
    double x = 0.0;
    double y = 0.0;
    long lane = 0;
    try {
      vehicle = std::stol(fields[static_cast<std::size_t>(cols[0])]);
      frame = std::stol(fields[static_cast<std::size_t>(cols[1])]);
      x = std::stod(fields[static_cast<std::size_t>(cols[2])]);
      y = std::stod(fields[static_cast<std::size_t>(cols[3])]);
      lane = std::stol(fields[static_cast<std::size_t>(cols[4])]);
    } catch (const std::exception&) {
      throw ParseError(path, row, "non-numeric field");
    }
    if (!std::isfinite(x) || !std::isfinite(y)) {
      throw ParseError(path, row, "non-finite position");
    }
    if (schema.feet_to_meters) {
      x *= kFeetToMeters;
      y *= kFeetToMeters;
    }
    auto [it, inserted] = by_vehicle.try_emplace(vehicle);
    if (inserted) {
      it->second.vehicle_id = vehicle;
      order.push_back(vehicle);
    }
    RawTrack& track = it->second;
    if (!track.frames.empty() && frame <= track.frames.back()) {
      throw ParseError(path, row, "non-monotone frame for vehicle " + std::to_string(vehicle));
    }
    track.frames.push_back(frame);
    track.positions.push_back(Vec2{x, y});
    track.lane_ids.push_back(static_cast<int>(lane));
  }

  std::vector<RawTrack> tracks;
  tracks.reserve(order.size());
  for (long vehicle : order) tracks.push_back(std::move(by_vehicle[vehicle]));
  return tracks;
}

std::vector<Vec2> smooth(std::span<const Vec2> positions, double window, double dt) {
  if (!(window >= 0.0) || !(dt > 0.0)) {
    throw InvalidValueError("smooth: window must be >= 0 and dt > 0");
  }
  const int n = static_cast<int>(positions.size());
  const int half = static_cast<int>(std::lround(window / dt));
  if (half == 0 || n == 0) return {positions.begin(), positions.end()};
  const double tau = window / 3.0;
  std::vector<double> weights(static_cast<std::size_t>(half) + 1);
  for (int d = 0; d <= half; ++d) {
    weights[static_cast<std::size_t>(d)] = std::exp(-std::abs(d) * dt / tau);
  }
  std::vector<Vec2> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    Vec2 acc;
    double wsum = 0.0;
    for (int d = -half; d <= half; ++d) {
      const int j = i + d;
      if (j < 0 || j >= n) continue;  // truncated at the ends, renormalized below
      const double w = weights[static_cast<std::size_t>(std::abs(d))];
      acc += w * positions[static_cast<std::size_t>(j)];
      wsum += w;
    }
    out[static_cast<std::size_t>(i)] = acc * (1.0 / wsum);
  }
  return out;
}

DifferentiatedTrack differentiate(std::span<const Vec2> positions, double dt) {
  const int n = static_cast<int>(positions.size());
  if (n < 3) throw InsufficientDataError("differentiate: need at least 3 frames");
  DifferentiatedTrack out;
  out.psi.resize(static_cast<std::size_t>(n));
  out.v.resize(static_cast<std::size_t>(n));
  out.omega.resize(static_cast<std::size_t>(n));

  std::vector<double> psi_unwrapped(static_cast<std::size_t>(n));
  double prev_heading = 0.0;  // stationary convention: previous valid heading or 0
  for (int i = 0; i < n; ++i) {
    Vec2 vel;
    if (i == 0) {
      vel = (positions[1] - positions[0]) * (1.0 / dt);
    } else if (i == n - 1) {
      vel = (positions[static_cast<std::size_t>(n - 1)] -
             positions[static_cast<std::size_t>(n - 2)]) *
            (1.0 / dt);
    } else {
      vel = (positions[static_cast<std::size_t>(i + 1)] -
             positions[static_cast<std::size_t>(i - 1)]) *
            (1.0 / (2.0 * dt));
    }
    const double speed = vel.norm();
    out.v[static_cast<std::size_t>(i)] = speed;
    double heading = prev_heading;
    if (speed > 1e-9) heading = std::atan2(vel.y, vel.x);
    out.psi[static_cast<std::size_t>(i)] = heading;
    prev_heading = heading;
  }
  // Unwrap before differentiating the heading.
  psi_unwrapped[0] = out.psi[0];
  for (int i = 1; i < n; ++i) {
    const double d = wrap_angle(out.psi[static_cast<std::size_t>(i)] -
                                out.psi[static_cast<std::size_t>(i - 1)]);
    psi_unwrapped[static_cast<std::size_t>(i)] =
        psi_unwrapped[static_cast<std::size_t>(i - 1)] + d;
  }
  for (int i = 0; i < n; ++i) {
    if (i == 0) {
      out.omega[0] = (psi_unwrapped[1] - psi_unwrapped[0]) / dt;
    } else if (i == n - 1) {
      out.omega[static_cast<std::size_t>(i)] =
          (psi_unwrapped[static_cast<std::size_t>(n - 1)] -
           psi_unwrapped[static_cast<std::size_t>(n - 2)]) /
          dt;
    } else {
      out.omega[static_cast<std::size_t>(i)] =
          (psi_unwrapped[static_cast<std::size_t>(i + 1)] -
           psi_unwrapped[static_cast<std::size_t>(i - 1)]) /
          (2.0 * dt);
    }
  }
  return out;
}

Line2 fit_lane_line(std::span<const RawTrack> tracks,
                    std::span<const std::vector<Vec2>> smoothed, int lane_id,
                    double y_center, double vicinity, int min_points) {
  // Total least squares: centroid plus the principal direction of the scatter.
  double sx = 0.0;
  double sy = 0.0;
  long count = 0;
  for (std::size_t t = 0; t < tracks.size(); ++t) {
    const RawTrack& track = tracks[t];
    if (smoothed[t].size() != track.frames.size()) continue;  // unusable track
    for (std::size_t i = 0; i < track.frames.size(); ++i) {
      if (track.lane_ids[i] != lane_id) continue;
      const Vec2& p = smoothed[t][i];
      if (std::abs(p.y - y_center) > vicinity) continue;
      sx += p.x;
      sy += p.y;
      ++count;
    }
  }
  if (count < min_points) {
    throw InsufficientDataError("fit_lane_line: lane " + std::to_string(lane_id) +
                                " has only " + std::to_string(count) + " points");
  }
  const double mx = sx / static_cast<double>(count);
  const double my = sy / static_cast<double>(count);
  double cxx = 0.0;
  double cxy = 0.0;
  double cyy = 0.0;
  for (std::size_t t = 0; t < tracks.size(); ++t) {
    const RawTrack& track = tracks[t];
    if (smoothed[t].size() != track.frames.size()) continue;
    for (std::size_t i = 0; i < track.frames.size(); ++i) {
      if (track.lane_ids[i] != lane_id) continue;
      const Vec2& p = smoothed[t][i];
      if (std::abs(p.y - y_center) > vicinity) continue;
      const double dx = p.x - mx;
      const double dy = p.y - my;
      cxx += dx * dx;
      cxy += dx * dy;
      cyy += dy * dy;
    }
  }
  // Leading eigenvector of [[cxx, cxy], [cxy, cyy]].
  const double tr = cxx + cyy;
  const double det = cxx * cyy - cxy * cxy;
  const double disc = std::sqrt(std::max(0.0, tr * tr / 4.0 - det));
  const double l1 = tr / 2.0 + disc;
  Vec2 dir;
  if (std::abs(cxy) > 1e-15) {
    dir = Vec2{l1 - cyy, cxy};
  } else {
    dir = cxx >= cyy ? Vec2{1.0, 0.0} : Vec2{0.0, 1.0};
  }
  if (dir.norm() < 1e-12) dir = Vec2{0.0, 1.0};
  if (dir.y < 0.0) dir = dir * -1.0;  // orient along increasing longitudinal coordinate
  return make_line(Vec2{mx, my}, dir);
}

namespace {

struct PreparedTrack {
  const RawTrack* raw = nullptr;
  std::vector<Vec2> smoothed;
  DifferentiatedTrack diff;
  long frame0 = 0;

  bool covers(long frame) const {
    return frame >= frame0 && frame < frame0 + static_cast<long>(smoothed.size());
  }
  std::size_t index(long frame) const { return static_cast<std::size_t>(frame - frame0); }
};

}  // namespace

ExtractionResult extract_lane_changes(std::span<const RawTrack> tracks,
                                      const ExtractionSettings& settings) {
  ExtractionResult result;
  const double dt = settings.dt;
  const int before = static_cast<int>(std::lround(settings.window_before / dt));
  const int after = static_cast<int>(std::lround(settings.window_after / dt));
  const int k_steps = before + after;  // K controls, K+1 window frames

  // Contiguity check: scenario windows must have every frame, so gaps in a
  // recording simply make `covers` fail through frame arithmetic below.
  std::vector<PreparedTrack> prepared(tracks.size());
  std::vector<std::vector<Vec2>> smoothed_storage(tracks.size());
  for (std::size_t t = 0; t < tracks.size(); ++t) {
    prepared[t].raw = &tracks[t];
    prepared[t].frame0 = tracks[t].frames.empty() ? 0 : tracks[t].frames.front();
    // Tracks with frame gaps are split implicitly: only the contiguous prefix
    // is usable through frame arithmetic, so reject gaps up front.
    bool contiguous = true;
    for (std::size_t i = 1; i < tracks[t].frames.size(); ++i) {
      if (tracks[t].frames[i] != tracks[t].frames[i - 1] + 1) {
        contiguous = false;
        break;
      }
    }
    if (!contiguous) {
      result.log.push_back({tracks[t].vehicle_id, prepared[t].frame0, false,
                            "track has frame gaps; skipped entirely"});
      prepared[t].raw = nullptr;
      continue;
    }
    prepared[t].smoothed = smooth(tracks[t].positions, settings.smooth_window, dt);
    smoothed_storage[t] = prepared[t].smoothed;
    if (tracks[t].positions.size() >= 3) {
      prepared[t].diff = differentiate(prepared[t].smoothed, dt);
    }
  }

  for (std::size_t t = 0; t < tracks.size(); ++t) {
    const PreparedTrack& ego = prepared[t];
    if (ego.raw == nullptr || ego.raw->frames.size() < 3) continue;
    const RawTrack& raw = *ego.raw;
    long last_accepted_lc = std::numeric_limits<long>::min();
    for (std::size_t i = 1; i < raw.frames.size(); ++i) {
      if (raw.lane_ids[i] == raw.lane_ids[i - 1]) continue;
      const long f_lc = raw.frames[i];
      if (last_accepted_lc != std::numeric_limits<long>::min() &&
          f_lc <= last_accepted_lc + after) {
        result.log.push_back({raw.vehicle_id, f_lc, false,
                              "label change within the window of an earlier change"});
        continue;
      }
      const long f_start = f_lc - before;
      const long f_end = f_lc + after;
      if (!ego.covers(f_start) || !ego.covers(f_end)) {
        result.log.push_back(
            {raw.vehicle_id, f_lc, false, "incomplete window coverage"});
        continue;
      }

      const int origin_lane = raw.lane_ids[ego.index(f_start)];
      const int target_lane = raw.lane_ids[i];
      if (origin_lane == target_lane) {
        result.log.push_back({raw.vehicle_id, f_lc, false,
                              "window start already carries the target label"});
        continue;
      }

      // Adjacent vehicle identification at the window start, by longitudinal
      // ordering; identities stay fixed for the whole window.
      const double ego_y0 = ego.smoothed[ego.index(f_start)].y;
      struct Candidate {
        std::size_t track = 0;
        double y = 0.0;
        bool found = false;
      };
      std::array<Candidate, kNumAdjacent> picks;
      for (std::size_t o = 0; o < tracks.size(); ++o) {
        if (o == t || prepared[o].raw == nullptr) continue;
        const PreparedTrack& other = prepared[o];
        if (!other.covers(f_start)) continue;
        const std::size_t oi = other.index(f_start);
        const int lane = other.raw->lane_ids[oi];
        if (lane != origin_lane && lane != target_lane) continue;
        const double y = other.smoothed[oi].y;
        const bool preceding = y > ego_y0;
        const int slot =
            lane == origin_lane
                ? (preceding ? static_cast<int>(AdjacentRole::kPrecedingCurrent)
                             : static_cast<int>(AdjacentRole::kFollowingCurrent))
                : (preceding ? static_cast<int>(AdjacentRole::kPrecedingTarget)
                             : static_cast<int>(AdjacentRole::kFollowingTarget));
        Candidate& cand = picks[static_cast<std::size_t>(slot)];
        const bool closer = !cand.found || (preceding ? y < cand.y : y > cand.y);
        if (closer) {
          cand = Candidate{o, y, true};
        }
      }

      // Lane geometry from all vehicles assigned to each lane near the change.
      const double y_lc = ego.smoothed[i].y;
      Line2 current_line;
      Line2 target_line;
      try {
        current_line = fit_lane_line(tracks, smoothed_storage, origin_lane, y_lc,
                                     settings.vicinity, settings.min_lane_points);
        target_line = fit_lane_line(tracks, smoothed_storage, target_lane, y_lc,
                                    settings.vicinity, settings.min_lane_points);
      } catch (const InsufficientDataError& e) {
        result.log.push_back({raw.vehicle_id, f_lc, false, e.what()});
        continue;
      }

      // Lane spacing: perpendicular distance between the lines evaluated at the
      // window's longitudinal extremes on the current line.
      const Vec2 ego_start = ego.smoothed[ego.index(f_start)];
      const Vec2 ego_end = ego.smoothed[ego.index(f_end)];
      const auto project = [](const Vec2& p, const Line2& line) {
        const double along = (p - line.point).dot(line.dir);
        return line.point + along * line.dir;
      };
      const double w0 = lateral_distance(project(ego_start, current_line), target_line);
      const double w1 = lateral_distance(project(ego_end, current_line), target_line);
      const double w = 0.5 * (w0 + w1);
      if (!(w > 0.0)) {
        result.log.push_back({raw.vehicle_id, f_lc, false, "degenerate lane spacing"});
        continue;
      }

      // Ego expert trajectory: finite-difference controls replayed through the
      // dynamics; the rollout must stay near the recorded positions.
      Scenario scenario;
      scenario.source = settings.source_label;
      scenario.id = settings.source_label + "_veh" + std::to_string(raw.vehicle_id) +
                    "_f" + std::to_string(f_lc);
      scenario.ego.dt = dt;
      const std::size_t s0 = ego.index(f_start);
      scenario.ego.x0 = State{ego.smoothed[s0].x, ego.smoothed[s0].y, ego.diff.psi[s0]};
      for (int k = 0; k < k_steps; ++k) {
        scenario.ego.controls.push_back(
            Control{ego.diff.v[s0 + static_cast<std::size_t>(k)],
                    ego.diff.omega[s0 + static_cast<std::size_t>(k)]});
      }
      scenario.ego.states = dynamics::rollout(scenario.ego.x0, scenario.ego.controls, dt);
      double max_err = 0.0;
      for (int k = 0; k < k_steps; ++k) {
        const State& s = scenario.ego.states[static_cast<std::size_t>(k)];
        const Vec2& rec = ego.smoothed[s0 + static_cast<std::size_t>(k) + 1];
        max_err = std::max(max_err, (s.position() - rec).norm());
      }
      if (max_err > settings.rollout_tolerance) {
        result.log.push_back({raw.vehicle_id, f_lc, false,
                              "rollout mismatch " + std::to_string(max_err) + " m"});
        continue;
      }

      for (int slot = 0; slot < kNumAdjacent; ++slot) {
        AdjacentTrack& track = scenario.adjacent[static_cast<std::size_t>(slot)];
        track.role = kAllRoles[static_cast<std::size_t>(slot)];
        track.positions.assign(static_cast<std::size_t>(k_steps), Vec2{});
        track.speeds.assign(static_cast<std::size_t>(k_steps), 0.0);
        track.present.assign(static_cast<std::size_t>(k_steps), 0);
        const Candidate& cand = picks[static_cast<std::size_t>(slot)];
        if (!cand.found) continue;
        const PreparedTrack& other = prepared[cand.track];
        for (int k = 0; k < k_steps; ++k) {
          const long frame = f_start + k;
          if (!other.covers(frame)) continue;
          const std::size_t oi = other.index(frame);
          track.positions[static_cast<std::size_t>(k)] = other.smoothed[oi];
          track.speeds[static_cast<std::size_t>(k)] =
              other.diff.v.empty() ? 0.0 : other.diff.v[oi];
          track.present[static_cast<std::size_t>(k)] = 1;
        }
      }

      // v_d over the window; ego mean speed when no adjacent car was found.
      double speed_sum = 0.0;
      long speed_count = 0;
      for (const AdjacentTrack& track : scenario.adjacent) {
        for (int k = 0; k < k_steps; ++k) {
          if (!track.present[static_cast<std::size_t>(k)]) continue;
          speed_sum += track.speeds[static_cast<std::size_t>(k)];
          ++speed_count;
        }
      }
      if (speed_count > 0) {
        scenario.v_d = speed_sum / static_cast<double>(speed_count);
      } else {
        double ego_sum = 0.0;
        for (const Control& u : scenario.ego.controls) ego_sum += u.v;
        scenario.v_d = ego_sum / k_steps;
      }

      // Origin normalization: translate everything so the ego starts at [0,0,psi0].
      const Vec2 shift = scenario.ego.x0.position();
      scenario.ego.x0.x = 0.0;
      scenario.ego.x0.y = 0.0;
      for (State& s : scenario.ego.states) {
        s.x -= shift.x;
        s.y -= shift.y;
      }
      for (AdjacentTrack& track : scenario.adjacent) {
        for (Vec2& p : track.positions) p -= shift;
      }
      current_line.point -= shift;
      target_line.point -= shift;
      scenario.lanes = LaneGeometry{current_line, target_line, w};
      scenario.metadata["origin_lane"] = std::to_string(origin_lane);
      scenario.metadata["target_lane"] = std::to_string(target_lane);
      scenario.metadata["lane_change_frame"] = std::to_string(f_lc);

      // The rollout of re-derived controls, not the raw recording, defines the
      // stored states, so the strict trajectory invariant holds exactly.
      validate_scenario(scenario);
      result.scenarios.push_back(std::move(scenario));
      result.log.push_back({raw.vehicle_id, f_lc, true, result.scenarios.back().id});
      last_accepted_lc = f_lc;
    }
  }
  return result;
}

std::uint64_t stable_hash(const std::string& s, std::uint64_t seed) {
  // FNV-1a, seed folded in first.
  std::uint64_t h = 14695981039346656037ULL ^ (seed * 1099511628211ULL);
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

SplitResult split(std::vector<Scenario> scenarios, const SplitSpec& spec) {
  SplitResult out;
  out.datasets[0].split = Split::kTrain;
  out.datasets[1].split = Split::kValidation;
  out.datasets[2].split = Split::kTest;
  for (auto& ds : out.datasets) ds.source = spec.source;

  std::set<std::string> present;
  for (const Scenario& s : scenarios) present.insert(s.id);
  for (const auto& [id, _] : spec.assignment) {
    if (present.count(id) == 0) {
      out.warnings.push_back("split spec id '" + id + "' not found among scenarios");
    }
  }
  for (Scenario& s : scenarios) {
    Split target;
    const auto it = spec.assignment.find(s.id);
    if (it != spec.assignment.end()) {
      target = it->second;
    } else {
      const std::uint64_t h = stable_hash(s.id, spec.seed) % 100;
      target = h < 70 ? Split::kTrain : (h < 85 ? Split::kValidation : Split::kTest);
    }
    out.datasets[static_cast<std::size_t>(target)].scenarios.push_back(std::move(s));
  }
  for (Dataset& ds : out.datasets) validate_dataset(ds);
  return out;
}

}  // namespace laneirl::ingest
