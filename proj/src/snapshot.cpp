#include "laneirl/snapshot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace laneirl::snapshot {

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

const char* kGenColors[] = {"#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};

struct Bounds {
  double min_x = 0.0, max_x = 0.0, min_y = 0.0, max_y = 0.0;
  bool init = false;
  void add(const Vec2& p) {
    if (!init) {
      min_x = max_x = p.x;
      min_y = max_y = p.y;
      init = true;
      return;
    }
    min_x = std::min(min_x, p.x);
    max_x = std::max(max_x, p.x);
    min_y = std::min(min_y, p.y);
    max_y = std::max(max_y, p.y);
  }
};

}  // namespace

std::string render_svg(const Scenario& scenario,
                       std::span<const NamedTrajectory> generated,
                       const SnapshotOptions& options) {
  const double dt = scenario.ego.dt;
  const int k_steps = scenario.ego.horizon();
  const int k_now = std::clamp(static_cast<int>(std::lround(options.time / dt)), 0,
                               k_steps - 1);
  const int k_hist = std::max(0, k_now - static_cast<int>(std::lround(options.history / dt)));

  Bounds b;
  for (int k = 0; k <= k_now; ++k) {
    b.add(scenario.ego.state_at(k).position());
    for (const NamedTrajectory& g : generated) b.add(g.trajectory->state_at(k).position());
    for (const AdjacentTrack& track : scenario.adjacent) {
      if (track.present[static_cast<std::size_t>(k)]) {
        b.add(track.positions[static_cast<std::size_t>(k)]);
      }
    }
  }
  const double margin = 3.0 * scenario.lanes.w;
  b.min_x -= margin;
  b.max_x += margin;
  b.min_y -= margin;
  b.max_y += margin;

  // Road runs along y; draw it horizontally: screen u = y, screen v = x.
  const double s = options.scale;
  const double width = (b.max_y - b.min_y) * s;
  const double height = (b.max_x - b.min_x) * s;
  const auto u_of = [&](const Vec2& p) { return (p.y - b.min_y) * s; };
  const auto v_of = [&](const Vec2& p) { return (b.max_x - p.x) * s; };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(width)
      << "\" height=\"" << fmt(height) << "\" viewBox=\"0 0 " << fmt(width) << ' '
      << fmt(height) << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"#fafafa\"/>\n";

  // Lane centerlines clipped to the view.
  for (const Line2* line : {&scenario.lanes.current_line, &scenario.lanes.target_line}) {
    const double span = (b.max_y - b.min_y) + (b.max_x - b.min_x);
    const Vec2 p0 = line->point - span * line->dir;
    const Vec2 p1 = line->point + span * line->dir;
    out << "<line x1=\"" << fmt(u_of(p0)) << "\" y1=\"" << fmt(v_of(p0)) << "\" x2=\""
        << fmt(u_of(p1)) << "\" y2=\"" << fmt(v_of(p1))
        << "\" stroke=\"#bbbbbb\" stroke-dasharray=\"8,6\" stroke-width=\"1.5\"/>\n";
  }

  struct Car {
    Vec2 pos;
    double psi;
    std::string color;
    std::vector<Vec2> trail;
  };
  std::vector<Car> cars;
  {
    Car ego;
    ego.pos = scenario.ego.state_at(k_now).position();
    ego.psi = scenario.ego.state_at(k_now).psi;
    ego.color = "#1f77b4";
    for (int k = k_hist; k <= k_now; ++k) ego.trail.push_back(scenario.ego.state_at(k).position());
    cars.push_back(std::move(ego));
  }
  for (std::size_t gi = 0; gi < generated.size(); ++gi) {
    Car car;
    car.pos = generated[gi].trajectory->state_at(k_now).position();
    car.psi = generated[gi].trajectory->state_at(k_now).psi;
    car.color = kGenColors[gi % 4];
    for (int k = k_hist; k <= k_now; ++k) {
      car.trail.push_back(generated[gi].trajectory->state_at(k).position());
    }
    cars.push_back(std::move(car));
  }
  for (const AdjacentTrack& track : scenario.adjacent) {
    if (!track.present[static_cast<std::size_t>(k_now)]) continue;
    Car car;
    car.pos = track.positions[static_cast<std::size_t>(k_now)];
    Vec2 delta{0.0, 1.0};
    if (k_now > 0 && track.present[static_cast<std::size_t>(k_now - 1)]) {
      delta = car.pos - track.positions[static_cast<std::size_t>(k_now - 1)];
    }
    car.psi = std::atan2(delta.y, delta.x);
    car.color = "#888888";
    for (int k = k_hist; k <= k_now; ++k) {
      if (track.present[static_cast<std::size_t>(k)]) {
        car.trail.push_back(track.positions[static_cast<std::size_t>(k)]);
      }
    }
    cars.push_back(std::move(car));
  }

  for (const Car& car : cars) {
    // History with decreasing opacity toward the past.
    const std::size_t n = car.trail.size();
    for (std::size_t i = 1; i < n; ++i) {
      const double opacity = 0.08 + 0.5 * static_cast<double>(i) / static_cast<double>(n);
      out << "<line x1=\"" << fmt(u_of(car.trail[i - 1])) << "\" y1=\""
          << fmt(v_of(car.trail[i - 1])) << "\" x2=\"" << fmt(u_of(car.trail[i]))
          << "\" y2=\"" << fmt(v_of(car.trail[i])) << "\" stroke=\"" << car.color
          << "\" stroke-opacity=\"" << fmt(opacity) << "\" stroke-width=\"2\"/>\n";
    }
    // Car rectangle centered on the position, rotated by the heading. Screen
    // angle: heading psi maps to atan2 in (u, v) = (y, -x) coordinates.
    const double angle_deg = -(car.psi - kPi / 2.0) * 180.0 / kPi + 90.0;
    const double cu = u_of(car.pos);
    const double cv = v_of(car.pos);
    const double hl = options.car_length * s / 2.0;
    const double hw = options.car_width * s / 2.0;
    out << "<g transform=\"translate(" << fmt(cu) << ',' << fmt(cv) << ") rotate("
        << fmt(angle_deg) << ")\"><rect x=\"" << fmt(-hl) << "\" y=\"" << fmt(-hw)
        << "\" width=\"" << fmt(2 * hl) << "\" height=\"" << fmt(2 * hw) << "\" fill=\""
        << car.color << "\" fill-opacity=\"0.85\" rx=\"2\"/></g>\n";
  }
  out << "</svg>\n";
  return out.str();
}

std::string timeseries_csv(const Scenario& scenario,
                           std::span<const NamedTrajectory> generated) {
  std::ostringstream out;
  out << "k,t,exp_x,exp_y,exp_psi";
  for (const NamedTrajectory& g : generated) {
    out << ',' << g.label << "_x," << g.label << "_y," << g.label << "_psi";
  }
  for (const AdjacentTrack& track : scenario.adjacent) {
    out << ',' << to_string(track.role) << "_present," << to_string(track.role) << "_x,"
        << to_string(track.role) << "_y";
  }
  out << '\n';
  const int k_steps = scenario.ego.horizon();
  for (int k = 0; k < k_steps; ++k) {
    const State& e = scenario.ego.state_at(k);
    out << k << ',' << fmt17(k * scenario.ego.dt) << ',' << fmt17(e.x) << ','
        << fmt17(e.y) << ',' << fmt17(e.psi);
    for (const NamedTrajectory& g : generated) {
      const State& st = g.trajectory->state_at(k);
      out << ',' << fmt17(st.x) << ',' << fmt17(st.y) << ',' << fmt17(st.psi);
    }
    for (const AdjacentTrack& track : scenario.adjacent) {
      const bool present = track.present[static_cast<std::size_t>(k)] != 0;
      const Vec2& p = track.positions[static_cast<std::size_t>(k)];
      out << ',' << (present ? 1 : 0) << ',' << fmt17(present ? p.x : 0.0) << ','
          << fmt17(present ? p.y : 0.0);
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace laneirl::snapshot
