#include "laneirl/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <sstream>

namespace laneirl::eval {

namespace {

void check_compatible(const Trajectory& a, const Trajectory& b) {
  if (a.horizon() != b.horizon()) {
    throw InvalidValueError("mee: trajectories have different horizons");
  }
  if (a.dt != b.dt) throw InvalidValueError("mee: trajectories have different dt");
}

std::string format_double(double v, const char* fmt = "%.17g") {
  char buf[64];
  std::snprintf(buf, sizeof(buf), fmt, v);
  return buf;
}

}  // namespace

double mee_sum(const Trajectory& generated, const Trajectory& expert) {
  check_compatible(generated, expert);
  double total = 0.0;
  for (int k = 0; k < generated.horizon(); ++k) {
    const State& a = generated.states[static_cast<std::size_t>(k)];
    const State& b = expert.states[static_cast<std::size_t>(k)];
    total += std::hypot(a.x - b.x, a.y - b.y);
  }
  return total;
}

double mee(const Trajectory& generated, const Trajectory& expert) {
  return mee_sum(generated, expert) / generated.horizon();
}

MeanStd avg_mee(std::span<const double> mees) {
  MeanStd out;
  out.n = static_cast<int>(mees.size());
  if (out.n == 0) return out;
  double total = 0.0;
  for (double m : mees) total += m;
  out.mean = total / out.n;
  if (out.n == 1) return out;  // std 0 by convention
  double ss = 0.0;
  for (double m : mees) ss += (m - out.mean) * (m - out.mean);
  out.std = std::sqrt(ss / (out.n - 1));
  return out;
}

double improvement(double mee_w, double mee_wplus) {
  if (mee_w == 0.0) throw InvalidValueError("improvement: undefined for mee_w = 0");
  return 100.0 * (mee_w - mee_wplus) / mee_w;
}

MinDistance min_distance(const Trajectory& traj, const AdjacentTrack& track) {
  MinDistance out;
  out.distance = std::numeric_limits<double>::infinity();
  const int k_steps = std::min(traj.horizon(), track.horizon());
  for (int k = 0; k < k_steps; ++k) {
    if (!track.present[static_cast<std::size_t>(k)]) continue;
    const State& s = traj.state_at(k);
    const Vec2 d = track.positions[static_cast<std::size_t>(k)] - s.position();
    out.distance = std::min(out.distance, d.norm());
    out.valid = true;
  }
  return out;
}

std::vector<ReportRow> build_report(std::span<const ScenarioComparison> comparisons) {
  std::map<std::string, std::vector<const ScenarioComparison*>> by_dataset;
  for (const ScenarioComparison& c : comparisons) {
    by_dataset[c.dataset].push_back(&c);
  }
  std::vector<ReportRow> rows;
  rows.reserve(by_dataset.size());
  for (const auto& [dataset, items] : by_dataset) {
    ReportRow row;
    row.dataset = dataset;
    row.n = static_cast<int>(items.size());
    std::vector<double> a;
    std::vector<double> b;
    std::vector<double> a_sum;
    std::vector<double> b_sum;
    for (const ScenarioComparison* c : items) {
      a.push_back(mee(*c->gen_a, *c->expert));
      a_sum.push_back(mee_sum(*c->gen_a, *c->expert));
      if (c->gen_b != nullptr) {
        b.push_back(mee(*c->gen_b, *c->expert));
        b_sum.push_back(mee_sum(*c->gen_b, *c->expert));
      }
    }
    row.mee_a = avg_mee(a);
    row.mee_sum_a = avg_mee(a_sum);
    row.has_b = !b.empty();
    if (row.has_b) {
      row.mee_b = avg_mee(b);
      row.mee_sum_b = avg_mee(b_sum);
      row.improvement_pct = improvement(row.mee_a.mean, row.mee_b.mean);
    }
    rows.push_back(row);
  }
  return rows;
}

std::string format_report_text(std::span<const ReportRow> rows) {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof(line), "%-16s %8s %18s %18s %8s\n", "dataset", "# traj",
                "MEE_w (m)", "MEE_w+ (m)", "% imp");
  out << line;
  for (const ReportRow& r : rows) {
    std::string a = format_double(r.mee_a.mean, "%.2f");
    a += " +- " + format_double(r.mee_a.std, "%.2f");
    std::string b = r.has_b ? format_double(r.mee_b.mean, "%.2f") + " +- " +
                                  format_double(r.mee_b.std, "%.2f")
                            : std::string("-");
    std::string imp = r.has_b ? format_double(r.improvement_pct, "%.2f") : std::string("-");
    std::snprintf(line, sizeof(line), "%-16s %8d %18s %18s %8s\n", r.dataset.c_str(), r.n,
                  a.c_str(), b.c_str(), imp.c_str());
    out << line;
  }
  return out.str();
}

std::string format_report_csv(std::span<const ReportRow> rows) {
  std::ostringstream out;
  out << "dataset,n,mee_a_mean,mee_a_std,mee_b_mean,mee_b_std,improvement_pct,"
         "mee_sum_a_mean,mee_sum_a_std,mee_sum_b_mean,mee_sum_b_std\n";
  for (const ReportRow& r : rows) {
    out << r.dataset << ',' << r.n << ',' << format_double(r.mee_a.mean) << ','
        << format_double(r.mee_a.std) << ',';
    if (r.has_b) {
      out << format_double(r.mee_b.mean) << ',' << format_double(r.mee_b.std) << ','
          << format_double(r.improvement_pct) << ',';
    } else {
      out << ",,,";
    }
    out << format_double(r.mee_sum_a.mean) << ',' << format_double(r.mee_sum_a.std) << ',';
    if (r.has_b) {
      out << format_double(r.mee_sum_b.mean) << ',' << format_double(r.mee_sum_b.std);
    } else {
      out << ',';
    }
    out << '\n';
  }
  return out.str();
}

std::string format_timeseries_csv(std::span<const ScenarioComparison> comparisons) {
  if (comparisons.empty()) return "t\n";
  int k_steps = comparisons[0].expert->horizon();
  bool has_b = true;
  for (const ScenarioComparison& c : comparisons) {
    k_steps = std::min(k_steps, c.expert->horizon());
    has_b = has_b && c.gen_b != nullptr;
  }
  const double dt = comparisons[0].expert->dt;

  std::ostringstream out;
  out << "t";
  const char* groups_b[] = {"exp", "a", "b"};
  const char* groups_ab[] = {"exp", "a"};
  const int ngroups = has_b ? 3 : 2;
  const char** groups = has_b ? groups_b : groups_ab;
  for (int gi = 0; gi < ngroups; ++gi) {
    for (const char* comp : {"x", "y", "psi"}) {
      out << ',' << groups[gi] << '_' << comp << "_mean," << groups[gi] << '_' << comp
          << "_std";
    }
  }
  out << '\n';

  const auto state_of = [](const ScenarioComparison& c, int gi, int k) -> const State& {
    const Trajectory* t = gi == 0 ? c.expert : (gi == 1 ? c.gen_a : c.gen_b);
    return t->states[static_cast<std::size_t>(k)];
  };
  const int n = static_cast<int>(comparisons.size());
  for (int k = 0; k < k_steps; ++k) {
    out << format_double((k + 1) * dt);
    for (int gi = 0; gi < ngroups; ++gi) {
      double comps[3][2] = {};  // mean, then sum of squares scratch
      for (int ci = 0; ci < 3; ++ci) {
        double total = 0.0;
        for (const ScenarioComparison& c : comparisons) {
          const State& s = state_of(c, gi, k);
          total += ci == 0 ? s.x : (ci == 1 ? s.y : s.psi);
        }
        comps[ci][0] = total / n;
        double ss = 0.0;
        for (const ScenarioComparison& c : comparisons) {
          const State& s = state_of(c, gi, k);
          const double v = ci == 0 ? s.x : (ci == 1 ? s.y : s.psi);
          ss += (v - comps[ci][0]) * (v - comps[ci][0]);
        }
        comps[ci][1] = n > 1 ? std::sqrt(ss / (n - 1)) : 0.0;
        out << ',' << format_double(comps[ci][0]) << ',' << format_double(comps[ci][1]);
      }
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace laneirl::eval
