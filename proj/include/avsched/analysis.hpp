#pragma once

// Post-scheduling analytics: the degree-(1,1) rational fit for bridge and
// stale-state overhead, machine-size sweeps, reaction-layer bookkeeping and
// the two reactive-|Y> provisioning cost models.

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "avsched/estimator.hpp"
#include "avsched/scheduler.hpp"

namespace avs {

struct DegenerateFit : std::runtime_error {
  DegenerateFit() : std::runtime_error("rational fit design matrix is rank-deficient") {}
};

struct VolumeUnderflow : std::runtime_error {
  VolumeUnderflow()
      : std::runtime_error("circuit AV exceeds the allocated spacetime volume") {}
};

/// Coefficients of y = (a x + b) / (x + c). The asymptote a is the
/// large-machine limit of the fitted fraction.
struct FitResult {
  double a = 0, b = 0, c = 0;
  double r_squared = 0;
  double asymptote = 0;
  bool degenerate = false;
};

namespace detail {

// Solve a 3x3 linear system in place; returns false on a vanishing pivot.
inline bool solve3(double m[3][3], double rhs[3], double out[3]) {
  int perm[3] = {0, 1, 2};
  for (int col = 0; col < 3; ++col) {
    int piv = col;
    for (int r = col + 1; r < 3; ++r)
      if (std::abs(m[perm[r]][col]) > std::abs(m[perm[piv]][col])) piv = r;
    std::swap(perm[col], perm[piv]);
    const double p = m[perm[col]][col];
    if (std::abs(p) < 1e-300) return false;
    for (int r = col + 1; r < 3; ++r) {
      const double f = m[perm[r]][col] / p;
      for (int c2 = col; c2 < 3; ++c2) m[perm[r]][c2] -= f * m[perm[col]][c2];
      rhs[perm[r]] -= f * rhs[perm[col]];
    }
  }
  for (int row = 2; row >= 0; --row) {
    double acc = rhs[perm[row]];
    for (int c2 = row + 1; c2 < 3; ++c2) acc -= m[perm[row]][c2] * out[c2];
    const double p = m[perm[row]][row];
    if (std::abs(p) < 1e-300) return false;
    out[row] = acc / p;
  }
  return true;
}

inline double rational11(double x, double a, double b, double c) {
  return (a * x + b) / (x + c);
}

}  // namespace detail

/// Least-squares fit of y = (a x + b)/(x + c): linearized normal equations
/// (y x = a x + b - c y) followed by Gauss-Newton refinement on the true
/// residuals.
inline FitResult fit_rational(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 4) throw std::invalid_argument("fit needs at least 4 points");
  for (std::size_t i = 0; i < points.size(); ++i)
    for (std::size_t j = i + 1; j < points.size(); ++j)
      if (points[i].first == points[j].first)
        throw std::invalid_argument("fit needs distinct x values");

  double y_min = points.front().second, y_max = y_min;
  for (const auto& [x, y] : points) {
    y_min = std::min(y_min, y);
    y_max = std::max(y_max, y);
  }

  FitResult fit;
  if (y_max - y_min == 0.0) {
    // Constant data is representable as the whole family a=k, b=k*c; report
    // one member and flag the unresolved direction.
    fit.a = y_max;
    fit.b = 0;
    fit.c = 0;
    fit.r_squared = 1.0;
    fit.asymptote = fit.a;
    fit.degenerate = true;
    return fit;
  }

  // Linearized normal equations over rows [x, 1, -y] * (a,b,c)^T = x*y.
  double m[3][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};
  double rhs[3] = {0, 0, 0};
  for (const auto& [x, y] : points) {
    const double row[3] = {x, 1.0, -y};
    const double target = x * y;
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) m[i][j] += row[i] * row[j];
      rhs[i] += row[i] * target;
    }
  }
  double theta[3];
  if (!detail::solve3(m, rhs, theta)) throw DegenerateFit();

  // Gauss-Newton refinement.
  double a = theta[0], b = theta[1], c = theta[2];
  for (int iter = 0; iter < 100; ++iter) {
    double jtj[3][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};
    double jtr[3] = {0, 0, 0};
    bool pole = false;
    for (const auto& [x, y] : points) {
      const double den = x + c;
      if (std::abs(den) < 1e-9) {
        pole = true;
        break;
      }
      const double model = (a * x + b) / den;
      const double r = y - model;
      const double j[3] = {-x / den, -1.0 / den, model / den};
      for (int i = 0; i < 3; ++i) {
        for (int k = 0; k < 3; ++k) jtj[i][k] += j[i] * j[k];
        jtr[i] += j[i] * r;
      }
    }
    if (pole) break;
    double step[3];
    if (!detail::solve3(jtj, jtr, step)) break;
    a -= step[0];
    b -= step[1];
    c -= step[2];
    const double rel = std::abs(step[0]) / std::max(1.0, std::abs(a)) +
                       std::abs(step[1]) / std::max(1.0, std::abs(b)) +
                       std::abs(step[2]) / std::max(1.0, std::abs(c));
    if (rel < 1e-12) break;
  }

  double ss_res = 0, ss_tot = 0, y_mean = 0;
  for (const auto& [x, y] : points) y_mean += y;
  y_mean /= static_cast<double>(points.size());
  for (const auto& [x, y] : points) {
    const double r = y - detail::rational11(x, a, b, c);
    ss_res += r * r;
    ss_tot += (y - y_mean) * (y - y_mean);
  }

  fit.a = a;
  fit.b = b;
  fit.c = c;
  fit.r_squared = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
  fit.asymptote = a;
  return fit;
}

/// Expected extra blocks from a stale state with R reaction layers.
inline double f_overhead(double r_layers) {
  if (r_layers < 0) throw std::invalid_argument("reaction layers must be >= 0");
  return (std::pow(2.0, r_layers) - 1.0) / 2.0;
}

/// Method 1 spacetime cost: pre-provisioned |Y> states plus their expected
/// idle time.
inline double method1_cost(std::int64_t n_y, double t_idle_mean) {
  if (n_y < 0 || t_idle_mean < 0)
    throw std::invalid_argument("method1_cost arguments must be >= 0");
  return (1.0 + t_idle_mean / 2.0) * static_cast<double>(n_y);
}

/// Preferred reactive-|Y> provisioning at a given reaction depth and mean
/// idle time; ties go to the reactive method.
inline YMethod method_threshold(double r_layers, double t_idle_mean) {
  return f_overhead(r_layers) <= method1_cost(1, t_idle_mean) ? YMethod::Method2
                                                              : YMethod::Method1;
}

/// Method 2 wins for every idle time iff R <= log2(3).
inline YMethod method_threshold_all_idle(double r_layers) {
  return f_overhead(r_layers) <= 1.0 ? YMethod::Method2 : YMethod::Method1;
}

/// Idle fraction of an allocated spacetime volume.
inline double utilization(std::int64_t total_qubits, std::int64_t cycles, Blocks circuit_av) {
  const double spacetime = static_cast<double>(total_qubits) * static_cast<double>(cycles);
  if (static_cast<double>(circuit_av) > spacetime) throw VolumeUnderflow();
  return 1.0 - static_cast<double>(circuit_av) / spacetime;
}

/// The analytic model's fixed bridge/stale allowance expressed as a fraction
/// of the machine, for comparison plots.
inline double are_bss_fraction(std::int64_t m_max, std::int64_t total_qubits) {
  return 0.2 * static_cast<double>(m_max) / static_cast<double>(total_qubits);
}

struct SweepPoint {
  std::int64_t total_qubits = 0;
  int distance = -1;
  std::int64_t cycles = 0;
  double runtime_s = 0;
  double mean_bss_fraction = 0;
  double mean_workspace = 0;
  int peak_reaction_layers = 0;
  std::string status = "ok";
};

struct SizedSchedule {
  std::int64_t total_qubits = 0;
  int distance = 1;
  const Schedule* schedule = nullptr;
};

/// Sweep rows from already-computed schedules.
inline std::vector<SweepPoint> bss_series(const std::vector<SizedSchedule>& schedules,
                                          const HardwareParams& hw) {
  std::vector<SweepPoint> out;
  for (const auto& s : schedules) {
    SweepPoint p;
    p.total_qubits = s.total_qubits;
    p.distance = s.distance;
    p.cycles = static_cast<std::int64_t>(s.schedule->cycles.size());
    p.runtime_s = static_cast<double>(p.cycles) * logical_cycle_time(s.distance, hw);
    p.mean_bss_fraction = schedule_mean_bss(*s.schedule);
    p.mean_workspace = schedule_mean_workspace(*s.schedule);
    p.peak_reaction_layers = schedule_peak_reaction_layers(*s.schedule);
    out.push_back(p);
  }
  return out;
}

namespace detail {

struct GadgetRun {
  std::vector<Schedule> schedules;
  std::int64_t cycles = 0;
};

// Schedule every gadget at one machine size; throws QoomError on failure.
inline GadgetRun run_gadgets(const std::vector<GadgetDag>& gadgets, std::int64_t budget,
                             std::uint64_t seed, const SchedulerConfig& base) {
  GadgetRun run;
  for (std::size_t gi = 0; gi < gadgets.size(); ++gi) {
    SchedulerConfig cfg = base;
    cfg.total_qubits = budget;
    cfg.rng_seed = SplitRng(seed).split(rng_stream::kYConsumption, gi).state();
    Schedule s = greedy_schedule(gadgets[gi].dag, cfg);
    run.cycles += gadgets[gi].multiplicity * static_cast<std::int64_t>(s.cycles.size());
    run.schedules.push_back(std::move(s));
  }
  return run;
}

inline double weighted_mean_bss(const std::vector<GadgetDag>& gadgets,
                                const GadgetRun& run, std::int64_t total_qubits) {
  double acc = 0;
  double weight = 0;
  for (std::size_t gi = 0; gi < run.schedules.size(); ++gi) {
    const double m = static_cast<double>(gadgets[gi].multiplicity);
    for (const auto& c : run.schedules[gi].cycles) {
      acc += m * static_cast<double>(c.bridge + c.stale) / static_cast<double>(total_qubits);
      weight += m;
    }
  }
  return weight > 0 ? acc / weight : 0.0;
}

inline double weighted_mean_workspace(const std::vector<GadgetDag>& gadgets,
                                      const GadgetRun& run) {
  double acc = 0;
  double weight = 0;
  for (std::size_t gi = 0; gi < run.schedules.size(); ++gi) {
    const double m = static_cast<double>(gadgets[gi].multiplicity);
    for (const auto& c : run.schedules[gi].cycles) {
      acc += m * static_cast<double>(c.workspace);
      weight += m;
    }
  }
  return weight > 0 ? acc / weight : 0.0;
}

}  // namespace detail

/// Machine-size sweep: for each hardware variant, seed the distance from the
/// analytic estimate, back off by two, and walk upward until the gadget set
/// both fits and finishes in time. Failures are recorded per point.
inline std::vector<SweepPoint> sweep(const std::vector<GadgetDag>& gadgets,
                                     const std::vector<HardwareParams>& machines,
                                     std::uint64_t seed,
                                     const SchedulerConfig& base_config = {},
                                     int d_max = 100) {
  if (machines.empty()) throw std::invalid_argument("sweep needs at least one machine");

  Blocks volume = 0;
  std::int64_t m_max = 0;
  for (const auto& g : gadgets) {
    Blocks gav = 0;
    for (const auto& v : g.dag.vertices) gav += v.av;
    volume += g.multiplicity * gav;
    m_max = std::max(m_max, dag_data_high_water(g.dag));
  }

  std::vector<SweepPoint> out;
  for (const auto& hw : machines) {
    AnalyticEstimate are = analytic_estimate(volume, m_max, hw, d_max);
    const int d_are = (are.status == EstimateStatus::Ok) ? are.distance : are.d_delta_min;

    SweepPoint point;
    point.status = "qoom";
    for (int d = std::max(1, d_are - 2); d <= d_are; ++d) {
      const std::int64_t budget = qubit_budget_model(hw, d);
      if (budget < 1) continue;
      try {
        detail::GadgetRun run = detail::run_gadgets(gadgets, budget, seed, base_config);
        const double t = static_cast<double>(run.cycles) * logical_cycle_time(d, hw);
        if (t > t_max(d, hw)) {
          point.status = "too-slow";
          continue;
        }
        point.status = "ok";
        point.total_qubits = budget;
        point.distance = d;
        point.cycles = run.cycles;
        point.runtime_s = t;
        point.mean_bss_fraction = detail::weighted_mean_bss(gadgets, run, budget);
        point.mean_workspace = detail::weighted_mean_workspace(gadgets, run);
        for (const auto& s : run.schedules)
          point.peak_reaction_layers =
              std::max(point.peak_reaction_layers, schedule_peak_reaction_layers(s));
        break;
      } catch (const QoomError&) {
        point.status = "qoom";
        continue;
      }
    }
    if (point.status != "ok") {
      point.total_qubits = qubit_budget_model(hw, std::max(1, d_are));
      point.distance = d_are;
    }
    out.push_back(point);
  }
  return out;
}

}  // namespace avs
