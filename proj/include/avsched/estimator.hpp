#pragma once

// Hardware model and the two resource-estimation pipelines: the closed-form
// analytic estimate with its distance scan, and the block-scheduled estimate
// that reuses cached gadget DAGs across the code-distance search.

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "avsched/dag.hpp"
#include "avsched/scheduler.hpp"

namespace avs {

struct SaturatedMemory : std::runtime_error {
  SaturatedMemory()
      : std::runtime_error("memory consumes the full resource-state throughput") {}
};

/// Free parameters of the machine model. budget_calibration is an artifact
/// modeling knob (not a published quantity): it scales the qubit budget the
/// scheduler sees at a given code distance.
struct HardwareParams {
  double n_im = 30.0;            // interleaving modules
  double r_im = 1e9;             // resource states / second / module
  double l_delay = 2000.0;       // meters
  double c_fiber = 2.0e8;        // meters / second
  double p_f = 0.005;            // allowed hardware-failure probability
  double alpha = 0.5;            // error-scaling parameter
  double reaction_time = 1.5e-5; // seconds
  double budget_calibration = 0.6417067;

  void validate() const {
    if (n_im <= 0 || r_im <= 0 || l_delay <= 0 || c_fiber <= 0 || alpha <= 0 ||
        reaction_time <= 0 || p_f <= 0 || p_f > 1)
      throw std::invalid_argument("hardware parameters must be strictly positive, 0 < p_f <= 1");
  }
};

/// Duration of one logical cycle at distance d.
inline double logical_cycle_time(int d, const HardwareParams& hw) {
  return hw.l_delay * static_cast<double>(d) / hw.c_fiber;
}

/// Largest AV executable at distance d with m memory qubits; non-positive
/// values mean the memory saturates the machine's throughput.
inline double v_max(int d, double m, const HardwareParams& hw) {
  const double dd = static_cast<double>(d);
  const double bracket = 1.0 - m * dd * dd * hw.c_fiber / (hw.n_im * hw.r_im * hw.l_delay);
  return bracket * hw.p_f * std::pow(10.0, hw.alpha * dd / 2.0);
}

/// Time to execute V blocks at distance d with m memory qubits.
inline double comp_time(double v, int d, double m, const HardwareParams& hw) {
  const double dd = static_cast<double>(d);
  const double denom = hw.n_im * hw.r_im - (hw.c_fiber / hw.l_delay) * m * dd * dd;
  if (denom <= 0.0) throw SaturatedMemory();
  return v * dd * dd * dd / denom;
}

/// Longest admissible runtime at distance d.
inline double t_max(int d, const HardwareParams& hw) {
  const double dd = static_cast<double>(d);
  return dd * dd * dd / (hw.n_im * hw.r_im) * hw.p_f * std::pow(10.0, hw.alpha * dd / 2.0);
}

enum class EstimateStatus : std::uint8_t { Ok, Failure };

struct AnalyticEstimate {
  EstimateStatus status = EstimateStatus::Failure;
  int distance = -1;        // feasible distance on Ok
  double time_s = 0.0;
  Blocks volume = 0;
  std::int64_t memory = 0;  // ceil(1.2 * m_max)
  int d_delta_min = -1;     // closest distance on failure
};

/// Distance scan of the analytic model: memory is the data high-water plus
/// twenty percent for bridge qubits and stale states; the first distance
/// whose V_max exceeds the volume wins. On exhaustion the distance that came
/// closest is reported.
inline AnalyticEstimate analytic_estimate(Blocks volume, std::int64_t m_max,
                                          const HardwareParams& hw, int d_max = 100) {
  if (volume < 0 || m_max < 0) throw std::invalid_argument("volume and m_max must be >= 0");
  AnalyticEstimate est;
  est.volume = volume;
  est.memory = static_cast<std::int64_t>(std::ceil(1.2 * static_cast<double>(m_max)));
  double best_gap = std::numeric_limits<double>::infinity();
  for (int d = 1; d <= d_max; ++d) {
    const double cap = v_max(d, static_cast<double>(est.memory), hw);
    if (static_cast<double>(volume) < cap) {
      est.status = EstimateStatus::Ok;
      est.distance = d;
      est.time_s = comp_time(static_cast<double>(volume), d,
                             static_cast<double>(est.memory), hw);
      return est;
    }
    const double gap = std::abs(static_cast<double>(volume) - cap);
    if (gap < best_gap) {
      best_gap = gap;
      est.d_delta_min = d;
    }
  }
  est.status = EstimateStatus::Failure;
  return est;
}

/// 2^{n_p} * n_CU + n_QFT.
inline std::int64_t total_cycles(int n_p, std::int64_t n_cu, std::int64_t n_qft) {
  if (n_p < 0 || n_cu < 0 || n_qft < 0) throw std::invalid_argument("cycle counts must be >= 0");
  return (std::int64_t{1} << n_p) * n_cu + n_qft;
}

/// Generalization over arbitrary gadget multiplicities.
inline std::int64_t total_cycles(const std::vector<std::pair<std::int64_t, std::int64_t>>&
                                     multiplicity_and_cycles) {
  std::int64_t l = 0;
  for (auto [m, lg] : multiplicity_and_cycles) l += m * lg;
  return l;
}

/// Qubit budget of the machine at distance d: proportional to
/// n_IM r_IM l_delay / (c_fiber d^2), scaled by the calibration constant.
inline double qubit_budget_real(const HardwareParams& hw, int d) {
  const double dd = static_cast<double>(d);
  return hw.budget_calibration * hw.n_im * hw.r_im * hw.l_delay / (hw.c_fiber * dd * dd);
}

inline std::int64_t qubit_budget_model(const HardwareParams& hw, int d) {
  if (d < 1) throw std::invalid_argument("distance must be >= 1");
  return std::max<std::int64_t>(0, std::llround(qubit_budget_real(hw, d)));
}

/// One independently compiled subcircuit and its repetition count.
struct GadgetDag {
  std::string name;
  OperationDag dag;
  std::int64_t multiplicity = 1;
};

/// Data high-water over the program order of a built DAG.
inline std::int64_t dag_data_high_water(const OperationDag& dag) {
  QubitId hi = 0;
  for (const auto& v : dag.vertices)
    for (QubitId q : v.qubits_acted) hi = std::max(hi, q + 1);
  for (QubitId q : dag.initial_data) hi = std::max(hi, q + 1);
  std::vector<char> is_alive(hi, 0);
  std::int64_t alive = 0;
  for (QubitId q : dag.initial_data) {
    is_alive[q] = 1;
    ++alive;
  }
  std::int64_t high = alive;
  for (const auto& v : dag.vertices) {
    for (QubitId q : v.qubits_acted) {
      if (!is_alive[q]) {
        is_alive[q] = 1;
        ++alive;
      }
    }
    high = std::max(high, alive);
    for (QubitId q : v.qubits_measured) {
      if (is_alive[q]) {
        is_alive[q] = 0;
        --alive;
      }
    }
  }
  return high;
}

struct GadgetOutcome {
  std::string name;
  std::int64_t multiplicity = 1;
  std::int64_t cycles = 0;
};

struct ScheduledEstimate {
  EstimateStatus status = EstimateStatus::Failure;
  int distance = -1;
  std::int64_t cycles = 0;
  double time_s = 0.0;
  std::int64_t total_qubits = 0;
  int seed_distance = -1;  // where the distance walk started
  std::vector<GadgetOutcome> per_gadget;
  std::vector<Schedule> schedules;  // one per gadget at the accepted distance
  std::vector<int> distances_tried;
};

/// Block-scheduled estimate. The walk starts from the analytic distance (or
/// the closest-miss distance), decrements when the scheduler runs out of
/// memory and increments when the runtime exceeds the admissible maximum.
/// Gadget DAGs are distance-independent and reused across iterations.
inline ScheduledEstimate scheduled_estimate(
    const std::vector<GadgetDag>& gadgets, const HardwareParams& hw,
    const std::function<std::int64_t(int)>& qubit_budget, std::uint64_t seed,
    int d_max = 100, const SchedulerConfig& base_config = {}) {
  hw.validate();
  ScheduledEstimate out;

  Blocks volume = 0;
  std::int64_t m_max = 0;
  for (const auto& g : gadgets) {
    Blocks gadget_av = 0;
    for (const auto& v : g.dag.vertices) gadget_av += v.av;
    volume += g.multiplicity * gadget_av;
    m_max = std::max(m_max, dag_data_high_water(g.dag));
  }

  AnalyticEstimate seed_est = analytic_estimate(volume, m_max, hw, d_max);
  int d = (seed_est.status == EstimateStatus::Ok) ? seed_est.distance : seed_est.d_delta_min;
  if (d < 1) d = 1;
  out.seed_distance = d;

  std::set<int> seen;
  double best_time = std::numeric_limits<double>::infinity();

  while (d >= 1 && d <= d_max && !seen.count(d)) {
    seen.insert(d);
    out.distances_tried.push_back(d);
    const std::int64_t budget = qubit_budget(d);

    std::vector<Schedule> schedules;
    std::vector<GadgetOutcome> outcomes;
    std::int64_t cycles = 0;
    bool qoom = false;
    bool too_slow = false;
    for (std::size_t gi = 0; gi < gadgets.size(); ++gi) {
      const auto& g = gadgets[gi];
      SchedulerConfig cfg = base_config;
      cfg.total_qubits = budget;
      cfg.rng_seed = SplitRng(seed).split(rng_stream::kYConsumption, gi).state();
      if (budget < 1) {
        qoom = true;
        break;
      }
      try {
        Schedule s = greedy_schedule(g.dag, cfg);
        // Feasibility is judged per compilation unit: each gadget's runtime
        // must stay within the admissible time at this distance.
        const double tg = static_cast<double>(s.cycles.size()) * logical_cycle_time(d, hw);
        if (tg > t_max(d, hw)) {
          too_slow = true;
          break;
        }
        cycles += g.multiplicity * static_cast<std::int64_t>(s.cycles.size());
        outcomes.push_back({g.name, g.multiplicity,
                            static_cast<std::int64_t>(s.cycles.size())});
        schedules.push_back(std::move(s));
      } catch (const QoomError&) {
        qoom = true;
        break;
      }
    }
    if (qoom) {
      --d;  // needs more qubits
      continue;
    }
    if (too_slow) {
      ++d;  // needs stronger error correction
      continue;
    }

    const double t = static_cast<double>(cycles) * logical_cycle_time(d, hw);
    if (t < best_time) {
      best_time = t;
      out.status = EstimateStatus::Ok;
      out.distance = d;
      out.cycles = cycles;
      out.time_s = t;
      out.total_qubits = budget;
      out.per_gadget = std::move(outcomes);
      out.schedules = std::move(schedules);
    }
  }
  return out;
}

}  // namespace avs
