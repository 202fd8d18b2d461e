#pragma once

// Greedy assignment of DAG vertices to logical cycles with explicit
// per-cycle qubit-role accounting: workspace, data, bridge, stale, unused
// and idle |Y> states, plus reaction-layer counts and QOOM detection.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <iterator>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "avsched/dag.hpp"
#include "avsched/rng.hpp"

namespace avs {

enum class BridgingCharge : std::uint8_t { PerOverlap, PerKappa };
enum class YMethod : std::uint8_t { Method1, Method2 };
// How much free space a placement is credited for qubits it newly engages.
// ExistingData frees the memory reservation of engaged live data qubits and
// keeps every ledger count nonnegative; Literal credits |Q_A(v) \ overlap|
// as transcribed from the pseudocode; None disables the credit.
enum class WorkspaceCredit : std::uint8_t { ExistingData, Literal, None };

struct SchedulerConfig {
  std::int64_t total_qubits = 0;
  BridgingCharge bridging_charge = BridgingCharge::PerOverlap;
  YMethod y_method = YMethod::Method2;
  std::uint64_t rng_seed = 0;
  int reaction_layer_threshold = 20;
  WorkspaceCredit credit = WorkspaceCredit::ExistingData;
  // Reactive-chain admission: placing a vertex that raises a cycle's
  // reactive depth to R >= 2 needs starting free space of at least
  // reactive_chain_floor + (R - 2) * (largest table entry). Small machines
  // run in the one-distillation-at-a-time regime and defer dependent
  // reactive work to the next cycle; each additional largest-entry footprint
  // of spare capacity unlocks one more layer. Set to 0 to disable.
  std::int64_t reactive_chain_floor = 420;
};

struct QoomError : std::runtime_error {
  QoomError(std::int64_t cycle, std::uint32_t vertex, std::int64_t deficit)
      : std::runtime_error("quantum out-of-memory in cycle " + std::to_string(cycle) +
                           ": vertex " + std::to_string(vertex) + " needs " +
                           std::to_string(deficit) + " more qubit(s)"),
        cycle(cycle),
        blocking_vertex(vertex),
        deficit(deficit) {}
  std::int64_t cycle;
  std::uint32_t blocking_vertex;
  std::int64_t deficit;
};

/// Census of one logical cycle. workspace + data + bridge + stale + unused
/// equals the machine size; idle_y is the subset of data made of stored
/// unused |Y> states.
struct CycleLedger {
  std::int64_t cycle = 0;
  std::int64_t workspace = 0;
  std::int64_t data = 0;
  std::int64_t bridge = 0;
  std::int64_t stale = 0;
  std::int64_t unused = 0;
  std::int64_t idle_y = 0;
  int reaction_layers = 0;
  std::vector<std::uint32_t> scheduled;
};

struct YEvent {
  std::int64_t cycle = 0;     // cycle the producing vertex was scheduled in
  std::uint32_t vertex = 0;
  double prob = 0.0;
  bool consumed = false;
  std::uint64_t stream = 0;   // seed path of the draw, for replay
};

struct Schedule {
  std::vector<CycleLedger> cycles;
  std::vector<std::int64_t> vertex_to_cycle;
  std::vector<YEvent> y_events;
  std::uint64_t seed = 0;
  std::int64_t total_qubits = 0;
  std::int64_t final_stale_carry = 0;
  std::vector<std::string> warnings;
};

namespace detail {

struct QubitMask {
  explicit QubitMask(std::size_t n) : bits(n, 0) {}
  bool test(QubitId q) const { return q < bits.size() && bits[q]; }
  void set(QubitId q) {
    if (q < bits.size() && !bits[q]) {
      bits[q] = 1;
      ++count;
    }
  }
  void clear(QubitId q) {
    if (q < bits.size() && bits[q]) {
      bits[q] = 0;
      --count;
    }
  }
  std::vector<char> bits;
  std::int64_t count = 0;
};

inline std::size_t qubit_universe(const OperationDag& dag) {
  QubitId hi = 0;
  for (const auto& v : dag.vertices)
    for (QubitId q : v.qubits_acted) hi = std::max(hi, q + 1);
  return hi;
}

// Acted qubits minus the ones this vertex destroys; only these can demand a
// bridge (q1/q2 sharing in the worked example costs two bridges while the
// destructive measurement of q3 costs none).
inline std::vector<QubitId> bridgeable(const OpVertex& v) {
  std::vector<QubitId> out;
  std::set_difference(v.qubits_acted.begin(), v.qubits_acted.end(),
                      v.qubits_measured.begin(), v.qubits_measured.end(),
                      std::back_inserter(out));
  return out;
}

}  // namespace detail

/// Longest reactive chain within the subgraph induced by one cycle's
/// vertices; a vertex counts toward depth only if it produces a stale state
/// or may demand a reactive |Y> measurement.
inline int cycle_reaction_layers(const CycleLedger& cycle, const OperationDag& dag) {
  if (cycle.scheduled.empty()) return 0;
  std::vector<char> in_cycle(dag.size(), 0);
  for (std::uint32_t v : cycle.scheduled) in_cycle[v] = 1;
  int best = 0;
  std::vector<int> depth(dag.size(), -1);
  // Index order is topological.
  std::vector<std::uint32_t> order(cycle.scheduled);
  std::sort(order.begin(), order.end());
  for (std::uint32_t v : order) {
    int from_preds = 0;
    for (std::uint32_t p : dag.predecessors(v)) {
      if (in_cycle[p] && depth[p] > from_preds) from_preds = depth[p];
    }
    depth[v] = from_preds + (dag.vertices[v].reactive() ? 1 : 0);
    best = std::max(best, depth[v]);
  }
  return best;
}

namespace detail {

// Ready list discipline: sorted by descendant count (ties by ascending id)
// at every cycle boundary; vertices readied mid-cycle append in readiness
// order and only jump the queue at the next cycle. Appending keeps a cycle
// filling breadth-first across independent chains, which is what lets the
// descendant heuristic spread reaction depth instead of drilling down the
// deepest chain.
struct ReadyQueue {
  explicit ReadyQueue(const std::vector<std::int64_t>& desc) : desc_(desc) {}

  bool before(std::uint32_t a, std::uint32_t b) const {
    if (desc_[a] != desc_[b]) return desc_[a] > desc_[b];
    return a < b;
  }

  void resort() {
    std::sort(items.begin(), items.end(),
              [this](std::uint32_t x, std::uint32_t y) { return before(x, y); });
  }

  void insert(std::uint32_t v) { items.push_back(v); }

  void remove(std::uint32_t v) {
    auto it = std::find(items.begin(), items.end(), v);
    if (it != items.end()) items.erase(it);
  }

  std::vector<std::uint32_t> items;
  const std::vector<std::int64_t>& desc_;
};

}  // namespace detail

/// Greedy list scheduling over the ready set, sorted by descendant count.
/// The allowed-overlap parameter kappa sweeps upward within each cycle; a
/// vertex is placed once its qubit overlap with already-engaged qubits is at
/// most kappa and its blocks plus bridging charge fit the remaining space.
inline Schedule greedy_schedule(const OperationDag& dag, const SchedulerConfig& config) {
  if (config.total_qubits < 1) throw std::invalid_argument("total_qubits must be >= 1");
  const std::size_t n = dag.size();
  const std::size_t nq = detail::qubit_universe(dag);
  const auto& desc = dag.descendant_counts();

  Schedule sched;
  sched.seed = config.rng_seed;
  sched.total_qubits = config.total_qubits;
  sched.vertex_to_cycle.assign(n, -1);
  if (n == 0) return sched;

  SplitRng root(config.rng_seed);

  detail::ReadyQueue ready(desc);
  std::vector<std::uint32_t> unplaced_preds(n, 0);
  for (auto [u, v] : dag.edges) ++unplaced_preds[v];
  for (std::uint32_t v = 0; v < n; ++v)
    if (unplaced_preds[v] == 0) ready.insert(v);

  detail::QubitMask alive(nq);  // D: existing data qubits
  for (QubitId q : dag_initial_data(dag)) alive.set(q);

  detail::QubitMask engaged(nq);  // Q: workspace-engaged this cycle
  std::int64_t stale_carry = 0;
  std::int64_t idle_y_pool = 0;   // Method 1 stored |Y> states
  std::int64_t pool_reserved = 0; // pool slots reserved by this cycle's gates
  std::int64_t pending_y = 0;     // Method 2 preparations owed to next cycle

  // Method 1 resolution backlog: vertices whose coin flips at the start of
  // the next cycle, with whether they drew from the pool.
  struct PendingFlip {
    std::uint32_t vertex;
    bool from_pool;
  };
  std::vector<PendingFlip> flips;

  const Blocks kappa_bound = [&] {
    std::int64_t m = 0;
    for (const auto& v : dag.vertices)
      m = std::max<std::int64_t>(m, static_cast<std::int64_t>(v.qubits_acted.size()));
    return std::min<std::int64_t>(config.total_qubits, m);
  }();
  const Blocks max_vertex_av = [&] {
    Blocks m = 1;
    for (const auto& v : dag.vertices) m = std::max(m, v.av);
    return m;
  }();
  std::vector<int> cycle_rdepth(n, 0);  // reactive depth among this cycle's placements

  std::size_t placed_total = 0;
  std::int64_t cycle = 0;
  while (placed_total < n) {
    ready.resort();
    CycleLedger led;
    led.cycle = cycle;
    led.stale = stale_carry;

    // Resolve Method 2 coin flips owed from the previous cycle: each demanded
    // |Y> state is prepared now and occupies a data slot for this cycle.
    const std::int64_t transient_y = (config.y_method == YMethod::Method2) ? pending_y : 0;
    pending_y = 0;

    // Resolve Method 1 flips from the previous cycle.
    if (config.y_method == YMethod::Method1 && !flips.empty()) {
      for (const auto& f : flips) {
        SplitRng stream = root.split(rng_stream::kYConsumption, f.vertex);
        bool consumed = stream.bernoulli(dag.vertices[f.vertex].y_prob);
        sched.y_events.push_back({cycle - 1, f.vertex, dag.vertices[f.vertex].y_prob,
                                  consumed, stream.state()});
        if (f.from_pool) {
          if (consumed) --idle_y_pool;  // drawn and used
        } else {
          if (!consumed) ++idle_y_pool;  // freshly prepared, now idle
        }
      }
      flips.clear();
    }
    pool_reserved = 0;

    const std::int64_t d_start = alive.count;
    std::int64_t freshly_prepared_y = 0;

    std::int64_t space = config.total_qubits - d_start - stale_carry - idle_y_pool - transient_y;
    if (space < 0) {
      const std::uint32_t blocker =
          ready.items.empty() ? 0 : ready.items.front();
      throw QoomError(cycle, blocker, -space);
    }

    const std::int64_t space_at_start = space;
    engaged = detail::QubitMask(nq);
    std::vector<char> placed_this_cycle(n, 0);
    std::vector<std::uint32_t> placed_list;
    std::int64_t bridges = 0;
    std::int64_t av_sum = 0;
    std::int64_t existing_engaged = 0;  // |D_start ∩ engaged| for the ledger
    std::int64_t stale_new = 0;
    std::int64_t catalyst_uses = 0;

    std::int64_t kappa = 0;
    while (kappa <= kappa_bound && !ready.items.empty()) {
      bool added = false;
      std::vector<std::uint32_t> pass(ready.items);
      for (std::uint32_t v : pass) {
        if (sched.vertex_to_cycle[v] >= 0) continue;
        const OpVertex& vx = dag.vertices[v];

        // Reactive-chain admission (see SchedulerConfig).
        int pred_depth = 0;
        for (std::uint32_t p : dag.predecessors(v)) {
          if (p < n && placed_this_cycle[p])
            pred_depth = std::max(pred_depth, cycle_rdepth[p]);
        }
        const int depth_if_placed = pred_depth + (vx.reactive() ? 1 : 0);
        if (config.reactive_chain_floor > 0 && depth_if_placed >= 2) {
          const std::int64_t need =
              config.reactive_chain_floor +
              static_cast<std::int64_t>(depth_if_placed - 2) * max_vertex_av;
          if (space_at_start < need) continue;  // defer to a later cycle
        }

        std::vector<QubitId> bridge_qubits = detail::bridgeable(vx);
        std::int64_t overlap = 0;
        for (QubitId q : bridge_qubits)
          if (engaged.test(q)) ++overlap;
        if (overlap > kappa) continue;

        // Live data qubits engaged for the first time this cycle stop idling
        // in memory; their reservation frees regardless of the credit mode.
        std::int64_t first_engage_existing = 0;
        for (QubitId q : vx.qubits_acted)
          if (alive.test(q) && !engaged.test(q)) ++first_engage_existing;

        std::int64_t credit = 0;
        switch (config.credit) {
          case WorkspaceCredit::ExistingData:
            credit = first_engage_existing;
            break;
          case WorkspaceCredit::Literal:
            // |Q_A(v) \ overlap| as transcribed.
            for (QubitId q : vx.qubits_acted)
              if (!engaged.test(q)) ++credit;
            break;
          case WorkspaceCredit::None: credit = 0; break;
        }

        std::int64_t charge =
            (config.bridging_charge == BridgingCharge::PerOverlap) ? overlap : kappa;
        // Contended |Y> catalyst: every use beyond the first in a cycle
        // bridges the catalyst qubit.
        std::int64_t cat_extra = 0;
        if (vx.y_catalyst > 0) {
          cat_extra = catalyst_uses > 0 ? vx.y_catalyst : vx.y_catalyst - 1;
          if (cat_extra < 0) cat_extra = 0;
        }
        // Method 1 pre-provisions one |Y> per possibly-consuming gate unless
        // an idle one can be reserved.
        std::int64_t y_cost = 0;
        bool draw_from_pool = false;
        if (config.y_method == YMethod::Method1 && vx.y_prob > 0.0) {
          if (idle_y_pool - pool_reserved > 0) draw_from_pool = true;
          else y_cost = 1;
        }

        if (vx.av + charge + cat_extra + y_cost > space + credit) continue;

        // Place v.
        space += credit - vx.av - charge - cat_extra - y_cost;
        av_sum += vx.av;
        bridges += overlap + cat_extra;
        existing_engaged += first_engage_existing;
        if (vx.y_catalyst > 0) catalyst_uses += vx.y_catalyst;
        if (draw_from_pool) ++pool_reserved;
        freshly_prepared_y += y_cost;
        stale_new += vx.stale;

        for (QubitId q : vx.qubits_acted) {
          alive.set(q);
          engaged.set(q);
        }
        for (QubitId q : vx.qubits_measured) {
          alive.clear(q);
          engaged.clear(q);
        }

        sched.vertex_to_cycle[v] = cycle;
        placed_this_cycle[v] = 1;
        cycle_rdepth[v] = depth_if_placed;
        placed_list.push_back(v);
        ++placed_total;
        ready.remove(v);
        for (std::uint32_t s : dag.successors(v)) {
          if (--unplaced_preds[s] == 0) ready.insert(s);
        }

        if (config.y_method == YMethod::Method2 && vx.y_prob > 0.0) {
          SplitRng stream = root.split(rng_stream::kYConsumption, v);
          bool consumed = stream.bernoulli(vx.y_prob);
          sched.y_events.push_back({cycle, v, vx.y_prob, consumed, stream.state()});
          if (consumed) ++pending_y;
        } else if (config.y_method == YMethod::Method1 && vx.y_prob > 0.0) {
          flips.push_back({v, draw_from_pool});
        }

        added = true;
      }
      if (!added) ++kappa;
    }

    if (placed_list.empty()) {
      const std::uint32_t blocker = ready.items.front();
      const OpVertex& vx = dag.vertices[blocker];
      std::int64_t have = space;
      for (QubitId q : vx.qubits_acted)
        if (alive.test(q)) ++have;
      throw QoomError(cycle, blocker, std::max<std::int64_t>(1, vx.av - have));
    }

    // Census. Existing data qubits engaged this cycle execute inside
    // workspace blocks; the rest of D_start idles as data alongside any
    // |Y> states.
    led.workspace = av_sum;
    led.bridge = bridges;
    led.data = (d_start - existing_engaged) + idle_y_pool + transient_y + freshly_prepared_y;
    led.idle_y = (config.y_method == YMethod::Method1) ? idle_y_pool : 0;
    led.unused = config.total_qubits - led.workspace - led.data - led.bridge - led.stale;
    led.scheduled = placed_list;
    std::sort(led.scheduled.begin(), led.scheduled.end());
    led.reaction_layers = cycle_reaction_layers(led, dag);
    if (led.reaction_layers > config.reaction_layer_threshold) {
      sched.warnings.push_back("cycle " + std::to_string(cycle) +
                               " is reaction-dominated: " +
                               std::to_string(led.reaction_layers) +
                               " reaction layers exceed threshold " +
                               std::to_string(config.reaction_layer_threshold));
    }
    sched.cycles.push_back(std::move(led));

    stale_carry = stale_new;
    ++cycle;
  }

  sched.final_stale_carry = stale_carry;
  return sched;
}

enum class ScheduleViolationKind {
  AvMismatch,
  MissingVertex,
  DuplicateVertex,
  PrecedenceViolation,
  LedgerImbalance,
  NegativeCount,
};

struct ScheduleViolation {
  ScheduleViolationKind kind;
  std::int64_t index = 0;  // vertex or cycle, depending on kind

  std::string describe() const {
    switch (kind) {
      case ScheduleViolationKind::AvMismatch:
        return "scheduled workspace total differs from circuit AV";
      case ScheduleViolationKind::MissingVertex:
        return "vertex " + std::to_string(index) + " never scheduled";
      case ScheduleViolationKind::DuplicateVertex:
        return "vertex " + std::to_string(index) + " scheduled more than once";
      case ScheduleViolationKind::PrecedenceViolation:
        return "edge into vertex " + std::to_string(index) + " violates cycle order";
      case ScheduleViolationKind::LedgerImbalance:
        return "cycle " + std::to_string(index) + " roles do not sum to machine size";
      case ScheduleViolationKind::NegativeCount:
        return "cycle " + std::to_string(index) + " has a negative role count";
    }
    return "unknown";
  }
};

/// Post-hoc checks: AV conservation, exactly-once scheduling, precedence and
/// per-cycle role balance. Violations are data.
inline std::vector<ScheduleViolation> validate_schedule(const Schedule& schedule,
                                                        const OperationDag& dag,
                                                        const AvTable& table) {
  std::vector<ScheduleViolation> out;

  Blocks circuit_av = 0;
  for (const auto& v : dag.vertices) {
    circuit_av += v.av;
    if (table.contains(v.kind) && table.at(v.kind).av != v.av)
      out.push_back({ScheduleViolationKind::AvMismatch, static_cast<std::int64_t>(v.id)});
  }
  Blocks scheduled_av = 0;
  for (const auto& c : schedule.cycles) scheduled_av += c.workspace;
  if (scheduled_av != circuit_av) out.push_back({ScheduleViolationKind::AvMismatch, -1});

  std::vector<int> seen(dag.size(), 0);
  for (const auto& c : schedule.cycles)
    for (std::uint32_t v : c.scheduled)
      if (v < seen.size()) ++seen[v];
  for (std::size_t v = 0; v < seen.size(); ++v) {
    if (seen[v] == 0) out.push_back({ScheduleViolationKind::MissingVertex, static_cast<std::int64_t>(v)});
    if (seen[v] > 1) out.push_back({ScheduleViolationKind::DuplicateVertex, static_cast<std::int64_t>(v)});
  }

  for (auto [u, v] : dag.edges) {
    if (u < schedule.vertex_to_cycle.size() && v < schedule.vertex_to_cycle.size()) {
      auto cu = schedule.vertex_to_cycle[u];
      auto cv = schedule.vertex_to_cycle[v];
      if (cu >= 0 && cv >= 0 && cu > cv)
        out.push_back({ScheduleViolationKind::PrecedenceViolation, static_cast<std::int64_t>(v)});
    }
  }

  for (const auto& c : schedule.cycles) {
    if (c.workspace + c.data + c.bridge + c.stale + c.unused != schedule.total_qubits)
      out.push_back({ScheduleViolationKind::LedgerImbalance, c.cycle});
    if (c.workspace < 0 || c.data < 0 || c.bridge < 0 || c.stale < 0 || c.unused < 0 ||
        c.idle_y < 0)
      out.push_back({ScheduleViolationKind::NegativeCount, c.cycle});
  }
  return out;
}

struct LedgerRow {
  CycleLedger raw;
  double workspace = 0, data = 0, bridge = 0, stale = 0, unused = 0, idle_y = 0;
};

/// Per-cycle rows with a trailing rolling mean over `window` cycles applied
/// to each qubit category; window 1 reproduces the raw ledgers.
inline std::vector<LedgerRow> ledger_series(const Schedule& schedule, std::size_t window) {
  if (window < 1) throw std::invalid_argument("window must be >= 1");
  const auto& cs = schedule.cycles;
  std::vector<LedgerRow> rows(cs.size());
  auto smooth = [&](auto field) {
    std::vector<double> out(cs.size(), 0.0);
    double acc = 0;
    for (std::size_t i = 0; i < cs.size(); ++i) {
      acc += static_cast<double>(field(cs[i]));
      if (i >= window) acc -= static_cast<double>(field(cs[i - window]));
      out[i] = acc / static_cast<double>(std::min(window, i + 1));
    }
    return out;
  };
  auto ws = smooth([](const CycleLedger& c) { return c.workspace; });
  auto da = smooth([](const CycleLedger& c) { return c.data; });
  auto br = smooth([](const CycleLedger& c) { return c.bridge; });
  auto st = smooth([](const CycleLedger& c) { return c.stale; });
  auto un = smooth([](const CycleLedger& c) { return c.unused; });
  auto iy = smooth([](const CycleLedger& c) { return c.idle_y; });
  for (std::size_t i = 0; i < cs.size(); ++i) {
    rows[i].raw = cs[i];
    rows[i].workspace = ws[i];
    rows[i].data = da[i];
    rows[i].bridge = br[i];
    rows[i].stale = st[i];
    rows[i].unused = un[i];
    rows[i].idle_y = iy[i];
  }
  return rows;
}

// -------- summary helpers --------

inline double schedule_mean_bss(const Schedule& s) {
  if (s.cycles.empty() || s.total_qubits == 0) return 0.0;
  double acc = 0;
  for (const auto& c : s.cycles)
    acc += static_cast<double>(c.bridge + c.stale) / static_cast<double>(s.total_qubits);
  return acc / static_cast<double>(s.cycles.size());
}

inline double schedule_mean_unused(const Schedule& s) {
  if (s.cycles.empty() || s.total_qubits == 0) return 0.0;
  double acc = 0;
  for (const auto& c : s.cycles)
    acc += static_cast<double>(c.unused) / static_cast<double>(s.total_qubits);
  return acc / static_cast<double>(s.cycles.size());
}

inline double schedule_mean_data(const Schedule& s) {
  if (s.cycles.empty() || s.total_qubits == 0) return 0.0;
  double acc = 0;
  for (const auto& c : s.cycles)
    acc += static_cast<double>(c.data) / static_cast<double>(s.total_qubits);
  return acc / static_cast<double>(s.cycles.size());
}

inline double schedule_mean_workspace(const Schedule& s) {
  if (s.cycles.empty()) return 0.0;
  double acc = 0;
  for (const auto& c : s.cycles) acc += static_cast<double>(c.workspace);
  return acc / static_cast<double>(s.cycles.size());
}

inline int schedule_peak_reaction_layers(const Schedule& s) {
  int best = 0;
  for (const auto& c : s.cycles) best = std::max(best, c.reaction_layers);
  return best;
}

/// FNV-1a digest of the complete assignment and ledgers; equal digests mean
/// byte-identical schedules.
inline std::uint64_t schedule_digest(const Schedule& s) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  auto mix = [&h](std::uint64_t x) {
    for (int i = 0; i < 8; ++i) {
      h ^= (x >> (i * 8)) & 0xFF;
      h *= 0x100000001B3ULL;
    }
  };
  mix(s.seed);
  mix(static_cast<std::uint64_t>(s.total_qubits));
  for (auto c : s.vertex_to_cycle) mix(static_cast<std::uint64_t>(c));
  for (const auto& c : s.cycles) {
    mix(static_cast<std::uint64_t>(c.workspace));
    mix(static_cast<std::uint64_t>(c.data));
    mix(static_cast<std::uint64_t>(c.bridge));
    mix(static_cast<std::uint64_t>(c.stale));
    mix(static_cast<std::uint64_t>(c.unused));
    mix(static_cast<std::uint64_t>(c.idle_y));
    mix(static_cast<std::uint64_t>(c.reaction_layers));
  }
  for (const auto& e : s.y_events) {
    mix(e.vertex);
    mix(e.consumed);
    mix(e.stream);
  }
  return h;
}

/// Minimal cycle count over all precedence- and capacity-respecting
/// assignments (default accounting mode, |Y> handling excluded so the value
/// is a true lower bound). Test oracle; inputs must stay tiny.
inline std::int64_t exhaustive_schedule_oracle(const OperationDag& dag,
                                               const SchedulerConfig& config) {
  const std::size_t n = dag.size();
  if (n > 8) throw std::invalid_argument("oracle is limited to 8 vertices");
  if (n == 0) return 0;
  const std::size_t nq = detail::qubit_universe(dag);

  std::vector<QubitId> initial = dag_initial_data(dag);

  auto feasible = [&](const std::vector<int>& cyc, int n_cycles) {
    detail::QubitMask alive(nq);
    for (QubitId q : initial) alive.set(q);
    std::int64_t stale_carry = 0;
    for (int c = 0; c < n_cycles; ++c) {
      std::vector<std::uint32_t> members;
      for (std::size_t v = 0; v < n; ++v)
        if (cyc[v] == c) members.push_back(static_cast<std::uint32_t>(v));
      const std::int64_t d_start = alive.count;

      Blocks av_sum = 0;
      std::int64_t stale_new = 0;
      std::vector<int> actors(nq, 0);
      detail::QubitMask touched(nq);
      std::int64_t credit = 0;
      for (std::uint32_t v : members) {
        const OpVertex& vx = dag.vertices[v];
        av_sum += vx.av;
        stale_new += vx.stale;
        for (QubitId q : detail::bridgeable(vx)) ++actors[q];
        for (QubitId q : vx.qubits_acted) {
          if (alive.test(q) && !touched.test(q)) ++credit;
          touched.set(q);
        }
      }
      std::int64_t bridges = 0;
      for (std::size_t q = 0; q < nq; ++q)
        if (actors[q] > 1) bridges += actors[q] - 1;

      if (av_sum + bridges > config.total_qubits - d_start - stale_carry + credit)
        return false;

      for (std::uint32_t v : members) {
        for (QubitId q : dag.vertices[v].qubits_acted) alive.set(q);
        for (QubitId q : dag.vertices[v].qubits_measured) alive.clear(q);
      }
      stale_carry = stale_new;
    }
    return true;
  };

  std::int64_t best = -1;
  std::vector<int> cyc(n, 0);
  // Vertices are tried in index order (a topological order); cycles are
  // bounded by n.
  std::function<void(std::size_t, int)> dfs = [&](std::size_t v, int used) {
    if (best >= 0 && used >= best) return;
    if (v == n) {
      if (feasible(cyc, used)) best = (best < 0) ? used : std::min<std::int64_t>(best, used);
      return;
    }
    int lo = 0;
    for (std::uint32_t p : dag.predecessors(static_cast<std::uint32_t>(v)))
      lo = std::max(lo, cyc[p]);
    for (int c = lo; c < static_cast<int>(n); ++c) {
      cyc[v] = c;
      dfs(v + 1, std::max(used, c + 1));
    }
    cyc[v] = 0;
  };
  dfs(0, 0);
  if (best < 0) {
    throw QoomError(0, 0, 1);
  }
  return best;
}

}  // namespace avs
