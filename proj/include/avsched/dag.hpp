#pragma once

// Operation-DAG construction via backward search over the leaves frontier,
// distillation/consumer pairing, layering and descendant queries. DAGs are
// immutable once built; cached descendant counts never invalidate.

#include <algorithm>
#include <cstdint>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "avsched/core.hpp"

namespace avs {

enum class CommutationMode : std::uint8_t { Support, Pauli };

struct CycleDetected : std::runtime_error {
  CycleDetected() : std::runtime_error("operation DAG contains a cycle") {}
};

struct UnmatchedDistillation : std::runtime_error {
  explicit UnmatchedDistillation(std::uint32_t vertex)
      : std::runtime_error("distillation vertex " + std::to_string(vertex) +
                           " has no consumer"),
        vertex(vertex) {}
  std::uint32_t vertex;
};

/// Scheduling attributes of one operation.
struct OpVertex {
  std::uint32_t id = 0;
  Blocks av = 0;
  int stale = 0;
  double y_prob = 0.0;
  int y_catalyst = 0;
  int y_deterministic = 0;
  GateKind kind = GateKind::Identity;
  std::size_t gate_ref = 0;
  std::vector<QubitId> qubits_acted;    // sorted
  std::vector<QubitId> qubits_measured; // sorted

  bool reactive() const { return stale > 0 || y_prob > 0.0; }
  bool is_distillation() const {
    return kind == GateKind::CczDistillation || kind == GateKind::TDistillation;
  }
};

class OperationDag {
 public:
  std::vector<OpVertex> vertices;
  // Directed pairs (u -> v); u precedes v in source order.
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
  // Consumer vertex -> its paired distillation vertex (after pairing).
  std::vector<std::pair<std::uint32_t, std::uint32_t>> pairings;
  // Qubits holding circuit state before the first operation runs (declared
  // qubits that no gate initializes). Sorted.
  std::vector<QubitId> initial_data;

  std::size_t size() const { return vertices.size(); }

  void finalize() {
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    for (auto [u, v] : edges) {
      if (u >= v) throw CycleDetected();  // index order is the topological order
    }
    build_adjacency();
    desc_counts_.clear();
  }

  std::span<const std::uint32_t> successors(std::uint32_t v) const {
    return {succ_.data() + succ_off_[v], succ_off_[v + 1] - succ_off_[v]};
  }
  std::span<const std::uint32_t> predecessors(std::uint32_t v) const {
    return {pred_.data() + pred_off_[v], pred_off_[v + 1] - pred_off_[v]};
  }

  /// |Desc(v)| for every vertex, computed once and cached (64-wide
  /// bit-parallel reachability sweeps over the reverse topological order).
  const std::vector<std::int64_t>& descendant_counts() const {
    if (!desc_counts_.empty() || vertices.empty()) return desc_counts_;
    const std::size_t n = vertices.size();
    desc_counts_.assign(n, 0);
    std::vector<std::uint64_t> mask(n);
    for (std::size_t w = 0; w < n; w += 64) {
      const std::size_t hi = std::min(n, w + 64);
      std::fill(mask.begin(), mask.end(), 0);
      for (std::size_t i = n; i-- > 0;) {
        std::uint64_t m = 0;
        for (std::uint32_t u : successors(static_cast<std::uint32_t>(i))) {
          m |= mask[u];
          if (u >= w && u < hi) m |= std::uint64_t{1} << (u - w);
        }
        mask[i] = m;
        desc_counts_[i] += __builtin_popcountll(m);
      }
    }
    return desc_counts_;
  }

 private:
  void build_adjacency() {
    const std::size_t n = vertices.size();
    succ_off_.assign(n + 1, 0);
    pred_off_.assign(n + 1, 0);
    for (auto [u, v] : edges) {
      ++succ_off_[u + 1];
      ++pred_off_[v + 1];
    }
    for (std::size_t i = 0; i < n; ++i) {
      succ_off_[i + 1] += succ_off_[i];
      pred_off_[i + 1] += pred_off_[i];
    }
    succ_.resize(edges.size());
    pred_.resize(edges.size());
    std::vector<std::size_t> sfill(succ_off_.begin(), succ_off_.end() - 1);
    std::vector<std::size_t> pfill(pred_off_.begin(), pred_off_.end() - 1);
    for (auto [u, v] : edges) {
      succ_[sfill[u]++] = v;
      pred_[pfill[v]++] = u;
    }
  }

  std::vector<std::size_t> succ_off_, pred_off_;
  std::vector<std::uint32_t> succ_, pred_;
  mutable std::vector<std::int64_t> desc_counts_;
};

namespace detail {

inline std::vector<QubitId> sorted_acted(const Gate& g) {
  std::vector<QubitId> s = g.acted();
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
  return s;
}

inline bool supports_disjoint(const std::vector<QubitId>& a,
                              const std::vector<QubitId>& b) {
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] < b[j]) ++i;
    else if (b[j] < a[i]) ++j;
    else return false;
  }
  return true;
}

inline char pauli_on(const Gate& g, QubitId q) {
  if (g.pauli.empty()) return 0;
  std::vector<QubitId> order = g.acted();
  for (std::size_t i = 0; i < order.size() && i < g.pauli.size(); ++i) {
    if (order[i] == q) return g.pauli[i];
  }
  return 0;
}

inline bool pauli_strings_commute(const Gate& a, const Gate& b,
                                  const std::vector<QubitId>& sa,
                                  const std::vector<QubitId>& sb) {
  // Pauli-product pairs commute iff an even number of shared wires
  // anticommute. Other labeled pairs (CNOT-like Cliffords) only commute when
  // every shared wire's axes agree, since the even-parity argument needs
  // genuine Pauli strings.
  const bool product_pair = is_pauli_product(a.kind) && is_pauli_product(b.kind);
  int anti = 0;
  std::size_t i = 0, j = 0;
  while (i < sa.size() && j < sb.size()) {
    if (sa[i] < sb[j]) ++i;
    else if (sb[j] < sa[i]) ++j;
    else {
      char pa = pauli_on(a, sa[i]);
      char pb = pauli_on(b, sa[i]);
      if (pa == 0 || pb == 0) return false;  // unlabeled shared qubit
      if (pa != 'I' && pb != 'I' && pa != pb) {
        ++anti;
        if (!product_pair) return false;
      }
      ++i;
      ++j;
    }
  }
  return anti % 2 == 0;
}

}  // namespace detail

/// Symmetric commutation test. Support mode: true iff the acted-qubit sets
/// are disjoint. Pauli mode: additionally true when both gates are
/// Pauli-product operations whose strings commute on the shared support.
inline bool commutes(const Gate& a, const Gate& b, CommutationMode mode) {
  std::vector<QubitId> sa = detail::sorted_acted(a);
  std::vector<QubitId> sb = detail::sorted_acted(b);
  if (detail::supports_disjoint(sa, sb)) return true;
  if (mode == CommutationMode::Pauli && !a.pauli.empty() && !b.pauli.empty())
    return detail::pauli_strings_commute(a, b, sa, sb);
  return false;
}

namespace detail {

inline std::vector<QubitId> initial_data_of(const Circuit& c) {
  std::vector<char> ever_init(c.qubit_count, 0);
  for (const auto& g : c.gates)
    for (QubitId q : g.initializes)
      if (q < c.qubit_count) ever_init[q] = 1;
  std::vector<QubitId> out;
  for (QubitId q = 0; q < c.qubit_count; ++q)
    if (!ever_init[q]) out.push_back(q);
  return out;
}

inline OpVertex make_vertex(std::uint32_t id, const Gate& g, const AvTable& table) {
  const AvTableEntry& e = table.at(g.kind);
  OpVertex v;
  v.id = id;
  v.av = e.av;
  v.stale = e.stale_yield;
  v.y_prob = e.y_prob;
  v.y_catalyst = e.y_catalyst;
  v.y_deterministic = e.y_deterministic;
  v.kind = g.kind;
  v.gate_ref = id;
  v.qubits_acted = sorted_acted(g);
  v.qubits_measured.assign(g.measures.begin(), g.measures.end());
  std::sort(v.qubits_measured.begin(), v.qubits_measured.end());
  v.qubits_measured.erase(
      std::unique(v.qubits_measured.begin(), v.qubits_measured.end()),
      v.qubits_measured.end());
  return v;
}

}  // namespace detail

/// Backward-search DAG construction. For each new vertex v, the search walks
/// predecessors of commuting vertices starting from the current leaves set;
/// every encountered non-commuting vertex u contributes an edge u -> v and
/// leaves the frontier. The seen set is seeded with the leaves, per the
/// literal procedure.
inline OperationDag build_dag(const Circuit& circuit, const AvTable& table,
                              CommutationMode mode = CommutationMode::Support) {
  const std::size_t m = circuit.gates.size();
  OperationDag dag;
  dag.vertices.reserve(m);
  dag.initial_data = detail::initial_data_of(circuit);

  // Per-gate sorted supports, computed once.
  std::vector<std::vector<QubitId>> support(m);
  for (std::size_t i = 0; i < m; ++i) support[i] = detail::sorted_acted(circuit.gates[i]);

  std::vector<std::uint32_t> leaves;           // current frontier
  std::vector<char> is_leaf(m, 0);
  std::vector<std::vector<std::uint32_t>> preds(m);
  std::vector<std::uint32_t> queue;
  std::vector<std::uint32_t> seen_stamp(m, 0);
  std::uint32_t epoch = 0;

  auto noncommuting = [&](std::uint32_t u, std::uint32_t v) {
    if (detail::supports_disjoint(support[u], support[v])) return false;
    const Gate& gu = circuit.gates[u];
    const Gate& gv = circuit.gates[v];
    if (mode == CommutationMode::Pauli && !gu.pauli.empty() && !gv.pauli.empty())
      return !detail::pauli_strings_commute(gu, gv, support[u], support[v]);
    return true;
  };

  for (std::uint32_t v = 0; v < m; ++v) {
    dag.vertices.push_back(detail::make_vertex(v, circuit.gates[v], table));
    if (circuit.gates[v].pair_ref)
      dag.pairings.emplace_back(v, static_cast<std::uint32_t>(*circuit.gates[v].pair_ref));

    ++epoch;
    queue.assign(leaves.begin(), leaves.end());
    for (std::uint32_t u : leaves) seen_stamp[u] = epoch;

    for (std::size_t qi = 0; qi < queue.size(); ++qi) {
      std::uint32_t u = queue[qi];
      if (!noncommuting(u, v)) {
        for (std::uint32_t p : preds[u]) {
          if (seen_stamp[p] != epoch) {
            seen_stamp[p] = epoch;
            queue.push_back(p);
          }
        }
      } else {
        dag.edges.emplace_back(u, v);
        preds[v].push_back(u);
        if (is_leaf[u]) {
          is_leaf[u] = 0;
          leaves.erase(std::find(leaves.begin(), leaves.end(), u));
        }
      }
    }
    leaves.push_back(v);
    is_leaf[v] = 1;
  }

  dag.finalize();
  return dag;
}

/// Definitional O(m^2) reconstruction of the same leaves-pruned dependency
/// relation, with fresh set machinery at every step. Test oracle only; keep
/// inputs small.
inline OperationDag naive_dag_oracle(const Circuit& circuit, const AvTable& table,
                                     CommutationMode mode = CommutationMode::Support) {
  const std::size_t m = circuit.gates.size();
  OperationDag dag;
  dag.initial_data = detail::initial_data_of(circuit);
  std::set<std::pair<std::uint32_t, std::uint32_t>> edge_set;

  for (std::uint32_t v = 0; v < m; ++v) {
    dag.vertices.push_back(detail::make_vertex(v, circuit.gates[v], table));
    if (circuit.gates[v].pair_ref)
      dag.pairings.emplace_back(v, static_cast<std::uint32_t>(*circuit.gates[v].pair_ref));

    // Leaves of the DAG built so far: processed vertices with no successor.
    std::set<std::uint32_t> sinks;
    for (std::uint32_t u = 0; u < v; ++u) sinks.insert(u);
    for (auto [a, b] : edge_set) sinks.erase(a);

    // Backward closure from the sinks through vertices commuting with v.
    std::set<std::uint32_t> visited(sinks.begin(), sinks.end());
    std::vector<std::uint32_t> frontier(sinks.begin(), sinks.end());
    while (!frontier.empty()) {
      std::uint32_t u = frontier.back();
      frontier.pop_back();
      if (!commutes(circuit.gates[u], circuit.gates[v], mode)) {
        edge_set.insert({u, v});
      } else {
        for (std::uint32_t p = 0; p < v; ++p) {
          if (edge_set.count({p, u}) && !visited.count(p)) {
            visited.insert(p);
            frontier.push_back(p);
          }
        }
      }
    }
  }

  dag.edges.assign(edge_set.begin(), edge_set.end());
  dag.finalize();
  return dag;
}

/// Rewires each paired (distillation, consumer): former predecessors of the
/// consumer point to the distillation, the distillation points to the
/// consumer, and the consumer keeps its children.
inline OperationDag pair_distillations(const OperationDag& dag) {
  OperationDag out;
  out.vertices = dag.vertices;
  out.pairings = dag.pairings;
  out.initial_data = dag.initial_data;

  std::set<std::pair<std::uint32_t, std::uint32_t>> edge_set(dag.edges.begin(),
                                                             dag.edges.end());
  std::vector<char> consumed(dag.size(), 0);
  for (auto [consumer, dist] : dag.pairings) {
    consumed[dist] = 1;
    std::vector<std::uint32_t> preds;
    for (std::uint32_t p : dag.predecessors(consumer))
      if (p != dist) preds.push_back(p);
    for (std::uint32_t p : preds) {
      edge_set.erase({p, consumer});
      if (p != dist) edge_set.insert({std::min(p, dist), std::max(p, dist)});
    }
    edge_set.insert({dist, consumer});
  }
  for (std::uint32_t v = 0; v < dag.size(); ++v) {
    if (dag.vertices[v].is_distillation() && !consumed[v])
      throw UnmatchedDistillation(v);
  }

  out.edges.assign(edge_set.begin(), edge_set.end());
  out.finalize();
  return out;
}

/// layer(v) = 1 + max layer over predecessors; sources sit at layer 0.
inline std::vector<std::uint32_t> layering(const OperationDag& dag) {
  const std::size_t n = dag.size();
  std::vector<std::uint32_t> layer(n, 0);
  std::vector<std::size_t> indeg(n, 0);
  for (auto [u, v] : dag.edges) ++indeg[v];
  std::vector<std::uint32_t> ready;
  for (std::uint32_t v = 0; v < n; ++v)
    if (indeg[v] == 0) ready.push_back(v);
  std::size_t processed = 0;
  while (!ready.empty()) {
    std::uint32_t u = ready.back();
    ready.pop_back();
    ++processed;
    for (std::uint32_t s : dag.successors(u)) {
      layer[s] = std::max(layer[s], layer[u] + 1);
      if (--indeg[s] == 0) ready.push_back(s);
    }
  }
  if (processed != n) throw CycleDetected();
  return layer;
}

/// Count of layers: 1 + max layer; 0 for the empty DAG.
inline std::uint32_t reaction_depth(const OperationDag& dag) {
  if (dag.size() == 0) return 0;
  auto layers = layering(dag);
  return 1 + *std::max_element(layers.begin(), layers.end());
}

inline const std::vector<std::int64_t>& descendant_counts(const OperationDag& dag) {
  return dag.descendant_counts();
}

inline const std::vector<QubitId>& dag_initial_data(const OperationDag& dag) {
  return dag.initial_data;
}

/// FNV-1a content hash over gates, commutation mode and table entries; the
/// DAG cache key (DAGs are independent of code distance).
inline std::uint64_t dag_cache_key(const Circuit& c, const AvTable& table,
                                   CommutationMode mode) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  auto mix = [&h](std::uint64_t x) {
    for (int i = 0; i < 8; ++i) {
      h ^= (x >> (i * 8)) & 0xFF;
      h *= 0x100000001B3ULL;
    }
  };
  mix(static_cast<std::uint64_t>(mode));
  mix(c.qubit_count);
  for (const auto& g : c.gates) {
    mix(static_cast<std::uint64_t>(g.kind));
    for (QubitId q : g.targets) mix(q);
    mix(0xFFFFFFFFULL);  // separator
    for (QubitId q : g.controls) mix(q + 1);
    for (QubitId q : g.initializes) mix(q + 2);
    for (QubitId q : g.measures) mix(q + 3);
    if (g.pair_ref) mix(*g.pair_ref + 5);
    for (char p : g.pauli) mix(static_cast<std::uint64_t>(p));
  }
  for (const auto& [k, e] : table.entries()) {
    mix(static_cast<std::uint64_t>(k));
    mix(static_cast<std::uint64_t>(e.av));
    mix(static_cast<std::uint64_t>(e.stale_yield));
    mix(static_cast<std::uint64_t>(e.y_prob * 1e9));
    mix(static_cast<std::uint64_t>(e.y_catalyst));
    mix(static_cast<std::uint64_t>(e.y_deterministic));
  }
  return h;
}

}  // namespace avs
