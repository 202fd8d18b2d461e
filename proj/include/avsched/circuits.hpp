#pragma once

// Test-circuit generation: qubitized Fermi-Hubbard phase estimation split
// into a controlled-unitary gadget and a QFT-dagger gadget, decomposed down
// to gates with active-volume table entries. Generation is deterministic
// given (lattice spec, seed).

#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "avsched/core.hpp"
#include "avsched/rng.hpp"

namespace avs {

struct IrreducibleGate : std::runtime_error {
  explicit IrreducibleGate(GateKind k)
      : std::runtime_error(std::string("gate kind '") + to_string(k) +
                           "' has no decomposition rule and no AV table entry"),
        kind(k) {}
  GateKind kind;
};

/// L x L Fermi-Hubbard lattice with kinetic coefficient t and on-site
/// repulsion U.
struct LatticeSpec {
  int side = 2;
  double kinetic_t = 1.0;
  double potential_u = 8.0;

  void validate() const {
    if (side < 2) throw std::invalid_argument("lattice side must be >= 2");
  }
};

/// One-norm of the Jordan-Wigner-mapped Hamiltonian coefficients. Convention:
/// periodic boundaries, two hopping directions and two spins give 2L^2 edges
/// of weight |t| each (the two Pauli terms per edge carry |t|/2); the on-site
/// term contributes |U|/4 * 3 per site (Z, Z and ZZ), constant shift dropped.
inline double hamiltonian_one_norm(const LatticeSpec& spec) {
  const double sites = static_cast<double>(spec.side) * static_cast<double>(spec.side);
  const double hopping_edges = 4.0 * sites;  // 2 directions x 2 spins
  return std::abs(spec.kinetic_t) * hopping_edges +
         std::abs(spec.potential_u) / 4.0 * 3.0 * sites;
}

/// Phase-register size: ceil(log2(pi |H|_1 / (sqrt(2) eps_E))) with
/// eps_E = L^2 * eps_site.
inline int n_phase_bits(const LatticeSpec& spec, double eps_site = 1e-3) {
  spec.validate();
  if (eps_site <= 0) throw std::invalid_argument("eps_site must be positive");
  const double sites = static_cast<double>(spec.side) * static_cast<double>(spec.side);
  const double eps_e = eps_site * sites;
  const double arg = std::numbers::pi * hamiltonian_one_norm(spec) /
                     (std::sqrt(2.0) * eps_e);
  return static_cast<int>(std::ceil(std::log2(arg)));
}

struct PhasePrecision {
  double eps_site = 1e-3;
  double eps_e = 0.0;
  int n_p = 0;
  double rot_eps = 1e-4;
};

inline PhasePrecision phase_precision(const LatticeSpec& spec, double eps_site = 1e-3,
                                      double rot_eps = 1e-4) {
  PhasePrecision p;
  p.eps_site = eps_site;
  p.eps_e = eps_site * spec.side * spec.side;
  p.n_p = n_phase_bits(spec, eps_site);
  p.rot_eps = rot_eps;
  return p;
}

/// Rotation-synthesis cost model: expected T-count K*log2(1/eps) with seeded
/// jitter. Stands in for number-theoretic synthesis; only counts and
/// stochastic variation matter here.
struct RotationModel {
  double k_factor = 3.0;
  int jitter = 2;
};

struct SynthStep {
  char gate;  // 'H', 'S' or 'T'
  int count;
};

/// H/S/T run-length encoding of one synthesized rotation.
inline std::vector<SynthStep> synthesize_rotation(const RotationModel& rot,
                                                  double rot_eps, SplitRng rng) {
  if (rot_eps <= 0) throw std::invalid_argument("rot_eps must be positive");
  const double base = rot.k_factor * std::log2(1.0 / rot_eps);
  std::int64_t jit = rot.jitter > 0 ? rng.uniform_int(-rot.jitter, rot.jitter) : 0;
  std::int64_t t_count = std::llround(base) + jit;
  if (t_count < 0) t_count = 0;

  std::vector<SynthStep> seq;
  seq.push_back({'H', 1});
  for (std::int64_t i = 0; i < t_count; ++i) {
    seq.push_back({'T', 1});
    if (rng.bernoulli(0.5)) seq.push_back({'S', 1});
    seq.push_back({'H', 1});
  }
  return seq;
}

inline std::int64_t synth_t_count(const std::vector<SynthStep>& seq) {
  std::int64_t n = 0;
  for (const auto& s : seq)
    if (s.gate == 'T') n += s.count;
  return n;
}

namespace detail {

/// Gate-emission helper. Magic-state distillations are emitted immediately
/// before their consumers and linked through pair_ref.
class CircuitBuilder {
 public:
  explicit CircuitBuilder(std::string name) { c_.name = std::move(name); }

  QubitId fresh() { return c_.qubit_count++; }
  std::vector<QubitId> fresh_register(int n) {
    std::vector<QubitId> r;
    for (int i = 0; i < n; ++i) r.push_back(fresh());
    return r;
  }

  void h(QubitId q) { emit({GateKind::Hadamard, {q}}); }
  void s(QubitId q) { emit({GateKind::PhaseS, {q}}); }
  void x(QubitId q) { emit({GateKind::PauliX, {q}}); }
  void cnot(QubitId c, QubitId t) { emit({GateKind::Cnot, {t}, {c}}); }
  void cz(QubitId a, QubitId b) { emit({GateKind::Cz, {a}, {b}}); }
  void measure_x(QubitId q) { emit({GateKind::MeasureX, {q}, {}, {}, {q}}); }

  /// Fresh |0> ancilla with an explicit allocation marker, so it is not
  /// mistaken for circuit state that exists from the start.
  QubitId alloc_zero() {
    QubitId q = fresh();
    emit({GateKind::Identity, {q}, {}, {q}});
    return q;
  }
  /// Fresh |1> ancilla.
  QubitId alloc_one() {
    QubitId q = fresh();
    emit({GateKind::PauliX, {q}, {}, {q}});
    return q;
  }

  void t_gate(QubitId q) {
    QubitId m = fresh();
    emit({GateKind::TDistillation, {m}, {}, {m}});
    Gate g{GateKind::TInjection, {q, m}, {}, {}, {m}};
    g.pair_ref = c_.gates.size() - 1;
    emit(std::move(g));
  }

  void and_compute(QubitId a, QubitId b, QubitId anc) {
    QubitId m1 = fresh(), m2 = fresh(), m3 = fresh();
    emit({GateKind::CczDistillation, {m1, m2, m3}, {}, {m1, m2, m3}});
    Gate g{GateKind::LeftElbow, {anc, m1, m2, m3}, {a, b}, {anc}, {m1, m2, m3}};
    g.pair_ref = c_.gates.size() - 1;
    emit(std::move(g));
  }

  void and_uncompute(QubitId a, QubitId b, QubitId anc) {
    emit({GateKind::RightElbow, {anc}, {a, b}, {}, {anc}});
  }

  void toffoli(QubitId c1, QubitId c2, QubitId t) {
    QubitId m1 = fresh(), m2 = fresh(), m3 = fresh();
    emit({GateKind::CczDistillation, {m1, m2, m3}, {}, {m1, m2, m3}});
    Gate g{GateKind::Toffoli, {t, m1, m2, m3}, {c1, c2}, {}, {m1, m2, m3}};
    g.pair_ref = c_.gates.size() - 1;
    emit(std::move(g));
  }

  void ppm(std::vector<QubitId> qs, std::string pauli) {
    Gate g{GateKind::Ppm, std::move(qs)};
    g.pauli = std::move(pauli);
    emit(std::move(g));
  }

  void rz(QubitId q, double angle, double precision) {
    Gate g{GateKind::ArbitraryRz, {q}};
    g.angle = angle;
    g.precision = precision;
    emit(std::move(g));
  }

  void controlled_h(QubitId c, QubitId t) { emit({GateKind::ControlledH, {t}, {c}}); }
  void controlled_s(QubitId c, QubitId t) { emit({GateKind::ControlledS, {t}, {c}}); }
  void controlled_swap(QubitId c, QubitId a, QubitId b) {
    emit({GateKind::ControlledSwap, {a, b}, {c}});
  }
  void controlled_rz(QubitId c, QubitId t, double angle, double precision) {
    Gate g{GateKind::ControlledRz, {t}, {c}};
    g.angle = angle;
    g.precision = precision;
    emit(std::move(g));
  }

  void emit(Gate g) {
    if (g.pauli.empty())
      g.pauli = default_pauli_labels(g.kind, g.targets.size(), g.controls.size());
    c_.gates.push_back(std::move(g));
  }

  Circuit take() { return std::move(c_); }
  const Circuit& peek() const { return c_; }

 private:
  Circuit c_;
};

struct AndRecord {
  QubitId a, b, anc;
};

/// flag <- [reg < bound], structurally: an elbow chain over the register bits
/// feeding one CNOT into the flag.
inline std::vector<AndRecord> comparator_compute(CircuitBuilder& b,
                                                 const std::vector<QubitId>& reg,
                                                 QubitId flag) {
  std::vector<AndRecord> ands;
  if (reg.size() == 1) {
    b.cnot(reg[0], flag);
    return ands;
  }
  QubitId acc = reg[0];
  for (std::size_t i = 1; i < reg.size(); ++i) {
    QubitId anc = b.fresh();
    b.and_compute(acc, reg[i], anc);
    ands.push_back({acc, reg[i], anc});
    acc = anc;
  }
  b.cnot(acc, flag);
  return ands;
}

inline void comparator_uncompute(CircuitBuilder& b, const std::vector<AndRecord>& ands) {
  for (auto it = ands.rbegin(); it != ands.rend(); ++it) {
    b.and_uncompute(it->a, it->b, it->anc);
  }
}

/// Multi-controlled Z via a left/right-elbow cascade and one CZ.
inline void multi_controlled_z(CircuitBuilder& b, const std::vector<QubitId>& qs) {
  if (qs.size() == 1) {
    b.s(qs[0]);
    return;
  }
  if (qs.size() == 2) {
    b.cz(qs[0], qs[1]);
    return;
  }
  std::vector<AndRecord> ands;
  QubitId acc = qs[0];
  for (std::size_t i = 1; i + 1 < qs.size(); ++i) {
    QubitId anc = b.fresh();
    b.and_compute(acc, qs[i], anc);
    ands.push_back({acc, qs[i], anc});
    acc = anc;
  }
  b.cz(acc, qs.back());
  for (auto it = ands.rbegin(); it != ands.rend(); ++it)
    b.and_uncompute(it->a, it->b, it->anc);
}

/// +1 mod L incrementor on a little-endian register; non-power-of-two L adds
/// a comparator and a conditional wrap.
inline void incrementor_mod(CircuitBuilder& b, const std::vector<QubitId>& reg, int mod) {
  std::vector<AndRecord> ands;
  QubitId acc = reg[0];
  for (std::size_t i = 1; i + 1 < reg.size(); ++i) {
    QubitId anc = b.fresh();
    b.and_compute(acc, reg[i], anc);
    ands.push_back({acc, reg[i], anc});
    acc = anc;
  }
  for (std::size_t i = reg.size(); i-- > 1;) {
    // Carry into bit i is the AND of all lower bits.
    QubitId carry = (i >= 2 && i - 2 < ands.size()) ? ands[i - 2].anc : reg[0];
    b.cnot(carry, reg[i]);
  }
  b.x(reg[0]);
  for (auto it = ands.rbegin(); it != ands.rend(); ++it)
    b.and_uncompute(it->a, it->b, it->anc);

  const bool pow2 = (mod & (mod - 1)) == 0;
  if (!pow2) {
    // Wrap back to zero when the register reaches mod.
    QubitId flag = b.alloc_zero();
    auto cmp = comparator_compute(b, reg, flag);
    for (std::size_t i = 0; i < reg.size(); ++i) {
      if ((static_cast<unsigned>(mod) >> i) & 1u) b.cnot(flag, reg[i]);
    }
    comparator_uncompute(b, cmp);
    b.measure_x(flag);
  }
}

inline int ceil_log2(int n) {
  int b = 0;
  while ((1 << b) < n) ++b;
  return b;
}

/// Uniform state preparation over L values. Power-of-two sizes reduce to
/// Hadamards; the odd factor needs the comparator flag, an amplitude
/// rotation and one amplification round.
inline void emit_usp(CircuitBuilder& b, const std::vector<QubitId>& reg, int L,
                     double rot_eps, bool force_general = false) {
  int l_pow2 = 1;
  int l_odd = L;
  while (l_odd % 2 == 0) {
    l_odd /= 2;
    l_pow2 *= 2;
  }
  const int a_bits = ceil_log2(l_pow2);
  for (int i = 0; i < a_bits; ++i) b.h(reg[i]);
  if (l_odd == 1 && !force_general) return;

  const int odd_bits = std::max(1, ceil_log2(std::max(2, l_odd)));
  std::vector<QubitId> odd_reg(reg.begin() + a_bits,
                               reg.begin() + std::min<std::size_t>(reg.size(), a_bits + odd_bits));
  if (odd_reg.empty()) odd_reg.push_back(reg.back());
  for (QubitId q : odd_reg) b.h(q);

  // Flagged inequality test against the odd factor, amplitude rotation on
  // the flag, and one amplify-and-retest round.
  QubitId flag = b.alloc_zero();
  auto cmp = comparator_compute(b, odd_reg, flag);
  b.rz(flag, 2.0 * std::asin(1.0 / std::sqrt(3.0)), rot_eps);
  b.controlled_h(flag, odd_reg[0]);
  std::vector<QubitId> refl(odd_reg);
  refl.push_back(flag);
  multi_controlled_z(b, refl);
  for (QubitId q : odd_reg) b.h(q);
  b.rz(odd_reg[0], std::numbers::pi / static_cast<double>(l_odd), rot_eps);
  comparator_uncompute(b, cmp);
  b.rz(flag, std::numbers::pi / static_cast<double>(l_odd), rot_eps);
  b.measure_x(flag);
}

struct OneHotNode {
  QubitId wire;
  std::vector<AndRecord> ands;  // in emission order, for uncompute
  std::vector<QubitId> leaves;
};

/// Binary-to-one-hot expansion over `bits` (most significant first), pruned
/// to `count` leaves. Each split costs one AND and one CNOT; the NOT branch
/// reuses the parent wire.
inline OneHotNode one_hot_build(CircuitBuilder& b, const std::vector<QubitId>& bits,
                                int count) {
  OneHotNode node;
  node.wire = b.alloc_one();

  struct Frame {
    QubitId wire;
    std::size_t bit;
    int lo, width;
  };
  std::vector<Frame> stack{{node.wire, 0, 0, 1 << bits.size()}};
  // Depth-first so leaf order is deterministic.
  while (!stack.empty()) {
    Frame f = stack.back();
    stack.pop_back();
    if (f.width == 1 || f.bit == bits.size()) {
      node.leaves.push_back(f.wire);
      continue;
    }
    const int half = f.width / 2;
    if (f.lo + half >= count) {
      stack.push_back({f.wire, f.bit + 1, f.lo, half});
      continue;
    }
    QubitId hi = b.fresh();
    b.and_compute(f.wire, bits[f.bit], hi);
    node.ands.push_back({f.wire, bits[f.bit], hi});
    b.cnot(hi, f.wire);
    // High half first keeps leaves sorted by index after the DFS.
    stack.push_back({hi, f.bit + 1, f.lo + half, half});
    stack.push_back({f.wire, f.bit + 1, f.lo, half});
  }
  return node;
}

inline void one_hot_uncompute(CircuitBuilder& b, const OneHotNode& node) {
  for (auto it = node.ands.rbegin(); it != node.ands.rend(); ++it) {
    b.cnot(it->anc, it->a);
    b.and_uncompute(it->a, it->b, it->anc);
  }
  b.measure_x(node.wire);
}

}  // namespace detail

/// One controlled walk step: PREP (coefficient loading and uniform state
/// preparation), SELECT (one-hot indexed Majorana applications with the
/// neighbour shift), PREP-dagger and the walk reflection. The idle phase
/// register rides along as context so the gadget's data high-water matches
/// the full test circuit's.
inline Circuit build_controlled_unitary(const LatticeSpec& spec, const PhasePrecision& prec) {
  spec.validate();
  const int L = spec.side;
  const int sites = L * L;
  const int modes = 2 * sites;
  const int nx = detail::ceil_log2(L);

  detail::CircuitBuilder b("controlled-unitary-" + std::to_string(L) + "x" +
                           std::to_string(L));
  std::vector<QubitId> phase = b.fresh_register(prec.n_p);
  const QubitId ctrl = phase[0];
  const QubitId uv = b.fresh();
  const QubitId dir = b.fresh();
  const QubitId spin = b.fresh();
  std::vector<QubitId> xreg = b.fresh_register(std::max(1, nx));
  std::vector<QubitId> yreg = b.fresh_register(std::max(1, nx));
  std::vector<QubitId> sys = b.fresh_register(modes);

  // PREP. The kinetic/potential split for the default coefficients is loaded
  // with a uniform superposition plus inequality test; non-default
  // coefficients need one arbitrary-angle rotation on the selector.
  std::vector<QubitId> uv_aux = b.fresh_register(3);
  for (QubitId q : uv_aux) b.h(q);
  auto uv_cmp = detail::comparator_compute(b, uv_aux, uv);
  const double kinetic_share =
      4.0 * std::abs(spec.kinetic_t) /
      (4.0 * std::abs(spec.kinetic_t) + 0.75 * std::abs(spec.potential_u));
  if (spec.kinetic_t != 1.0 || spec.potential_u != 8.0) {
    b.rz(uv, 2.0 * std::asin(std::sqrt(kinetic_share)), prec.rot_eps);
  }
  b.h(dir);
  b.h(spin);
  detail::emit_usp(b, xreg, L, prec.rot_eps);
  detail::emit_usp(b, yreg, L, prec.rot_eps);

  // SELECT: expand (spin, y, x) into a one-hot mode register.
  std::vector<QubitId> idx;
  idx.push_back(spin);
  idx.insert(idx.end(), yreg.begin(), yreg.end());
  idx.insert(idx.end(), xreg.begin(), xreg.end());
  detail::OneHotNode oh = detail::one_hot_build(b, idx, modes);

  // First Majorana application per mode.
  for (int m = 0; m < modes && m < static_cast<int>(oh.leaves.size()); ++m) {
    b.ppm({oh.leaves[m], sys[m]}, "ZX");
  }

  // Neighbour shift: controlled swaps of one-hot wires along x (kinetic
  // branch) and along y (direction branch), with cheap fan-out of the
  // selector to per-row flags so the swap chains stay short.
  const int rows_per_spin = L;
  std::vector<QubitId> row_flags;
  for (int r = 0; r < rows_per_spin; ++r) row_flags.push_back(b.alloc_zero());
  for (int sgn = 0; sgn < 2; ++sgn) {
    const QubitId sel = (sgn == 0) ? uv : dir;
    for (int r = 0; r < rows_per_spin; ++r) b.cnot(sel, row_flags[r]);
    // Brick pattern: disjoint transpositions per round, so one round's swaps
    // run in parallel.
    for (int parity = 0; parity < 2; ++parity) {
      for (int sp = 0; sp < 2; ++sp) {
        for (int r = 0; r < L; ++r) {
          for (int cidx = parity; cidx + 1 < L; cidx += 2) {
            int base = sp * sites;
            int m1, m2;
            if (sgn == 0) {  // x-direction within a row
              m1 = base + r * L + cidx;
              m2 = base + r * L + cidx + 1;
            } else {  // y-direction within a column
              m1 = base + cidx * L + r;
              m2 = base + (cidx + 1) * L + r;
            }
            if (m1 < static_cast<int>(oh.leaves.size()) &&
                m2 < static_cast<int>(oh.leaves.size())) {
              b.controlled_swap(row_flags[r], oh.leaves[m1], oh.leaves[m2]);
            }
          }
        }
      }
    }
    for (int r = 0; r < rows_per_spin; ++r) b.cnot(sel, row_flags[r]);
  }
  for (QubitId q : row_flags) b.measure_x(q);

  detail::incrementor_mod(b, xreg, L);

  // Second Majorana application at the shifted index.
  for (int m = 0; m < modes && m < static_cast<int>(oh.leaves.size()); ++m) {
    b.ppm({oh.leaves[m], sys[m]}, "ZY");
  }

  detail::one_hot_uncompute(b, oh);

  // PREP-dagger: the uniform preparation is an involution and the inverse
  // incrementor only differs by Paulis, so the emission is cost-identical.
  detail::emit_usp(b, yreg, L, prec.rot_eps);
  detail::emit_usp(b, xreg, L, prec.rot_eps);
  b.h(spin);
  b.h(dir);
  detail::comparator_uncompute(b, uv_cmp);
  for (QubitId q : uv_aux) b.h(q);

  // Walk reflection about the prepared state, controlled on the phase qubit.
  std::vector<QubitId> refl{ctrl, uv, dir, spin};
  refl.insert(refl.end(), xreg.begin(), xreg.end());
  refl.insert(refl.end(), yreg.begin(), yreg.end());
  detail::multi_controlled_z(b, refl);

  return b.take();
}

/// Standard QFT-dagger network: Hadamards interleaved with the controlled
/// phase ladders. Distance-one pairs are exact controlled-S; every other
/// controlled phase is emitted as its CNOT sandwich with the target-side
/// rotations inline and the control-side rotation deferred past the ladder
/// section (it is diagonal and commutes with everything later on its wire).
inline Circuit build_qft_network(int n_p, const PhasePrecision& prec) {
  if (n_p < 1) throw std::invalid_argument("n_p must be >= 1");
  detail::CircuitBuilder b("qft-dagger-" + std::to_string(n_p));
  std::vector<QubitId> phase = b.fresh_register(n_p);
  std::vector<std::pair<QubitId, double>> control_rotations;
  // A controlled phase is symmetric in its operands. Orienting each one so
  // the rotation-heavy target side lands on the less-loaded wire keeps the
  // per-wire synthesis lanes balanced across the register.
  std::vector<std::int64_t> wire_load(n_p, 0);
  for (int i = n_p - 1; i >= 0; --i) {
    for (int j = n_p - 1; j > i; --j) {
      const int k = j - i + 1;
      const double theta = -std::numbers::pi / static_cast<double>(1 << (k - 1));
      if (k == 2) {
        b.controlled_s(phase[j], phase[i]);
        wire_load[i] += 1;
        wire_load[j] += 1;
        continue;
      }
      int tgt = i, ctl = j;
      if (wire_load[j] < wire_load[i] || (wire_load[j] == wire_load[i] && j < i)) {
        tgt = j;
        ctl = i;
      }
      b.cnot(phase[ctl], phase[tgt]);
      b.rz(phase[tgt], -theta / 2.0, prec.rot_eps);
      b.cnot(phase[ctl], phase[tgt]);
      b.rz(phase[tgt], theta / 2.0, prec.rot_eps);
      control_rotations.emplace_back(phase[ctl], theta / 2.0);
      wire_load[tgt] += 2;
      wire_load[ctl] += 1;
    }
    b.h(phase[i]);
  }
  for (auto [q, angle] : control_rotations) b.rz(q, angle, prec.rot_eps);
  return b.take();
}

/// Count of arbitrary-rotation markers awaiting expansion. Each controlled
/// rotation of the phase-gradient network contributes three.
inline std::int64_t rotation_count(const Circuit& c) {
  std::int64_t n = 0;
  for (const auto& g : c.gates) {
    if (g.kind == GateKind::ArbitraryRz) ++n;
    if (g.kind == GateKind::ControlledRz) n += 3;
  }
  return n;
}

inline Circuit decompose_single_controls(const Circuit&,
                                         const AvTable& = AvTable::defaults(),
                                         const RotationModel& = RotationModel{},
                                         std::uint64_t = 0);

/// Fully decomposed QFT-dagger: the network with controlled-S expanded
/// exactly and every remaining controlled phase synthesized through the
/// rotation model.
inline Circuit build_qft_dagger(int n_p, const PhasePrecision& prec,
                                const RotationModel& rot, std::uint64_t seed) {
  return decompose_single_controls(build_qft_network(n_p, prec), AvTable::defaults(),
                                   rot, seed);
}

namespace detail {

inline bool needs_rewrite(GateKind k) {
  switch (k) {
    case GateKind::ControlledH:
    case GateKind::ControlledS:
    case GateKind::ControlledSwap:
    case GateKind::ControlledRz:
    case GateKind::MultiControlledX:
    case GateKind::ArbitraryRz:
      return true;
    default:
      return false;
  }
}

inline Circuit rewrite_pass(const Circuit& circuit, const AvTable& table,
                            const RotationModel& rot, SplitRng root) {
  detail::CircuitBuilder b(circuit.name);
  // Preserve the original qubit universe; ancillas extend it.
  for (std::uint32_t i = 0; i < circuit.qubit_count; ++i) b.fresh();

  std::vector<std::int64_t> remap(circuit.gates.size(), -1);

  for (std::size_t gi = 0; gi < circuit.gates.size(); ++gi) {
    const Gate& g = circuit.gates[gi];
    switch (g.kind) {
      case GateKind::ControlledH: {
        const QubitId c = g.controls.at(0), t = g.targets.at(0);
        b.s(t);
        b.h(t);
        b.t_gate(t);
        b.cnot(c, t);
        b.t_gate(t);
        b.h(t);
        b.s(t);
        break;
      }
      case GateKind::ControlledS: {
        // Target-side pieces first; the control-side T is diagonal and
        // commutes past both CNOTs, so it trails.
        const QubitId c = g.controls.at(0), t = g.targets.at(0);
        b.cnot(c, t);
        b.t_gate(t);
        b.cnot(c, t);
        b.t_gate(t);
        b.t_gate(c);
        break;
      }
      case GateKind::ControlledSwap: {
        const QubitId c = g.controls.at(0);
        const QubitId a = g.targets.at(0), t = g.targets.at(1);
        b.cnot(t, a);
        b.toffoli(c, a, t);
        b.cnot(t, a);
        break;
      }
      case GateKind::ControlledRz: {
        // Same ordering: the control-side rotation commutes with the CNOT
        // controls and is emitted last.
        const QubitId c = g.controls.at(0), t = g.targets.at(0);
        const double half = g.angle.value_or(0.0) / 2.0;
        const double eps = g.precision.value_or(1e-4);
        b.cnot(c, t);
        b.rz(t, -half, eps);
        b.cnot(c, t);
        b.rz(t, half, eps);
        b.rz(c, half, eps);
        break;
      }
      case GateKind::MultiControlledX: {
        const QubitId t = g.targets.at(0);
        const auto& cs = g.controls;
        if (cs.empty()) {
          b.x(t);
        } else if (cs.size() == 1) {
          b.cnot(cs[0], t);
        } else if (cs.size() == 2) {
          b.toffoli(cs[0], cs[1], t);
        } else {
          std::vector<detail::AndRecord> ands;
          QubitId acc = cs[0];
          for (std::size_t i = 1; i < cs.size(); ++i) {
            QubitId anc = b.fresh();
            b.and_compute(acc, cs[i], anc);
            ands.push_back({acc, cs[i], anc});
            acc = anc;
          }
          b.cnot(acc, t);
          for (auto it = ands.rbegin(); it != ands.rend(); ++it)
            b.and_uncompute(it->a, it->b, it->anc);
        }
        break;
      }
      case GateKind::ArbitraryRz: {
        const QubitId t = g.targets.at(0);
        const double eps = g.precision.value_or(1e-4);
        SplitRng stream = root.split(rng_stream::kRotationSynthesis, gi);
        auto seq = synthesize_rotation(rot, eps, stream);
        for (const auto& step : seq) {
          for (int r = 0; r < step.count; ++r) {
            if (step.gate == 'H') b.h(t);
            else if (step.gate == 'S') b.s(t);
            else b.t_gate(t);
          }
        }
        break;
      }
      default: {
        if (!table.contains(g.kind)) throw IrreducibleGate(g.kind);
        Gate copy = g;
        // Distillations precede their consumers, so a passed-through pair
        // reference always resolves to an already-remapped index.
        if (copy.pair_ref) {
          if (*copy.pair_ref >= remap.size() || remap[*copy.pair_ref] < 0)
            throw std::logic_error("pair reference into a rewritten gate");
          copy.pair_ref = static_cast<std::size_t>(remap[*copy.pair_ref]);
        }
        remap[gi] = static_cast<std::int64_t>(b.peek().gates.size());
        b.emit(std::move(copy));
        break;
      }
    }
  }
  return b.take();
}

}  // namespace detail

/// Rewrites controlled-H / controlled-S / controlled-swap / controlled-RZ
/// and multi-controlled-X by their single-control decompositions and expands
/// arbitrary rotations through the synthesis model, repeating until every
/// gate kind has an AV-table entry. Idempotent.
inline Circuit decompose_single_controls(const Circuit& circuit,
                                         const AvTable& table,
                                         const RotationModel& rot,
                                         std::uint64_t seed) {
  SplitRng root(seed);
  Circuit cur = circuit;
  for (int pass = 0; pass < 8; ++pass) {
    bool pending = false;
    for (const auto& g : cur.gates)
      if (detail::needs_rewrite(g.kind)) {
        pending = true;
        break;
      }
    if (!pending) {
      for (const auto& g : cur.gates)
        if (!table.contains(g.kind)) throw IrreducibleGate(g.kind);
      return cur;
    }
    cur = detail::rewrite_pass(cur, table, rot,
                               root.split(rng_stream::kRotationSynthesis, pass));
  }
  throw std::logic_error("gate rewriting did not reach a fixpoint");
}

struct CircuitGadget {
  std::string name;
  Circuit circuit;
  std::int64_t multiplicity = 1;
};

struct TestCircuitSet {
  std::vector<CircuitGadget> gadgets;
  int n_p = 0;
  LatticeSpec spec;
  std::uint64_t seed = 0;
};

/// The full test circuit as a gadget set: the controlled unitary repeated
/// 2^{n_p} times and one inverse QFT, both decomposed and distillation-paired,
/// ready for DAG construction.
inline TestCircuitSet build_test_circuit(const LatticeSpec& spec, std::uint64_t seed = 0,
                                         double eps_site = 1e-3,
                                         const RotationModel& rot = RotationModel{},
                                         const AvTable& table = AvTable::defaults()) {
  spec.validate();
  TestCircuitSet set;
  set.spec = spec;
  set.seed = seed;
  PhasePrecision prec = phase_precision(spec, eps_site);
  set.n_p = prec.n_p;

  SplitRng root(seed);
  Circuit cu_raw = build_controlled_unitary(spec, prec);
  Circuit cu = decompose_single_controls(
      cu_raw, table, rot, root.split(rng_stream::kCircuitGen, 0).state());
  Circuit qft = build_qft_dagger(prec.n_p, prec, rot,
                                 root.split(rng_stream::kCircuitGen, 1).state());

  for (const Circuit* c : {&cu, &qft}) {
    auto violations = validate_circuit(*c);
    if (!violations.empty())
      throw std::logic_error("generated circuit '" + c->name +
                             "' is malformed: " + violations.front().describe());
  }

  set.gadgets.push_back({"controlled-unitary", std::move(cu),
                         std::int64_t{1} << prec.n_p});
  set.gadgets.push_back({"qft-dagger", std::move(qft), 1});
  return set;
}

/// Per-kind AV histogram of a circuit.
inline std::map<GateKind, Blocks> av_histogram(const Circuit& c, const AvTable& table) {
  std::map<GateKind, Blocks> h;
  for (const auto& g : c.gates) h[g.kind] += av_of(g, table);
  return h;
}

/// Fraction of a circuit's AV spent in Toffoli-class gates (elbows, CCZ
/// distillation, Toffolis, multi-controlled X, controlled swaps).
inline double toffoli_family_share(const Circuit& c, const AvTable& table) {
  Blocks family = 0, total = 0;
  for (const auto& g : c.gates) {
    const Blocks av = av_of(g, table);
    total += av;
    switch (g.kind) {
      case GateKind::Toffoli:
      case GateKind::LeftElbow:
      case GateKind::RightElbow:
      case GateKind::CczDistillation:
      case GateKind::MultiControlledX:
      case GateKind::ControlledSwap:
        family += av;
        break;
      default: break;
    }
  }
  return total == 0 ? 0.0 : static_cast<double>(family) / static_cast<double>(total);
}

}  // namespace avs
