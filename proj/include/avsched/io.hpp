#pragma once

// File formats: AV-table and hardware JSON, the line-oriented circuit and
// DAG texts, ledger/sweep CSV and the machine-readable result documents.

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "avsched/analysis.hpp"
#include "avsched/circuits.hpp"
#include "avsched/core.hpp"
#include "avsched/dag.hpp"
#include "avsched/estimator.hpp"
#include "avsched/scheduler.hpp"

namespace avs {

using nlohmann::json;

struct ParseError : std::runtime_error {
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

// -------- AV table --------

/// Table document: { "<kind>": {"av": N, "stale_yield": N, "y_prob": p,
/// "y_catalyst": N, "y_deterministic": N}, ... }. Missing keys default to 0
/// except av, which is mandatory.
inline AvTable parse_av_table(const json& doc, bool extend_defaults = true) {
  AvTable t = extend_defaults ? AvTable::defaults() : AvTable{};
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    auto kind = gate_kind_from_string(it.key());
    if (!kind) throw ParseError("unknown gate kind in AV table: " + it.key());
    const json& e = it.value();
    if (!e.contains("av")) throw ParseError("AV table entry '" + it.key() + "' lacks av");
    AvTableEntry entry;
    entry.av = e.at("av").get<Blocks>();
    entry.stale_yield = e.value("stale_yield", 0);
    entry.y_prob = e.value("y_prob", 0.0);
    entry.y_catalyst = e.value("y_catalyst", 0);
    entry.y_deterministic = e.value("y_deterministic", 0);
    if (entry.av < 0 || entry.stale_yield < 0 || entry.y_prob < 0 || entry.y_prob > 1 ||
        entry.y_catalyst < 0 || entry.y_deterministic < 0)
      throw ParseError("AV table entry '" + it.key() + "' violates its invariants");
    t.set(*kind, entry);
  }
  return t;
}

inline json av_table_to_json(const AvTable& t) {
  json doc = json::object();
  for (const auto& [k, e] : t.entries()) {
    doc[to_string(k)] = {{"av", e.av},
                         {"stale_yield", e.stale_yield},
                         {"y_prob", e.y_prob},
                         {"y_catalyst", e.y_catalyst},
                         {"y_deterministic", e.y_deterministic}};
  }
  return doc;
}

// -------- hardware --------

inline HardwareParams parse_hardware(const json& doc) {
  HardwareParams hw;
  hw.n_im = doc.value("n_im", hw.n_im);
  hw.r_im = doc.value("r_im", hw.r_im);
  hw.l_delay = doc.value("l_delay_m", hw.l_delay);
  hw.c_fiber = doc.value("c_fiber_m_per_s", hw.c_fiber);
  hw.p_f = doc.value("p_f", hw.p_f);
  hw.alpha = doc.value("alpha", hw.alpha);
  hw.reaction_time = doc.value("reaction_time_s", hw.reaction_time);
  hw.budget_calibration = doc.value("budget_calibration", hw.budget_calibration);
  hw.validate();
  return hw;
}

inline json hardware_to_json(const HardwareParams& hw) {
  return {{"n_im", hw.n_im},
          {"r_im", hw.r_im},
          {"l_delay_m", hw.l_delay},
          {"c_fiber_m_per_s", hw.c_fiber},
          {"p_f", hw.p_f},
          {"alpha", hw.alpha},
          {"reaction_time_s", hw.reaction_time},
          {"budget_calibration", hw.budget_calibration}};
}

// -------- circuit text --------

namespace detail {

inline std::string id_list(const std::vector<QubitId>& v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(v[i]);
  }
  return s + "]";
}

inline std::vector<QubitId> parse_id_list(const std::string& s) {
  if (s.size() < 2 || s.front() != '[' || s.back() != ']')
    throw ParseError("malformed qubit list: " + s);
  std::vector<QubitId> out;
  std::string body = s.substr(1, s.size() - 2);
  std::stringstream ss(body);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (!tok.empty()) out.push_back(static_cast<QubitId>(std::stoul(tok)));
  }
  return out;
}

}  // namespace detail

/// One gate per line:
/// `<kind> targets=[..] controls=[..] init=[..] meas=[..] params=a:<x>,eps:<y> pair=<i> pauli=<str>`
inline std::string serialize_circuit(const Circuit& c) {
  std::ostringstream out;
  out << "# circuit " << c.name << "\n";
  out << "qubits " << c.qubit_count << "\n";
  out.precision(17);
  for (const auto& g : c.gates) {
    out << to_string(g.kind) << " targets=" << detail::id_list(g.targets)
        << " controls=" << detail::id_list(g.controls)
        << " init=" << detail::id_list(g.initializes)
        << " meas=" << detail::id_list(g.measures);
    if (g.angle || g.precision) {
      out << " params=";
      if (g.angle) out << "a:" << *g.angle;
      if (g.precision) out << (g.angle ? "," : "") << "eps:" << *g.precision;
    }
    if (g.pair_ref) out << " pair=" << *g.pair_ref;
    if (!g.pauli.empty()) out << " pauli=" << g.pauli;
    out << "\n";
  }
  return out.str();
}

inline Circuit parse_circuit(const std::string& text) {
  Circuit c;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.rfind("# circuit ", 0) == 0) {
      c.name = line.substr(10);
      continue;
    }
    if (line.rfind("qubits ", 0) == 0) {
      c.qubit_count = static_cast<std::uint32_t>(std::stoul(line.substr(7)));
      continue;
    }
    if (line[0] == '#') continue;
    std::istringstream ls(line);
    std::string kind_name;
    ls >> kind_name;
    auto kind = gate_kind_from_string(kind_name);
    if (!kind) throw ParseError("unknown gate kind: " + kind_name);
    Gate g;
    g.kind = *kind;
    std::string field;
    while (ls >> field) {
      auto eq = field.find('=');
      if (eq == std::string::npos) throw ParseError("malformed field: " + field);
      std::string key = field.substr(0, eq);
      std::string val = field.substr(eq + 1);
      if (key == "targets") g.targets = detail::parse_id_list(val);
      else if (key == "controls") g.controls = detail::parse_id_list(val);
      else if (key == "init") g.initializes = detail::parse_id_list(val);
      else if (key == "meas") g.measures = detail::parse_id_list(val);
      else if (key == "pair") g.pair_ref = std::stoull(val);
      else if (key == "pauli") g.pauli = val;
      else if (key == "params") {
        std::stringstream ps(val);
        std::string part;
        while (std::getline(ps, part, ',')) {
          if (part.rfind("a:", 0) == 0) g.angle = std::stod(part.substr(2));
          else if (part.rfind("eps:", 0) == 0) g.precision = std::stod(part.substr(4));
        }
      } else {
        throw ParseError("unknown field: " + key);
      }
    }
    c.gates.push_back(std::move(g));
  }
  return c;
}

// -------- DAG text --------

inline std::string serialize_dag(const OperationDag& dag) {
  std::ostringstream out;
  out.precision(17);
  out << "# operation dag\n";
  out << "vertices " << dag.size() << "\n";
  out << "initial " << detail::id_list(dag.initial_data) << "\n";
  for (const auto& v : dag.vertices) {
    out << "vertex " << v.id << " av=" << v.av << " stale=" << v.stale
        << " yprob=" << v.y_prob << " ycat=" << v.y_catalyst
        << " ydet=" << v.y_deterministic << " kind=" << to_string(v.kind)
        << " gate=" << v.gate_ref << " acted=" << detail::id_list(v.qubits_acted)
        << " meas=" << detail::id_list(v.qubits_measured) << "\n";
  }
  for (auto [u, v] : dag.edges) out << "edge " << u << " " << v << "\n";
  for (auto [cons, dist] : dag.pairings) out << "pairing " << cons << " " << dist << "\n";
  return out.str();
}

inline OperationDag parse_dag(const std::string& text) {
  OperationDag dag;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "vertices") continue;
    if (tag == "initial") {
      std::string lst;
      ls >> lst;
      dag.initial_data = detail::parse_id_list(lst);
      continue;
    }
    if (tag == "vertex") {
      OpVertex v;
      ls >> v.id;
      std::string field;
      while (ls >> field) {
        auto eq = field.find('=');
        if (eq == std::string::npos) throw ParseError("malformed vertex field: " + field);
        std::string key = field.substr(0, eq);
        std::string val = field.substr(eq + 1);
        if (key == "av") v.av = std::stoll(val);
        else if (key == "stale") v.stale = std::stoi(val);
        else if (key == "yprob") v.y_prob = std::stod(val);
        else if (key == "ycat") v.y_catalyst = std::stoi(val);
        else if (key == "ydet") v.y_deterministic = std::stoi(val);
        else if (key == "kind") {
          auto k = gate_kind_from_string(val);
          if (!k) throw ParseError("unknown vertex kind: " + val);
          v.kind = *k;
        } else if (key == "gate") v.gate_ref = std::stoull(val);
        else if (key == "acted") v.qubits_acted = detail::parse_id_list(val);
        else if (key == "meas") v.qubits_measured = detail::parse_id_list(val);
        else throw ParseError("unknown vertex field: " + key);
      }
      dag.vertices.push_back(std::move(v));
      continue;
    }
    if (tag == "edge") {
      std::uint32_t u, v;
      ls >> u >> v;
      dag.edges.emplace_back(u, v);
      continue;
    }
    if (tag == "pairing") {
      std::uint32_t c, d;
      ls >> c >> d;
      dag.pairings.emplace_back(c, d);
      continue;
    }
    throw ParseError("unknown dag line: " + line);
  }
  dag.finalize();
  return dag;
}

// -------- CSV --------

namespace detail {

inline std::string fmt_double(double x) {
  std::ostringstream o;
  o.precision(10);
  o << x;
  return o.str();
}

}  // namespace detail

inline std::string ledger_csv(const Schedule& s) {
  std::ostringstream out;
  out << "cycle,workspace,data,bridge,stale,unused,idle_y,reaction_layers\n";
  for (const auto& c : s.cycles) {
    out << c.cycle << ',' << c.workspace << ',' << c.data << ',' << c.bridge << ','
        << c.stale << ',' << c.unused << ',' << c.idle_y << ',' << c.reaction_layers
        << "\n";
  }
  return out.str();
}

inline std::string sweep_csv(const std::vector<SweepPoint>& points) {
  std::ostringstream out;
  out << "total_qubits,distance,cycles,runtime_s,mean_bss_fraction,mean_workspace,"
         "peak_reaction_layers,status\n";
  for (const auto& p : points) {
    out << p.total_qubits << ',' << p.distance << ',' << p.cycles << ','
        << detail::fmt_double(p.runtime_s) << ',' << detail::fmt_double(p.mean_bss_fraction)
        << ',' << detail::fmt_double(p.mean_workspace) << ',' << p.peak_reaction_layers
        << ',' << p.status << "\n";
  }
  return out.str();
}

inline std::vector<SweepPoint> parse_sweep_csv(const std::string& text) {
  std::vector<SweepPoint> out;
  std::istringstream in(text);
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (header) {
      if (line.rfind("total_qubits,", 0) != 0)
        throw ParseError("sweep CSV header missing");
      header = false;
      continue;
    }
    std::stringstream ls(line);
    std::string tok;
    std::vector<std::string> cols;
    while (std::getline(ls, tok, ',')) cols.push_back(tok);
    if (cols.size() != 8) throw ParseError("sweep CSV row has wrong arity: " + line);
    SweepPoint p;
    p.total_qubits = std::stoll(cols[0]);
    p.distance = std::stoi(cols[1]);
    p.cycles = std::stoll(cols[2]);
    p.runtime_s = std::stod(cols[3]);
    p.mean_bss_fraction = std::stod(cols[4]);
    p.mean_workspace = std::stod(cols[5]);
    p.peak_reaction_layers = std::stoi(cols[6]);
    p.status = cols[7];
    out.push_back(p);
  }
  if (header) throw ParseError("sweep CSV is empty");
  return out;
}

// -------- result documents --------

inline json schedule_summary_json(const Schedule& s, const OperationDag& dag) {
  Blocks av = 0;
  for (const auto& v : dag.vertices) av += v.av;
  return {{"cycles", s.cycles.size()},
          {"total_qubits", s.total_qubits},
          {"circuit_av", av},
          {"mean_bss_fraction", schedule_mean_bss(s)},
          {"mean_unused_fraction", schedule_mean_unused(s)},
          {"mean_data_fraction", schedule_mean_data(s)},
          {"peak_reaction_layers", schedule_peak_reaction_layers(s)},
          {"seed", s.seed},
          {"final_stale_carry", s.final_stale_carry},
          {"y_events", s.y_events.size()},
          {"warnings", s.warnings}};
}

inline json fit_to_json(const FitResult& f) {
  return {{"a", f.a},
          {"b", f.b},
          {"c", f.c},
          {"r_squared", f.r_squared},
          {"asymptote_percent", f.asymptote * 100.0},
          {"degenerate", f.degenerate}};
}

// -------- files --------

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Write-to-temp-then-rename so concurrent readers never see partial files.
inline void atomic_write_file(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::create_directories(path.parent_path().empty() ? "." : path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ParseError("cannot write " + tmp.string());
    out << content;
  }
  std::filesystem::rename(tmp, path);
}

// -------- DAG file cache --------

inline std::filesystem::path dag_cache_path(const std::filesystem::path& dir,
                                            std::uint64_t key) {
  std::ostringstream name;
  name << std::hex << key << ".dag";
  return dir / name.str();
}

inline std::optional<OperationDag> dag_cache_load(const std::filesystem::path& dir,
                                                  std::uint64_t key) {
  auto p = dag_cache_path(dir, key);
  if (!std::filesystem::exists(p)) return std::nullopt;
  return parse_dag(read_file(p));
}

inline void dag_cache_store(const std::filesystem::path& dir, std::uint64_t key,
                            const OperationDag& dag) {
  std::filesystem::create_directories(dir);
  atomic_write_file(dag_cache_path(dir, key), serialize_dag(dag));
}

}  // namespace avs
