#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "amecos/checker.hpp"
#include "amecos/harness.hpp"
#include "amecos/history.hpp"
#include "amecos/object_specs.hpp"
#include "amecos/sigma.hpp"

namespace amecos {

struct InputError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

namespace io {

inline Value read_json(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw InputError("cannot open " + p.string());
  try {
    return Value::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(p.string() + ": " + e.what());
  }
}

inline void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p);
  if (!out) throw InputError("cannot write " + p.string());
  out << text;
}

inline const Value& field(const Value& j, const char* name, const std::string& where) {
  if (!j.is_object() || !j.contains(name)) throw InputError(where + ": missing field '" + name + "'");
  return j.at(name);
}

inline std::string string_field(const Value& j, const char* name, const std::string& where) {
  const Value& v = field(j, name, where);
  if (!v.is_string()) throw InputError(where + ": field '" + name + "' must be a string");
  return v.get<std::string>();
}

inline std::optional<long> position(const Value& v, const std::string& where) {
  if (v.is_null()) return std::nullopt;
  if (!v.is_number_integer() || v.get<long>() < 0)
    throw InputError(where + ": positions are non-negative integers or null");
  return v.get<long>();
}

}  // namespace io

// ---------------------------------------------------------------------------
// Histories

inline Value to_json(const History& h) {
  Value j = Value::object();
  if (!h.name.empty()) j["name"] = h.name;
  j["processes"] = Value::array();
  for (const auto& p : h.processes) j["processes"].push_back({{"id", p.id}, {"type", to_string(p.type)}});
  j["opexes"] = Value::array();
  for (const auto& o : h.opexes)
    j["opexes"].push_back({{"object", o.object},
                           {"operation", o.operation},
                           {"proc", o.proc},
                           {"input", o.input},
                           {"output", o.output},
                           {"inv", o.inv ? Value(o.inv->position) : Value()},
                           {"res", o.res ? Value(o.res->position) : Value()}});
  j["complete"] = h.complete;
  return j;
}

inline History history_from_json(const Value& j, const std::string& where = "history") {
  if (!j.is_object()) throw InputError(where + ": expected an object");
  History h;
  if (j.contains("name")) h.name = io::string_field(j, "name", where);
  const Value& procs = io::field(j, "processes", where);
  if (!procs.is_array()) throw InputError(where + ": 'processes' must be an array");
  for (const auto& p : procs) {
    Process pr;
    if (p.is_string()) {
      pr.id = p.get<std::string>();
    } else {
      pr.id = io::string_field(p, "id", where);
      if (p.contains("type")) {
        try {
          pr.type = proc_type_from(io::string_field(p, "type", where));
        } catch (const std::invalid_argument& e) {
          throw InputError(where + ": " + e.what());
        }
      }
    }
    h.processes.push_back(pr);
  }
  const Value& ops = io::field(j, "opexes", where);
  if (!ops.is_array()) throw InputError(where + ": 'opexes' must be an array");
  for (std::size_t i = 0; i < ops.size(); ++i) {
    const Value& o = ops[i];
    std::string w = where + ": opexes[" + std::to_string(i) + "]";
    OpEx x{io::string_field(o, "object", w), io::string_field(o, "operation", w), io::string_field(o, "proc", w),
           o.value("input", Value()), o.value("output", Value()), std::nullopt, std::nullopt};
    if (auto p = io::position(o.value("inv", Value()), w)) x.inv = Event{"", Value(), *p, x.proc, 0};
    if (auto p = io::position(o.value("res", Value()), w)) x.res = Event{"", Value(), *p, x.proc, 0};
    h.opexes.push_back(std::move(x));
  }
  h.complete = j.value("complete", true);
  finalize(h);
  return h;
}

inline std::string serialize(const History& h) { return to_json(h).dump(2); }

inline History parse_history(const std::string& text, const std::string& where = "history") {
  try {
    return history_from_json(Value::parse(text), where);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(where + ": " + e.what());
  }
}

// Specs carried by a file: {"specs": {"R": "swsr-register:pw,pr"}}.
inline Registry specs_from_json(const Value& j, const std::string& where) {
  Registry reg;
  if (!j.is_object() || !j.contains("specs")) return reg;
  const Value& s = j.at("specs");
  if (!s.is_object()) throw InputError(where + ": 'specs' must map objects to spec names");
  for (auto it = s.begin(); it != s.end(); ++it) {
    if (!it.value().is_string()) throw InputError(where + ": spec of " + it.key() + " must be a string");
    try {
      reg[it.key()] = spec_from_string(it.value().get<std::string>());
    } catch (const std::invalid_argument& e) {
      throw InputError(where + ": " + e.what());
    }
  }
  return reg;
}

struct HistoryFile {
  History history;
  Registry specs;
};

inline HistoryFile load_history(const std::filesystem::path& p) {
  Value j = io::read_json(p);
  HistoryFile f{history_from_json(j, p.string()), specs_from_json(j, p.string())};
  if (f.history.name.empty()) f.history.name = p.stem().string();
  return f;
}

// All *.json histories of a directory, by file name.
inline std::vector<HistoryFile> load_history_dir(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw InputError(dir.string() + " is not a directory");
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::vector<HistoryFile> out;
  for (const auto& f : files) out.push_back(load_history(f));
  return out;
}

// ---------------------------------------------------------------------------
// Byzantine universe: [{"object", "operation", "input", "proc"?}]

inline std::vector<ByzCandidate> universe_from_json(const Value& j, const std::string& where = "universe") {
  const Value& arr = j.is_object() ? io::field(j, "universe", where) : j;
  if (!arr.is_array()) throw InputError(where + ": expected an array of candidate op-exes");
  std::vector<ByzCandidate> out;
  for (const auto& c : arr) {
    ByzCandidate b{io::string_field(c, "object", where), io::string_field(c, "operation", where),
                   c.value("input", Value()), std::nullopt};
    if (c.contains("proc") && !c.at("proc").is_null()) b.proc = io::string_field(c, "proc", where);
    out.push_back(std::move(b));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Programs

inline std::pair<Program, GenConfig> program_from_json(const Value& j, const std::string& where = "program") {
  Program p;
  GenConfig g;
  p.name = j.value("name", std::string("program"));
  const Value& procs = io::field(j, "processes", where);
  if (!procs.is_array()) throw InputError(where + ": 'processes' must be an array");
  for (const auto& q : procs) {
    if (q.is_string()) p.processes.push_back({q.get<std::string>(), ProcType::correct});
    else p.processes.push_back({io::string_field(q, "id", where), proc_type_from(q.value("type", "correct"))});
  }
  const Value& calls = io::field(j, "calls", where);
  if (!calls.is_object()) throw InputError(where + ": 'calls' must map processes to call lists");
  for (auto it = calls.begin(); it != calls.end(); ++it)
    for (const auto& c : it.value())
      p.calls[it.key()].push_back(
          {io::string_field(c, "object", where), io::string_field(c, "operation", where), c.value("input", Value())});
  p.registry = specs_from_json(j, where);
  if (j.contains("specs"))
    for (auto it = j.at("specs").begin(); it != j.at("specs").end(); ++it) p.spec_names[it.key()] = it.value();
  g.condition = j.value("condition", g.condition);
  g.k = j.value("k", g.k);
  g.event_budget = j.value("event_budget", g.event_budget);
  return {p, g};
}

inline std::pair<Program, GenConfig> load_program(const std::string& name_or_file) {
  for (const auto& b : builtin_program_names())
    if (b == name_or_file) return builtin_program(b);
  return program_from_json(io::read_json(name_or_file), name_or_file);
}

// ---------------------------------------------------------------------------
// Reports

inline Value to_json(const OrderRelation& r) {
  Value pairs = Value::array();
  for (auto [a, b] : r.pairs()) pairs.push_back({a, b});
  return pairs;
}

inline Value to_json(const ClauseOutcome& o) {
  Value j = {{"clause", o.clause}, {"holds", o.holds}};
  j["opex"] = o.opex ? Value(*o.opex) : Value();
  if (!o.explanation.empty()) j["explanation"] = o.explanation;
  return j;
}

inline Value to_json(const Verdict& v, const std::string& condition) {
  Value j = {{"accepted", v.accepted},
             {"condition", condition},
             {"strategy", v.strategy},
             {"nodes", v.nodes},
             {"elapsed_ms", v.elapsed_ms}};
  j["clauses"] = Value::array();
  for (const auto& o : v.outcomes) j["clauses"].push_back(to_json(o));
  j["witness"] = v.witness ? to_json(*v.witness) : Value();
  if (!v.accepted) j["diagnosis"] = v.diagnosis;
  if (v.repaired) {
    Value ins = Value::array();
    for (std::size_t i : v.inserted) {
      const OpEx& o = v.repaired->opexes[i];
      ins.push_back({{"index", i}, {"object", o.object}, {"operation", o.operation}, {"proc", o.proc},
                     {"input", o.input}, {"inv", o.inv->position}});
    }
    j["inserted"] = ins;
    j["repaired"] = to_json(*v.repaired);
    j["bounded"] = v.bounded;
    if (!v.accepted) j["note"] = "rejected within bounds";
  }
  return j;
}

inline Value to_json(const AxiomReport& a) {
  return {{"axiom", a.axiom}, {"holds", a.holds}, {"witness", a.witness}};
}

inline Value to_json(const AuditReport& r, const Sigma& s) {
  Value j = {{"theorem", r.theorem}, {"states", s.states.size()}, {"violated", r.violated}};
  j["axioms"] = Value::array();
  for (const auto& a : r.axioms) j["axioms"].push_back(to_json(a));
  j["critical_state"] = r.critical ? Value(s.describe(*r.critical)) : Value();
  j["consistent_with_theorem"] = r.consistent_with_theorem();
  if (!r.contradiction.is_null()) j["contradiction"] = r.contradiction;
  return j;
}

// ---------------------------------------------------------------------------
// DOT

inline std::string dot_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

inline std::string to_dot(const Sigma& s, const std::string& name = "sigma") {
  std::ostringstream out;
  out << "digraph \"" << dot_escape(name) << "\" {\n  rankdir=TB;\n  node [shape=box];\n";
  for (std::size_t i = 0; i < s.states.size(); ++i) {
    out << "  s" << i << " [label=\"" << dot_escape(s.describe(i)) << "\"";
    if (s.out[i].empty()) out << ", peripheries=2";
    out << "];\n";
  }
  for (const auto& e : s.edges)
    out << "  s" << e.from << " -> s" << e.to << " [label=\"" << dot_escape(s.label(e.event)) << "\"];\n";
  out << "}\n";
  return out.str();
}

}  // namespace amecos
