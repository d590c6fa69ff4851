#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "amecos/checker.hpp"
#include "amecos/consistency.hpp"
#include "amecos/history.hpp"
#include "amecos/object_specs.hpp"
#include "amecos/sigma.hpp"

namespace amecos {

struct Call {
  std::string object;
  std::string operation;
  Value input;
};

struct Program {
  std::string name;
  std::vector<Process> processes;
  std::map<ProcessId, std::vector<Call>> calls;
  Registry registry;
  std::map<std::string, std::string> spec_names;  // object -> CLI spec name
};

struct GenConfig {
  std::string condition = "linearizability";
  int k = 1;
  std::size_t event_budget = 16;
};

struct Generation {
  std::vector<History> histories;  // sorted by history key
  std::size_t interleavings = 0;   // maximal interleavings explored
  std::size_t checks = 0;          // distinct checker calls
  std::vector<std::string> warnings;
};

namespace harness {

struct Notif {
  ProcessId proc;
  std::string object;
  std::string operation;
  Value output;
};

// Notifications an invocation obliges the object to emit.
inline std::vector<Notif> mandated(const Program& prog, const ProcessId& p, const Call& c) {
  const ObjectSpec& spec = prog.registry.at(c.object);
  std::vector<Notif> out;
  if (spec.kind == "reliable-broadcast" && c.operation == "r_broadcast")
    for (const auto& q : prog.processes)
      out.push_back({q.id, c.object, "r_deliver",
                     {detail::at_or_null(c.input, 0), detail::at_or_null(c.input, 1), p}});
  if (spec.kind == "message-passing" && c.operation == "send") {
    Value dest = detail::at_or_null(c.input, 1);
    if (dest.is_string()) out.push_back({dest.get<std::string>(), c.object, "receive", {detail::at_or_null(c.input, 0), p}});
  }
  return out;
}

inline std::vector<Value> subsets_with(const std::vector<Value>& all, const Value& own) {
  std::vector<Value> others;
  for (const auto& v : all)
    if (v != own) others.push_back(v);
  std::vector<Value> out;
  for (std::uint64_t m = 0; m < (std::uint64_t{1} << others.size()); ++m) {
    std::set<Value> s{own};
    for (std::size_t i = 0; i < others.size(); ++i)
      if ((m >> i) & 1u) s.insert(others[i]);
    out.push_back(Value(std::vector<Value>(s.begin(), s.end())));
  }
  return out;
}

// Finite output domain of a call, drawn from the program text.
inline std::vector<Value> candidates(const Program& prog, const Call& c) {
  const ObjectSpec& spec = prog.registry.at(c.object);
  std::set<Value> vals;
  if (c.operation == "read") {
    for (const auto& [p, calls] : prog.calls)
      for (const auto& w : calls) {
        if (w.object != c.object || w.operation != "write") continue;
        if (spec.kind == "shared-memory") {
          if (detail::at_or_null(w.input, 1) == c.input) vals.insert(detail::at_or_null(w.input, 0));
        } else {
          vals.insert(w.input);
        }
      }
    return {vals.begin(), vals.end()};
  }
  if (c.operation == "test&set") return {Value(0), Value(1)};
  if (c.operation == "propose") {
    std::set<Value> all;
    for (const auto& [p, calls] : prog.calls)
      for (const auto& o : calls)
        if (o.object == c.object && o.operation == "propose") all.insert(o.input);
    return subsets_with({all.begin(), all.end()}, c.input);
  }
  return {Value()};
}

inline std::size_t event_count(const Program& prog) {
  std::size_t n = 0;
  for (const auto& [p, calls] : prog.calls)
    for (const auto& c : calls) n += 2 + mandated(prog, p, c).size();
  return n;
}

inline bool uses_positions(const ConditionSet& cond) {
  return cond.has(ClauseKind::history_order) || cond.has(ClauseKind::custom);
}

// Per-process event sequences: enough to decide conditions that never look
// at cross-process real time.
inline std::string local_key(const History& h) {
  std::map<ProcessId, std::vector<std::pair<int, Value>>> per;
  for (const auto& o : h.opexes) {
    if (o.inv) per[o.proc].emplace_back(o.inv->idx, Value{o.object, o.operation, "inv", o.input});
    if (o.res) per[o.proc].emplace_back(o.res->idx, Value{o.object, o.operation, "res", o.input, o.output});
  }
  Value k = Value::object();
  for (auto& [p, evs] : per) {
    std::sort(evs.begin(), evs.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    Value seq = Value::array();
    for (auto& [i, v] : evs) seq.push_back(v);
    k[p] = seq;
  }
  return k.dump();
}

inline std::string history_key(const History& h) {
  Value k = Value::array();
  for (const auto& o : h.opexes)
    k.push_back({o.object, o.operation, o.proc, o.input, o.output, o.inv ? Value(o.inv->position) : Value(),
                 o.res ? Value(o.res->position) : Value()});
  return k.dump();
}

}  // namespace harness

// All maximal interleavings of the program whose history the target
// condition accepts.
inline Generation enumerate_histories(const Program& prog, const GenConfig& cfg) {
  if (cfg.event_budget == 0) throw std::invalid_argument("event budget must be positive");
  for (const auto& [p, calls] : prog.calls) {
    if (!std::any_of(prog.processes.begin(), prog.processes.end(), [&](const Process& q) { return q.id == p; }))
      throw std::invalid_argument("calls given for undeclared process '" + p + "'");
    for (const auto& c : calls)
      if (!prog.registry.count(c.object)) throw SpecError("no spec registered for object '" + c.object + "'");
  }
  std::size_t total = harness::event_count(prog);
  if (total > cfg.event_budget)
    throw ResourceError("program needs " + std::to_string(total) + " events, budget is " +
                        std::to_string(cfg.event_budget));

  auto reg = std::make_shared<const Registry>(prog.registry);
  ConditionSet cond = condition_set(cfg.condition, reg, cfg.k);
  bool positional = harness::uses_positions(cond);

  Generation gen;
  std::map<std::string, bool> verdicts;
  std::map<std::string, History> kept;

  std::vector<OpEx> opexes;
  std::map<ProcessId, std::size_t> next;
  std::map<ProcessId, std::optional<std::size_t>> open;  // outstanding op-ex per process
  std::vector<harness::Notif> notifs;
  for (const auto& p : prog.processes) {
    next[p.id] = 0;
    open[p.id] = std::nullopt;
  }
  auto calls_of = [&](const ProcessId& p) -> const std::vector<Call>& {
    static const std::vector<Call> none;
    auto it = prog.calls.find(p);
    return it == prog.calls.end() ? none : it->second;
  };

  std::function<void(long)> dfs = [&](long pos) {
    bool any = false;
    for (const auto& proc : prog.processes) {
      const ProcessId& p = proc.id;
      if (open[p]) {
        std::size_t oi = *open[p];
        const Call& c = calls_of(p)[next[p] - 1];
        for (const Value& out : harness::candidates(prog, c)) {
          any = true;
          opexes[oi].output = out;
          opexes[oi].res = Event{"", Value(), pos, p, 0};
          open[p].reset();
          dfs(pos + 1);
          open[p] = oi;
          opexes[oi].res.reset();
          opexes[oi].output = Value();
        }
      } else if (next[p] < calls_of(p).size()) {
        any = true;
        const Call& c = calls_of(p)[next[p]];
        opexes.push_back({c.object, c.operation, p, c.input, Value(), Event{"", Value(), pos, p, 0}, std::nullopt});
        open[p] = opexes.size() - 1;
        ++next[p];
        auto extra = harness::mandated(prog, p, c);
        notifs.insert(notifs.end(), extra.begin(), extra.end());
        dfs(pos + 1);
        notifs.resize(notifs.size() - extra.size());
        --next[p];
        open[p].reset();
        opexes.pop_back();
      }
    }
    for (std::size_t i = 0; i < notifs.size(); ++i) {
      any = true;
      harness::Notif n = notifs[i];
      notifs.erase(notifs.begin() + static_cast<long>(i));
      opexes.push_back({n.object, n.operation, n.proc, Value(), n.output, std::nullopt, Event{"", Value(), pos, n.proc, 0}});
      dfs(pos + 1);
      opexes.pop_back();
      notifs.insert(notifs.begin() + static_cast<long>(i), n);
    }
    if (any) return;

    ++gen.interleavings;
    History h;
    h.name = prog.name;
    h.processes = prog.processes;
    h.opexes = opexes;
    finalize(h);
    std::string key = positional ? harness::history_key(h) : harness::local_key(h);
    auto it = verdicts.find(key);
    if (it == verdicts.end()) {
      ++gen.checks;
      it = verdicts.emplace(key, check(h, cond).accepted).first;
    }
    if (it->second) kept.emplace(harness::history_key(h), std::move(h));
  };
  dfs(0);

  std::size_t n = 0;
  for (auto& [k, h] : kept) {
    if (!validate_history(h, notification_ops(prog.registry)).valid())
      throw std::logic_error("generated history fails validation");
    h.name = (prog.name.empty() ? "h" : prog.name) + "-" + std::to_string(n++);
    gen.histories.push_back(std::move(h));
  }
  if (gen.histories.empty()) gen.warnings.push_back("no interleaving passes " + cfg.condition);
  return gen;
}

inline std::vector<std::string> builtin_program_names() { return {"alg1", "alg2", "alg3", "alg4", "alg5"}; }

inline std::pair<Program, GenConfig> builtin_program(const std::string& name) {
  Program p;
  p.name = name;
  GenConfig g;
  auto procs = [&](std::initializer_list<const char*> ids) {
    for (const char* id : ids) p.processes.push_back({id, ProcType::correct});
  };
  if (name == "alg1") {
    procs({"p1", "p2", "p3"});
    p.registry["M"] = make_shared_memory();
    p.spec_names["M"] = "shared-memory";
    p.calls["p1"] = {{"M", "write", {1, "x"}}};
    p.calls["p2"] = {{"M", "write", {2, "x"}}};
    p.calls["p3"] = {{"M", "read", "x"}};
    g.condition = "linearizability";
  } else if (name == "alg2") {
    procs({"p1", "p2"});
    p.registry["M"] = make_shared_memory();
    p.spec_names["M"] = "shared-memory";
    p.calls["p1"] = {{"M", "write", {1, "x"}}, {"M", "read", "x"}};
    p.calls["p2"] = {{"M", "write", {2, "x"}}, {"M", "read", "x"}};
    g.condition = "linearizability";
  } else if (name == "alg3") {
    procs({"p1", "p2"});
    p.registry["T"] = make_test_and_set();
    p.spec_names["T"] = "test-and-set";
    p.calls["p1"] = {{"T", "test&set", Value()}};
    p.calls["p2"] = {{"T", "test&set", Value()}};
    g.condition = "linearizability";
  } else if (name == "alg4" || name == "alg5") {
    procs({"p1", "p2"});
    p.registry["B"] = make_reliable_broadcast();
    p.spec_names["B"] = "reliable-broadcast";
    p.calls["p1"] = {{"B", "r_broadcast", {"m1", 1}}};
    p.calls["p2"] = {{"B", "r_broadcast", {"m2", 2}}};
    g.condition = name == "alg4" ? "process" : "process+serializability";
  } else {
    throw std::invalid_argument("unknown builtin program '" + name + "'");
  }
  return {p, g};
}

// Drops broadcast responses and every history in which a process delivers
// before its own broadcast.
inline std::vector<History> reduced_view(const std::vector<History>& hs) {
  std::vector<History> out;
  for (const auto& h : hs) {
    bool early = false;
    for (const auto& d : h.opexes) {
      if (d.operation != "r_deliver") continue;
      for (const auto& b : h.opexes)
        if (b.operation == "r_broadcast" && b.proc == d.proc && b.object == d.object && b.inv &&
            d.res->position < b.inv->position)
          early = true;
    }
    if (early) continue;
    History r = h;
    for (auto& o : r.opexes)
      if (o.operation == "r_broadcast") {
        o.res.reset();
        o.output = Value();
      }
    for (auto& o : r.opexes) {
      if (o.inv) o.inv->id.clear();
      if (o.res) o.res->id.clear();
    }
    finalize(r);
    out.push_back(std::move(r));
  }
  return out;
}

struct SinkSummary {
  std::size_t sinks = 0;
  std::map<std::string, std::size_t> classes;  // class key -> sink count
};

// Groups sink states by each process's sequence of non-null response values.
inline SinkSummary sink_summary(const Sigma& s) {
  SinkSummary r;
  for (std::size_t st : s.sinks()) {
    ++r.sinks;
    std::map<ProcessId, std::vector<std::pair<int, std::string>>> per;
    for (int e : s.states[st].events) {
      const EventKey& k = s.events[e];
      if (k.dir != Dir::res || k.value.is_null()) continue;
      per[k.proc].emplace_back(k.idx, k.operation + "(" + k.value.dump() + ")");
    }
    std::string key;
    for (auto& [p, evs] : per) {
      std::sort(evs.begin(), evs.end());
      key += p + ":";
      for (auto& [i, v] : evs) key += " " + v;
      key += "; ";
    }
    ++r.classes[key];
  }
  return r;
}

}  // namespace amecos
