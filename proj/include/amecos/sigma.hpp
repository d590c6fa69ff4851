#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "amecos/checker.hpp"
#include "amecos/consistency.hpp"
#include "amecos/history.hpp"
#include "amecos/object_specs.hpp"

namespace amecos {

struct SigmaError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct PreconditionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Events of different histories are the same event iff these agree.
struct EventKey {
  ProcessId proc;
  int idx = 0;
  std::string object;
  std::string operation;
  Dir dir = Dir::inv;
  Value value;

  auto tie() const { return std::tie(proc, idx, object, operation, dir, value); }
  bool operator<(const EventKey& o) const { return tie() < o.tie(); }
  bool operator==(const EventKey& o) const { return tie() == o.tie(); }
};

inline EventKey event_key(const OpEx& o, Dir d) {
  const Event& e = d == Dir::inv ? *o.inv : *o.res;
  return {o.proc, e.idx, o.object, o.operation, d, d == Dir::inv ? o.input : o.output};
}

inline std::string proc_number(const ProcessId& p) {
  auto pos = p.find_last_not_of("0123456789");
  std::string digits = pos == std::string::npos ? p : p.substr(pos + 1);
  return digits.empty() ? p : digits;
}

inline std::string short_value(const Value& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_array() && !v.empty()) return short_value(v[0]);
  return v.dump();
}

// Abbreviated event names: WI1(v), WR1, RI1, RR1(v), T&SI1, T&SR1(v),
// B1(m), D1(m), d1/v; other operations fall back to OP.inv1 / OP.res1(v).
inline std::string event_label(const EventKey& k) {
  std::string i = proc_number(k.proc);
  bool inv = k.dir == Dir::inv;
  if (k.operation == "write") return inv ? "WI" + i + "(" + short_value(k.value) + ")" : "WR" + i;
  if (k.operation == "read") return inv ? "RI" + i : "RR" + i + "(" + short_value(k.value) + ")";
  if (k.operation == "test&set") return inv ? "T&SI" + i : "T&SR" + i + "(" + short_value(k.value) + ")";
  if (k.operation == "r_broadcast") return inv ? "B" + i + "(" + short_value(k.value) + ")" : "BR" + i;
  if (k.operation == "r_deliver") return "D" + i + "(" + short_value(k.value) + ")";
  if (k.operation == "decide") return "d" + i + "/" + short_value(k.value);
  if (inv) return k.operation + ".inv" + i + "(" + short_value(k.value) + ")";
  return k.operation + ".res" + i + "(" + short_value(k.value) + ")";
}

struct SigmaState {
  std::vector<int> events;  // sorted event ids; ids follow EventKey order
  bool complete = false;
  std::set<std::size_t> sources;           // histories it is extracted from
  std::set<std::size_t> complete_sources;  // histories whose full event set it is
};

struct SigmaEdge {
  std::size_t from;
  int event;
  std::size_t to;
};

struct Sigma {
  std::vector<History> histories;
  std::vector<EventKey> events;
  std::vector<SigmaState> states;  // canonical order: by size, then event keys
  std::vector<SigmaEdge> edges;
  std::vector<std::vector<std::size_t>> out;  // edge indices, by event id
  std::vector<std::vector<std::size_t>> in;
  std::map<std::vector<int>, std::size_t> index;
  std::vector<std::set<Value>> valence;  // filled by compute_valence
  std::optional<std::string> agreement;

  std::optional<std::size_t> find(const std::vector<int>& evs) const {
    auto it = index.find(evs);
    if (it == index.end()) return std::nullopt;
    return it->second;
  }

  std::vector<std::size_t> complete_states() const {
    std::vector<std::size_t> out_;
    for (std::size_t s = 0; s < states.size(); ++s)
      if (states[s].complete) out_.push_back(s);
    return out_;
  }

  std::vector<std::size_t> sinks() const {
    std::vector<std::size_t> out_;
    for (std::size_t s = 0; s < states.size(); ++s)
      if (out[s].empty()) out_.push_back(s);
    return out_;
  }

  std::set<ProcessId> processes() const {
    std::set<ProcessId> ps;
    for (const auto& h : histories) {
      for (const auto& p : h.processes) ps.insert(p.id);
      for (const auto& o : h.opexes) ps.insert(o.proc);
    }
    return ps;
  }

  std::string label(int e) const { return event_label(events[e]); }

  std::string describe(std::size_t s) const {
    std::string out_ = "{";
    for (std::size_t i = 0; i < states[s].events.size(); ++i)
      out_ += (i ? ", " : "") + label(states[s].events[i]);
    return out_ + "}";
  }

  std::vector<std::string> labels(const std::vector<int>& evs) const {
    std::vector<std::string> out_;
    for (int e : evs) out_.push_back(label(e));
    return out_;
  }
};

namespace sigma_detail {

inline std::vector<int> merge(std::vector<int> a, const std::vector<int>& b) {
  a.insert(a.end(), b.begin(), b.end());
  std::sort(a.begin(), a.end());
  a.erase(std::unique(a.begin(), a.end()), a.end());
  return a;
}

inline bool subset(const std::vector<int>& a, const std::vector<int>& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

}  // namespace sigma_detail

// Every combination of per-process event prefixes of every history is a
// state; edges add one event of one process.
inline Sigma build_sigma(const std::vector<History>& histories) {
  Sigma s;
  s.histories = histories;
  std::map<EventKey, Value> inputs;  // res events also remember their op-ex input
  for (const auto& h : histories)
    for (const auto& o : h.opexes)
      for (Dir d : {Dir::inv, Dir::res}) {
        if ((d == Dir::inv && !o.inv) || (d == Dir::res && !o.res)) continue;
        EventKey k = event_key(o, d);
        auto [it, fresh] = inputs.emplace(k, o.input);
        if (!fresh && it->second != o.input)
          throw SigmaError("event " + event_label(k) + " of history '" + h.name +
                           "' has the key of an event with a different input");
      }
  std::map<EventKey, int> ids;
  for (const auto& [k, in] : inputs) {
    ids[k] = static_cast<int>(s.events.size());
    s.events.push_back(k);
  }

  std::map<std::vector<int>, std::size_t> tmp_index;
  std::vector<SigmaState> tmp;
  std::set<std::tuple<std::size_t, int, std::size_t>> edge_set;
  auto intern = [&](const std::vector<int>& evs) {
    auto [it, fresh] = tmp_index.emplace(evs, tmp.size());
    if (fresh) tmp.push_back({evs, false, {}, {}});
    return it->second;
  };

  for (std::size_t hi = 0; hi < histories.size(); ++hi) {
    const History& h = histories[hi];
    std::map<ProcessId, std::vector<std::pair<int, int>>> per;  // (idx, event id)
    for (const auto& o : h.opexes) {
      if (o.inv) per[o.proc].emplace_back(o.inv->idx, ids.at(event_key(o, Dir::inv)));
      if (o.res) per[o.proc].emplace_back(o.res->idx, ids.at(event_key(o, Dir::res)));
    }
    std::vector<std::vector<int>> seqs;
    for (auto& [p, evs] : per) {
      std::sort(evs.begin(), evs.end());
      for (std::size_t i = 0; i < evs.size(); ++i)
        if (evs[i].first != static_cast<int>(i + 1))
          throw SigmaError("history '" + h.name + "': events of " + p + " are not indexed 1.." +
                           std::to_string(evs.size()));
      std::vector<int> seq;
      for (auto [i, e] : evs) seq.push_back(e);
      seqs.push_back(seq);
    }
    std::vector<std::size_t> len(seqs.size(), 0);
    auto state_of = [&](const std::vector<std::size_t>& l) {
      std::vector<int> evs;
      for (std::size_t p = 0; p < seqs.size(); ++p) evs.insert(evs.end(), seqs[p].begin(), seqs[p].begin() + l[p]);
      std::sort(evs.begin(), evs.end());
      return evs;
    };
    while (true) {
      std::size_t from = intern(state_of(len));
      tmp[from].sources.insert(hi);
      bool full = true;
      for (std::size_t p = 0; p < seqs.size(); ++p) {
        if (len[p] == seqs[p].size()) continue;
        full = false;
        auto next = len;
        ++next[p];
        std::size_t to = intern(state_of(next));
        edge_set.emplace(from, seqs[p][len[p]], to);
      }
      if (full) {
        tmp[from].complete = true;
        tmp[from].complete_sources.insert(hi);
      }
      std::size_t p = 0;
      while (p < seqs.size() && len[p] == seqs[p].size()) len[p++] = 0;
      if (p == seqs.size()) break;
      ++len[p];
    }
  }

  std::vector<std::size_t> order(tmp.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (tmp[a].events.size() != tmp[b].events.size()) return tmp[a].events.size() < tmp[b].events.size();
    return tmp[a].events < tmp[b].events;
  });
  std::vector<std::size_t> rank(tmp.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    rank[order[i]] = i;
    s.states.push_back(tmp[order[i]]);
    s.index[s.states.back().events] = i;
  }
  std::vector<std::tuple<std::size_t, int, std::size_t>> es;
  for (auto [f, e, t] : edge_set) es.emplace_back(rank[f], e, rank[t]);
  std::sort(es.begin(), es.end());
  s.out.assign(s.states.size(), {});
  s.in.assign(s.states.size(), {});
  for (auto [f, e, t] : es) {
    s.out[f].push_back(s.edges.size());
    s.in[t].push_back(s.edges.size());
    s.edges.push_back({f, e, t});
  }
  for (std::size_t i = 1; i < s.states.size(); ++i)
    if (s.in[i].empty()) throw std::logic_error("built state space violates continuity");
  return s;
}

// ---------------------------------------------------------------------------
// Axioms

struct AxiomReport {
  std::string axiom;
  bool holds = true;
  Value witness;  // readable counterexample or supporting data
  std::optional<std::size_t> state;
  std::vector<int> events;
  std::vector<std::size_t> states;
  std::optional<ProcessId> proc;
};

enum class AsyncMode { pairwise, setwise };

inline AxiomReport check_continuity(const Sigma& s) {
  AxiomReport r{"Continuity"};
  for (std::size_t i = 0; i < s.states.size(); ++i)
    if (!s.states[i].events.empty() && s.in[i].empty()) {
      r.holds = false;
      r.state = i;
      r.witness = {{"state", s.describe(i)}};
      return r;
    }
  return r;
}

namespace sigma_detail {

// States reachable from `from` by events of `p` only, in canonical order.
inline std::vector<std::size_t> solo_extensions(const Sigma& s, std::size_t from, const ProcessId& p) {
  std::set<std::size_t> seen;
  std::vector<std::size_t> todo{from};
  while (!todo.empty()) {
    std::size_t cur = todo.back();
    todo.pop_back();
    for (std::size_t e : s.out[cur]) {
      const SigmaEdge& ed = s.edges[e];
      if (s.events[ed.event].proc == p && seen.insert(ed.to).second) todo.push_back(ed.to);
    }
  }
  return {seen.begin(), seen.end()};
}

inline std::vector<int> minus(const std::vector<int>& a, const std::vector<int>& b) {
  std::vector<int> out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

}  // namespace sigma_detail

inline AxiomReport check_asynchrony(const Sigma& s, AsyncMode mode = AsyncMode::pairwise,
                                    std::optional<std::uint64_t> max_nodes = std::nullopt) {
  AxiomReport r{mode == AsyncMode::pairwise ? "Asynchrony" : "Asynchrony(setwise)"};
  std::uint64_t nodes = 0;
  auto tick = [&] {
    if (max_nodes && ++nodes > *max_nodes)
      throw ResourceError("asynchrony check exceeded the node budget of " + std::to_string(*max_nodes));
  };
  for (std::size_t st = 0; st < s.states.size(); ++st) {
    const auto& base = s.states[st].events;
    if (mode == AsyncMode::pairwise) {
      const auto& outs = s.out[st];
      for (std::size_t i = 0; i < outs.size(); ++i)
        for (std::size_t j = i + 1; j < outs.size(); ++j) {
          const SigmaEdge& a = s.edges[outs[i]];
          const SigmaEdge& b = s.edges[outs[j]];
          if (s.events[a.event].proc == s.events[b.event].proc) continue;
          tick();
          if (!s.find(sigma_detail::merge(s.states[a.to].events, s.states[b.to].events))) {
            r.holds = false;
            r.state = st;
            r.events = {a.event, b.event};
            r.states = {a.to, b.to};
            r.witness = {{"state", s.describe(st)}, {"e", s.label(a.event)}, {"e_prime", s.label(b.event)}};
            return r;
          }
        }
      continue;
    }
    std::vector<ProcessId> procs;
    for (const auto& p : s.processes()) procs.push_back(p);
    std::vector<std::vector<std::size_t>> ext(procs.size());
    for (std::size_t p = 0; p < procs.size(); ++p) {
      ext[p] = sigma_detail::solo_extensions(s, st, procs[p]);
      std::stable_sort(ext[p].begin(), ext[p].end(), [&](std::size_t a, std::size_t b) {
        return s.states[a].events.size() < s.states[b].events.size();
      });
    }
    for (std::size_t p = 0; p < procs.size(); ++p)
      for (std::size_t q = p + 1; q < procs.size(); ++q)
        for (std::size_t a : ext[p])
          for (std::size_t b : ext[q]) {
            tick();
            if (s.find(sigma_detail::merge(s.states[a].events, s.states[b].events))) continue;
            auto e1 = sigma_detail::minus(s.states[a].events, base);
            auto e2 = sigma_detail::minus(s.states[b].events, base);
            r.holds = false;
            r.state = st;
            r.states = {a, b};
            r.events = e1;
            r.events.insert(r.events.end(), e2.begin(), e2.end());
            r.witness = {{"state", s.describe(st)}, {"E1", s.labels(e1)}, {"E2", s.labels(e2)}};
            return r;
          }
  }
  return r;
}

// ---------------------------------------------------------------------------
// Valence

inline std::set<Value> decided_values(const History& h, const std::optional<std::string>& object) {
  std::set<Value> out;
  for (const auto& o : h.opexes)
    if (o.operation == "decide" && o.res && (!object || o.object == *object)) out.insert(o.output);
  return out;
}

inline void compute_valence(Sigma& s, std::optional<std::string> object = std::nullopt) {
  s.agreement = object;
  s.valence.assign(s.states.size(), {});
  for (std::size_t i = s.states.size(); i-- > 0;) {
    if (s.states[i].complete) {
      for (std::size_t h : s.states[i].complete_sources) {
        auto d = decided_values(s.histories[h], object);
        s.valence[i].insert(d.begin(), d.end());
      }
      continue;
    }
    if (s.out[i].empty()) throw std::logic_error("state " + s.describe(i) + " is neither complete nor extendable");
    for (std::size_t e : s.out[i]) {
      const auto& v = s.valence[s.edges[e].to];
      s.valence[i].insert(v.begin(), v.end());
    }
  }
}

inline Value valence_json(const std::set<Value>& v) { return Value(std::vector<Value>(v.begin(), v.end())); }

inline void require_valence(const Sigma& s) {
  if (s.valence.size() != s.states.size()) throw std::logic_error("valence not computed");
}

// Val(σ∪{e}) ⊆ Val(σ) on every edge.
inline AxiomReport check_branching(const Sigma& s) {
  require_valence(s);
  AxiomReport r{"Branching"};
  for (const auto& e : s.edges) {
    const auto& a = s.valence[e.from];
    const auto& b = s.valence[e.to];
    if (!std::includes(a.begin(), a.end(), b.begin(), b.end())) {
      r.holds = false;
      r.state = e.from;
      r.events = {e.event};
      r.witness = {{"state", s.describe(e.from)}, {"e", s.label(e.event)}};
      return r;
    }
  }
  return r;
}

inline std::vector<AxiomReport> verify_valence_lemmas(const Sigma& s) {
  require_valence(s);
  AxiomReport nev{"NonEmptyValence"};
  for (std::size_t i = 0; i < s.states.size(); ++i)
    if (s.valence[i].empty()) {
      nev.holds = false;
      nev.state = i;
      nev.witness = {{"state", s.describe(i)}};
      break;
    }

  AxiomReport term{"Termination"};
  Value subs = Value::array();
  for (std::size_t c : s.complete_states()) {
    const auto& val = s.valence[c];
    std::optional<std::size_t> found;
    if (val.size() == 1) {
      for (int e : s.states[c].events) {
        const EventKey& k = s.events[e];
        if (k.operation != "decide" || k.dir != Dir::res) continue;
        if (s.agreement && k.object != *s.agreement) continue;
        std::vector<int> prefix;
        for (int f : s.states[c].events)
          if (s.events[f].proc == k.proc && s.events[f].idx <= k.idx) prefix.push_back(f);
        auto st = s.find(prefix);
        if (st && s.valence[*st] == val) {
          found = st;
          break;
        }
      }
      if (!found)
        for (std::size_t t = 0; t < s.states.size() && !found; ++t)
          if (s.valence[t] == val && sigma_detail::subset(s.states[t].events, s.states[c].events)) found = t;
    }
    if (!found) {
      term.holds = false;
      term.state = c;
      term.witness = {{"state", s.describe(c)}, {"valence", valence_json(val)}};
      break;
    }
    subs.push_back({{"complete", s.describe(c)}, {"univalent_substate", s.describe(*found)}});
  }
  if (term.holds) term.witness = subs;
  return {nev, term};
}

inline std::vector<AxiomReport> check_consensus_axioms(const Sigma& s) {
  require_valence(s);
  AxiomReport nt{"NonTriviality", false};
  std::optional<std::size_t> a, b;
  for (std::size_t i = 0; i < s.states.size() && !b; ++i) {
    if (s.valence[i].size() != 1) continue;
    if (!a) a = i;
    else if (s.valence[i] != s.valence[*a]) b = i;
  }
  if (!b) {
    a.reset();
    for (std::size_t i = 0; i < s.states.size() && !b; ++i) {
      if (!a) a = i;
      else if (s.valence[i] != s.valence[*a]) b = i;
    }
  }
  if (b) {
    nt.holds = true;
    nt.states = {*a, *b};
    nt.witness = {{"states", {s.describe(*a), s.describe(*b)}},
                  {"valences", {valence_json(s.valence[*a]), valence_json(s.valence[*b])}}};
  } else {
    nt.witness = {{"valences", s.states.empty() ? Value::array() : Value::array({valence_json(s.valence[0])})}};
  }

  AxiomReport res{"Resilience"};
  auto procs = s.processes();
  for (std::size_t i = 0; i < s.states.size() && res.holds; ++i) {
    if (s.valence[i].size() <= 1) continue;
    for (const auto& p : procs) {
      bool ok = std::any_of(s.out[i].begin(), s.out[i].end(),
                            [&](std::size_t e) { return s.events[s.edges[e].event].proc != p; });
      if (!ok) {
        res.holds = false;
        res.state = i;
        res.proc = p;
        res.witness = {{"state", s.describe(i)}, {"process", p}};
        break;
      }
    }
  }
  return {nt, res};
}

// Walks from the first multivalent state through multivalent one-event
// extensions until every extension is univalent.
inline std::optional<std::size_t> find_critical_state(const Sigma& s) {
  require_valence(s);
  std::optional<std::size_t> cur;
  for (std::size_t i = 0; i < s.states.size() && !cur; ++i)
    if (s.valence[i].size() > 1) cur = i;
  if (!cur) return std::nullopt;
  while (true) {
    std::optional<std::size_t> next;
    for (std::size_t e : s.out[*cur])
      if (s.valence[s.edges[e].to].size() > 1) {
        next = s.edges[e].to;
        break;
      }
    if (!next) return cur;
    cur = next;
  }
}

// ---------------------------------------------------------------------------
// Audits

struct AuditReport {
  std::string theorem;
  std::vector<AxiomReport> axioms;
  std::vector<std::string> violated;  // failed hypotheses of the theorem
  std::optional<std::size_t> critical;
  Value contradiction;  // set when every hypothesis held

  bool consistent_with_theorem() const { return !violated.empty(); }

  const AxiomReport* find(const std::string& name) const {
    for (const auto& a : axioms)
      if (a.axiom == name) return &a;
    return nullptr;
  }
};

namespace sigma_detail {

inline std::string agreement_object(const Registry& reg, const std::optional<std::string>& object,
                                    const std::set<std::string>& kinds) {
  if (object) {
    if (!reg.count(*object)) throw std::invalid_argument("no spec registered for agreement object '" + *object + "'");
    return *object;
  }
  std::vector<std::string> found;
  for (const auto& [name, spec] : reg)
    if (kinds.count(spec.kind)) found.push_back(name);
  if (found.size() != 1) throw std::invalid_argument("expected exactly one agreement object in the registry");
  return found[0];
}

inline void recheck(const Sigma& s, const std::string& obj, const ConditionSet& cond) {
  for (std::size_t i = 0; i < s.histories.size(); ++i) {
    History h = project_object(s.histories[i], obj);
    if (!check(h, cond).accepted) {
      std::string name = s.histories[i].name.empty() ? "#" + std::to_string(i) : s.histories[i].name;
      throw PreconditionError("history '" + name + "' on object " + obj + " is not accepted under " + cond.name);
    }
  }
}

}  // namespace sigma_detail

inline AuditReport flp_audit(Sigma& s, const Registry& reg, std::optional<std::string> object = std::nullopt) {
  std::string obj = sigma_detail::agreement_object(reg, object, {"consensus"});
  Registry only{{obj, reg.at(obj)}};
  sigma_detail::recheck(s, obj, condition_set("serializability", only));
  compute_valence(s, obj);

  AuditReport r{"FLP"};
  r.axioms.push_back(check_asynchrony(s, AsyncMode::pairwise));
  for (auto& a : check_consensus_axioms(s)) r.axioms.push_back(a);
  for (auto& a : verify_valence_lemmas(s)) r.axioms.push_back(a);
  r.axioms.push_back(check_continuity(s));
  for (const auto& a : r.axioms)
    if (!a.holds) r.violated.push_back(a.axiom);
  r.critical = find_critical_state(s);
  if (!r.violated.empty()) return r;

  // All hypotheses hold: replay the contradiction at the critical state.
  Value c = Value::object();
  if (!r.critical) {
    c["note"] = "no multivalent state although NonTriviality holds";
    r.contradiction = c;
    return r;
  }
  std::size_t sc = *r.critical;
  const auto& outs = s.out[sc];
  for (std::size_t i = 0; i < outs.size(); ++i)
    for (std::size_t j = 0; j < outs.size(); ++j) {
      const SigmaEdge& a = s.edges[outs[i]];
      const SigmaEdge& b = s.edges[outs[j]];
      if (s.valence[a.to] == s.valence[b.to] || s.events[a.event].proc == s.events[b.event].proc) continue;
      auto u = s.find(sigma_detail::merge(s.states[a.to].events, s.states[b.to].events));
      c = {{"critical", s.describe(sc)},
           {"e", s.label(a.event)},
           {"e_prime", s.label(b.event)},
           {"union_valence", u ? valence_json(s.valence[*u]) : Value()}};
      r.contradiction = c;
      return r;
    }
  c = {{"critical", s.describe(sc)}, {"note", "no pair of extensions with different valences"}};
  r.contradiction = c;
  return r;
}

// Values p decides in states made only of p's events.
inline std::map<Value, std::size_t> solo_witnesses(const Sigma& s, const ProcessId& p,
                                                   const std::optional<std::string>& object = std::nullopt) {
  std::map<Value, std::size_t> out;
  for (std::size_t i = 0; i < s.states.size(); ++i) {
    const auto& evs = s.states[i].events;
    if (evs.empty()) continue;
    if (!std::all_of(evs.begin(), evs.end(), [&](int e) { return s.events[e].proc == p; })) continue;
    for (int e : evs) {
      const EventKey& k = s.events[e];
      if (k.operation == "decide" && k.dir == Dir::res && (!object || k.object == *object))
        out.emplace(k.value, i);
    }
  }
  return out;
}

inline std::set<Value> solo_values(const Sigma& s, const ProcessId& p,
                                   const std::optional<std::string>& object = std::nullopt) {
  std::set<Value> out;
  for (const auto& [v, st] : solo_witnesses(s, p, object)) out.insert(v);
  return out;
}

namespace sigma_detail {

// Largest number of distinct values in a selection v_i ∈ F_i (bipartite
// matching of processes to values).
inline std::map<ProcessId, Value> best_selection(const std::vector<ProcessId>& procs,
                                                 const std::map<ProcessId, std::set<Value>>& f) {
  std::map<Value, ProcessId> owner;
  std::function<bool(const ProcessId&, std::set<Value>&)> augment = [&](const ProcessId& p, std::set<Value>& seen) {
    for (const Value& v : f.at(p)) {
      if (!seen.insert(v).second) continue;
      auto it = owner.find(v);
      if (it == owner.end() || augment(it->second, seen)) {
        owner[v] = p;
        return true;
      }
    }
    return false;
  };
  for (const auto& p : procs) {
    std::set<Value> seen;
    augment(p, seen);
  }
  std::map<ProcessId, Value> sel;
  for (const auto& [v, p] : owner) sel[p] = v;
  for (const auto& p : procs)
    if (!sel.count(p) && !f.at(p).empty()) sel[p] = *f.at(p).begin();
  return sel;
}

}  // namespace sigma_detail

inline AuditReport ksa_audit(Sigma& s, int k, const Registry& reg, std::optional<std::string> object = std::nullopt,
                             std::optional<std::uint64_t> max_nodes = std::nullopt) {
  if (k < 1) throw std::invalid_argument("k must be positive");
  std::string obj = sigma_detail::agreement_object(reg, object, {"set-agreement", "consensus"});
  auto procs_set = s.processes();
  std::vector<ProcessId> procs(procs_set.begin(), procs_set.end());
  if (static_cast<std::size_t>(k) >= procs.size())
    throw std::invalid_argument("k-set agreement audit needs k < n");
  Registry only{{obj, reg.at(obj)}};
  sigma_detail::recheck(s, obj, condition_set("k-serializability", only, k));
  compute_valence(s, obj);

  AuditReport r{"k-SA"};
  std::map<ProcessId, std::set<Value>> f;
  AxiomReport wfr{"WaitFreeResilience"};
  Value fs = Value::object();
  for (const auto& p : procs) {
    f[p] = solo_values(s, p, obj);
    fs[p] = valence_json(f[p]);
    if (f[p].empty() && wfr.holds) {
      wfr.holds = false;
      wfr.proc = p;
    }
  }
  wfr.witness = {{"F", fs}};
  r.axioms.push_back(wfr);

  AxiomReport nt{"NonTriviality"};
  std::map<ProcessId, Value> sel;
  if (wfr.holds) sel = sigma_detail::best_selection(procs, f);
  std::set<Value> distinct;
  for (const auto& [p, v] : sel) distinct.insert(v);
  nt.holds = wfr.holds && distinct.size() >= static_cast<std::size_t>(k) + 1;
  Value selj = Value::object();
  for (const auto& [p, v] : sel) selj[p] = v;
  nt.witness = {{"selection", selj}, {"distinct", distinct.size()}, {"needed", k + 1}};
  r.axioms.push_back(nt);

  r.axioms.push_back(check_asynchrony(s, AsyncMode::setwise, max_nodes));
  for (const auto& a : r.axioms)
    if (!a.holds) r.violated.push_back(a.axiom);
  if (!r.violated.empty()) return r;

  std::vector<int> uni;
  for (const auto& [p, v] : sel) uni = sigma_detail::merge(uni, s.states[solo_witnesses(s, p, obj).at(v)].events);
  Value c = {{"union_state", s.labels(uni)}, {"distinct_values", distinct.size()}};
  if (auto st = s.find(uni)) {
    Value hs = Value::array();
    for (std::size_t h : s.states[*st].sources) hs.push_back(s.histories[h].name);
    c["histories"] = hs;
  } else {
    c["note"] = "union state missing from the state space";
  }
  r.contradiction = c;
  return r;
}

}  // namespace amecos
