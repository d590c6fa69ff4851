#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "amecos/history.hpp"
#include "amecos/object_specs.hpp"
#include "amecos/relation.hpp"

namespace amecos {

enum class ClauseKind {
  validity,
  safety,
  liveness,
  partial_order,
  total_order,
  history_order,
  process_order,
  fifo_order,
  int_order,
  set_order,
  kset_total_order,
  custom
};

struct ClauseOutcome {
  std::string clause;
  bool holds = true;
  std::optional<std::size_t> opex;  // offending op-ex, when one is to blame
  std::string explanation;
};

// The offending tuple of op-ex indices; empty when no single tuple is to
// blame (e.g. an object-level liveness failure).
struct Violation {
  std::vector<std::size_t> at;
  std::string what;
};

using Check = std::function<std::optional<Violation>(const History&, const RelationView&)>;

struct Clause {
  std::string name;
  ClauseKind kind = ClauseKind::custom;
  Check check;
  int k = 0;  // kSetTotalOrder only
};

struct ConditionSet {
  std::string name;
  std::vector<Clause> clauses;
  Value params = Value::object();
  std::shared_ptr<const Registry> registry;

  bool has(ClauseKind k) const {
    return std::any_of(clauses.begin(), clauses.end(), [k](const Clause& c) { return c.kind == k; });
  }

  bool has(const std::string& clause) const {
    return std::any_of(clauses.begin(), clauses.end(), [&](const Clause& c) { return c.name == clause; });
  }

  std::set<std::string> clause_names() const {
    std::set<std::string> out;
    for (const auto& c : clauses) out.insert(c.name);
    return out;
  }

  const Clause* find(ClauseKind k) const {
    for (const auto& c : clauses)
      if (c.kind == k) return &c;
    return nullptr;
  }
};

// Union of clause sets; a clause already present by name is kept once.
inline ConditionSet unite(const std::string& name, const ConditionSet& a, const ConditionSet& b) {
  ConditionSet out = a;
  out.name = name;
  for (const auto& c : b.clauses)
    if (!out.has(c.name)) out.clauses.push_back(c);
  if (!out.registry) out.registry = b.registry;
  for (auto it = b.params.begin(); it != b.params.end(); ++it) out.params[it.key()] = it.value();
  return out;
}

inline ConditionSet operator|(const ConditionSet& a, const ConditionSet& b) {
  return unite(a.name + "+" + b.name, a, b);
}

// ---------------------------------------------------------------------------
// Order predicates

namespace orders {

inline std::vector<std::size_t> all(std::size_t n) {
  std::vector<std::size_t> u(n);
  for (std::size_t i = 0; i < n; ++i) u[i] = i;
  return u;
}

inline std::optional<Violation> irreflexive(const std::vector<std::size_t>& u, const RelationView& rel) {
  for (std::size_t a : u)
    if (rel(a, a)) return Violation{{a}, "reflexive pair"};
  return std::nullopt;
}

inline std::optional<Violation> transitive(const std::vector<std::size_t>& u, const RelationView& rel) {
  for (std::size_t a : u)
    for (std::size_t b : u) {
      if (!rel(a, b)) continue;
      for (std::size_t c : u)
        if (rel(b, c) && !rel(a, c)) return Violation{{a, b, c}, "transitivity broken"};
    }
  return std::nullopt;
}

inline std::optional<Violation> connected(const std::vector<std::size_t>& u, const RelationView& rel) {
  for (std::size_t i = 0; i < u.size(); ++i)
    for (std::size_t j = i + 1; j < u.size(); ++j)
      if (!rel(u[i], u[j]) && !rel(u[j], u[i])) return Violation{{u[i], u[j]}, "unrelated pair"};
  return std::nullopt;
}

inline std::optional<Violation> partial(const std::vector<std::size_t>& u, const RelationView& rel) {
  if (auto v = irreflexive(u, rel)) return v;
  return transitive(u, rel);
}

inline std::optional<Violation> total(const std::vector<std::size_t>& u, const RelationView& rel) {
  if (auto v = partial(u, rel)) return v;
  return connected(u, rel);
}

// Does o = (i, r) have to precede o′ by real time?
inline bool forced_before(const OpEx& o, const OpEx& o2) {
  if (!o.res) return false;
  if (o2.inv) return o.res->position < o2.inv->position;
  return o2.res && o.res->position < o2.res->position;
}

inline std::optional<Violation> history(const History& h, const std::vector<std::size_t>& u,
                                        const RelationView& rel) {
  for (std::size_t a : u)
    for (std::size_t b : u) {
      if (a == b || !forced_before(h.opexes[a], h.opexes[b])) continue;
      if (!rel(a, b) || rel(b, a)) return Violation{{a, b}, "real-time precedence not respected"};
    }
  return std::nullopt;
}

inline std::map<ProcessId, std::vector<std::size_t>> by_process(const History& h) {
  std::map<ProcessId, std::vector<std::size_t>> out;
  for (std::size_t i = 0; i < h.opexes.size(); ++i) out[h.opexes[i].proc].push_back(i);
  return out;
}

inline std::optional<Violation> process(const History& h, const RelationView& rel) {
  for (const auto& [p, u] : by_process(h)) {
    if (auto v = history(h, u, rel)) return v;
    if (auto v = total(u, rel)) return v;
  }
  return std::nullopt;
}

inline std::optional<Violation> fifo(const History& h, const RelationView& rel) {
  auto procs = by_process(h);
  for (const auto& [pi, ui] : procs)
    for (const auto& [pj, uj] : procs)
      for (std::size_t oi : ui)
        for (std::size_t oi2 : ui) {
          if (!rel(oi, oi2)) continue;
          for (std::size_t oj : uj) {
            if (!rel(oi2, oj)) continue;
            for (std::size_t oj2 : uj)
              if (rel(oj, oj2) && rel(oi, oj2) && !(rel(oi, oj) && rel(oi2, oj2)))
                return Violation{{oi, oi2, oj, oj2}, "FIFO pattern without its implied pairs"};
          }
        }
  return std::nullopt;
}

inline std::optional<Violation> interval(const std::vector<std::size_t>& u, const RelationView& rel) {
  if (auto v = irreflexive(u, rel)) return v;
  if (auto v = connected(u, rel)) return v;
  for (std::size_t a : u)
    for (std::size_t c : u) {
      if (!rel(a, c)) continue;
      for (std::size_t b : u)
        if (!rel(a, b) && !rel(b, c)) return Violation{{a, b, c}, "forbidden interval pattern"};
    }
  return std::nullopt;
}

inline std::optional<Violation> set(const std::vector<std::size_t>& u, const RelationView& rel) {
  if (auto v = interval(u, rel)) return v;
  for (std::size_t a : u)
    for (std::size_t b : u) {
      if (!rel(a, b)) continue;
      for (std::size_t c : u)
        if (a != c && rel(b, c) && !rel(a, c)) return Violation{{a, b, c}, "weak transitivity broken"};
    }
  return std::nullopt;
}

// Visits set partitions of {0..m-1} into at most k blocks as restricted
// growth strings, in lexicographic order, until `visit` returns true.
inline bool for_each_partition(std::size_t m, std::size_t k,
                               const std::function<bool(const std::vector<std::size_t>&)>& visit) {
  if (m == 0) return visit({});
  std::vector<std::size_t> rgs(m, 0), maxv(m, 0);
  while (true) {
    if (visit(rgs)) return true;
    // next restricted growth string with blocks < k
    std::size_t i = m - 1;
    while (i > 0) {
      std::size_t limit = std::min(maxv[i - 1] + 1, k - 1);
      if (rgs[i] < limit) break;
      --i;
    }
    if (i == 0) return false;
    ++rgs[i];
    maxv[i] = std::max(maxv[i - 1], rgs[i]);
    for (std::size_t j = i + 1; j < m; ++j) {
      rgs[j] = 0;
      maxv[j] = maxv[i];
    }
  }
}

inline constexpr std::size_t kDefaultPartitionCap = 10;

inline std::optional<Violation> kset_total(const History& h, const RelationView& rel, std::size_t k,
                                           std::size_t cap = kDefaultPartitionCap) {
  if (k == 0) throw std::invalid_argument("k must be positive");
  auto procs = by_process(h);
  if (procs.size() > cap)
    throw ResourceError("kSetTotalOrder over " + std::to_string(procs.size()) + " processes exceeds cap " +
                        std::to_string(cap));
  std::vector<std::vector<std::size_t>> groups;
  for (auto& [p, u] : procs) groups.push_back(u);
  bool ok = for_each_partition(groups.size(), k, [&](const std::vector<std::size_t>& rgs) {
    std::size_t blocks = rgs.empty() ? 0 : *std::max_element(rgs.begin(), rgs.end()) + 1;
    for (std::size_t b = 0; b < blocks; ++b) {
      std::vector<std::size_t> u;
      for (std::size_t g = 0; g < groups.size(); ++g)
        if (rgs[g] == b) u.insert(u.end(), groups[g].begin(), groups[g].end());
      if (total(u, rel)) return false;
    }
    return true;
  });
  if (ok) return std::nullopt;
  return Violation{{}, "no partition into at most " + std::to_string(k) + " totally ordered blocks"};
}

}  // namespace orders

enum class OrderKind { partial, total };

inline bool generic_order(OrderKind kind, const std::vector<std::size_t>& universe, const RelationView& rel) {
  return !(kind == OrderKind::partial ? orders::partial(universe, rel) : orders::total(universe, rel));
}

inline bool history_order(const History& h, const RelationView& rel) {
  return !orders::history(h, orders::all(h.opexes.size()), rel);
}
inline bool process_order(const History& h, const RelationView& rel) { return !orders::process(h, rel); }
inline bool fifo_order(const History& h, const RelationView& rel) { return !orders::fifo(h, rel); }
inline bool interval_order(const History& h, const RelationView& rel) {
  return !orders::interval(orders::all(h.opexes.size()), rel);
}
inline bool set_order(const History& h, const RelationView& rel) {
  return !orders::set(orders::all(h.opexes.size()), rel);
}
inline bool k_set_total_order(const History& h, const RelationView& rel, std::size_t k,
                              std::size_t cap = orders::kDefaultPartitionCap) {
  return !orders::kset_total(h, rel, k, cap);
}

// ---------------------------------------------------------------------------
// Legality

namespace legality {

inline const OperationSpec& spec_for(const Registry& reg, const OpEx& o) {
  auto it = reg.find(o.object);
  if (it == reg.end()) throw SpecError("no spec registered for object '" + o.object + "'");
  const OperationSpec* op = it->second.find(o.operation);
  if (!op)
    throw SpecError("operation '" + o.operation + "' is not part of the " + it->second.kind + " spec of object '" +
                    o.object + "'");
  return *op;
}

inline void require_specs(const Registry& reg, const History& h) {
  for (const auto& o : h.opexes) spec_for(reg, o);
}

inline std::optional<Violation> validity(const Registry& reg, const History& h, const RelationView& rel) {
  for (std::size_t i = 0; i < h.opexes.size(); ++i) {
    const OpEx& o = h.opexes[i];
    if (!o.inv) continue;
    const OperationSpec& sp = spec_for(reg, o);
    if (sp.V && !sp.V(o, Context(h.opexes, rel, i))) return Violation{{i}, o.operation + ".V fails"};
  }
  return std::nullopt;
}

inline std::optional<Violation> safety(const Registry& reg, const History& h, const RelationView& rel) {
  for (std::size_t i = 0; i < h.opexes.size(); ++i) {
    const OpEx& o = h.opexes[i];
    if (!o.res) continue;
    const OperationSpec& sp = spec_for(reg, o);
    if (sp.S && !sp.S(o, Context(h.opexes, rel, i))) return Violation{{i}, o.operation + ".S fails"};
  }
  return std::nullopt;
}

inline std::optional<Violation> object_liveness(const Registry& reg, const History& h) {
  for (const auto& [obj, spec] : reg)
    if (spec.object_liveness && !spec.object_liveness(h, obj))
      return Violation{{}, "object " + obj + " (" + spec.kind + ") violates its liveness"};
  return std::nullopt;
}

inline std::optional<Violation> liveness(const Registry& reg, const History& h, const RelationView& rel) {
  for (std::size_t i = 0; i < h.opexes.size(); ++i) {
    const OperationSpec& sp = spec_for(reg, h.opexes[i]);
    if (sp.L && !sp.L(i, h, rel)) return Violation{{i}, h.opexes[i].operation + ".L fails"};
  }
  return object_liveness(reg, h);
}

}  // namespace legality

// ---------------------------------------------------------------------------
// Condition sets

inline ClauseOutcome outcome(const Clause& c, const History& h, const RelationView& rel) {
  ClauseOutcome out{c.name, true, std::nullopt, ""};
  if (auto v = c.check(h, rel)) {
    out.holds = false;
    if (v->at.size() == 1) out.opex = v->at[0];
    out.explanation = v->what;
    if (!v->at.empty()) {
      out.explanation += " at";
      for (std::size_t i : v->at) out.explanation += " " + opex_label(h, i);
    }
  }
  return out;
}

inline ConditionSet legality_clauses(std::shared_ptr<const Registry> reg) {
  if (!reg) throw std::invalid_argument("legality requires a spec registry");
  ConditionSet cs{"legality", {}, Value::object(), reg};
  const Registry* r = reg.get();
  cs.clauses.push_back({"Validity", ClauseKind::validity,
                        [r](const History& h, const RelationView& rel) { return legality::validity(*r, h, rel); }});
  cs.clauses.push_back({"Safety", ClauseKind::safety,
                        [r](const History& h, const RelationView& rel) { return legality::safety(*r, h, rel); }});
  cs.clauses.push_back({"Liveness", ClauseKind::liveness,
                        [r](const History& h, const RelationView& rel) { return legality::liveness(*r, h, rel); }});
  // keep the registry alive for as long as any copy of the clauses exists
  for (auto& c : cs.clauses) c.check = [reg, f = c.check](const History& h, const RelationView& rel) { return f(h, rel); };
  return cs;
}

inline ConditionSet legality_clauses(const Registry& reg) {
  return legality_clauses(std::make_shared<const Registry>(reg));
}

namespace clauses {

inline Clause partial_order() {
  return {"PartialOrder", ClauseKind::partial_order,
          [](const History& h, const RelationView& r) { return orders::partial(orders::all(h.opexes.size()), r); }};
}
inline Clause total_order() {
  return {"TotalOrder", ClauseKind::total_order,
          [](const History& h, const RelationView& r) { return orders::total(orders::all(h.opexes.size()), r); }};
}
inline Clause history_order() {
  return {"HistoryOrder", ClauseKind::history_order, [](const History& h, const RelationView& r) {
            return orders::history(h, orders::all(h.opexes.size()), r);
          }};
}
inline Clause process_order() {
  return {"ProcessOrder", ClauseKind::process_order,
          [](const History& h, const RelationView& r) { return orders::process(h, r); }};
}
inline Clause fifo_order() {
  return {"FIFOOrder", ClauseKind::fifo_order,
          [](const History& h, const RelationView& r) { return orders::fifo(h, r); }};
}
inline Clause int_order() {
  return {"IntOrder", ClauseKind::int_order,
          [](const History& h, const RelationView& r) { return orders::interval(orders::all(h.opexes.size()), r); }};
}
inline Clause set_order() {
  return {"SetOrder", ClauseKind::set_order,
          [](const History& h, const RelationView& r) { return orders::set(orders::all(h.opexes.size()), r); }};
}
inline Clause kset_total_order(int k) {
  Clause c{"kSetTotalOrder", ClauseKind::kset_total_order,
           [k](const History& h, const RelationView& r) { return orders::kset_total(h, r, static_cast<std::size_t>(k)); },
           k};
  return c;
}

}  // namespace clauses

inline const std::vector<std::string>& condition_names() {
  static const std::vector<std::string> names = {
      "legality",     "process",         "fifo",
      "causal",       "serializability", "sequential",
      "linearizability", "interval-linearizability", "set-linearizability",
      "k-serializability"};
  return names;
}

// Builds a named condition. "a+b" is the union of conditions a and b.
inline ConditionSet condition_set(const std::string& name, std::shared_ptr<const Registry> reg, int k = 1) {
  if (auto plus = name.find('+'); plus != std::string::npos)
    return unite(name, condition_set(name.substr(0, plus), reg, k), condition_set(name.substr(plus + 1), reg, k));
  auto with = [&](ConditionSet base, std::vector<Clause> extra) {
    for (auto& c : extra)
      if (!base.has(c.name)) base.clauses.push_back(std::move(c));
    base.name = name;
    return base;
  };
  if (name == "legality") return legality_clauses(reg);
  if (name == "process") return with(condition_set("legality", reg), {clauses::process_order()});
  if (name == "fifo") return with(condition_set("process", reg), {clauses::fifo_order()});
  if (name == "causal") return with(condition_set("fifo", reg), {clauses::partial_order()});
  if (name == "serializability") return with(condition_set("legality", reg), {clauses::total_order()});
  if (name == "sequential") return unite(name, condition_set("serializability", reg), condition_set("causal", reg));
  if (name == "linearizability") return with(condition_set("sequential", reg), {clauses::history_order()});
  if (name == "interval-linearizability")
    return with(condition_set("legality", reg), {clauses::history_order(), clauses::int_order()});
  if (name == "set-linearizability")
    return with(condition_set("interval-linearizability", reg), {clauses::set_order()});
  if (name == "k-serializability") {
    if (k < 1) throw std::invalid_argument("k-serializability needs k >= 1");
    auto cs = with(condition_set("legality", reg), {clauses::kset_total_order(k)});
    cs.params["k"] = k;
    return cs;
  }
  throw std::invalid_argument("unknown condition '" + name + "'");
}

inline ConditionSet condition_set(const std::string& name, const Registry& reg, int k = 1) {
  return condition_set(name, std::make_shared<const Registry>(reg), k);
}

inline std::vector<ClauseOutcome> evaluate(const History& h, const RelationView& rel, const ConditionSet& cond) {
  std::vector<ClauseOutcome> out;
  for (const auto& c : cond.clauses) out.push_back(outcome(c, h, rel));
  return out;
}

inline bool all_hold(const std::vector<ClauseOutcome>& outs) {
  return std::all_of(outs.begin(), outs.end(), [](const ClauseOutcome& o) { return o.holds; });
}

inline bool holds(const History& h, const RelationView& rel, const ConditionSet& cond) {
  for (const auto& c : cond.clauses)
    if (c.check(h, rel)) return false;
  return true;
}

}  // namespace amecos
