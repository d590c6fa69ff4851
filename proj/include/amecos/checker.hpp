#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "amecos/consistency.hpp"
#include "amecos/history.hpp"
#include "amecos/object_specs.hpp"
#include "amecos/relation.hpp"

namespace amecos {

enum class Strategy { automatic, permutation, pairwise };

inline const char* to_string(Strategy s) {
  switch (s) {
    case Strategy::automatic: return "auto";
    case Strategy::permutation: return "permutation";
    case Strategy::pairwise: return "pairwise";
  }
  return "auto";
}

struct SearchConfig {
  Strategy strategy = Strategy::automatic;
  std::optional<std::size_t> max_opexes;  // default 12 (permutation), 8 (pairwise)
  std::optional<std::uint64_t> max_nodes;
};

inline constexpr std::size_t kPermutationCap = 12;
inline constexpr std::size_t kPairwiseCap = 8;
inline constexpr std::size_t kBruteRelationCap = 5;
inline constexpr std::size_t kBrutePermutationCap = 8;

struct Verdict {
  bool accepted = false;
  std::optional<OrderRelation> witness;
  std::optional<History> repaired;         // Byzantine checks only
  std::vector<std::size_t> inserted;       // op-ex indices in `repaired`
  std::vector<std::string> diagnosis;      // clauses that failed during the search
  std::vector<ClauseOutcome> outcomes;     // witness re-evaluation, or the all-false probe
  std::uint64_t nodes = 0;
  double elapsed_ms = 0;
  bool bounded = false;                    // rejection is relative to Byzantine bounds
  std::string strategy;
};

namespace search {

// Unknown pairs read as false and are logged, so a failing predicate tells
// which pairs could still change its answer.
class PartialView : public RelationView {
 public:
  explicit PartialView(std::size_t n) : n_(n), val_(n * n, -1), seen_(n * n, 0) {
    for (std::size_t a = 0; a < n; ++a) val_[a * n + a] = 0;
  }

  std::size_t size() const override { return n_; }

  bool operator()(std::size_t a, std::size_t b) const override {
    std::size_t v = a * n_ + b;
    if (val_[v] >= 0) return val_[v] == 1;
    if (!seen_[v]) {
      seen_[v] = 1;
      reads_.push_back(v);
    }
    return false;
  }

  void start() const {
    for (std::size_t v : reads_) seen_[v] = 0;
    reads_.clear();
  }

  const std::vector<std::size_t>& reads() const { return reads_; }

  signed char get(std::size_t v) const { return val_[v]; }
  void put(std::size_t v, signed char x) { val_[v] = x; }
  std::size_t var(std::size_t a, std::size_t b) const { return a * n_ + b; }

  OrderRelation completion() const {
    OrderRelation r(n_);
    for (std::size_t a = 0; a < n_; ++a)
      for (std::size_t b = 0; b < n_; ++b)
        if (val_[a * n_ + b] == 1) r.set(a, b);
    return r;
  }

 private:
  std::size_t n_;
  std::vector<signed char> val_;
  mutable std::vector<char> seen_;
  mutable std::vector<std::size_t> reads_;
};

// One independently checkable piece of a condition.
struct Atom {
  std::string clause;
  std::function<bool(const RelationView&)> ok;
};

inline int cost_rank(ClauseKind k) {
  switch (k) {
    case ClauseKind::history_order: return 0;
    case ClauseKind::process_order: return 1;
    case ClauseKind::total_order: return 2;
    case ClauseKind::partial_order: return 3;
    case ClauseKind::int_order: return 4;
    case ClauseKind::set_order: return 5;
    case ClauseKind::fifo_order: return 6;
    case ClauseKind::validity: return 7;
    case ClauseKind::safety: return 8;
    case ClauseKind::liveness: return 9;
    case ClauseKind::custom: return 10;
    case ClauseKind::kset_total_order: return 11;
  }
  return 10;
}

inline std::vector<const Clause*> by_cost(const ConditionSet& cond) {
  std::vector<const Clause*> cs;
  for (const auto& c : cond.clauses) cs.push_back(&c);
  std::stable_sort(cs.begin(), cs.end(),
                   [](const Clause* a, const Clause* b) { return cost_rank(a->kind) < cost_rank(b->kind); });
  return cs;
}

// Legality splits per op-ex when the registry is known; other clauses stay
// whole.
inline std::vector<Atom> atoms(const History& h, const ConditionSet& cond) {
  std::vector<Atom> out;
  const Registry* reg = cond.registry.get();
  for (const Clause* c : by_cost(cond)) {
    bool legal = c->kind == ClauseKind::validity || c->kind == ClauseKind::safety || c->kind == ClauseKind::liveness;
    if (!legal || !reg) {
      out.push_back({c->name, [c, &h](const RelationView& r) { return !c->check(h, r); }});
      continue;
    }
    for (std::size_t i = 0; i < h.opexes.size(); ++i) {
      const OpEx& o = h.opexes[i];
      const OperationSpec& sp = legality::spec_for(*reg, o);
      if (c->kind == ClauseKind::validity && o.inv && sp.V)
        out.push_back({c->name, [&h, &sp, i](const RelationView& r) {
                         return sp.V(h.opexes[i], Context(h.opexes, r, i));
                       }});
      if (c->kind == ClauseKind::safety && o.res && sp.S)
        out.push_back({c->name, [&h, &sp, i](const RelationView& r) {
                         return sp.S(h.opexes[i], Context(h.opexes, r, i));
                       }});
      if (c->kind == ClauseKind::liveness && sp.L)
        out.push_back({c->name, [&h, &sp, i](const RelationView& r) { return sp.L(i, h, r); }});
    }
  }
  return out;
}

inline std::vector<std::pair<std::size_t, std::size_t>> forced_pairs(const History& h, const ConditionSet& cond) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  bool all = cond.has(ClauseKind::history_order);
  bool per_proc = cond.has(ClauseKind::process_order);
  if (!all && !per_proc) return out;
  for (std::size_t a = 0; a < h.opexes.size(); ++a)
    for (std::size_t b = 0; b < h.opexes.size(); ++b) {
      if (a == b || !orders::forced_before(h.opexes[a], h.opexes[b])) continue;
      if (all || h.opexes[a].proc == h.opexes[b].proc) out.emplace_back(a, b);
    }
  return out;
}

class Searcher {
 public:
  Searcher(const History& h, const ConditionSet& cond, const SearchConfig& cfg)
      : h_(h), cond_(cond), cfg_(cfg), atoms_(atoms(h, cond)), view_(h.opexes.size()) {}

  std::uint64_t nodes() const { return nodes_; }
  const std::set<std::string>& failed() const { return failed_; }

  std::optional<OrderRelation> pairwise() {
    for (auto [a, b] : forced_pairs(h_, cond_)) {
      if (view_.get(view_.var(b, a)) == 1) return std::nullopt;
      view_.put(view_.var(a, b), 1);
      view_.put(view_.var(b, a), 0);
    }
    if (solve()) return view_.completion();
    return std::nullopt;
  }

  std::optional<OrderRelation> permutation() {
    std::size_t n = h_.opexes.size();
    preds_.assign(n, {});
    for (auto [a, b] : forced_pairs(h_, cond_)) preds_[b].push_back(a);
    placed_.assign(n, 0);
    if (place(0)) return view_.completion();
    return std::nullopt;
  }

 private:
  void tick() {
    ++nodes_;
    if (cfg_.max_nodes && nodes_ > *cfg_.max_nodes)
      throw ResourceError("search exceeded the node budget of " + std::to_string(*cfg_.max_nodes));
  }

  // Returns the failing atom with the fewest unknown reads, or none.
  std::optional<std::vector<std::size_t>> first_failure() {
    std::optional<std::vector<std::size_t>> best;
    std::string clause;
    for (const Atom& at : atoms_) {
      view_.start();
      if (at.ok(view_)) continue;
      if (!best || view_.reads().size() < best->size()) {
        best = view_.reads();
        clause = at.clause;
      }
      if (best->empty()) break;
    }
    if (best) failed_.insert(clause);
    return best;
  }

  // Any completion agreeing with the logged reads fails the same atom, so
  // one of those pairs must flip to true.
  bool solve() {
    tick();
    auto fail = first_failure();
    if (!fail) return true;
    const std::vector<std::size_t> reads = *fail;
    bool found = false;
    for (std::size_t k = 0; k < reads.size() && !found; ++k) {
      view_.put(reads[k], 1);
      found = solve();
      if (!found) view_.put(reads[k], 0);
    }
    if (!found)
      for (std::size_t v : reads) view_.put(v, -1);
    return found;
  }

  bool definitely_fails() {
    for (const Atom& at : atoms_) {
      view_.start();
      if (!at.ok(view_) && view_.reads().empty()) {
        failed_.insert(at.clause);
        return true;
      }
    }
    return false;
  }

  bool place(std::size_t depth) {
    tick();
    std::size_t n = h_.opexes.size();
    if (depth == n) return !definitely_fails();
    for (std::size_t u = 0; u < n; ++u) {
      if (placed_[u]) continue;
      bool ready = std::all_of(preds_[u].begin(), preds_[u].end(), [&](std::size_t p) { return placed_[p]; });
      if (!ready) continue;
      placed_[u] = 1;
      for (std::size_t v = 0; v < n; ++v) {
        if (v == u) continue;
        view_.put(view_.var(u, v), placed_[v] ? 0 : 1);
        view_.put(view_.var(v, u), placed_[v] ? 1 : 0);
      }
      if (depth + 1 < n && definitely_fails()) {
        // fall through to undo
      } else if (place(depth + 1)) {
        return true;
      }
      placed_[u] = 0;
      for (std::size_t v = 0; v < n; ++v) {
        if (v == u || placed_[v]) continue;
        view_.put(view_.var(u, v), -1);
        view_.put(view_.var(v, u), -1);
      }
    }
    return false;
  }

  const History& h_;
  const ConditionSet& cond_;
  const SearchConfig& cfg_;
  std::vector<Atom> atoms_;
  PartialView view_;
  std::uint64_t nodes_ = 0;
  std::set<std::string> failed_;
  std::vector<std::vector<std::size_t>> preds_;
  std::vector<char> placed_;
};

inline double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

inline Strategy resolve(const ConditionSet& cond, Strategy s) {
  if (s != Strategy::automatic) return s;
  return cond.has(ClauseKind::total_order) ? Strategy::permutation : Strategy::pairwise;
}

}  // namespace search

// Correctness(H, cond): is there a relation satisfying every clause?
inline Verdict check(const History& h, const ConditionSet& cond, const SearchConfig& cfg = {}) {
  auto t0 = std::chrono::steady_clock::now();
  Verdict v;
  Strategy s = search::resolve(cond, cfg.strategy);
  if (s == Strategy::permutation && !cond.has(ClauseKind::total_order))
    throw std::invalid_argument("permutation search needs a TotalOrder clause");
  v.strategy = to_string(s);
  std::size_t cap = cfg.max_opexes.value_or(s == Strategy::permutation ? kPermutationCap : kPairwiseCap);
  if (h.opexes.size() > cap)
    throw ResourceError(std::to_string(h.opexes.size()) + " op-exes exceed the " + v.strategy + " cap of " +
                        std::to_string(cap));
  if (cond.registry) {
    legality::require_specs(*cond.registry, h);
    if (cond.has(ClauseKind::liveness))
      if (auto bad = legality::object_liveness(*cond.registry, h)) {
        v.diagnosis = {"Liveness"};
        v.outcomes.push_back({"Liveness", false, std::nullopt, bad->what});
        v.elapsed_ms = search::ms_since(t0);
        return v;
      }
  }
  search::Searcher sr(h, cond, cfg);
  auto w = s == Strategy::permutation ? sr.permutation() : sr.pairwise();
  v.nodes = sr.nodes();
  if (w) {
    v.outcomes = evaluate(h, *w, cond);
    if (!all_hold(v.outcomes)) throw std::logic_error("search produced a witness that does not re-validate");
    v.accepted = true;
    v.witness = std::move(w);
  } else {
    v.diagnosis.assign(sr.failed().begin(), sr.failed().end());
    v.outcomes = evaluate(h, OrderRelation(h.opexes.size()), cond);
  }
  v.elapsed_ms = search::ms_since(t0);
  return v;
}

// Exhaustive oracle: every irreflexive relation (mask order over row-major
// off-diagonal pairs), or every permutation when TotalOrder is required.
inline Verdict brute_force_check(const History& h, const ConditionSet& cond) {
  auto t0 = std::chrono::steady_clock::now();
  Verdict v;
  std::size_t n = h.opexes.size();
  ConditionSet sorted = cond;
  sorted.clauses.clear();
  for (const Clause* c : search::by_cost(cond)) sorted.clauses.push_back(*c);
  auto accept = [&](OrderRelation r) {
    v.accepted = true;
    v.outcomes = evaluate(h, r, cond);
    v.witness = std::move(r);
  };
  if (cond.has(ClauseKind::total_order)) {
    v.strategy = "brute-permutation";
    if (n > kBrutePermutationCap) throw ResourceError("brute force permutation cap is 8 op-exes");
    std::vector<std::size_t> seq(n);
    std::iota(seq.begin(), seq.end(), 0);
    do {
      ++v.nodes;
      OrderRelation r = OrderRelation::from_sequence(n, seq);
      if (holds(h, r, sorted)) {
        accept(r);
        break;
      }
    } while (std::next_permutation(seq.begin(), seq.end()));
  } else {
    v.strategy = "brute-relation";
    if (n > kBruteRelationCap) throw ResourceError("brute force relation cap is 5 op-exes");
    std::vector<std::pair<std::size_t, std::size_t>> vars;
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b)
        if (a != b) vars.emplace_back(a, b);
    std::uint64_t total = std::uint64_t{1} << vars.size();
    for (std::uint64_t mask = 0; mask < total; ++mask) {
      ++v.nodes;
      OrderRelation r(n);
      for (std::size_t i = 0; i < vars.size(); ++i)
        if ((mask >> i) & 1u) r.set(vars[i].first, vars[i].second);
      if (holds(h, r, sorted)) {
        accept(r);
        break;
      }
    }
  }
  if (!v.accepted) {
    v.outcomes = evaluate(h, OrderRelation(n), cond);
    for (const auto& o : v.outcomes)
      if (!o.holds) v.diagnosis.push_back(o.clause);
  }
  v.elapsed_ms = search::ms_since(t0);
  return v;
}

// ---------------------------------------------------------------------------
// Byzantine histories

struct ByzCandidate {
  std::string object;
  std::string operation;
  Value input;
  std::optional<ProcessId> proc;  // unset: any Byzantine process
};

struct ByzConfig {
  std::vector<ByzCandidate> universe;
  std::size_t max_inserted = 1;               // per Byzantine process
  std::optional<std::size_t> max_placements;  // cap on repaired histories tried
};

namespace byz {

struct Token {
  std::optional<EventRef> original;  // event of the base history
  std::size_t inserted = 0;          // else index into the insertion list
};

inline std::string key(const std::vector<Token>& seq, const std::vector<std::pair<ProcessId, ByzCandidate>>& ins) {
  Value k = Value::array();
  for (const Token& t : seq) {
    if (t.original) k.push_back({t.original->opex, t.original->dir == Dir::inv ? 0 : 1});
    else k.push_back({ins[t.inserted].first, ins[t.inserted].second.object, ins[t.inserted].second.operation,
                      ins[t.inserted].second.input});
  }
  return k.dump();
}

inline History materialize(const History& base, const std::vector<Token>& seq,
                           const std::vector<std::pair<ProcessId, ByzCandidate>>& ins,
                           std::vector<std::size_t>& inserted_idx) {
  History out;
  out.name = base.name;
  out.processes = base.processes;
  out.complete = base.complete;
  out.opexes = base.opexes;
  for (auto& o : out.opexes) {
    if (o.inv) o.inv->id.clear();
    if (o.res) o.res->id.clear();
  }
  std::vector<std::size_t> added;
  for (long pos = 0; pos < static_cast<long>(seq.size()); ++pos) {
    const Token& t = seq[pos];
    if (t.original) {
      OpEx& o = out.opexes[t.original->opex];
      (t.original->dir == Dir::inv ? *o.inv : *o.res).position = pos;
    } else {
      const auto& [p, c] = ins[t.inserted];
      OpEx o{c.object, c.operation, p, c.input, Value(), Event{"", Value(), pos, p, 0}, std::nullopt};
      out.opexes.push_back(std::move(o));
      added.push_back(out.opexes.size() - 1);
    }
  }
  // mark inserted op-exes so they can be found after canonical sorting
  for (std::size_t i : added) out.opexes[i].inv->id = "byz" + std::to_string(i);
  finalize(out);
  inserted_idx.clear();
  for (std::size_t i = 0; i < out.opexes.size(); ++i)
    if (out.opexes[i].inv && out.opexes[i].inv->id.rfind("byz", 0) == 0) {
      out.opexes[i].inv->id.clear();
      inserted_idx.push_back(i);
    }
  for (std::size_t i = 0; i < out.opexes.size(); ++i) {
    if (out.opexes[i].inv && out.opexes[i].inv->id.empty()) out.opexes[i].inv->id = "o" + std::to_string(i) + ".inv";
    if (out.opexes[i].res && out.opexes[i].res->id.empty()) out.opexes[i].res->id = "o" + std::to_string(i) + ".res";
  }
  return out;
}

}  // namespace byz

// Searches bounded repairs H′: Byzantine op-exes are dropped and up to
// max_inserted pending op-exes per Byzantine process are inserted anywhere.
inline Verdict check_byzantine(const History& h, const ConditionSet& cond, const ByzConfig& byz,
                               const SearchConfig& cfg = {}) {
  auto t0 = std::chrono::steady_clock::now();
  std::vector<ProcessId> bad;
  for (const auto& p : h.processes)
    if (p.type == ProcType::byzantine) bad.push_back(p.id);
  for (const auto& c : byz.universe)
    if (c.proc && !h.process(*c.proc))
      throw std::invalid_argument("universe entry names process '" + *c.proc + "' absent from the history");
  if (bad.empty()) {
    Verdict v = check(h, cond, cfg);
    v.repaired = h;
    return v;
  }

  History base = detail::filtered(h, [&](const OpEx& o) {
    return std::find(bad.begin(), bad.end(), o.proc) == bad.end();
  });
  std::vector<byz::Token> seq0;
  for (const EventRef& e : base.events()) seq0.push_back({e, 0});

  // candidate choices per Byzantine process
  std::map<ProcessId, std::vector<ByzCandidate>> choices;
  for (const auto& p : bad)
    for (const auto& c : byz.universe)
      if (!c.proc || *c.proc == p) choices[p].push_back(c);

  Verdict last;
  std::set<std::string> diag;
  std::uint64_t nodes = 0;
  std::size_t tried = 0;
  std::set<std::string> seen;

  // insertion lists in order of growing size
  std::size_t max_total = 0;
  for (const auto& p : bad) max_total += choices[p].empty() ? 0 : byz.max_inserted;
  for (std::size_t total = 0; total <= max_total; ++total) {
    std::vector<std::vector<std::pair<ProcessId, ByzCandidate>>> lists;
    std::vector<std::pair<ProcessId, ByzCandidate>> cur;
    std::function<void(std::size_t, std::size_t)> pick = [&](std::size_t pi, std::size_t left) {
      if (pi == bad.size()) {
        if (left == 0) lists.push_back(cur);
        return;
      }
      const auto& opts = choices[bad[pi]];
      std::function<void(std::size_t, std::size_t, std::size_t)> rec = [&](std::size_t cnt, std::size_t from,
                                                                            std::size_t rem) {
        pick(pi + 1, rem);
        if (cnt == byz.max_inserted || rem == 0) return;
        for (std::size_t c = from; c < opts.size(); ++c) {
          cur.emplace_back(bad[pi], opts[c]);
          rec(cnt + 1, c, rem - 1);
          cur.pop_back();
        }
      };
      rec(0, 0, left);
    };
    pick(0, total);

    for (const auto& ins : lists) {
      // every interleaving of the inserted invocations into the base order
      std::vector<std::vector<byz::Token>> seqs{seq0};
      for (std::size_t k = 0; k < ins.size(); ++k) {
        std::vector<std::vector<byz::Token>> next;
        for (const auto& s : seqs)
          for (std::size_t at = 0; at <= s.size(); ++at) {
            auto t = s;
            t.insert(t.begin() + static_cast<long>(at), byz::Token{std::nullopt, k});
            next.push_back(std::move(t));
          }
        seqs = std::move(next);
      }
      for (const auto& s : seqs) {
        if (!seen.insert(byz::key(s, ins)).second) continue;
        if (byz.max_placements && ++tried > *byz.max_placements)
          throw ResourceError("Byzantine search exceeded " + std::to_string(*byz.max_placements) + " placements");
        std::vector<std::size_t> idx;
        History hp = byz::materialize(base, s, ins, idx);
        Verdict v = check(hp, cond, cfg);
        nodes += v.nodes;
        if (v.accepted) {
          v.repaired = std::move(hp);
          v.inserted = idx;
          v.nodes = nodes;
          v.elapsed_ms = search::ms_since(t0);
          return v;
        }
        diag.insert(v.diagnosis.begin(), v.diagnosis.end());
        last = std::move(v);
      }
    }
  }
  last.accepted = false;
  last.bounded = true;
  last.diagnosis.assign(diag.begin(), diag.end());
  last.nodes = nodes;
  last.elapsed_ms = search::ms_since(t0);
  return last;
}

}  // namespace amecos
