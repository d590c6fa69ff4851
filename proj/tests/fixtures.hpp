#pragma once

#include <algorithm>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "amecos/amecos.hpp"

namespace fixtures {

using namespace amecos;

inline std::string samples(const std::string& rel) { return std::string(AMECOS_SAMPLES) + "/" + rel; }

inline History fig4() {
  return HistoryBuilder()
      .process("p1").process("p2").process("p3")
      .complete("L", "propose", "p1", 1, {1, 2}, 0, 2)
      .complete("L", "propose", "p2", 2, {1, 2}, 1, 3)
      .complete("L", "propose", "p3", 3, {1, 2, 3}, 4, 5)
      .build();
}

inline History fig5() {
  return HistoryBuilder()
      .process("p1").process("p2").process("p3")
      .complete("L", "propose", "p1", 1, {1, 2}, 0, 2)
      .complete("L", "propose", "p2", 2, {1, 2, 3}, 1, 4)
      .complete("L", "propose", "p3", 3, {1, 2, 3}, 3, 5)
      .build();
}

inline Registry lattice_registry() { return {{"L", make_lattice_agreement()}}; }

// p1 writes R, p2 reads R, everybody proposes on L.
inline Registry mixed_registry() {
  return {{"R", make_swsr_register("p1", "p2")}, {"L", make_lattice_agreement()}};
}

// Sequential replay of op-exes in `order`; the reference semantics for the
// register and lattice objects, independent of ObjectSpec.
inline bool replay(const History& h, const std::vector<std::size_t>& order) {
  std::map<std::string, Value> reg;
  std::map<std::string, std::set<Value>> lat;
  for (std::size_t i : order) {
    const OpEx& o = h.opexes[i];
    if (o.operation == "write") {
      if (o.proc != "p1") return false;
      reg[o.object] = o.input;
    } else if (o.operation == "read") {
      if (o.proc != "p2" || !reg.count(o.object) || reg[o.object] != o.output) return false;
    } else if (o.operation == "propose") {
      lat[o.object].insert(o.input);
      std::set<Value> out;
      if (!o.output.is_array()) return false;
      for (const auto& v : o.output) out.insert(v);
      if (out != lat[o.object]) return false;
    } else {
      return false;
    }
  }
  return true;
}

enum class Ordering { any, per_process, real_time };

// Brute-force over permutations of a complete history.
inline bool reference_accepts(const History& h, Ordering ord) {
  std::size_t n = h.opexes.size();
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  auto respects = [&](const std::vector<std::size_t>& p) {
    if (ord == Ordering::any) return true;
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = a + 1; b < n; ++b) {
        const OpEx& later = h.opexes[p[a]];
        const OpEx& earlier = h.opexes[p[b]];
        if (ord == Ordering::per_process && later.proc != earlier.proc) continue;
        if (earlier.res->position < later.inv->position) return false;
      }
    return true;
  };
  do {
    if (respects(perm) && replay(h, perm)) return true;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return false;
}

struct GenOptions {
  std::size_t max_ops = 6;
  bool allow_pending = false;
  double corrupt = 0.4;
};

// Random register + lattice history. Each process runs its op-exes one after
// another; outputs follow a random linearization, then one may be corrupted.
inline History random_history(std::mt19937& rng, const GenOptions& opt = {}) {
  auto pick = [&](std::size_t lo, std::size_t hi) { return std::uniform_int_distribution<std::size_t>(lo, hi)(rng); };
  auto coin = [&](double p) { return std::bernoulli_distribution(p)(rng); };
  std::vector<std::string> procs = {"p1", "p2", "p3"};
  std::size_t n = pick(1, opt.max_ops);

  struct Draft {
    std::string object, operation, proc;
    Value input;
  };
  std::vector<Draft> drafts;
  int next_prop = 1;
  for (std::size_t i = 0; i < n; ++i) {
    std::string p = procs[pick(0, 2)];
    if (p != "p3" && coin(0.6)) {
      if (p == "p1") drafts.push_back({"R", "write", p, Value(static_cast<int>(pick(1, 2)))});
      else drafts.push_back({"R", "read", p, Value()});
    } else {
      drafts.push_back({"L", "propose", p, Value(next_prop++)});
    }
  }

  // Interleave inv/res events keeping each process sequential.
  std::map<std::string, std::vector<std::size_t>> queue;
  for (std::size_t i = 0; i < drafts.size(); ++i) queue[drafts[i].proc].push_back(i);
  std::vector<long> inv(n, -1), res(n, -1);
  std::map<std::string, std::size_t> cursor;
  std::map<std::string, bool> open;
  long pos = 0;
  while (true) {
    std::vector<std::string> ready;
    for (const auto& [p, q] : queue)
      if (cursor[p] < q.size()) ready.push_back(p);
    if (ready.empty()) break;
    const std::string& p = ready[pick(0, ready.size() - 1)];
    std::size_t o = queue[p][cursor[p]];
    if (!open[p]) {
      inv[o] = pos++;
      open[p] = true;
    } else {
      res[o] = pos++;
      open[p] = false;
      ++cursor[p];
    }
  }

  // Linearize at a random point inside each interval.
  std::vector<std::pair<double, std::size_t>> points;
  for (std::size_t i = 0; i < n; ++i)
    points.push_back({inv[i] + std::uniform_real_distribution<double>(0.1, res[i] - inv[i] - 0.1)(rng), i});
  std::sort(points.begin(), points.end());
  std::vector<Value> out(n);
  Value last;
  std::set<Value> seen;
  for (auto [t, i] : points) {
    const Draft& d = drafts[i];
    if (d.operation == "write") last = d.input;
    else if (d.operation == "read") out[i] = last.is_null() ? Value(1) : last;
    else {
      seen.insert(d.input);
      out[i] = Value(std::vector<Value>(seen.begin(), seen.end()));
    }
  }
  if (coin(opt.corrupt)) {
    std::size_t i = pick(0, n - 1);
    if (drafts[i].operation == "read") out[i] = Value(out[i] == Value(1) ? 2 : 1);
    else if (drafts[i].operation == "propose") {
      std::set<Value> s{drafts[i].input};
      for (int v = 1; v < next_prop; ++v)
        if (coin(0.5)) s.insert(v);
      out[i] = Value(std::vector<Value>(s.begin(), s.end()));
    }
  }

  HistoryBuilder b;
  for (const auto& p : procs) b.process(p);
  bool complete = true;
  for (std::size_t i = 0; i < n; ++i) {
    const Draft& d = drafts[i];
    bool last_of_proc = queue[d.proc].back() == i;
    if (opt.allow_pending && last_of_proc && coin(0.15)) {
      b.pending(d.object, d.operation, d.proc, d.input, inv[i]);
      complete = false;
    } else {
      b.complete(d.object, d.operation, d.proc, d.input, d.operation == "write" ? Value() : out[i], inv[i], res[i]);
    }
  }
  b.complete_flag(complete);
  return b.build();
}


// Histories with at most 5 op-exes: the figures, the register examples and a
// seeded random sample. Five-op-ex histories are kept few; each rejected one
// costs a full 2^20 relation sweep in the brute-force oracle.
inline std::vector<History> oracle_corpus(std::size_t small = 60, std::size_t five = 8) {
  std::vector<History> out{fig4(), fig5()};
  for (int v : {1, 2})
    out.push_back(HistoryBuilder().process("p1").process("p2")
                      .complete("R", "write", "p1", 1, Value(), 0, 1)
                      .complete("R", "read", "p2", Value(), v, 2, 3)
                      .build());
  std::mt19937 rng(101);
  std::size_t got_small = 0, got_five = 0;
  while (got_small < small || got_five < five) {
    History h = random_history(rng, {5, true, 0.4});
    if (h.opexes.size() == 5) {
      if (got_five < five) out.push_back(h), ++got_five;
    } else if (got_small < small) {
      out.push_back(h), ++got_small;
    }
  }
  return out;
}

// Every process optionally writes [its id, "x"] and then decides v; one history
// per decided value and schedule.
struct ConsensusVariant {
  std::string name;
  std::vector<History> histories;
  Registry registry;
};

inline History all_decide(const std::string& name, std::size_t n, int v, bool reverse, int writers) {
  HistoryBuilder b;
  b.name(name);
  std::vector<std::string> procs;
  for (std::size_t i = 1; i <= n; ++i) procs.push_back("p" + std::to_string(i));
  for (const auto& p : procs) b.process(p);
  if (reverse) std::reverse(procs.begin(), procs.end());
  long pos = 0;
  for (std::size_t i = 0; i < procs.size(); ++i) {
    bool writes = writers == 2 || (writers == 1 && procs[i] == "p1");
    if (writes) {
      b.complete("M", "write", procs[i], Value::array({procs[i], "x"}), Value(), pos, pos + 1);
      pos += 2;
    }
    b.notification("C", "decide", procs[i], v, pos++);
  }
  return b.build();
}

inline std::vector<ConsensusVariant> consensus_variants() {
  std::vector<ConsensusVariant> out;
  for (std::size_t n : {2u, 3u})
    for (int nv : {1, 2, 3})
      for (int writers : {0, 1, 2})
        for (bool both_orders : {true, false}) {
          ConsensusVariant cv;
          cv.name = "n" + std::to_string(n) + "-v" + std::to_string(nv) + "-w" + std::to_string(writers) +
                    (both_orders ? "-both" : "-one");
          std::vector<Value> dom;
          for (int v = 0; v < nv; ++v) {
            dom.push_back(v);
            cv.histories.push_back(all_decide(cv.name + "-" + std::to_string(v) + "f", n, v, false, writers));
            if (both_orders)
              cv.histories.push_back(all_decide(cv.name + "-" + std::to_string(v) + "r", n, v, true, writers));
          }
          cv.registry = {{"C", make_agreement(AgreementKind::consensus, dom)}, {"M", make_shared_memory()}};
          out.push_back(std::move(cv));
        }
  return out;
}

inline History toy_history(int v) {
  return HistoryBuilder().name("H" + std::to_string(v)).process("p1").process("p2")
      .notification("C", "decide", "p1", v, 0)
      .notification("C", "decide", "p2", v, 1)
      .build();
}

// p_i writes [v_i, "x"] alone and decides v_i.
inline History solo(int i, const std::string& v) {
  std::string p = "p" + std::to_string(i);
  return HistoryBuilder().name("solo" + std::to_string(i)).process("p1").process("p2").process("p3")
      .complete("M", "write", p, Value::array({v, "x"}), Value(), 0, 1)
      .notification("K", "decide", p, v, 2)
      .build();
}

inline History ksa_union() {
  return HistoryBuilder().name("union").process("p1").process("p2").process("p3")
      .complete("M", "write", "p1", Value::array({"a", "x"}), Value(), 0, 1)
      .complete("M", "write", "p2", Value::array({"b", "x"}), Value(), 2, 3)
      .complete("M", "write", "p3", Value::array({"c", "x"}), Value(), 4, 5)
      .notification("K", "decide", "p1", "a", 6)
      .notification("K", "decide", "p2", "b", 7)
      .notification("K", "decide", "p3", "c", 8)
      .build();
}

inline Registry ksa_registry() {
  return {{"K", make_agreement(AgreementKind::set_agreement, {"a", "b", "c"})}, {"M", make_shared_memory()}};
}

}  // namespace fixtures
