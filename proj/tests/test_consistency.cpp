#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"
#include "fixtures.hpp"

using namespace amecos;

namespace {

OrderRelation rel_of(std::size_t n, std::initializer_list<std::pair<std::size_t, std::size_t>> pairs) {
  OrderRelation r(n);
  for (auto [a, b] : pairs) r.set(a, b);
  return r;
}

// oi, oi' on p_i and oj, oj' on p_j
History fifo_history() {
  return HistoryBuilder()
      .process("pi").process("pj")
      .complete("X", "a", "pi", 1, Value(), 0, 1)
      .complete("X", "a", "pi", 2, Value(), 2, 3)
      .complete("X", "a", "pj", 3, Value(), 4, 5)
      .complete("X", "a", "pj", 4, Value(), 6, 7)
      .build();
}

OrderRelation random_relation(std::mt19937& rng, std::size_t n, double p) {
  OrderRelation r(n);
  std::bernoulli_distribution coin(p);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      if (a != b && coin(rng)) r.set(a, b);
  return r;
}

}  // namespace

TEST_CASE("generic orders") {
  auto u = orders::all(3);
  CHECK(generic_order(OrderKind::partial, u, OrderRelation(3)));
  CHECK_FALSE(generic_order(OrderKind::total, u, OrderRelation(3)));
  CHECK(generic_order(OrderKind::total, u, rel_of(3, {{0, 1}, {1, 2}, {0, 2}})));
  CHECK_FALSE(generic_order(OrderKind::partial, u, rel_of(3, {{0, 1}, {1, 2}})));
}

TEST_CASE("history order") {
  History h = HistoryBuilder().process("p").process("q")
                  .complete("X", "a", "p", 1, 1, 0, 1)
                  .complete("X", "a", "q", 1, 1, 2, 3)
                  .build();
  CHECK(history_order(h, rel_of(2, {{0, 1}})));
  CHECK_FALSE(history_order(h, OrderRelation(2)));

  // o′ is a notification answering between o's invocation and response
  History n = HistoryBuilder().process("p").process("q")
                  .complete("X", "a", "p", 1, 1, 0, 2)
                  .notification("X", "n", "q", 1, 1)
                  .build();
  CHECK(history_order(n, OrderRelation(2)));

  // pending o imposes nothing
  History pend = HistoryBuilder().process("p").process("q")
                     .pending("X", "a", "p", 1, 0)
                     .complete("X", "a", "q", 1, 1, 1, 2)
                     .build();
  CHECK(history_order(pend, OrderRelation(2)));
}

TEST_CASE("process order") {
  History h = HistoryBuilder().process("p").process("q")
                  .complete("X", "a", "p", 1, 1, 0, 1)
                  .complete("X", "a", "q", 1, 1, 2, 3)
                  .complete("X", "a", "p", 1, 1, 4, 5)
                  .build();
  CHECK(process_order(h, rel_of(3, {{0, 2}})));
  CHECK_FALSE(process_order(h, OrderRelation(3)));
}

TEST_CASE("FIFO pattern of the four hard arrows") {
  History h = fifo_history();
  OrderRelation solid = rel_of(4, {{0, 1}, {2, 3}, {0, 3}, {1, 2}});
  CHECK_FALSE(fifo_order(h, solid));
  OrderRelation dotted = solid;
  dotted.set(0, 2);
  dotted.set(1, 3);
  CHECK(fifo_order(h, dotted));
  CHECK(fifo_order(h, OrderRelation(4)));

  History single = HistoryBuilder().process("p")
                       .complete("X", "a", "p", 1, 1, 0, 1)
                       .complete("X", "a", "p", 1, 1, 2, 3)
                       .complete("X", "a", "p", 1, 1, 4, 5)
                       .build();
  CHECK(fifo_order(single, rel_of(3, {{0, 1}, {1, 2}, {0, 2}})));
}

TEST_CASE("interval and set orders on the lattice figures") {
  History f4 = fixtures::fig4();
  OrderRelation r4 = rel_of(3, {{0, 1}, {1, 0}, {0, 2}, {1, 2}});
  CHECK(set_order(f4, r4));
  CHECK(interval_order(f4, r4));

  History f5 = fixtures::fig5();
  OrderRelation r5 = rel_of(3, {{0, 1}, {1, 0}, {1, 2}, {2, 1}, {0, 2}});
  CHECK(interval_order(f5, r5));
  CHECK_FALSE(set_order(f5, r5));

  OrderRelation tot = OrderRelation::from_sequence(3, {2, 0, 1});
  CHECK(interval_order(f5, tot));
  CHECK(set_order(f5, tot));
}

TEST_CASE("k-set total order") {
  History two = HistoryBuilder().process("p").process("q")
                    .complete("X", "a", "p", 1, 1, 0, 1)
                    .complete("X", "a", "q", 1, 1, 2, 3)
                    .complete("X", "a", "p", 1, 1, 4, 5)
                    .complete("X", "a", "q", 1, 1, 6, 7)
                    .build();
  OrderRelation chained = rel_of(4, {{0, 2}, {1, 3}});
  CHECK(k_set_total_order(two, chained, 2));
  CHECK_FALSE(k_set_total_order(two, chained, 1));
  OrderRelation all = OrderRelation::from_sequence(4, {0, 1, 2, 3});
  CHECK(k_set_total_order(two, all, 1));
  CHECK(generic_order(OrderKind::total, orders::all(4), all));

  History three = HistoryBuilder().process("p").process("q").process("r")
                      .complete("X", "a", "p", 1, 1, 0, 1)
                      .complete("X", "a", "q", 1, 1, 2, 3)
                      .complete("X", "a", "r", 1, 1, 4, 5)
                      .build();
  CHECK_FALSE(k_set_total_order(three, OrderRelation(3), 2));
  CHECK(k_set_total_order(three, OrderRelation(3), 3));
  CHECK_THROWS_AS(k_set_total_order(three, OrderRelation(3), 2, 2), ResourceError);

  std::size_t count = 0;
  orders::for_each_partition(4, 4, [&](const std::vector<std::size_t>&) { return ++count, false; });
  CHECK(count == 15);
  count = 0;
  orders::for_each_partition(4, 2, [&](const std::vector<std::size_t>&) { return ++count, false; });
  CHECK(count == 8);
}

TEST_CASE("condition sets") {
  Registry reg = fixtures::mixed_registry();
  CHECK(condition_set("linearizability", reg).clause_names() ==
        std::set<std::string>{"Validity", "Safety", "Liveness", "ProcessOrder", "FIFOOrder", "PartialOrder",
                              "TotalOrder", "HistoryOrder"});
  auto il = condition_set("interval-linearizability", reg).clause_names();
  auto sl = condition_set("set-linearizability", reg).clause_names();
  CHECK(std::includes(sl.begin(), sl.end(), il.begin(), il.end()));
  CHECK(sl.size() > il.size());
  CHECK(condition_set("k-serializability", reg, 3).params["k"] == 3);
  CHECK(condition_set("process+serializability", reg).has(ClauseKind::total_order));
  CHECK_THROWS_AS(condition_set("bogus", reg), std::invalid_argument);
  CHECK_THROWS_AS(condition_set("k-serializability", reg, 0), std::invalid_argument);
}

TEST_CASE("evaluate") {
  Registry reg{{"R", make_swsr_register("pw", "pr")}, {"L", make_lattice_agreement()}};
  for (const auto& name : condition_names()) CHECK(all_hold(evaluate(History{}, OrderRelation(0), condition_set(name, reg))));

  History h = HistoryBuilder().process("pw").process("pr")
                  .complete("R", "write", "pw", 1, Value(), 0, 1)
                  .complete("R", "read", "pr", Value(), 1, 2, 3)
                  .build();
  auto outs = evaluate(h, rel_of(2, {{0, 1}}), condition_set("linearizability", reg));
  CHECK(outs.size() == 8);
  CHECK(all_hold(outs));

  auto bad = evaluate(h, rel_of(2, {{1, 0}}), condition_set("linearizability", reg));
  CHECK_FALSE(all_hold(bad));

  History f4 = fixtures::fig4();
  CHECK(holds(f4, rel_of(3, {{0, 1}, {1, 0}, {0, 2}, {1, 2}}), condition_set("set-linearizability", reg)));
}

TEST_CASE("k-serializability with one process group equals serializability") {
  Registry reg = fixtures::lattice_registry();
  History h = HistoryBuilder().process("p")
                  .complete("L", "propose", "p", 1, {1}, 0, 1)
                  .complete("L", "propose", "p", 2, {1, 2}, 2, 3)
                  .build();
  auto k1 = condition_set("k-serializability", reg, 1);
  auto ser = condition_set("serializability", reg);
  for (int m = 0; m < 4; ++m) {
    OrderRelation r(2);
    if (m & 1) r.set(0, 1);
    if (m & 2) r.set(1, 0);
    CHECK(holds(h, r, k1) == holds(h, r, ser));
  }
}

TEST_CASE("property: clause-set monotonicity of evaluate") {
  Registry reg = fixtures::mixed_registry();
  std::vector<ConditionSet> conds;
  for (const auto& n : condition_names()) conds.push_back(condition_set(n, reg, 2));
  std::mt19937 rng(21);
  int checked = 0;
  for (int it = 0; it < 300; ++it) {
    History h = fixtures::random_history(rng, {5, false, 0.3});
    std::size_t n = h.opexes.size();
    for (int r = 0; r < 4; ++r) {
      OrderRelation rel = random_relation(rng, n, 0.5);
      if (r == 0) {
        std::vector<std::size_t> seq(n);
        std::iota(seq.begin(), seq.end(), 0);
        rel = OrderRelation::from_sequence(n, seq);
      }
      std::vector<bool> ok;
      for (const auto& c : conds) ok.push_back(holds(h, rel, c));
      for (std::size_t a = 0; a < conds.size(); ++a)
        for (std::size_t b = 0; b < conds.size(); ++b) {
          auto ca = conds[a].clause_names(), cb = conds[b].clause_names();
          if (!std::includes(cb.begin(), cb.end(), ca.begin(), ca.end())) continue;
          if (ok[b]) CHECK(ok[a]);
          ++checked;
        }
    }
  }
  CHECK(checked > 1000);
}

TEST_CASE("property: total implies partial") {
  std::mt19937 rng(3);
  for (int it = 0; it < 2000; ++it) {
    std::size_t n = 1 + rng() % 6;
    OrderRelation r = random_relation(rng, n, 0.6);
    if (it % 3 == 0) {
      std::vector<std::size_t> seq(n);
      std::iota(seq.begin(), seq.end(), 0);
      std::shuffle(seq.begin(), seq.end(), rng);
      r = OrderRelation::from_sequence(n, seq);
    }
    auto u = orders::all(n);
    if (generic_order(OrderKind::total, u, r)) CHECK(generic_order(OrderKind::partial, u, r));
  }
}

TEST_CASE("property: weak transitivity gives the interval clause") {
  // every relation on up to 4 elements
  for (std::size_t n = 1; n <= 4; ++n) {
    std::size_t bits = n * (n - 1);
    std::vector<std::pair<std::size_t, std::size_t>> slots;
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b)
        if (a != b) slots.push_back({a, b});
    for (std::uint64_t m = 0; m < (std::uint64_t{1} << bits); ++m) {
      OrderRelation r(n);
      for (std::size_t s = 0; s < bits; ++s)
        if (m >> s & 1) r.set(slots[s].first, slots[s].second);
      auto u = orders::all(n);
      if (orders::connected(u, r) || orders::irreflexive(u, r)) continue;
      bool weak = true;
      for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b)
          for (std::size_t c = 0; c < n; ++c)
            if (a != c && r(a, b) && r(b, c) && !r(a, c)) weak = false;
      if (!weak) continue;
      for (std::size_t a = 0; a < n; ++a)
        for (std::size_t c = 0; c < n; ++c)
          for (std::size_t b = 0; b < n; ++b)
            if (r(a, c)) CHECK((r(a, b) || r(b, c)));
    }
  }
}

TEST_CASE("property: total orders obey history order only when extending real time") {
  History h = HistoryBuilder().process("p").process("q").process("r")
                  .complete("X", "a", "p", 1, 1, 0, 1)
                  .complete("X", "a", "q", 1, 1, 2, 4)
                  .complete("X", "a", "r", 1, 1, 3, 5)
                  .build();
  std::vector<std::size_t> perm{0, 1, 2};
  do {
    OrderRelation r = OrderRelation::from_sequence(3, perm);
    bool extends = true;
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j)
        if (i != j && orders::forced_before(h.opexes[i], h.opexes[j]) && !r(i, j)) extends = false;
    CHECK(history_order(h, r) == extends);
  } while (std::next_permutation(perm.begin(), perm.end()));
}
