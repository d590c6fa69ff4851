#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"
#include "fixtures.hpp"

using namespace amecos;

namespace {

History decides(const std::string& name, std::vector<std::pair<std::string, int>> ds,
                std::vector<std::string> procs = {"p1", "p2"}) {
  HistoryBuilder b;
  b.name(name);
  for (const auto& p : procs) b.process(p);
  long pos = 0;
  for (auto [p, v] : ds) b.notification("C", "decide", p, v, pos++);
  return b.build();
}

// p1 writes, then decides v
History write_then_decide(const std::string& name, int v) {
  return HistoryBuilder().name(name).process("p1").process("p2")
      .complete("M", "write", "p1", Value::array({1, "x"}), Value(), 0, 1)
      .notification("C", "decide", "p1", v, 2)
      .build();
}

std::size_t state_of(const Sigma& s, std::vector<std::string> labels) {
  std::sort(labels.begin(), labels.end());
  for (std::size_t i = 0; i < s.states.size(); ++i) {
    auto l = s.labels(s.states[i].events);
    std::sort(l.begin(), l.end());
    if (l == labels) return i;
  }
  FAIL("no state " << labels.size());
  return 0;
}

Sigma toy() {
  return build_sigma({decides("H0", {{"p1", 0}, {"p2", 0}}), decides("H1", {{"p1", 1}, {"p2", 1}})});
}

}  // namespace

TEST_CASE("state extraction") {
  History h = HistoryBuilder().process("p1").process("p2")
                  .notification("X", "a", "p1", 1, 0)
                  .notification("X", "b", "p2", 1, 1)
                  .build();
  Sigma s = build_sigma({h});
  CHECK(s.states.size() == 4);
  CHECK(s.complete_states().size() == 1);
  CHECK(s.edges.size() == 4);

  CHECK(build_sigma({}).states.empty());
  Sigma unit = build_sigma({History{}});
  CHECK(unit.states.size() == 1);
  CHECK(check_asynchrony(unit).holds);

  Sigma t = toy();
  CHECK(t.states.size() == 7);
  CHECK(t.complete_states().size() == 2);
  CHECK(t.sinks().size() == 2);
  CHECK(check_continuity(t).holds);
}

TEST_CASE("conflicting event identities are rejected") {
  History a = HistoryBuilder().name("a").process("p").complete("M", "read", "p", "x", 1, 0, 1).build();
  History b = HistoryBuilder().name("b").process("p").complete("M", "read", "p", "y", 1, 0, 1).build();
  CHECK_THROWS_AS(build_sigma({a, b}), SigmaError);
}

TEST_CASE("labels") {
  Sigma t = toy();
  CHECK(t.describe(0) == "{}");
  CHECK(t.describe(state_of(t, {"d1/0", "d2/0"})) == "{d1/0, d2/0}");
  EventKey w{"p2", 1, "M", "write", Dir::inv, Value::array({5, "x"})};
  CHECK(event_label(w) == "WI2(5)");
  EventKey ts{"p1", 2, "T", "test&set", Dir::res, 0};
  CHECK(event_label(ts) == "T&SR1(0)");
  EventKey d{"p2", 1, "B", "r_deliver", Dir::res, Value::array({"m1", 1, "p1"})};
  CHECK(event_label(d) == "D2(m1)");
}

TEST_CASE("valence") {
  Sigma t = toy();
  compute_valence(t, std::string("C"));
  CHECK(t.valence[0] == std::set<Value>{0, 1});
  CHECK(t.valence[state_of(t, {"d1/0"})] == std::set<Value>{0});
  CHECK(check_branching(t).holds);

  Sigma five = build_sigma({decides("H", {{"p1", 5}, {"p2", 5}})});
  compute_valence(five);
  for (const auto& v : five.valence) CHECK(v == std::set<Value>{5});

  Sigma none = build_sigma({HistoryBuilder().process("p1").complete("M", "write", "p1", Value::array({1, "x"}),
                                                                      Value(), 0, 1).build()});
  compute_valence(none);
  auto lemmas = verify_valence_lemmas(none);
  CHECK_FALSE(lemmas[0].holds);
  CHECK(lemmas[0].axiom == "NonEmptyValence");
}

TEST_CASE("valence lemmas") {
  Sigma t = toy();
  compute_valence(t, std::string("C"));
  auto lemmas = verify_valence_lemmas(t);
  CHECK(lemmas[0].holds);
  CHECK(lemmas[1].holds);

  Sigma one = build_sigma({decides("H", {{"p1", 3}}, {"p1"})});
  compute_valence(one);
  auto l = verify_valence_lemmas(one);
  CHECK(l[1].holds);
  CHECK(l[1].witness[0]["univalent_substate"] == "{d1/3}");
}

TEST_CASE("consensus axioms and critical states") {
  Sigma t = toy();
  compute_valence(t, std::string("C"));
  auto ax = check_consensus_axioms(t);
  CHECK(ax[0].holds);
  CHECK(ax[0].witness["states"] == Value::array({"{d1/0}", "{d1/1}"}));
  CHECK(ax[1].holds);
  REQUIRE(find_critical_state(t));
  CHECK(*find_critical_state(t) == 0);

  Sigma hard = build_sigma({decides("A", {{"p1", 5}, {"p2", 5}}), decides("B", {{"p2", 5}, {"p1", 5}})});
  compute_valence(hard);
  CHECK_FALSE(check_consensus_axioms(hard)[0].holds);
  CHECK_FALSE(find_critical_state(hard));

  Sigma chain = build_sigma({write_then_decide("H0", 0), write_then_decide("H1", 1)});
  compute_valence(chain, std::string("C"));
  auto cax = check_consensus_axioms(chain);
  CHECK_FALSE(cax[1].holds);
  CHECK(cax[1].state == std::optional<std::size_t>(0));
  CHECK(cax[1].proc == std::optional<ProcessId>("p1"));
  REQUIRE(find_critical_state(chain));
  CHECK(chain.describe(*find_critical_state(chain)) == "{WI1(1), WR1}");
}

TEST_CASE("pairwise asynchrony") {
  Sigma t = toy();
  auto a = check_asynchrony(t);
  CHECK_FALSE(a.holds);
  CHECK(a.witness["state"] == "{}");
  CHECK(a.witness["e"] == "d1/0");
  CHECK(a.witness["e_prime"] == "d2/1");

  History h = HistoryBuilder().process("p1").process("p2")
                  .notification("X", "a", "p1", 1, 0)
                  .notification("X", "b", "p2", 1, 1)
                  .build();
  CHECK(check_asynchrony(build_sigma({h})).holds);
  CHECK(check_asynchrony(build_sigma({h}), AsyncMode::setwise).holds);
  CHECK_THROWS_AS(check_asynchrony(t, AsyncMode::setwise, 1), ResourceError);
}

TEST_CASE("property: prefixes, continuity and branching on generated state spaces") {
  std::mt19937 rng(77);
  for (int it = 0; it < 60; ++it) {
    std::vector<History> hs;
    std::size_t nh = 1 + rng() % 3;
    int v = static_cast<int>(rng() % 2);
    for (std::size_t k = 0; k < nh; ++k) {
      std::vector<std::pair<std::string, int>> ds{{"p1", v}, {"p2", v}};
      if (rng() % 2) std::swap(ds[0], ds[1]);
      hs.push_back(decides("H" + std::to_string(k), ds));
      v = static_cast<int>(rng() % 2);
    }
    Sigma s = build_sigma(hs);
    CHECK(check_continuity(s).holds);
    compute_valence(s, std::string("C"));
    CHECK(check_branching(s).holds);
    for (std::size_t c : s.complete_states()) CHECK(s.valence[c].size() == 1);
    // every per-process prefix combination of every input is a state
    for (const auto& h : hs) {
      std::vector<int> evs;
      for (std::size_t i = 0; i < s.states.size(); ++i)
        if (s.states[i].sources.count(&h - &hs[0])) evs.push_back(static_cast<int>(i));
      std::size_t per1 = 0, per2 = 0;
      for (const auto& o : h.opexes) (o.proc == "p1" ? per1 : per2)++;
      CHECK(evs.size() == (per1 + 1) * (per2 + 1));
    }
  }
}
