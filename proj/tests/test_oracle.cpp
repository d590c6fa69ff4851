#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"
#include "fixtures.hpp"

using namespace amecos;

TEST_CASE("check agrees with the brute-force oracle on the corpus") {
  Registry reg = fixtures::mixed_registry();
  auto corpus = fixtures::oracle_corpus();
  CHECK(corpus.size() == 72);
  std::size_t agree = 0, total = 0;
  for (const auto& h : corpus)
    for (const auto& n : condition_names()) {
      ConditionSet c = condition_set(n, reg, 2);
      bool fast = check(h, c).accepted;
      Verdict slow = brute_force_check(h, c);
      CHECK_MESSAGE(fast == slow.accepted, n << " on " << serialize(h));
      if (slow.accepted) CHECK(all_hold(evaluate(h, *slow.witness, c)));
      agree += fast == slow.accepted;
      ++total;
    }
  CHECK(agree == total);
}
