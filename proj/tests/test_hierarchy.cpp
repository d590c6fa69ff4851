#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"
#include "fixtures.hpp"

using namespace amecos;

TEST_CASE("checker acceptance is antitone along clause-subset edges") {
  Registry reg = fixtures::mixed_registry();
  std::vector<ConditionSet> conds;
  for (const auto& n : condition_names()) conds.push_back(condition_set(n, reg, 2));
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (std::size_t a = 0; a < conds.size(); ++a)
    for (std::size_t b = 0; b < conds.size(); ++b) {
      auto ca = conds[a].clause_names(), cb = conds[b].clause_names();
      if (a != b && std::includes(cb.begin(), cb.end(), ca.begin(), ca.end())) edges.push_back({a, b});
    }
  CHECK(edges.size() >= 15);

  std::mt19937 rng(2024);
  std::size_t violations = 0, histories = 0;
  std::vector<std::size_t> accepted(conds.size(), 0);
  for (; histories < 520; ++histories) {
    History h = fixtures::random_history(rng, {6, true, 0.4});
    std::vector<bool> ok;
    for (std::size_t c = 0; c < conds.size(); ++c) {
      ok.push_back(check(h, conds[c]).accepted);
      accepted[c] += ok.back();
    }
    for (auto [a, b] : edges)
      if (ok[b] && !ok[a]) {
        ++violations;
        FAIL_CHECK(conds[b].name << " accepts but " << conds[a].name << " rejects " << serialize(h));
      }
  }
  CHECK(violations == 0);
  // the sample is not degenerate: every condition both accepts and rejects
  for (std::size_t c = 0; c < conds.size(); ++c) {
    CHECK(accepted[c] > 0);
    CHECK(accepted[c] < histories);
  }
}
