#include <doctest.h>

#include <algorithm>
#include <memory>
#include <set>
#include <stdexcept>
#include <vector>

#include "aoi/errors.hpp"
#include "aoi/policies.hpp"

using namespace aoi;

namespace {

FleetState make_state(const std::vector<ChannelParams>& params, const std::vector<ArmState>& arms,
                      std::int64_t t = 0) {
  FleetState s;
  s.params = params;
  s.arms = arms;
  for (std::size_t i = 0; i < arms.size(); ++i) s.theta.push_back(arms[i].belief.value(params[i]));
  s.t = t;
  return s;
}

// Numeric beliefs set directly; symbolic part only fixes the AoI.
FleetState numeric_state(const std::vector<std::pair<int, double>>& dt, ChannelParams p) {
  FleetState s;
  for (auto [d, th] : dt) {
    s.params.push_back(p);
    s.arms.push_back({d, {BeliefOrigin::FromGood, d - 1}});
    s.theta.push_back(th);
  }
  return s;
}

}  // namespace

TEST_CASE("policy names round trip") {
  for (PolicyKind k : {PolicyKind::Whittle, PolicyKind::WhittleLike, PolicyKind::Myopic,
                       PolicyKind::Greedy, PolicyKind::RoundRobin, PolicyKind::RelaxedThreshold}) {
    CHECK(parse_policy_kind(to_string(k)) == k);
  }
  CHECK_THROWS_AS(parse_policy_kind("random"), std::invalid_argument);
}

TEST_CASE("scores") {
  CHECK(myopic_score(4, 0.5) == doctest::Approx(1.0));
  CHECK(myopic_score(1, 1.0) == 0.0);
  const ChannelParams p(0.7, 0.7);
  const FleetState s = make_state({p}, {{1, {BeliefOrigin::FromGood, 0}}});
  CHECK(Scheduler(PolicyKind::WhittleLike).score(s, 0) == doctest::Approx(1.4));
  CHECK(Scheduler(PolicyKind::Greedy).score(s, 0) == 1.0);
}

TEST_CASE("selection examples") {
  const ChannelParams p(0.7, 0.7);
  const FleetState s = numeric_state({{5, 0.2}, {3, 0.9}}, p);
  CHECK(Scheduler(PolicyKind::Greedy).select(s, 1) == std::vector<std::size_t>{0});
  CHECK(Scheduler(PolicyKind::Myopic).select(s, 1) == std::vector<std::size_t>{1});

  FleetState rr = numeric_state({{1, 0.7}, {1, 0.7}, {1, 0.7}}, p);
  rr.t = 4;
  CHECK(Scheduler(PolicyKind::RoundRobin).select(rr, 1) == std::vector<std::size_t>{1});
  // Window of K consecutive ids starting at (t K) mod M wraps around: {2, 0}.
  CHECK(Scheduler(PolicyKind::RoundRobin).select(rr, 2) == std::vector<std::size_t>{0, 2});
}

TEST_CASE("round robin visits every device equally") {
  const ChannelParams p(0.7, 0.7);
  FleetState s = numeric_state({{1, 0.7}, {1, 0.7}, {1, 0.7}, {1, 0.7}, {1, 0.7}}, p);
  std::vector<int> count(5, 0);
  for (std::int64_t t = 0; t < 50; ++t) {
    s.t = t;
    for (std::size_t i : Scheduler(PolicyKind::RoundRobin).select(s, 2)) ++count[i];
  }
  for (int c : count) CHECK(c == 20);
}

TEST_CASE("tie rule: larger AoI, then smaller id") {
  const ChannelParams p(0.7, 0.7);
  // Myopic scores 2 * 0.5 - 1 = 0 and 1 * 1 - 1 = 0 tie; AoI decides.
  const FleetState a = numeric_state({{1, 1.0}, {2, 0.5}}, p);
  CHECK(Scheduler(PolicyKind::Myopic).select(a, 1) == std::vector<std::size_t>{1});
  // Full tie: smaller id.
  const FleetState b = numeric_state({{3, 0.4}, {3, 0.4}, {3, 0.4}}, p);
  CHECK(Scheduler(PolicyKind::Greedy).select(b, 2) == std::vector<std::size_t>{0, 1});
  CHECK(Scheduler(PolicyKind::Myopic).select(b, 1) == std::vector<std::size_t>{0});
}

TEST_CASE("budget, determinism and ascending output") {
  const ChannelParams p(0.7, 0.7), q(0.5, 0.9);
  IndexTableSet tables;
  tables[p] = std::make_shared<IndexTable>(build_index_table(p, 12, 1e-3, 1.0, IndexKind::Whittle));
  tables[q] = std::make_shared<IndexTable>(build_index_table(q, 12, 1e-3, 1.0, IndexKind::Whittle));

  std::vector<ChannelParams> params;
  std::vector<ArmState> arms;
  for (int i = 0; i < 7; ++i) {
    params.push_back(i % 2 ? p : q);
    const int d = 1 + (i * 5) % 9;
    arms.push_back({d, {i % 3 ? BeliefOrigin::FromBad : BeliefOrigin::FromGood, i % 3 ? 0 : d - 1}});
  }
  for (PolicyKind k : {PolicyKind::Whittle, PolicyKind::WhittleLike, PolicyKind::Myopic,
                       PolicyKind::Greedy, PolicyKind::RoundRobin}) {
    const Scheduler sch(k, &tables);
    for (int budget : {1, 3, 7, 9}) {
      for (std::int64_t t : {0, 3, 11}) {
        const FleetState s = make_state(params, arms, t);
        const auto sel = sch.select(s, budget);
        CHECK(sel.size() == std::min<std::size_t>(7, budget));
        CHECK(std::is_sorted(sel.begin(), sel.end()));
        CHECK(std::set<std::size_t>(sel.begin(), sel.end()).size() == sel.size());
        CHECK(sch.select(s, budget) == sel);
      }
    }
  }
}

TEST_CASE("Whittle policy needs a table for every channel") {
  const ChannelParams p(0.7, 0.7);
  IndexTableSet tables;
  tables[p] = std::make_shared<IndexTable>(build_index_table(p, 6, 1e-3, 1.0, IndexKind::Whittle));
  const FleetState s = numeric_state({{2, 0.5}}, ChannelParams(0.5, 0.9));
  CHECK_THROWS_AS(Scheduler(PolicyKind::Whittle, &tables).select(s, 1), MissingIndexTable);
  CHECK_THROWS_AS(Scheduler(PolicyKind::Whittle).select(s, 1), MissingIndexTable);
}

TEST_CASE("memoryless channels: Whittle and Whittle-like pick the same devices") {
  const ChannelParams p(0.3, 0.7), q(0.8, 0.2);
  IndexTableSet tables;
  tables[p] = std::make_shared<IndexTable>(build_index_table(p, 40, 1e-3, 1.0, IndexKind::Whittle));
  tables[q] = std::make_shared<IndexTable>(build_index_table(q, 40, 1e-3, 1.0, IndexKind::Whittle));
  const Scheduler w(PolicyKind::Whittle, &tables), l(PolicyKind::WhittleLike);
  int compared = 0;
  for (int d0 = 1; d0 <= 10; ++d0) {
    for (int d1 = 1; d1 <= 10; ++d1) {
      const FleetState s = make_state({p, q}, {{d0, {BeliefOrigin::FromGood, d0 - 1}},
                                                {d1, {BeliefOrigin::FromBad, 0}}});
      // Skip pairs whose closed-form indices are within the search tolerance.
      if (std::abs(whittle_iid(d0, 0.3) - whittle_iid(d1, 0.8)) < 1e-2) continue;
      CHECK(w.select(s, 1) == l.select(s, 1));
      ++compared;
    }
  }
  CHECK(compared > 90);
}

TEST_CASE("relaxed policy ignores the budget") {
  const ChannelParams p(0.7, 0.7);
  IndexTableSet tables;
  tables[p] = std::make_shared<IndexTable>(build_index_table(p, 12, 1e-3, 1.0, IndexKind::Whittle));
  std::vector<ArmState> arms;
  for (int d = 1; d <= 6; ++d) arms.push_back({d, {BeliefOrigin::FromGood, d - 1}});
  const FleetState s = make_state(std::vector<ChannelParams>(6, p), arms);
  const double cut = tables[p]->at(arms[2]);
  const auto sel = Scheduler(PolicyKind::RelaxedThreshold, &tables, cut).select(s, 1);
  CHECK(sel == std::vector<std::size_t>{3, 4, 5});
  CHECK(Scheduler(PolicyKind::RelaxedThreshold, &tables, 1e9).select(s, 1).empty());
}
