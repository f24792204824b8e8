#include "aoi/policies.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "aoi/errors.hpp"

namespace aoi {

const char* to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::Whittle: return "whittle";
    case PolicyKind::WhittleLike: return "whittle_like";
    case PolicyKind::Myopic: return "myopic";
    case PolicyKind::Greedy: return "greedy";
    case PolicyKind::RoundRobin: return "round_robin";
    case PolicyKind::RelaxedThreshold: return "relaxed";
  }
  return "?";
}

PolicyKind parse_policy_kind(const std::string& text) {
  for (PolicyKind k : {PolicyKind::Whittle, PolicyKind::WhittleLike, PolicyKind::Myopic,
                       PolicyKind::Greedy, PolicyKind::RoundRobin, PolicyKind::RelaxedThreshold}) {
    if (text == to_string(k)) return k;
  }
  throw std::invalid_argument("unknown policy: " + text +
                              " (expected whittle|whittle_like|myopic|greedy|round_robin|relaxed)");
}

double myopic_score(int delta, double theta) { return delta * theta - 1.0; }

Scheduler::Scheduler(PolicyKind kind, const IndexTableSet* tables, double relaxed_charge)
    : kind_(kind), tables_(tables), relaxed_charge_(relaxed_charge) {}

const IndexTable& Scheduler::table_for(const ChannelParams& p) const {
  if (tables_ != nullptr) {
    if (auto it = tables_->find(p); it != tables_->end() && it->second) return *it->second;
  }
  throw MissingIndexTable("no Whittle index table for channel " + p.to_string());
}

double Scheduler::score(const FleetState& s, std::size_t i) const {
  const ArmState& a = s.arms[i];
  switch (kind_) {
    case PolicyKind::Whittle:
    case PolicyKind::RelaxedThreshold: return table_for(s.params[i]).lookup(a);
    case PolicyKind::WhittleLike: return whittle_like(a.delta, s.theta[i], s.params[i]);
    case PolicyKind::Myopic: return myopic_score(a.delta, s.theta[i]);
    case PolicyKind::Greedy: return a.delta;
    case PolicyKind::RoundRobin: return 0.0;
  }
  return 0.0;
}

std::vector<std::size_t> Scheduler::select(const FleetState& s, int budget) const {
  if (budget < 1) throw std::invalid_argument("budget must be at least 1");
  const std::size_t m = s.size();
  const std::size_t k = std::min(m, static_cast<std::size_t>(budget));
  std::vector<std::size_t> out;

  if (kind_ == PolicyKind::RoundRobin) {
    const std::size_t start =
        static_cast<std::size_t>((static_cast<std::uint64_t>(s.t) * k) % static_cast<std::uint64_t>(m));
    for (std::size_t j = 0; j < k; ++j) out.push_back((start + j) % m);
    std::sort(out.begin(), out.end());
    return out;
  }

  std::vector<double> scores(m);
  for (std::size_t i = 0; i < m; ++i) scores[i] = score(s, i);

  if (kind_ == PolicyKind::RelaxedThreshold) {
    for (std::size_t i = 0; i < m; ++i) {
      if (scores[i] > relaxed_charge_) out.push_back(i);
    }
    return out;
  }

  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  auto before = [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    if (s.arms[a].delta != s.arms[b].delta) return s.arms[a].delta > s.arms[b].delta;
    return a < b;
  };
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(), before);
  out.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace aoi
