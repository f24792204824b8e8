#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "aoi/channel.hpp"
#include "aoi/index.hpp"
#include "aoi/single_arm_mdp.hpp"

namespace aoi {

enum class PolicyKind { Whittle, WhittleLike, Myopic, Greedy, RoundRobin, RelaxedThreshold };

const char* to_string(PolicyKind kind);
PolicyKind parse_policy_kind(const std::string& text);

/// True for policies that may schedule more than K devices in a slot.
inline bool is_relaxed(PolicyKind kind) { return kind == PolicyKind::RelaxedThreshold; }
inline bool needs_whittle_tables(PolicyKind kind) {
  return kind == PolicyKind::Whittle || kind == PolicyKind::RelaxedThreshold;
}

/// What the scheduler sees at the start of slot t. theta[i] is the numeric
/// value of arms[i].belief as tracked by the simulator.
struct FleetState {
  std::vector<ChannelParams> params;
  std::vector<ArmState> arms;
  std::vector<double> theta;
  std::int64_t t = 0;

  std::size_t size() const noexcept { return arms.size(); }
};

class Scheduler {
 public:
  /// tables must outlive the scheduler when the kind needs them.
  explicit Scheduler(PolicyKind kind, const IndexTableSet* tables = nullptr,
                     double relaxed_charge = 0.0);

  PolicyKind kind() const noexcept { return kind_; }

  /// Priority of device i; larger is scheduled first. RoundRobin has no
  /// score and returns 0.
  double score(const FleetState& s, std::size_t i) const;

  /// Devices to transmit this slot in ascending id order. Budgeted policies
  /// return exactly min(M, K) devices; RelaxedThreshold returns every device
  /// whose Whittle index exceeds the relaxed charge.
  std::vector<std::size_t> select(const FleetState& s, int budget) const;

 private:
  const IndexTable& table_for(const ChannelParams& p) const;

  PolicyKind kind_;
  const IndexTableSet* tables_;
  double relaxed_charge_;
};

double myopic_score(int delta, double theta);

}  // namespace aoi
