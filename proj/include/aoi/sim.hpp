#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "aoi/channel.hpp"
#include "aoi/csv.hpp"
#include "aoi/index.hpp"
#include "aoi/policies.hpp"

namespace aoi {

struct SimConfig {
  std::vector<ChannelParams> devices;
  int budget = 1;
  std::int64_t horizon = 100000;
  PolicyKind policy = PolicyKind::Whittle;
  std::uint64_t seed = 1;
  int replications = 10;
  int delta_hat = 100;  // truncation bound of the Whittle tables
  ChannelOverride channel_override = ChannelOverride::None;
  // Slots at which running averages are reported (each <= horizon).
  std::vector<std::int64_t> checkpoints;
  bool record_trajectory = false;  // replication 0 only
  double relaxed_charge = 0.0;     // W for RelaxedThreshold
  int jobs = 1;                    // worker threads across replications
  // When > 0, devices follow the truncated belief MDP with this AoI cap:
  // outcomes are drawn from the (snapped) belief instead of a hidden
  // channel, so runs are directly comparable with the truncated solvers.
  int truncate_at = 0;

  /// Throws std::invalid_argument on any inconsistency.
  void validate() const;
};

struct TrajectoryRow {
  std::int64_t t = 0;
  std::size_t device = 0;
  int delta = 0;
  double theta = 0.0;
  bool scheduled = false;
  std::optional<Outcome> outcome;  // empty when not scheduled
};

struct Checkpoint {
  std::int64_t t = 0;
  double total_avg_aoi = 0.0;
  double std_error = 0.0;
};

struct SimResult {
  double total_avg_aoi = 0.0;
  std::vector<double> per_device_avg;
  // Standard error of total_avg_aoi across replications; NaN for a single one.
  double std_error = 0.0;
  double mean_scheduled = 0.0;
  std::vector<double> replicate_totals;
  std::vector<Checkpoint> checkpoints;
  std::vector<TrajectoryRow> trajectory;
};

/// Sample mean and standard error of the mean.
struct Estimate {
  double mean = 0.0;
  double std_error = 0.0;
};

/// Throws TooFewReplications for fewer than two samples.
Estimate estimate_ci(std::span<const double> samples);

/// Independent stream for one (replication, device) pair.
Rng make_stream(std::uint64_t seed, std::uint64_t replication, std::uint64_t device);

/// One replication, advanced a slot at a time.
class Simulator {
 public:
  Simulator(const SimConfig& config, const Scheduler& scheduler, std::uint64_t replication);

  /// Runs a single slot: accumulate AoI, select, step channels, observe,
  /// update AoI and beliefs.
  void step();

  const FleetState& state() const noexcept { return state_; }
  std::vector<GilbertElliottChannel>& channels() noexcept { return channels_; }
  const std::vector<std::size_t>& last_selection() const noexcept { return selected_; }
  const std::vector<std::optional<Outcome>>& last_outcomes() const noexcept { return outcomes_; }
  std::int64_t slots() const noexcept { return state_.t; }
  /// Sum of AoI over elapsed slots, per device.
  const std::vector<double>& aoi_sums() const noexcept { return sums_; }
  std::size_t scheduled_total() const noexcept { return scheduled_total_; }

 private:
  void step_truncated();

  const SimConfig& config_;
  const Scheduler& scheduler_;
  FleetState state_;
  std::vector<GilbertElliottChannel> channels_;
  std::vector<TruncatedMdp> truncated_;  // empty unless truncate_at > 0
  std::vector<std::size_t> truncated_state_;
  std::vector<Rng> streams_;
  std::vector<double> sums_;
  std::vector<std::size_t> selected_;
  std::vector<std::optional<Outcome>> outcomes_;
  std::vector<char> mask_;
  std::size_t scheduled_total_ = 0;
};

/// Runs every replication. tables is required for Whittle-based policies.
SimResult run_sim(const SimConfig& config, const IndexTableSet* tables = nullptr);

/// Time-average cost delta + W u of the policy that idles until AoI delta_L
/// and then transmits until success, on a single device.
double simulate_heuristic_cost(const ChannelParams& p, int delta_L, double charge,
                               std::int64_t horizon, std::uint64_t seed);

inline constexpr const char* kSimCsvHeader = "policy,M,K,T,seed,total_avg_aoi,stderr";
inline constexpr const char* kTrajectoryCsvHeader = "t,device,delta,theta,scheduled,outcome";

void write_sim_csv(std::ostream& out, const SimConfig& config, const SimResult& result,
                   bool header = true);
void write_trajectory_csv(std::ostream& out, const SimResult& result);

}  // namespace aoi
