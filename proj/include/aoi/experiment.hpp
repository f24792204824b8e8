#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "aoi/index.hpp"
#include "aoi/lowerbound.hpp"
#include "aoi/policies.hpp"

namespace aoi {

struct ExperimentOptions {
  std::uint64_t seed = 1;
  int delta_hat = 100;  // Whittle tables and lower bound
  int reps = 10;
  std::int64_t horizon = 100000;
  std::vector<PolicyKind> policies;  // empty: the preset's list
  int jobs = 1;
  // Truncation bound of the joint-MDP oracle; the product space must stay
  // under kJointStateCap.
  int joint_delta_hat = 20;
  // Directory for cached Whittle tables (CSV); empty disables caching.
  std::string table_dir;
  // Restrict the sweep to these values; empty runs the full sweep.
  std::vector<double> only_values;
  std::function<void(const std::string&)> log;
};

/// One simulated configuration of a sweep.
struct SweepPoint {
  double value = 0.0;
  Fleet fleet;
  std::vector<std::int64_t> checkpoints;  // fig8 reports AoI against T
};

struct ExperimentPreset {
  std::string name;
  std::string description;
  std::string sweep_var;
  std::vector<PolicyKind> policies;
  bool lower_bound = false;
  bool joint_exact = false;
  std::function<std::vector<SweepPoint>(const ExperimentOptions&)> points;
};

const std::vector<ExperimentPreset>& presets();
std::vector<std::string> preset_names();
/// Throws std::invalid_argument listing the known presets.
const ExperimentPreset& find_preset(const std::string& name);

struct ExperimentRow {
  std::string preset;
  std::string sweep_var;
  double sweep_value = 0.0;
  PolicyKind policy = PolicyKind::Whittle;
  std::size_t m = 0;
  int k = 0;
  std::int64_t horizon = 0;
  int reps = 0;
  double total_avg_aoi = 0.0;
  double std_error = 0.0;
  std::optional<double> lower_bound;
  std::optional<double> joint_exact;
};

inline constexpr const char* kExperimentCsvHeader =
    "preset,sweep_var,sweep_value,policy,M,K,T,reps,total_avg_aoi,stderr,lower_bound,joint_exact";

std::vector<ExperimentRow> run_experiment(const ExperimentPreset& preset,
                                          const ExperimentOptions& options);

void write_experiment_csv(std::ostream& out, const std::vector<ExperimentRow>& rows);
std::vector<ExperimentRow> read_experiment_csv(std::istream& in);

/// Whittle tables for every distinct channel, loaded from or saved to
/// table_dir when it is set.
IndexTableSet whittle_tables(const std::vector<ChannelParams>& devices, int delta_hat,
                             const std::string& table_dir = {},
                             const std::function<void(const std::string&)>& log = {});

/// Rounds to 9 decimals so swept parameters such as 1.1 - beta are exact
/// neighbours of their printed values.
double round9(double x);

}  // namespace aoi
