#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <vector>

#include "aoi/channel.hpp"
#include "aoi/single_arm_mdp.hpp"

namespace aoi {

/// M devices sharing a budget of K transmissions per slot.
struct Fleet {
  std::vector<ChannelParams> devices;
  int budget = 1;

  std::size_t size() const noexcept { return devices.size(); }
  /// Requires 1 <= K <= M (K = M is accepted for relaxed evaluation).
  void validate() const;
};

struct LowerBoundResult {
  double w_dagger = 0.0;
  double value = 0.0;                  // J(w_dagger)
  std::vector<double> per_device_costs;  // V_i*(w_dagger)
  std::size_t evaluations = 0;           // distinct J evaluations
};

/// Optimal average cost of one truncated arm at charge W.
double optimal_cost_given_w(const ChannelParams& p, double charge, int delta_hat,
                            double eps_bar = 1e-6);

/// J(W) = sum_i V_i*(W) - W K with per-parameter caching of V_i*(W).
class DualFunction {
 public:
  DualFunction(Fleet fleet, int delta_hat, RviOptions rvi = {});

  double operator()(double charge);
  double arm_cost(const ChannelParams& p, double charge);
  std::vector<double> per_device(double charge);
  const Fleet& fleet() const noexcept { return fleet_; }
  std::size_t evaluations() const noexcept { return evaluated_.size(); }

 private:
  struct ArmCache {
    TruncatedMdp mdp;
    std::vector<double> last_h;
    std::map<double, double> cost;
  };
  ArmCache& cache_for(const ChannelParams& p);

  Fleet fleet_;
  int delta_hat_;
  RviOptions rvi_;
  std::map<ChannelParams, ArmCache> arms_;
  std::map<double, double> evaluated_;
};

double j_of_w(const Fleet& fleet, double charge, int delta_hat, double eps_bar = 1e-6);

struct WStarSearch {
  double step = 1.0;   // bracket expansion step d
  double xi = 1e-2;    // final bracket width
  double cap = 1e4;    // BracketNotFound once the bracket passes this charge
  // Ternary comparisons closer than this count as ties and keep the smaller
  // charge, so flat stretches of J resolve to their left end.
  double tie_tolerance = 1e-6;
  RviOptions rvi{};
};

/// Bracket expansion in steps of d until J stops increasing, then ternary
/// search on the concave J. The bracket is clipped at W = 0.
LowerBoundResult find_wstar(const Fleet& fleet, int delta_hat, const WStarSearch& search = {});
LowerBoundResult find_wstar(DualFunction& dual, const WStarSearch& search = {});

/// Per-device truncated state indices of a joint state.
using JointState = std::vector<std::size_t>;
/// Bit i set means device i transmits.
using JointAction = std::uint32_t;

struct JointSolution {
  double avg_cost = 0.0;
  std::vector<JointAction> policy;  // per joint state, mixed-radix order
  std::size_t states = 0;
  std::size_t iterations = 0;
};

inline constexpr std::size_t kJointStateCap = 250000;

/// Exact optimum of the coupled problem (at most K transmissions per slot,
/// no charge) over the product of truncated single-arm spaces. Joint state
/// index is mixed-radix with device 0 as the least significant digit.
JointSolution solve_joint_exact(const Fleet& fleet, int delta_hat, double eps_bar = 1e-6,
                                std::size_t state_cap = kJointStateCap);

/// Average cost of a fixed joint policy on the same truncated product chain.
/// The selector receives per-device truncated state indices.
double joint_policy_cost(const Fleet& fleet, int delta_hat,
                         const std::function<JointAction(const JointState&)>& selector,
                         double eps_bar = 1e-6, std::size_t state_cap = kJointStateCap);

}  // namespace aoi
