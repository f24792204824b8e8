#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "aoi/channel.hpp"

namespace aoi {

/// AoI and symbolic belief of one device.
struct ArmState {
  int delta = 1;
  SymbolicBelief belief;

  auto operator<=>(const ArmState&) const = default;
};

/// Successors of one (state, action) pair; at most two.
struct TransitionRow {
  std::array<std::size_t, 2> next{0, 0};
  std::array<double, 2> prob{0.0, 0.0};
  int size = 0;
};

/// Single-arm belief MDP with AoI capped at delta_hat.
///
/// States at AoI d occupy indices [offset(d), offset(d) + d) and are ordered
/// by increasing belief: (FromBad, 0), ..., (FromBad, d - 2), (FromGood, d - 1).
/// Index 0 is the reference state (1, alpha).
class TruncatedMdp {
 public:
  TruncatedMdp(ChannelParams p, int delta_hat, double charge);

  const ChannelParams& params() const noexcept { return params_; }
  int delta_hat() const noexcept { return delta_hat_; }
  double charge() const noexcept { return charge_; }
  void set_charge(double charge);

  std::size_t size() const noexcept { return states_.size(); }
  const ArmState& state(std::size_t i) const { return states_[i]; }
  int delta(std::size_t i) const { return states_[i].delta; }
  double theta(std::size_t i) const { return theta_[i]; }
  const TransitionRow& row(std::size_t i, int action) const {
    return action == 0 ? idle_[i] : active_[i];
  }
  double cost(std::size_t i, int action) const {
    return static_cast<double>(states_[i].delta) + charge_ * action;
  }

  static std::size_t offset(int delta) {
    return static_cast<std::size_t>(delta - 1) * static_cast<std::size_t>(delta) / 2;
  }
  static constexpr std::size_t reference_state() { return 0; }

  /// Index of a state of the truncated space, or nullopt if it is not one.
  std::optional<std::size_t> find(const ArmState& s) const;
  std::size_t index_of(const ArmState& s) const;

  /// Maps an arbitrary (unbounded) device state onto the truncated space:
  /// AoI is capped at delta_hat and beliefs that leave the enumerated set
  /// snap to (FromGood, delta_hat - 1). Stationary beliefs map to the
  /// numerically closest belief at that AoI.
  std::size_t clamp(const ArmState& s) const;

 private:
  ChannelParams params_;
  int delta_hat_;
  double charge_;
  std::vector<ArmState> states_;
  std::vector<double> theta_;
  std::vector<TransitionRow> idle_;
  std::vector<TransitionRow> active_;
};

TruncatedMdp build_truncated_mdp(const ChannelParams& p, int delta_hat, double charge);

struct DpSolution {
  double avg_cost = 0.0;
  std::vector<double> relative_values;
  std::vector<std::array<double, 2>> q_values;
  std::vector<int> policy;
  // Smallest belief at which the converged policy transmits, per AoI
  // (entry d - 1); nullopt when every state at that AoI idles.
  std::vector<std::optional<double>> thresholds;
  std::size_t iterations = 0;
  double bellman_residual = 0.0;
  // States where the threshold shortcut of the last sweep disagreed with a
  // full Q comparison. Zero whenever the optimal policy is threshold-type.
  std::size_t shortcut_mismatches = 0;

  double q_gap(std::size_t i) const { return q_values[i][1] - q_values[i][0]; }
};

struct RviOptions {
  double eps_bar = 1e-6;
  std::size_t max_iters = 100000;
  bool threshold_shortcut = true;
  // Aperiodicity transform: h <- tau h + (1 - tau) (Q(s, u*) - ref). Leaves
  // the average cost, Q and the policy unchanged; tau > 0 is required when
  // the optimal chain is periodic (e.g. transmitting only at the AoI cap).
  double damping = 0.25;
  // Initial relative values; empty means start from zero.
  std::span<const double> warm_start = {};
};

/// Relative value iteration that skips the Q comparison for beliefs at or
/// above the per-AoI threshold found earlier in the same sweep. Throws
/// NonConvergence after max_iters sweeps.
DpSolution rvi_threshold(const TruncatedMdp& m, const RviOptions& options);
DpSolution rvi_threshold(const TruncatedMdp& m, double eps_bar = 1e-6,
                         std::size_t max_iters = 100000);

/// n sweeps of discounted value iteration starting from V = 0.
std::vector<double> discounted_vi(const TruncatedMdp& m, double mu, std::size_t n_iters);

/// Q_mu(s, u) computed from a discounted value vector.
std::vector<std::array<double, 2>> discounted_q(const TruncatedMdp& m, double mu,
                                                std::span<const double> values);

/// Average cost of the memoryless-channel threshold policy that transmits
/// once AoI reaches n.
double avg_cost_threshold_iid(int n, double charge, double alpha);

}  // namespace aoi
