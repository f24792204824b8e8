#pragma once

#include <compare>
#include <cstdint>
#include <random>
#include <string>

namespace aoi {

using Rng = std::mt19937_64;

// Uniform draw on [0, 1) built from the top 53 bits, so streams are
// bit-identical across standard library implementations.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Transition probabilities of a two-state (GOOD/BAD) Markov channel.
///
/// alpha = P(GOOD -> GOOD), beta = P(BAD -> BAD). Only positively correlated
/// channels are accepted (alpha >= 1 - beta); equality is the memoryless case
/// in which every belief collapses to alpha.
class ChannelParams {
 public:
  ChannelParams(double alpha, double beta);

  double alpha() const noexcept { return alpha_; }
  double beta() const noexcept { return beta_; }
  bool is_iid() const noexcept;

  auto operator<=>(const ChannelParams&) const = default;

  std::string to_string() const;

 private:
  double alpha_;
  double beta_;
};

/// One-step belief propagation when the channel is not observed.
double step_belief(const ChannelParams& p, double theta);

/// k-fold composition of step_belief; k = 0 is the identity.
double k_step_belief(const ChannelParams& p, double theta, int k);

/// Fixed point of step_belief: (1 - beta) / (2 - alpha - beta).
double equilibrium_belief(const ChannelParams& p);

enum class Outcome { Failure, Success };

/// Belief after observing a transmission outcome: alpha or 1 - beta.
double posterior_belief(const ChannelParams& p, Outcome outcome);

enum class BeliefOrigin : std::uint8_t {
  FromGood,    // last observation was a success
  FromBad,     // last observation was a failure
  Stationary,  // nothing observed yet; starts at the equilibrium belief
};

/// Belief identified by where it started and how many unobserved slots
/// followed. State identity inside the MDP is the pair (origin, k), never the
/// floating-point value.
struct SymbolicBelief {
  BeliefOrigin origin = BeliefOrigin::FromGood;
  int k = 0;

  double value(const ChannelParams& p) const;
  SymbolicBelief stepped() const { return {origin, k + 1}; }

  auto operator<=>(const SymbolicBelief&) const = default;
};

const char* to_string(BeliefOrigin origin);
BeliefOrigin parse_origin(const std::string& text);

enum class ChannelState : std::uint8_t { Bad = 0, Good = 1 };

/// Draws the next hidden state: GOOD w.p. alpha from GOOD, w.p. 1 - beta
/// from BAD.
ChannelState sample_channel_step(const ChannelParams& p, ChannelState h, Rng& rng);

/// Draws a hidden state from the stationary law, P(GOOD) = equilibrium belief.
ChannelState sample_stationary(const ChannelParams& p, Rng& rng);

enum class ChannelOverride { None, AlwaysGood };

/// A hidden Gilbert-Elliott chain owned by one device.
class GilbertElliottChannel {
 public:
  GilbertElliottChannel(ChannelParams p, Rng& rng, ChannelOverride mode = ChannelOverride::None);

  ChannelState state() const noexcept { return state_; }
  void set_state(ChannelState s) noexcept { state_ = s; }
  ChannelState step(Rng& rng);
  const ChannelParams& params() const noexcept { return params_; }

 private:
  ChannelParams params_;
  ChannelOverride mode_;
  ChannelState state_;
};

}  // namespace aoi
