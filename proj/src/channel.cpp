#include "aoi/channel.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace aoi {

namespace {

constexpr double kIidTolerance = 1e-12;

}  // namespace

ChannelParams::ChannelParams(double alpha, double beta) : alpha_(alpha), beta_(beta) {
  if (!(alpha > 0.0 && alpha < 1.0) || !(beta > 0.0 && beta < 1.0)) {
    throw std::invalid_argument("channel probabilities must lie in (0, 1): " + to_string());
  }
  if (alpha < 1.0 - beta - kIidTolerance) {
    throw std::invalid_argument("channel must be positively correlated (alpha >= 1 - beta): " +
                                to_string());
  }
}

bool ChannelParams::is_iid() const noexcept {
  return std::fabs(alpha_ - (1.0 - beta_)) <= kIidTolerance;
}

std::string ChannelParams::to_string() const {
  char buf[64];
  std::snprintf(buf, sizeof buf, "(alpha=%.9g, beta=%.9g)", alpha_, beta_);
  return buf;
}

double step_belief(const ChannelParams& p, double theta) {
  return theta * p.alpha() + (1.0 - theta) * (1.0 - p.beta());
}

double k_step_belief(const ChannelParams& p, double theta, int k) {
  if (k < 0) throw std::invalid_argument("k_step_belief: k must be non-negative");
  for (int i = 0; i < k; ++i) theta = step_belief(p, theta);
  return theta;
}

double equilibrium_belief(const ChannelParams& p) {
  if (p.is_iid()) return p.alpha();
  return (1.0 - p.beta()) / (2.0 - p.alpha() - p.beta());
}

double posterior_belief(const ChannelParams& p, Outcome outcome) {
  if (p.is_iid()) return p.alpha();
  return outcome == Outcome::Success ? p.alpha() : 1.0 - p.beta();
}

double SymbolicBelief::value(const ChannelParams& p) const {
  if (k < 0) throw std::invalid_argument("SymbolicBelief: k must be non-negative");
  // Memoryless channel: T(theta) = alpha for every theta, exactly.
  if (p.is_iid()) return p.alpha();
  double start = 0.0;
  switch (origin) {
    case BeliefOrigin::FromGood: start = p.alpha(); break;
    case BeliefOrigin::FromBad: start = 1.0 - p.beta(); break;
    case BeliefOrigin::Stationary: start = equilibrium_belief(p); break;
  }
  return k_step_belief(p, start, k);
}

const char* to_string(BeliefOrigin origin) {
  switch (origin) {
    case BeliefOrigin::FromGood: return "FromGood";
    case BeliefOrigin::FromBad: return "FromBad";
    case BeliefOrigin::Stationary: return "Stationary";
  }
  return "?";
}

BeliefOrigin parse_origin(const std::string& text) {
  if (text == "FromGood") return BeliefOrigin::FromGood;
  if (text == "FromBad") return BeliefOrigin::FromBad;
  if (text == "Stationary") return BeliefOrigin::Stationary;
  throw std::invalid_argument("unknown belief origin: " + text);
}

ChannelState sample_channel_step(const ChannelParams& p, ChannelState h, Rng& rng) {
  const double p_good = h == ChannelState::Good ? p.alpha() : 1.0 - p.beta();
  return uniform01(rng) < p_good ? ChannelState::Good : ChannelState::Bad;
}

ChannelState sample_stationary(const ChannelParams& p, Rng& rng) {
  return uniform01(rng) < equilibrium_belief(p) ? ChannelState::Good : ChannelState::Bad;
}

GilbertElliottChannel::GilbertElliottChannel(ChannelParams p, Rng& rng, ChannelOverride mode)
    : params_(p), mode_(mode), state_(ChannelState::Good) {
  if (mode_ == ChannelOverride::None) state_ = sample_stationary(params_, rng);
}

ChannelState GilbertElliottChannel::step(Rng& rng) {
  if (mode_ == ChannelOverride::AlwaysGood) {
    state_ = ChannelState::Good;
  } else {
    state_ = sample_channel_step(params_, state_, rng);
  }
  return state_;
}

}  // namespace aoi
