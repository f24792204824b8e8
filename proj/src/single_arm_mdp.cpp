#include "aoi/single_arm_mdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "aoi/errors.hpp"

namespace aoi {

TruncatedMdp::TruncatedMdp(ChannelParams p, int delta_hat, double charge)
    : params_(p), delta_hat_(delta_hat), charge_(0.0) {
  if (delta_hat < 2) throw std::invalid_argument("truncation bound must be at least 2");
  set_charge(charge);

  const std::size_t n = offset(delta_hat + 1);
  states_.reserve(n);
  theta_.reserve(n);

  // Numeric beliefs are computed once per (origin, k) by repeated stepping so
  // every state with the same symbol carries a bit-identical value.
  std::vector<double> good(static_cast<std::size_t>(delta_hat));
  std::vector<double> bad(static_cast<std::size_t>(delta_hat));
  for (int k = 0; k < delta_hat; ++k) {
    good[k] = SymbolicBelief{BeliefOrigin::FromGood, k}.value(p);
    bad[k] = SymbolicBelief{BeliefOrigin::FromBad, k}.value(p);
  }

  for (int d = 1; d <= delta_hat; ++d) {
    for (int k = 0; k + 2 <= d; ++k) {
      states_.push_back({d, {BeliefOrigin::FromBad, k}});
      theta_.push_back(bad[k]);
    }
    states_.push_back({d, {BeliefOrigin::FromGood, d - 1}});
    theta_.push_back(good[d - 1]);
  }

  idle_.resize(n);
  active_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const ArmState& s = states_[i];
    const int next_delta = std::min(s.delta + 1, delta_hat);

    // Active: success resets to (1, alpha); failure moves to (next, 1 - beta).
    TransitionRow& act = active_[i];
    act.size = 2;
    act.next = {reference_state(), index_of({next_delta, {BeliefOrigin::FromBad, 0}})};
    act.prob = {theta_[i], 1.0 - theta_[i]};

    // Idle: belief steps symbolically; beliefs that would leave the
    // enumerated set at the cap snap to the good-side limit.
    ArmState next{next_delta, s.belief.stepped()};
    if (s.belief.origin == BeliefOrigin::FromGood) {
      next.belief.k = std::min(next.belief.k, delta_hat - 1);
    } else if (next.belief.k > delta_hat - 2) {
      next.belief = {BeliefOrigin::FromGood, delta_hat - 1};
    }
    TransitionRow& idle = idle_[i];
    idle.size = 1;
    idle.next = {index_of(next), 0};
    idle.prob = {1.0, 0.0};
  }
}

void TruncatedMdp::set_charge(double charge) {
  if (!(charge >= 0.0) || !std::isfinite(charge)) {
    throw std::invalid_argument("charge must be finite and non-negative");
  }
  charge_ = charge;
}

std::optional<std::size_t> TruncatedMdp::find(const ArmState& s) const {
  if (s.delta < 1 || s.delta > delta_hat_) return std::nullopt;
  const std::size_t base = offset(s.delta);
  switch (s.belief.origin) {
    case BeliefOrigin::FromGood:
      if (s.belief.k != s.delta - 1) return std::nullopt;
      return base + static_cast<std::size_t>(s.delta - 1);
    case BeliefOrigin::FromBad:
      if (s.belief.k < 0 || s.belief.k > s.delta - 2) return std::nullopt;
      return base + static_cast<std::size_t>(s.belief.k);
    case BeliefOrigin::Stationary: return std::nullopt;
  }
  return std::nullopt;
}

std::size_t TruncatedMdp::index_of(const ArmState& s) const {
  if (auto i = find(s)) return *i;
  throw std::out_of_range("state (" + std::to_string(s.delta) + ", " + to_string(s.belief.origin) +
                          " k=" + std::to_string(s.belief.k) + ") is not in the truncated space");
}

std::size_t TruncatedMdp::clamp(const ArmState& s) const {
  if (s.delta < 1) throw std::invalid_argument("AoI must be positive");
  const int d = std::min(s.delta, delta_hat_);
  const std::size_t base = offset(d);
  switch (s.belief.origin) {
    case BeliefOrigin::FromGood: return base + static_cast<std::size_t>(d - 1);
    case BeliefOrigin::FromBad:
      if (s.belief.k <= d - 2) return base + static_cast<std::size_t>(s.belief.k);
      return base + static_cast<std::size_t>(d - 1);
    case BeliefOrigin::Stationary: {
      const double theta = s.belief.value(params_);
      std::size_t best = base;
      for (std::size_t i = base; i < base + static_cast<std::size_t>(d); ++i) {
        if (std::fabs(theta_[i] - theta) <= std::fabs(theta_[best] - theta)) best = i;
      }
      return best;
    }
  }
  return base;
}

TruncatedMdp build_truncated_mdp(const ChannelParams& p, int delta_hat, double charge) {
  return TruncatedMdp(p, delta_hat, charge);
}

namespace {

inline double expected(const TransitionRow& r, const std::vector<double>& v) {
  double acc = r.prob[0] * v[r.next[0]];
  if (r.size == 2) acc += r.prob[1] * v[r.next[1]];
  return acc;
}

}  // namespace

DpSolution rvi_threshold(const TruncatedMdp& m, double eps_bar, std::size_t max_iters) {
  RviOptions options;
  options.eps_bar = eps_bar;
  options.max_iters = max_iters;
  return rvi_threshold(m, options);
}

DpSolution rvi_threshold(const TruncatedMdp& m, const RviOptions& options) {
  if (!(options.eps_bar > 0.0)) throw std::invalid_argument("tolerance must be positive");
  const double tau = options.damping;
  if (!(tau >= 0.0 && tau < 1.0)) throw std::invalid_argument("damping must lie in [0, 1)");
  const std::size_t n = m.size();
  const std::size_t s0 = TruncatedMdp::reference_state();

  std::vector<double> h(n, 0.0);
  if (!options.warm_start.empty()) {
    if (options.warm_start.size() != n) throw std::invalid_argument("warm start size mismatch");
    h.assign(options.warm_start.begin(), options.warm_start.end());
  }
  std::vector<double> next(n, 0.0);
  std::vector<int> chosen(n, 0);

  auto q = [&](std::size_t i, int u, const std::vector<double>& v) {
    return m.cost(i, u) + expected(m.row(i, u), v);
  };

  DpSolution sol;
  double change = std::numeric_limits<double>::infinity();
  std::size_t iter = 0;
  while (change > options.eps_bar) {
    if (iter >= options.max_iters) {
      throw NonConvergence("relative value iteration did not converge within " +
                               std::to_string(options.max_iters) + " sweeps",
                           iter);
    }
    const double ref = std::min(q(s0, 0, h), q(s0, 1, h));
    change = 0.0;
    for (int d = 1; d <= m.delta_hat(); ++d) {
      double threshold = 1.0;
      const std::size_t base = TruncatedMdp::offset(d);
      for (std::size_t i = base; i < base + static_cast<std::size_t>(d); ++i) {
        int u = 1;
        double value;
        if (options.threshold_shortcut && m.theta(i) >= threshold) {
          value = q(i, 1, h);
        } else {
          const double q0 = q(i, 0, h);
          const double q1 = q(i, 1, h);
          u = q1 < q0 ? 1 : 0;
          value = u == 1 ? q1 : q0;
          if (u == 1) threshold = m.theta(i);
        }
        chosen[i] = u;
        const double updated = tau * h[i] + (1.0 - tau) * (value - ref);
        change = std::max(change, std::fabs(updated - h[i]));
        next[i] = updated;
      }
    }
    h.swap(next);
    ++iter;
  }

  sol.iterations = iter;
  sol.q_values.resize(n);
  sol.policy.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    sol.q_values[i] = {q(i, 0, h), q(i, 1, h)};
    sol.policy[i] = sol.q_values[i][1] < sol.q_values[i][0] ? 1 : 0;
    if (sol.policy[i] != chosen[i]) ++sol.shortcut_mismatches;
  }
  sol.avg_cost = std::min(sol.q_values[s0][0], sol.q_values[s0][1]);
  double residual = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double lhs = sol.avg_cost + h[i];
    residual = std::max(residual, std::fabs(std::min(sol.q_values[i][0], sol.q_values[i][1]) - lhs));
  }
  sol.bellman_residual = residual;

  sol.thresholds.assign(static_cast<std::size_t>(m.delta_hat()), std::nullopt);
  for (std::size_t i = 0; i < n; ++i) {
    if (sol.policy[i] != 1) continue;
    auto& t = sol.thresholds[static_cast<std::size_t>(m.delta(i) - 1)];
    if (!t || m.theta(i) < *t) t = m.theta(i);
  }
  sol.relative_values = std::move(h);
  return sol;
}

std::vector<double> discounted_vi(const TruncatedMdp& m, double mu, std::size_t n_iters) {
  if (!(mu > 0.0 && mu < 1.0)) throw std::invalid_argument("discount must lie in (0, 1)");
  std::vector<double> v(m.size(), 0.0);
  std::vector<double> next(m.size(), 0.0);
  for (std::size_t it = 0; it < n_iters; ++it) {
    for (std::size_t i = 0; i < m.size(); ++i) {
      const double q0 = m.cost(i, 0) + mu * expected(m.row(i, 0), v);
      const double q1 = m.cost(i, 1) + mu * expected(m.row(i, 1), v);
      next[i] = std::min(q0, q1);
    }
    v.swap(next);
  }
  return v;
}

std::vector<std::array<double, 2>> discounted_q(const TruncatedMdp& m, double mu,
                                                std::span<const double> values) {
  if (values.size() != m.size()) throw std::invalid_argument("value vector size mismatch");
  const std::vector<double> v(values.begin(), values.end());
  std::vector<std::array<double, 2>> out(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) {
    out[i] = {m.cost(i, 0) + mu * expected(m.row(i, 0), v),
              m.cost(i, 1) + mu * expected(m.row(i, 1), v)};
  }
  return out;
}

double avg_cost_threshold_iid(int n, double charge, double alpha) {
  if (n < 1) throw std::invalid_argument("threshold must be at least 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
  const double nd = n;
  const double renewal = nd * alpha + 1.0 - alpha;
  const double num = nd * nd * alpha * alpha - nd * alpha * alpha + 2.0 * nd * alpha - 2.0 * alpha + 2.0;
  return num / (2.0 * alpha * renewal) + charge / renewal;
}

}  // namespace aoi
