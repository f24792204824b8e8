#include "aoi/lowerbound.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "aoi/errors.hpp"

namespace aoi {

void Fleet::validate() const {
  if (devices.empty()) throw std::invalid_argument("fleet has no devices");
  if (budget < 1 || static_cast<std::size_t>(budget) > devices.size()) {
    throw std::invalid_argument("budget K must satisfy 1 <= K <= M (K=" + std::to_string(budget) +
                                ", M=" + std::to_string(devices.size()) + ")");
  }
}

double optimal_cost_given_w(const ChannelParams& p, double charge, int delta_hat, double eps_bar) {
  const TruncatedMdp m(p, delta_hat, charge);
  RviOptions opts;
  opts.eps_bar = eps_bar;
  return rvi_threshold(m, opts).avg_cost;
}

DualFunction::DualFunction(Fleet fleet, int delta_hat, RviOptions rvi)
    : fleet_(std::move(fleet)), delta_hat_(delta_hat), rvi_(rvi) {
  fleet_.validate();
  rvi_.warm_start = {};
}

DualFunction::ArmCache& DualFunction::cache_for(const ChannelParams& p) {
  auto it = arms_.find(p);
  if (it == arms_.end()) {
    it = arms_.emplace(p, ArmCache{TruncatedMdp(p, delta_hat_, 0.0), {}, {}}).first;
  }
  return it->second;
}

double DualFunction::arm_cost(const ChannelParams& p, double charge) {
  ArmCache& arm = cache_for(p);
  if (auto hit = arm.cost.find(charge); hit != arm.cost.end()) return hit->second;
  arm.mdp.set_charge(charge);
  RviOptions opts = rvi_;
  opts.warm_start = arm.last_h;
  DpSolution sol = rvi_threshold(arm.mdp, opts);
  arm.last_h = std::move(sol.relative_values);
  arm.cost.emplace(charge, sol.avg_cost);
  return sol.avg_cost;
}

std::vector<double> DualFunction::per_device(double charge) {
  std::vector<double> out;
  out.reserve(fleet_.size());
  for (const ChannelParams& p : fleet_.devices) out.push_back(arm_cost(p, charge));
  return out;
}

double DualFunction::operator()(double charge) {
  if (auto hit = evaluated_.find(charge); hit != evaluated_.end()) return hit->second;
  double total = 0.0;
  for (const ChannelParams& p : fleet_.devices) total += arm_cost(p, charge);
  const double j = total - charge * fleet_.budget;
  evaluated_.emplace(charge, j);
  return j;
}

double j_of_w(const Fleet& fleet, double charge, int delta_hat, double eps_bar) {
  RviOptions opts;
  opts.eps_bar = eps_bar;
  DualFunction dual(fleet, delta_hat, opts);
  return dual(charge);
}

LowerBoundResult find_wstar(const Fleet& fleet, int delta_hat, const WStarSearch& search) {
  DualFunction dual(fleet, delta_hat, search.rvi);
  return find_wstar(dual, search);
}

LowerBoundResult find_wstar(DualFunction& dual, const WStarSearch& search) {
  if (!(search.step > 0.0) || !(search.xi > 0.0)) {
    throw std::invalid_argument("search step and tolerance must be positive");
  }
  double lb = 0.0;
  double ub = lb + search.step;
  while (dual(lb) <= dual(ub)) {
    lb = ub;
    ub = lb + search.step;
    if (ub > search.cap) {
      throw BracketNotFound("J(W) still increasing at charge " + std::to_string(search.cap));
    }
  }
  lb = std::max(0.0, lb - search.step);
  while (ub - lb > search.xi) {
    const double m1 = lb + (ub - lb) / 3.0;
    const double m2 = ub - (ub - lb) / 3.0;
    if (dual(m1) > dual(m2) - search.tie_tolerance) {
      ub = m2;
    } else {
      lb = m1;
    }
  }
  LowerBoundResult r;
  r.w_dagger = (lb + ub) / 2.0;
  r.value = dual(r.w_dagger);
  r.per_device_costs = dual.per_device(r.w_dagger);
  r.evaluations = dual.evaluations();
  return r;
}

// ---------------------------------------------------------------------------

namespace {

struct ProductSpace {
  std::vector<TruncatedMdp> arms;
  std::vector<std::size_t> stride;
  std::size_t size = 1;

  ProductSpace(const Fleet& fleet, int delta_hat, std::size_t cap) {
    fleet.validate();
    if (fleet.size() > 16) throw StateSpaceTooLarge("joint solver supports at most 16 devices");
    for (const ChannelParams& p : fleet.devices) {
      arms.emplace_back(p, delta_hat, 0.0);
      stride.push_back(size);
      const double next = static_cast<double>(size) * static_cast<double>(arms.back().size());
      if (next > static_cast<double>(cap)) {
        throw StateSpaceTooLarge("joint state space exceeds " + std::to_string(cap) + " states");
      }
      size *= arms.back().size();
    }
  }

  void decode(std::size_t x, JointState& out) const {
    out.resize(arms.size());
    for (std::size_t i = 0; i < arms.size(); ++i) {
      out[i] = x % arms[i].size();
      x /= arms[i].size();
    }
  }

  double cost(const JointState& s) const {
    double c = 0.0;
    for (std::size_t i = 0; i < arms.size(); ++i) c += arms[i].delta(s[i]);
    return c;
  }

  // Expected value of h after joint action a from joint state s.
  double expected(const JointState& s, JointAction a, const std::vector<double>& h,
                  std::vector<std::pair<std::size_t, double>>& scratch,
                  std::vector<std::pair<std::size_t, double>>& grow) const {
    scratch.assign(1, {0, 1.0});
    for (std::size_t i = 0; i < arms.size(); ++i) {
      const TransitionRow& r = arms[i].row(s[i], static_cast<int>((a >> i) & 1u));
      grow.clear();
      for (const auto& [idx, p] : scratch) {
        for (int j = 0; j < r.size; ++j) grow.emplace_back(idx + r.next[j] * stride[i], p * r.prob[j]);
      }
      scratch.swap(grow);
    }
    double acc = 0.0;
    for (const auto& [idx, p] : scratch) acc += p * h[idx];
    return acc;
  }
};

// Damped relative value iteration over the product chain. candidates(s)
// lists the admissible joint actions of state s; the first minimiser wins.
template <typename Candidates>
JointSolution joint_rvi(const ProductSpace& space, double eps_bar, Candidates&& candidates) {
  if (!(eps_bar > 0.0)) throw std::invalid_argument("tolerance must be positive");
  const double tau = RviOptions{}.damping;
  const std::size_t max_iters = RviOptions{}.max_iters;
  const std::size_t n = space.size;

  std::vector<double> h(n, 0.0);
  std::vector<double> next(n, 0.0);
  std::vector<double> costs(n);
  std::vector<std::size_t> digits(n * space.arms.size());
  JointState s;
  for (std::size_t x = 0; x < n; ++x) {
    space.decode(x, s);
    costs[x] = space.cost(s);
    std::copy(s.begin(), s.end(), digits.begin() + static_cast<std::ptrdiff_t>(x * s.size()));
  }
  auto load = [&](std::size_t x) {
    s.assign(digits.begin() + static_cast<std::ptrdiff_t>(x * space.arms.size()),
             digits.begin() + static_cast<std::ptrdiff_t>((x + 1) * space.arms.size()));
  };

  std::vector<std::pair<std::size_t, double>> scratch;
  std::vector<std::pair<std::size_t, double>> grow;
  JointSolution sol;
  sol.states = n;
  sol.policy.assign(n, 0);

  auto best = [&](std::size_t x, JointAction& arg) {
    load(x);
    double v = std::numeric_limits<double>::infinity();
    for (JointAction a : candidates(s)) {
      const double q = costs[x] + space.expected(s, a, h, scratch, grow);
      if (q < v) {
        v = q;
        arg = a;
      }
    }
    return v;
  };

  double change = std::numeric_limits<double>::infinity();
  std::size_t iter = 0;
  while (change > eps_bar) {
    if (iter >= max_iters) throw NonConvergence("joint relative value iteration did not converge", iter);
    JointAction arg = 0;
    const double ref = best(0, arg);
    change = 0.0;
    for (std::size_t x = 0; x < n; ++x) {
      const double v = best(x, sol.policy[x]);
      const double updated = tau * h[x] + (1.0 - tau) * (v - ref);
      change = std::max(change, std::fabs(updated - h[x]));
      next[x] = updated;
    }
    h.swap(next);
    ++iter;
  }
  JointAction arg = 0;
  sol.avg_cost = best(0, arg);
  for (std::size_t x = 0; x < n; ++x) best(x, sol.policy[x]);
  sol.iterations = iter;
  return sol;
}

}  // namespace

JointSolution solve_joint_exact(const Fleet& fleet, int delta_hat, double eps_bar,
                                std::size_t state_cap) {
  const ProductSpace space(fleet, delta_hat, state_cap);
  std::vector<JointAction> actions;
  const JointAction all = (JointAction{1} << fleet.size()) - 1;
  for (JointAction a = 0; a <= all; ++a) {
    if (std::popcount(a) <= fleet.budget) actions.push_back(a);
  }
  std::stable_sort(actions.begin(), actions.end(),
                   [](JointAction a, JointAction b) { return std::popcount(a) < std::popcount(b); });
  return joint_rvi(space, eps_bar, [&](const JointState&) -> const std::vector<JointAction>& {
    return actions;
  });
}

double joint_policy_cost(const Fleet& fleet, int delta_hat,
                         const std::function<JointAction(const JointState&)>& selector,
                         double eps_bar, std::size_t state_cap) {
  const ProductSpace space(fleet, delta_hat, state_cap);
  std::array<JointAction, 1> one{};
  return joint_rvi(space, eps_bar, [&](const JointState& s) -> const std::array<JointAction, 1>& {
           one[0] = selector(s);
           if (std::popcount(one[0]) > fleet.budget) {
             throw std::invalid_argument("joint policy exceeds the transmission budget");
           }
           return one;
         }).avg_cost;
}

}  // namespace aoi
