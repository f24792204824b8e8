#include "aoi/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>
#include <thread>

#include "aoi/errors.hpp"

namespace aoi {

void SimConfig::validate() const {
  if (devices.empty()) throw std::invalid_argument("simulation needs at least one device");
  if (budget < 1 || static_cast<std::size_t>(budget) > devices.size()) {
    throw std::invalid_argument("budget K must satisfy 1 <= K <= M (K=" + std::to_string(budget) +
                                ", M=" + std::to_string(devices.size()) + ")");
  }
  if (horizon < 1) throw std::invalid_argument("horizon T must be at least 1");
  if (replications < 1) throw std::invalid_argument("replications must be at least 1");
  if (delta_hat < 2) throw std::invalid_argument("truncation bound must be at least 2");
  if (jobs < 1) throw std::invalid_argument("jobs must be at least 1");
  if (truncate_at == 1 || truncate_at < 0) {
    throw std::invalid_argument("truncate_at must be 0 (off) or at least 2");
  }
  if (!(relaxed_charge >= 0.0)) throw std::invalid_argument("relaxed charge must be non-negative");
  for (std::int64_t c : checkpoints) {
    if (c < 1 || c > horizon) {
      throw std::invalid_argument("checkpoint " + std::to_string(c) + " outside 1..T");
    }
  }
}

Estimate estimate_ci(std::span<const double> samples) {
  if (samples.size() < 2) {
    throw TooFewReplications("standard error needs at least two replications, got " +
                             std::to_string(samples.size()));
  }
  const double n = static_cast<double>(samples.size());
  double mean = 0.0;
  for (double x : samples) mean += x;
  mean /= n;
  double ss = 0.0;
  for (double x : samples) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / (n - 1.0) / n)};
}

Rng make_stream(std::uint64_t seed, std::uint64_t replication, std::uint64_t device) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(replication),
                    static_cast<std::uint32_t>(replication >> 32),
                    static_cast<std::uint32_t>(device), static_cast<std::uint32_t>(device >> 32)};
  return Rng(seq);
}

// ---------------------------------------------------------------------------

Simulator::Simulator(const SimConfig& config, const Scheduler& scheduler,
                     std::uint64_t replication)
    : config_(config), scheduler_(scheduler) {
  const std::size_t m = config.devices.size();
  state_.params = config.devices;
  state_.arms.assign(m, ArmState{1, {BeliefOrigin::Stationary, 0}});
  state_.theta.resize(m);
  streams_.reserve(m);
  channels_.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    streams_.push_back(make_stream(config.seed, replication, i));
    channels_.emplace_back(config.devices[i], streams_.back(), config.channel_override);
    state_.theta[i] = equilibrium_belief(config.devices[i]);
  }
  if (config.truncate_at > 0) {
    for (std::size_t i = 0; i < m; ++i) {
      truncated_.emplace_back(config.devices[i], config.truncate_at, 0.0);
      const std::size_t s = truncated_.back().clamp(state_.arms[i]);
      truncated_state_.push_back(s);
      state_.arms[i] = truncated_.back().state(s);
      state_.theta[i] = truncated_.back().theta(s);
    }
  }
  sums_.assign(m, 0.0);
  outcomes_.assign(m, std::nullopt);
  mask_.assign(m, 0);
}

void Simulator::step() {
  const std::size_t m = state_.size();
  for (std::size_t i = 0; i < m; ++i) sums_[i] += state_.arms[i].delta;

  selected_ = scheduler_.select(state_, config_.budget);
  std::fill(mask_.begin(), mask_.end(), 0);
  for (std::size_t i : selected_) mask_[i] = 1;
  scheduled_total_ += selected_.size();

  if (!truncated_.empty()) {
    step_truncated();
    ++state_.t;
    return;
  }

  for (std::size_t i = 0; i < m; ++i) channels_[i].step(streams_[i]);

  for (std::size_t i = 0; i < m; ++i) {
    const ChannelParams& p = state_.params[i];
    ArmState& a = state_.arms[i];
    if (mask_[i]) {
      const Outcome o =
          channels_[i].state() == ChannelState::Good ? Outcome::Success : Outcome::Failure;
      outcomes_[i] = o;
      if (o == Outcome::Success) {
        a.delta = 1;
        a.belief = {BeliefOrigin::FromGood, 0};
      } else {
        a.delta += 1;
        a.belief = {BeliefOrigin::FromBad, 0};
      }
      state_.theta[i] = posterior_belief(p, o);
    } else {
      outcomes_[i] = std::nullopt;
      a.delta += 1;
      a.belief = a.belief.stepped();
      state_.theta[i] = p.is_iid() ? p.alpha() : step_belief(p, state_.theta[i]);
    }
  }
  ++state_.t;
}

void Simulator::step_truncated() {
  for (std::size_t i = 0; i < state_.size(); ++i) {
    const TruncatedMdp& mdp = truncated_[i];
    const TransitionRow& row = mdp.row(truncated_state_[i], mask_[i] ? 1 : 0);
    std::size_t next = row.next[0];
    if (mask_[i]) {
      const bool success = uniform01(streams_[i]) < row.prob[0];
      next = success ? row.next[0] : row.next[1];
      outcomes_[i] = success ? Outcome::Success : Outcome::Failure;
    } else {
      outcomes_[i] = std::nullopt;
    }
    truncated_state_[i] = next;
    state_.arms[i] = mdp.state(next);
    state_.theta[i] = mdp.theta(next);
  }
}

namespace {

struct Replicate {
  std::vector<double> per_device;
  double total = 0.0;
  double scheduled = 0.0;
  std::vector<double> checkpoints;
  std::vector<TrajectoryRow> trajectory;
};

Replicate run_replicate(const SimConfig& config, const Scheduler& scheduler, std::uint64_t rep) {
  Simulator sim(config, scheduler, rep);
  std::vector<std::int64_t> marks = config.checkpoints;
  std::sort(marks.begin(), marks.end());
  std::vector<double> at_mark(marks.size(), 0.0);
  std::size_t next_mark = 0;
  const bool trace = config.record_trajectory && rep == 0;
  Replicate r;
  if (trace) r.trajectory.reserve(static_cast<std::size_t>(config.horizon) * config.devices.size());

  for (std::int64_t t = 0; t < config.horizon; ++t) {
    FleetState before;
    if (trace) before = sim.state();
    sim.step();
    if (trace) {
      std::vector<char> on(config.devices.size(), 0);
      for (std::size_t i : sim.last_selection()) on[i] = 1;
      for (std::size_t i = 0; i < config.devices.size(); ++i) {
        r.trajectory.push_back(
            {t + 1, i, before.arms[i].delta, before.theta[i], on[i] != 0, sim.last_outcomes()[i]});
      }
    }
    while (next_mark < marks.size() && marks[next_mark] == sim.slots()) {
      double s = 0.0;
      for (double x : sim.aoi_sums()) s += x;
      at_mark[next_mark++] = s / static_cast<double>(sim.slots());
    }
  }

  const double horizon = static_cast<double>(config.horizon);
  for (double x : sim.aoi_sums()) {
    r.per_device.push_back(x / horizon);
    r.total += x / horizon;
  }
  r.scheduled = static_cast<double>(sim.scheduled_total()) / horizon;
  // Report checkpoints in the caller's order.
  for (std::int64_t c : config.checkpoints) {
    const auto pos = std::lower_bound(marks.begin(), marks.end(), c) - marks.begin();
    r.checkpoints.push_back(at_mark[static_cast<std::size_t>(pos)]);
  }
  return r;
}

Estimate summarize(const std::vector<double>& xs) {
  if (xs.size() < 2) return {xs.front(), std::numeric_limits<double>::quiet_NaN()};
  return estimate_ci(xs);
}

}  // namespace

SimResult run_sim(const SimConfig& config, const IndexTableSet* tables) {
  config.validate();
  if (needs_whittle_tables(config.policy)) {
    for (const ChannelParams& p : config.devices) {
      if (tables == nullptr || !tables->contains(p)) {
        throw MissingIndexTable("no Whittle index table for channel " + p.to_string());
      }
    }
  }
  const Scheduler scheduler(config.policy, tables, config.relaxed_charge);
  const std::size_t reps = static_cast<std::size_t>(config.replications);
  std::vector<Replicate> out(reps);

  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(config.jobs), reps);
  if (workers <= 1) {
    for (std::size_t r = 0; r < reps; ++r) out[r] = run_replicate(config, scheduler, r);
  } else {
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t r = w; r < reps; r += workers) out[r] = run_replicate(config, scheduler, r);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  SimResult res;
  const std::size_t m = config.devices.size();
  res.per_device_avg.assign(m, 0.0);
  for (const Replicate& r : out) {
    res.replicate_totals.push_back(r.total);
    for (std::size_t i = 0; i < m; ++i) res.per_device_avg[i] += r.per_device[i] / reps;
    res.mean_scheduled += r.scheduled / reps;
  }
  const Estimate total = summarize(res.replicate_totals);
  res.total_avg_aoi = total.mean;
  res.std_error = total.std_error;
  for (std::size_t c = 0; c < config.checkpoints.size(); ++c) {
    std::vector<double> xs;
    for (const Replicate& r : out) xs.push_back(r.checkpoints[c]);
    const Estimate e = summarize(xs);
    res.checkpoints.push_back({config.checkpoints[c], e.mean, e.std_error});
  }
  res.trajectory = std::move(out.front().trajectory);
  return res;
}

double simulate_heuristic_cost(const ChannelParams& p, int delta_L, double charge,
                               std::int64_t horizon, std::uint64_t seed) {
  if (delta_L < 1) throw std::invalid_argument("activation AoI must be at least 1");
  if (horizon < 1) throw std::invalid_argument("horizon T must be at least 1");
  Rng rng = make_stream(seed, 0, 0);
  // Start right after a delivery: AoI 1 with the channel known GOOD.
  ChannelState h = ChannelState::Good;
  int delta = 1;
  double cost = 0.0;
  for (std::int64_t t = 0; t < horizon; ++t) {
    const bool transmit = delta >= delta_L;
    cost += delta + (transmit ? charge : 0.0);
    h = sample_channel_step(p, h, rng);
    delta = transmit && h == ChannelState::Good ? 1 : delta + 1;
  }
  return cost / static_cast<double>(horizon);
}

// ---------------------------------------------------------------------------

void write_sim_csv(std::ostream& out, const SimConfig& config, const SimResult& result,
                   bool header) {
  if (header) out << kSimCsvHeader << '\n';
  out << to_string(config.policy) << ',' << config.devices.size() << ',' << config.budget << ','
      << config.horizon << ',' << config.seed << ',' << csv_number(result.total_avg_aoi) << ','
      << csv_number(result.std_error) << '\n';
}

void write_trajectory_csv(std::ostream& out, const SimResult& result) {
  out << kTrajectoryCsvHeader << '\n';
  for (const TrajectoryRow& r : result.trajectory) {
    out << r.t << ',' << r.device << ',' << r.delta << ',' << csv_number(r.theta) << ','
        << (r.scheduled ? 1 : 0) << ',';
    if (r.outcome) out << (*r.outcome == Outcome::Success ? "success" : "failure");
    out << '\n';
  }
}

}  // namespace aoi
