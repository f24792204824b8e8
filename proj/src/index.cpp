#include "aoi/index.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <iterator>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "aoi/csv.hpp"
#include "aoi/errors.hpp"

namespace aoi {

const char* to_string(IndexKind kind) {
  return kind == IndexKind::Whittle ? "whittle" : "whittle_like";
}

IndexKind parse_index_kind(const std::string& text) {
  if (text == "whittle") return IndexKind::Whittle;
  if (text == "whittle_like") return IndexKind::WhittleLike;
  throw std::invalid_argument("unknown index kind: " + text + " (expected whittle|whittle_like)");
}

double whittle_iid(int delta, double alpha) {
  if (delta < 1) throw std::invalid_argument("AoI must be at least 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
  const double d = delta;
  return d + d * (d - 1.0) * alpha / 2.0;
}

namespace {

void check_heuristic_args(int delta_L, double theta_L, double beta) {
  if (delta_L < 1) throw std::invalid_argument("activation AoI must be at least 1");
  if (!(theta_L >= 0.0 && theta_L <= 1.0)) throw std::invalid_argument("belief must lie in [0, 1]");
  if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("beta must lie in (0, 1)");
}

double renewal_weight(int delta_L, double theta_L, double beta) {
  return (1.0 - beta) * delta_L + 1.0 - theta_L;
}

}  // namespace

HeuristicStationary::HeuristicStationary(int delta_L, double theta_L, double beta)
    : delta_L_(delta_L), theta_L_(theta_L), beta_(beta), head_(0.0) {
  check_heuristic_args(delta_L, theta_L, beta);
  head_ = (1.0 - beta) / renewal_weight(delta_L, theta_L, beta);
}

double HeuristicStationary::operator()(long j) const {
  if (j < 1) return 0.0;
  if (j <= delta_L_) return head_;
  return head_ * (1.0 - theta_L_) * std::pow(beta_, static_cast<double>(j - delta_L_ - 1));
}

long HeuristicStationary::cutoff(double tail_mass) const {
  long j = delta_L_;
  // Mass strictly above j >= delta_L is head (1 - theta_L) beta^(j - delta_L) / (1 - beta).
  double above = head_ * (1.0 - theta_L_) / (1.0 - beta_);
  while (above >= tail_mass) {
    above *= beta_;
    ++j;
  }
  return j;
}

HeuristicStationary stationary_dist_heuristic(int delta_L, double theta_L, double beta) {
  return HeuristicStationary(delta_L, theta_L, beta);
}

HeuristicCost heuristic_cost(int delta_L, double theta_L, double beta) {
  check_heuristic_args(delta_L, theta_L, beta);
  const double d = delta_L;
  const double miss = 1.0 - theta_L;
  const double stay = 1.0 - beta;
  const double weight = renewal_weight(delta_L, theta_L, beta);
  HeuristicCost c;
  c.f1 = stay / weight *
         (d * (d + 1.0) / 2.0 + miss * beta / (stay * stay) + miss * (d + 1.0) / stay);
  c.f2 = (2.0 - theta_L - beta) / weight;
  return c;
}

double avg_cost_heuristic(int delta_L, double theta_L, double beta, double charge) {
  return heuristic_cost(delta_L, theta_L, beta).at(charge);
}

double whittle_like(int delta, double theta, const ChannelParams& p) {
  const double next_theta = p.is_iid() ? p.alpha() : step_belief(p, theta);
  const HeuristicCost now = heuristic_cost(delta, theta, p.beta());
  const HeuristicCost later = heuristic_cost(delta + 1, next_theta, p.beta());
  const double den = now.f2 - later.f2;
  if (std::fabs(den) <= 1e-12) {
    throw DegenerateDenominator("Whittle-like index undefined at AoI " + std::to_string(delta) +
                                ", belief " + std::to_string(theta) + " for " + p.to_string());
  }
  return (later.f1 - now.f1) / den;
}

double whittle_like(const ArmState& s, const ChannelParams& p) {
  return whittle_like(s.delta, s.belief.value(p), p);
}

// ---------------------------------------------------------------------------

ChargeSweep::ChargeSweep(ChannelParams p, int delta_hat, RviOptions rvi)
    : mdp_(p, delta_hat, 0.0), rvi_(rvi) {
  rvi_.warm_start = {};
}

std::vector<double> ChargeSweep::gaps(double charge) {
  mdp_.set_charge(charge);
  RviOptions opts = rvi_;
  opts.warm_start = last_h_;
  DpSolution sol = rvi_threshold(mdp_, opts);
  ++solves_;
  std::vector<double> out(mdp_.size());
  std::vector<bool> active(mdp_.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = sol.q_gap(i);
    active[i] = out[i] < 0.0;
  }
  active_[charge] = std::move(active);
  last_h_ = std::move(sol.relative_values);
  return out;
}

const std::vector<bool>& ChargeSweep::solve_signs(double charge) {
  gaps(charge);
  return active_.at(charge);
}

bool ChargeSweep::prefers_active(double charge, std::size_t state, bool infer) {
  if (auto hit = active_.find(charge); hit != active_.end()) return hit->second[state];
  if (infer) {
    // F is non-decreasing in the charge: active at a larger charge implies
    // active here, passive at a smaller charge implies passive here.
    auto above = active_.lower_bound(charge);
    if (above != active_.end() && above->second[state]) return true;
    if (above != active_.begin() && !std::prev(above)->second[state]) return false;
  }
  return solve_signs(charge)[state];
}

double whittle_general(std::size_t state, ChargeSweep& sweep, const WhittleSearch& search) {
  if (!(search.xi > 0.0) || !(search.step > 0.0)) {
    throw std::invalid_argument("search tolerance and step must be positive");
  }
  const bool infer = search.infer_from_monotonicity;
  double lb = 0.0;
  double ub = lb + search.step;
  while (sweep.prefers_active(ub, state, infer)) {
    lb = ub;
    ub = lb + search.step;
    if (ub > search.cap) {
      const ArmState& s = sweep.mdp().state(state);
      throw BracketNotFound("no sign change of the Q gap below charge " +
                            std::to_string(search.cap) + " at AoI " + std::to_string(s.delta) +
                            " (" + to_string(s.belief.origin) + " k=" +
                            std::to_string(s.belief.k) + ")");
    }
  }
  while (ub - lb > search.xi) {
    const double mid = (ub + lb) / 2.0;
    if (sweep.prefers_active(mid, state, infer)) {
      lb = mid;
    } else {
      ub = mid;
    }
  }
  return (lb + ub) / 2.0;
}

double whittle_general(const ArmState& s, const ChannelParams& p, int delta_hat,
                       const WhittleSearch& search) {
  ChargeSweep sweep(p, delta_hat, search.rvi);
  return whittle_general(sweep.mdp().index_of(s), sweep, search);
}

// ---------------------------------------------------------------------------

IndexTable::IndexTable(ChannelParams p, int delta_hat, IndexKind kind, double xi, double step,
                       std::vector<double> entries)
    : layout_(p, delta_hat, 0.0), kind_(kind), xi_(xi), step_(step), entries_(std::move(entries)) {
  if (entries_.size() != layout_.size()) {
    throw std::invalid_argument("index table needs one entry per truncated state");
  }
}

void IndexTable::write_csv(std::ostream& out, bool header) const {
  if (header) out << kIndexCsvHeader << '\n';
  const std::string a = csv_number(params().alpha());
  const std::string b = csv_number(params().beta());
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const ArmState& s = layout_.state(i);
    out << a << ',' << b << ',' << s.delta << ',' << to_string(s.belief.origin) << ',' << s.belief.k
        << ',' << csv_number(theta(i)) << ',' << to_string(kind_) << ',' << csv_number(entries_[i])
        << '\n';
  }
}

IndexTable IndexTable::read_csv(std::istream& in) {
  struct Row {
    ArmState state;
    double value;
  };
  std::string line;
  std::vector<Row> rows;
  double alpha = 0.0;
  double beta = 0.0;
  int delta_hat = 0;
  IndexKind kind = IndexKind::Whittle;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty() || line == kIndexCsvHeader) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    if (f.size() != 8) throw std::invalid_argument("malformed index row: " + line);
    const double a = std::stod(f[0]);
    const double b = std::stod(f[1]);
    const IndexKind k = parse_index_kind(f[6]);
    if (first) {
      alpha = a;
      beta = b;
      kind = k;
      first = false;
    } else if (a != alpha || b != beta || k != kind) {
      throw std::invalid_argument("index file mixes channel parameters or index kinds");
    }
    Row r{{std::stoi(f[2]), {parse_origin(f[3]), std::stoi(f[4])}}, std::stod(f[7])};
    delta_hat = std::max(delta_hat, r.state.delta);
    rows.push_back(r);
  }
  if (rows.empty()) throw std::invalid_argument("index file has no rows");
  const ChannelParams p(alpha, beta);
  TruncatedMdp layout(p, delta_hat, 0.0);
  std::vector<double> entries(layout.size(), std::numeric_limits<double>::quiet_NaN());
  for (const Row& r : rows) entries[layout.index_of(r.state)] = r.value;
  for (double v : entries) {
    if (std::isnan(v)) throw std::invalid_argument("index file does not cover every state");
  }
  return IndexTable(p, delta_hat, kind, 0.0, 0.0, std::move(entries));
}

IndexTable build_index_table(const ChannelParams& p, int delta_hat, double xi, double step,
                             IndexKind kind, const WhittleSearch& search) {
  WhittleSearch s = search;
  s.xi = xi;
  s.step = step;
  TruncatedMdp layout(p, delta_hat, 0.0);
  std::vector<double> entries(layout.size());
  if (kind == IndexKind::WhittleLike) {
    for (std::size_t i = 0; i < layout.size(); ++i) {
      entries[i] = whittle_like(layout.delta(i), layout.theta(i), p);
    }
  } else {
    ChargeSweep sweep(p, delta_hat, s.rvi);
    for (std::size_t i = 0; i < layout.size(); ++i) entries[i] = whittle_general(i, sweep, s);
  }
  return IndexTable(p, delta_hat, kind, xi, step, std::move(entries));
}

IndexTableSet build_index_tables(const std::vector<ChannelParams>& devices, int delta_hat,
                                 IndexKind kind, const WhittleSearch& search) {
  IndexTableSet out;
  for (const ChannelParams& p : devices) {
    if (out.contains(p)) continue;
    out.emplace(p, std::make_shared<const IndexTable>(
                       build_index_table(p, delta_hat, search.xi, search.step, kind, search)));
  }
  return out;
}

}  // namespace aoi
