#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "aoi/channel.hpp"
#include "aoi/single_arm_mdp.hpp"

namespace aoi {

enum class IndexKind { Whittle, WhittleLike };

const char* to_string(IndexKind kind);
IndexKind parse_index_kind(const std::string& text);

// ---------------------------------------------------------------------------
// Closed forms

/// Whittle index of AoI delta on a memoryless channel with success
/// probability alpha: delta + delta (delta - 1) alpha / 2.
double whittle_iid(int delta, double alpha);

/// Stationary law of the chain induced by "idle until AoI delta_L, then
/// transmit until success", where the first attempt succeeds w.p. theta_L and
/// later ones w.p. 1 - beta.
class HeuristicStationary {
 public:
  HeuristicStationary(int delta_L, double theta_L, double beta);

  /// Probability of AoI j (j >= 1).
  double operator()(long j) const;
  /// Smallest J such that the mass above J is below tail_mass.
  long cutoff(double tail_mass) const;

  int delta_L() const noexcept { return delta_L_; }
  double theta_L() const noexcept { return theta_L_; }
  double beta() const noexcept { return beta_; }

 private:
  int delta_L_;
  double theta_L_;
  double beta_;
  double head_;
};

HeuristicStationary stationary_dist_heuristic(int delta_L, double theta_L, double beta);

/// Average cost of the heuristic policy, affine in the charge: f1 + f2 W.
struct HeuristicCost {
  double f1 = 0.0;
  double f2 = 0.0;
  double at(double charge) const { return f1 + f2 * charge; }
};

HeuristicCost heuristic_cost(int delta_L, double theta_L, double beta);
double avg_cost_heuristic(int delta_L, double theta_L, double beta, double charge);

/// Charge at which the heuristic costs from (delta, theta) and from
/// (delta + 1, T(theta)) coincide. Throws DegenerateDenominator when the two
/// charge coefficients agree within 1e-12.
double whittle_like(int delta, double theta, const ChannelParams& p);
double whittle_like(const ArmState& s, const ChannelParams& p);

// ---------------------------------------------------------------------------
// Numerical Whittle index

struct WhittleSearch {
  double xi = 1e-3;      // final bracket width
  double step = 1.0;     // bracket expansion step d
  double cap = 1e5;      // give up once the upper bracket passes this charge
  RviOptions rvi{};      // tolerance / iteration cap of each inner solve
  // Answer sign queries from cached solves when monotonicity of F in the
  // charge decides them.
  bool infer_from_monotonicity = true;
};

/// Solves one truncated single-arm MDP at many charges and remembers, per
/// charge, which states strictly prefer transmitting (F(W, s) < 0). Each new
/// solve is warm-started from the previous relative values.
class ChargeSweep {
 public:
  ChargeSweep(ChannelParams p, int delta_hat, RviOptions rvi = {});

  const TruncatedMdp& mdp() const noexcept { return mdp_; }

  /// Converged F(W, s) = Q_W(s, 1) - Q_W(s, 0) for every state.
  std::vector<double> gaps(double charge);

  /// Sign test F(W, s) < 0, solving only when the cache cannot decide.
  bool prefers_active(double charge, std::size_t state, bool infer = true);

  std::size_t solves() const noexcept { return solves_; }

 private:
  const std::vector<bool>& solve_signs(double charge);

  TruncatedMdp mdp_;
  RviOptions rvi_;
  std::map<double, std::vector<bool>> active_;
  std::vector<double> last_h_;
  std::size_t solves_ = 0;
};

/// Bisection for the zero of the non-decreasing gap F(., s): expand
/// [W_LB, W_LB + d] from zero until F(W_UB, s) >= 0, then halve until the
/// bracket is narrower than xi. Throws BracketNotFound past search.cap.
double whittle_general(std::size_t state, ChargeSweep& sweep, const WhittleSearch& search);
double whittle_general(const ArmState& s, const ChannelParams& p, int delta_hat,
                       const WhittleSearch& search = {});

// ---------------------------------------------------------------------------
// Tables

class IndexTable {
 public:
  IndexTable(ChannelParams p, int delta_hat, IndexKind kind, double xi, double step,
             std::vector<double> entries);

  const ChannelParams& params() const noexcept { return layout_.params(); }
  int delta_hat() const noexcept { return layout_.delta_hat(); }
  IndexKind kind() const noexcept { return kind_; }
  double xi() const noexcept { return xi_; }
  double step() const noexcept { return step_; }
  std::size_t size() const noexcept { return entries_.size(); }
  const ArmState& state(std::size_t i) const { return layout_.state(i); }
  double theta(std::size_t i) const { return layout_.theta(i); }
  double value(std::size_t i) const { return entries_[i]; }
  const std::vector<double>& entries() const noexcept { return entries_; }

  /// Index of a truncated state.
  double at(const ArmState& s) const { return entries_[layout_.index_of(s)]; }
  /// Index of an arbitrary device state, clamped onto the truncated space.
  double lookup(const ArmState& s) const { return entries_[layout_.clamp(s)]; }

  /// CSV rows: alpha,beta,delta,origin,k,theta,index_kind,index_value.
  void write_csv(std::ostream& out, bool header = true) const;
  static IndexTable read_csv(std::istream& in);

 private:
  TruncatedMdp layout_;
  IndexKind kind_;
  double xi_;
  double step_;
  std::vector<double> entries_;
};

inline constexpr const char* kIndexCsvHeader =
    "alpha,beta,delta,origin,k,theta,index_kind,index_value";

IndexTable build_index_table(const ChannelParams& p, int delta_hat, double xi, double step,
                             IndexKind kind, const WhittleSearch& search = {});

/// Tables shared by every device with the same channel parameters.
using IndexTableSet = std::map<ChannelParams, std::shared_ptr<const IndexTable>>;

IndexTableSet build_index_tables(const std::vector<ChannelParams>& devices, int delta_hat,
                                 IndexKind kind, const WhittleSearch& search = {});

}  // namespace aoi
