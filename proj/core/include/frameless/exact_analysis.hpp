#pragma once

#include <span>
#include <vector>

#include "frameless/binomial.hpp"
#include "frameless/degree_model.hpp"
#include "frameless/protocol.hpp"

namespace frameless {

/// Cardinalities of the cloud (slots of reduced degree >= 2) and the ripple
/// (slots of reduced degree 1).
struct DecoderState {
  int c = 0;
  int r = 0;

  friend bool operator==(const DecoderState&, const DecoderState&) = default;
};

/// Number of slots leaving the ripple (a >= 1), number entering it from the
/// cloud (b), and the per-cloud-slot entry probability q of one decoding step.
struct TransitionCounts {
  int a = 1;
  int b = 0;
  double q = 0.0;
};

/// Probability of moving from `from` to `from.c - b, from.r - a + b` with u
/// unresolved users. Zero whenever the counts are infeasible or from.r == 0.
double transition_probability(DecoderState from, const TransitionCounts& step, int u);

constexpr double kDefaultPruneThreshold = 1e-15;
constexpr double kDefaultDenominatorFloor = 1e-300;

class TransitionWorkspace;

/// Distribution of the decoder state when u users are still unresolved,
/// together with the probability already absorbed at an empty ripple.
/// Stored densely over the triangle c + r <= m with a tracked bounding box.
class StateDistribution {
public:
  StateDistribution(int n, int m);

  int n() const { return n_; }
  int m() const { return m_; }
  int u() const { return u_; }

  double at(int c, int r) const;
  double at(DecoderState s) const { return at(s.c, s.r); }

  /// Mass still inside the state machine. At u == 0 this is the mass that
  /// resolved every user.
  double live_mass() const;
  std::size_t live_states() const;

  /// Probability that decoding stopped with u unresolved users, indexed by u.
  std::span<const double> failure_mass_by_u() const { return failure_; }
  double failure_mass() const;
  double pruned_mass() const { return pruned_; }
  double success_mass() const { return u_ == 0 ? live_mass() : 0.0; }

  /// live + absorbed failures + pruned; 1 up to rounding.
  double accounted_mass() const;

  /// True when some live state has both a non-empty cloud and ripple, i.e.
  /// when the next transition depends on the cloud-departure probability.
  bool needs_cloud_departure() const;

  template <class Fn>
  void for_each(Fn&& fn) const {
    for (int c = c_lo_; c <= c_hi_; ++c) {
      for (int r = r_lo_; r <= r_hi_; ++r) {
        const double v = grid_[index(c, r)];
        if (v != 0.0) fn(DecoderState{c, r}, v);
      }
    }
  }

  /// One decoding step u -> u - 1 in place. States with an empty ripple are
  /// absorbed into failure_mass_by_u()[u] first. Requires u() >= 1.
  void advance(double q, double prune_threshold, TransitionWorkspace& ws);

private:
  friend StateDistribution initial_state(const DegreeDistribution&, int, double);
  friend class TransitionWorkspace;

  std::size_t index(int c, int r) const {
    return static_cast<std::size_t>(c) * static_cast<std::size_t>(m_ + 1) + static_cast<std::size_t>(r);
  }
  void set_unchecked(int c, int r, double v) { grid_[index(c, r)] = v; }
  void absorb_empty_ripple();
  void prune_and_shrink(double threshold);
  void clear_box();

  int n_;
  int m_;
  int u_;
  std::vector<double> grid_;
  int c_lo_ = 1, c_hi_ = 0, r_lo_ = 1, r_hi_ = 0;  // empty box
  std::vector<double> failure_;
  double pruned_ = 0.0;
};

/// Scratch grid and binomial caches reused across decoding steps.
class TransitionWorkspace {
public:
  TransitionWorkspace() = default;

private:
  friend class StateDistribution;

  const BinomialWindow& ripple_window(int trials, int u);
  const BinomialWindow& cloud_window(int trials, double q);

  std::vector<double> scratch_;
  std::vector<BinomialWindow> ripple_cache_;
  std::vector<bool> ripple_ready_;
  std::vector<BinomialWindow> cloud_cache_;
  std::vector<bool> cloud_ready_;
  int cached_u_ = -1;
  double cached_q_ = -1.0;
};

/// Multinomial law of (cloud, ripple) over m slots before decoding starts:
/// each slot is in the cloud w.p. 1 - Omega_0 - Omega_1, in the ripple w.p.
/// Omega_1, and empty otherwise.
StateDistribution initial_state(const DegreeDistribution& omega, int m,
                                double prune_threshold = kDefaultPruneThreshold);

/// Probability that a cloud slot enters the ripple when the decoder goes
/// from u to u - 1 unresolved users, 1 <= u <= n. Throws
/// degenerate_distribution_error when the probability of being in the cloud
/// falls below `denominator_floor`.
double q_u(const DegreeDistribution& omega, int u, double denominator_floor = kDefaultDenominatorFloor);

/// Same quantity with a caller-owned log-factorial table of size >= n.
double q_u(const DegreeDistribution& omega, int u, const LogFactorial& log_factorial,
           double denominator_floor = kDefaultDenominatorFloor);

/// Copying form of StateDistribution::advance.
StateDistribution transition(const StateDistribution& dist, double q,
                             double prune_threshold = kDefaultPruneThreshold);

struct AnalysisOptions {
  OmegaMode omega_mode = OmegaMode::kExactBinomial;
  double prune_threshold = kDefaultPruneThreshold;
  double denominator_floor = kDefaultDenominatorFloor;
};

struct AnalysisResult {
  ProtocolConfig config;
  OmegaMode omega_mode = OmegaMode::kExactBinomial;
  std::vector<double> omega;
  double per = 1.0;
  double throughput = 0.0;
  /// Probability absorbed with u unresolved users, indexed by u = 0..n.
  std::vector<double> failure_profile;
  double success_mass = 0.0;
  double pruned_mass = 0.0;
  /// Largest |accounted mass - 1| seen over all decoding stages.
  double conservation_defect = 0.0;
  /// Set when the state machine is only an approximation of the protocol
  /// (two-stage schedule past m_star, or Poisson degrees).
  bool approximate = false;
};

/// Exact finite-length packet error rate and throughput. Pruned mass is
/// counted as unresolved users, so `per` is an upper estimate by at most
/// `pruned_mass`.
AnalysisResult analyze(const ProtocolConfig& config, const AnalysisOptions& options = {});

}  // namespace frameless
