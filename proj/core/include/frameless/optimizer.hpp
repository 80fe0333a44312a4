#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "frameless/exact_analysis.hpp"
#include "frameless/monte_carlo.hpp"
#include "frameless/protocol.hpp"

namespace frameless {

/// Inclusive arithmetic grid lo, lo + step, ..., <= hi (values rounded to 1e-9).
std::vector<double> grid_values(double lo, double hi, double step);

struct PeakSearch {
  double beta_lo = 1.5;
  double beta_hi = 3.5;
  double coarse_beta_step = 0.05;
  double fine_beta_step = 0.01;
  /// Slot range as multiples of n: m in [ceil(lo n), floor(hi n)].
  double m_ratio_lo = 1.0;
  double m_ratio_hi = 1.8;
  int coarse_m_step = 2;
  int fine_m_step = 1;
  AnalysisOptions analysis;
  unsigned threads = 1;
};

struct PeakPoint {
  double beta = 0.0;
  int m = 0;
  double throughput = 0.0;
  double per = 1.0;
  double pruned_mass = 0.0;
  double conservation_defect = 0.0;
};

struct PeakResult {
  int n = 0;
  double beta_max = 0.0;
  double t_max = 0.0;
  int m_max = 0;
  double per_at_peak = 1.0;
  /// Every evaluated (beta, m), sorted by beta then m.
  std::vector<PeakPoint> search_trace;
};

/// Maximizes T over (beta, m) with a coarse grid followed by a fine grid
/// around the coarse incumbent. Ties go to the smaller beta, then smaller m.
PeakResult optimize_peak(int n, const PeakSearch& search = {});

struct FloorSearch {
  double beta2_lo = 2.0;
  double beta2_hi = 8.0;
  double coarse_step = 0.1;
  double fine_step = 0.01;
  double target_ratio = 2.0;
  AnalysisOptions analysis;
  unsigned threads = 1;
};

struct FloorPoint {
  double beta2 = 0.0;
  double per = 1.0;
  double pruned_mass = 0.0;
  double conservation_defect = 0.0;
};

struct TwoStageResult {
  int n = 0;
  double beta1 = 0.0;
  double beta2 = 0.0;
  int m_star = 0;
  int target_m = 0;
  double per_at_target = 1.0;
  /// PER of the single-stage scheme (beta = beta1) at target_m.
  double single_stage_per = 1.0;
  std::vector<FloorPoint> search_trace;
};

/// Picks beta2 minimizing the PER of the two-stage schedule (beta1, beta2,
/// m_star) at m = round(target_ratio * n). Ties go to the smaller beta2.
TwoStageResult optimize_floor(int n, double beta1, int m_star, const FloorSearch& search = {});

struct SweepOptions {
  AnalysisOptions analysis;
  /// When set, every row also carries a Monte Carlo estimate.
  std::optional<SimulationOptions> simulation;
  unsigned threads = 1;
};

struct SweepRow {
  ProtocolConfig config;
  double m_over_n = 0.0;
  double per = 1.0;
  double throughput = 0.0;
  double pruned_mass = 0.0;
  double conservation_defect = 0.0;
  bool approximate = false;
  std::optional<SimulationResult> simulation;
};

/// Analysis (and optional simulation) of `family` for m = m_from, m_from +
/// m_step, ..., <= m_to.
std::vector<SweepRow> sweep(const ProtocolConfig& family, int m_from, int m_to, int m_step = 1,
                            const SweepOptions& options = {});

}  // namespace frameless
