#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "frameless/protocol.hpp"

namespace frameless {

/// Probability that a slot has degree d (number of transmitting users),
/// for d = 0..n. Always materialized over the full support.
class DegreeDistribution {
public:
  /// Validates that every entry is non-negative and the total is 1 within 1e-12.
  DegreeDistribution(int n, std::vector<double> omega);

  int n() const { return n_; }
  double operator[](int d) const { return omega_[static_cast<std::size_t>(d)]; }
  std::span<const double> values() const { return omega_; }

  double mean() const;
  double total() const;

private:
  int n_;
  std::vector<double> omega_;
};

enum class OmegaMode { kExactBinomial, kPoisson };

std::string_view to_string(OmegaMode mode);
OmegaMode omega_mode_from_string(std::string_view name);

/// Binomial(n, beta / n) slot degrees.
DegreeDistribution binomial_omega(int n, double beta);

/// Poisson(beta) slot degrees truncated at d = n and renormalized.
DegreeDistribution poisson_omega(int n, double beta);

/// Slot degrees averaged over the first m slots of a two-stage schedule:
/// weight m_star/m on the beta1 law and (m - m_star)/m on the beta2 law once
/// m exceeds m_star, otherwise the beta1 law alone.
DegreeDistribution two_stage_omega(const ProtocolConfig& config, int m);

/// Mixture w * a + (1 - w) * b of two distributions over the same n.
DegreeDistribution mix(const DegreeDistribution& a, const DegreeDistribution& b, double w);

/// Degree law governing the exact analysis of `config` (two-stage schedules
/// always use the slot-averaged mixture; `mode` picks the per-stage law).
DegreeDistribution omega_for(const ProtocolConfig& config, OmegaMode mode = OmegaMode::kExactBinomial);

}  // namespace frameless
