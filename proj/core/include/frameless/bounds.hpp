#pragma once

#include "frameless/protocol.hpp"

namespace frameless {

/// Probability that a given user never transmits over the contention period,
/// a lower bound on the packet error rate, and its exponential approximation.
struct BoundResult {
  double exact_bound = 1.0;        // (1 - beta/n)^m
  double exponential_bound = 1.0;  // exp(-beta m / n)
  /// True for two-stage schedules, where both expressions are evaluated per
  /// stage and multiplied.
  bool extension = false;
};

BoundResult per_lower_bound(const ProtocolConfig& config);

}  // namespace frameless
