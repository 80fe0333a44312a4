#pragma once

#include <cstdint>

#include "frameless/protocol.hpp"

namespace frameless {

/// Largest n * m the exhaustive oracle accepts (2^24 graphs).
constexpr int kMaxOracleEdges = 24;

struct OracleResult {
  double exact_per = 1.0;
  double exact_throughput = 0.0;
  std::uint64_t enumerated_graphs = 0;
  /// Total probability of the enumerated graphs; 1 up to rounding.
  double total_probability = 0.0;
};

/// Ground-truth PER by peeling every one of the 2^(n m) incidence patterns
/// of `config`, weighted by its Bernoulli probability. Throws config_error
/// when n * m exceeds kMaxOracleEdges.
OracleResult enumerate_exact(const ProtocolConfig& config);

}  // namespace frameless
