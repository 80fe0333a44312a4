#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "frameless/protocol.hpp"

namespace frameless {

/// Bipartite user/slot graph of one contention period. `slots[j]` lists the
/// users that transmitted in slot j, each at most once, in increasing order.
struct ContentionGraph {
  int n = 0;
  int m = 0;
  std::vector<std::vector<int>> slots;

  ContentionGraph() = default;
  ContentionGraph(int users, int slot_count);

  std::size_t edges() const;
  void clear();
};

/// Draws every (user, slot) edge independently with the slot's access
/// probability from `config` over config.m slots.
ContentionGraph sample_graph(const ProtocolConfig& config, std::mt19937_64& rng);

enum class PeelOrder {
  kFirstFound,  // FIFO over singleton slots in discovery order
  kRandom,      // uniformly random pick among the current singletons
};

/// Successive interference cancellation on the collision channel. Returns the
/// resolved users in increasing order. The result does not depend on `order`.
std::vector<int> peel(const ContentionGraph& graph, PeelOrder order = PeelOrder::kFirstFound,
                      std::uint64_t seed = 0);

/// Deterministic per-trial generator derived from (seed, trial).
std::mt19937_64 trial_rng(std::uint64_t seed, std::uint64_t trial);

struct SimulationOptions {
  int trials = 10000;
  std::uint64_t seed = 1;
  /// Worker threads; 0 picks std::thread::hardware_concurrency(). The result
  /// is bit-identical for every value.
  unsigned threads = 1;
};

struct SimulationResult {
  ProtocolConfig config;
  int trials = 0;
  std::uint64_t seed = 0;
  double mean_per = 0.0;
  double mean_throughput = 0.0;
  double stderr_per = 0.0;
  double stderr_throughput = 0.0;
  /// Unresolved users in each trial, in trial order.
  std::vector<int> unresolved;
};

SimulationResult simulate(const ProtocolConfig& config, const SimulationOptions& options = {});

}  // namespace frameless
