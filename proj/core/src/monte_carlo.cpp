#include "frameless/monte_carlo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>

namespace frameless {

ContentionGraph::ContentionGraph(int users, int slot_count)
    : n(users), m(slot_count), slots(static_cast<std::size_t>(slot_count)) {}

std::size_t ContentionGraph::edges() const {
  std::size_t e = 0;
  for (const auto& s : slots) e += s.size();
  return e;
}

void ContentionGraph::clear() {
  for (auto& s : slots) s.clear();
}

ContentionGraph sample_graph(const ProtocolConfig& config, std::mt19937_64& rng) {
  config.validate();
  ContentionGraph g(config.n, config.m);
  for (int j = 0; j < config.m; ++j) {
    const double p = config.access_probability(j);
    auto& slot = g.slots[static_cast<std::size_t>(j)];
    if (p <= 0.0) continue;
    if (p >= 1.0) {
      slot.resize(static_cast<std::size_t>(config.n));
      std::iota(slot.begin(), slot.end(), 0);
      continue;
    }
    // Skip over non-transmitting users with geometric gaps.
    std::geometric_distribution<long long> gap(p);
    for (long long user = gap(rng); user < config.n; user += 1 + gap(rng)) {
      slot.push_back(static_cast<int>(user));
    }
  }
  return g;
}

std::vector<int> peel(const ContentionGraph& graph, PeelOrder order, std::uint64_t seed) {
  const auto n = static_cast<std::size_t>(graph.n);
  const auto m = graph.slots.size();

  // Reduced degree and XOR of unresolved user ids per slot; a singleton's
  // XOR is its remaining user.
  std::vector<int> degree(m);
  std::vector<int> xor_ids(m, 0);
  std::vector<std::vector<int>> user_slots(n);
  for (std::size_t j = 0; j < m; ++j) {
    degree[j] = static_cast<int>(graph.slots[j].size());
    for (int user : graph.slots[j]) {
      xor_ids[j] ^= user;
      user_slots[static_cast<std::size_t>(user)].push_back(static_cast<int>(j));
    }
  }

  std::vector<int> singletons;
  for (std::size_t j = 0; j < m; ++j) {
    if (degree[j] == 1) singletons.push_back(static_cast<int>(j));
  }

  std::mt19937_64 rng(seed);
  std::vector<char> resolved(n, 0);
  std::vector<int> out;
  std::size_t head = 0;
  while (true) {
    int slot = -1;
    if (order == PeelOrder::kFirstFound) {
      if (head == singletons.size()) break;
      slot = singletons[head++];
    } else {
      if (singletons.empty()) break;
      std::uniform_int_distribution<std::size_t> pick(0, singletons.size() - 1);
      const std::size_t i = pick(rng);
      slot = singletons[i];
      singletons[i] = singletons.back();
      singletons.pop_back();
    }
    if (degree[static_cast<std::size_t>(slot)] != 1) continue;  // emptied by an earlier cancellation

    const int user = xor_ids[static_cast<std::size_t>(slot)];
    resolved[static_cast<std::size_t>(user)] = 1;
    out.push_back(user);
    for (int t : user_slots[static_cast<std::size_t>(user)]) {
      const auto ti = static_cast<std::size_t>(t);
      xor_ids[ti] ^= user;
      if (--degree[ti] == 1) singletons.push_back(t);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::mt19937_64 trial_rng(std::uint64_t seed, std::uint64_t trial) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(trial), static_cast<std::uint32_t>(trial >> 32)};
  return std::mt19937_64(seq);
}

SimulationResult simulate(const ProtocolConfig& config, const SimulationOptions& options) {
  config.validate();
  if (options.trials < 1) throw config_error("trials must be >= 1");

  SimulationResult result;
  result.config = config;
  result.trials = options.trials;
  result.seed = options.seed;
  result.unresolved.assign(static_cast<std::size_t>(options.trials), 0);

  auto run_range = [&](int begin, int end) {
    for (int t = begin; t < end; ++t) {
      auto rng = trial_rng(options.seed, static_cast<std::uint64_t>(t));
      const ContentionGraph g = sample_graph(config, rng);
      result.unresolved[static_cast<std::size_t>(t)] = config.n - static_cast<int>(peel(g).size());
    }
  };

  unsigned workers = options.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : options.threads;
  workers = std::min<unsigned>(workers, static_cast<unsigned>(options.trials));
  if (workers <= 1) {
    run_range(0, options.trials);
  } else {
    std::vector<std::jthread> pool;
    const int chunk = (options.trials + static_cast<int>(workers) - 1) / static_cast<int>(workers);
    for (int begin = 0; begin < options.trials; begin += chunk) {
      pool.emplace_back(run_range, begin, std::min(options.trials, begin + chunk));
    }
  }

  // Integer moments make the aggregate independent of execution order.
  std::int64_t sum = 0;
  std::int64_t sum_sq = 0;
  for (int x : result.unresolved) {
    sum += x;
    sum_sq += static_cast<std::int64_t>(x) * x;
  }
  const double trials = options.trials;
  const double n = config.n;
  const double mean_unresolved = static_cast<double>(sum) / trials;
  double var_unresolved = 0.0;
  if (options.trials > 1) {
    const double centered = static_cast<double>(sum_sq) - static_cast<double>(sum) * mean_unresolved;
    var_unresolved = std::max(0.0, centered / (trials - 1.0));
  }
  const double se_unresolved = std::sqrt(var_unresolved / trials);

  result.mean_per = mean_unresolved / n;
  result.stderr_per = se_unresolved / n;
  result.mean_throughput = (n - mean_unresolved) / config.m;
  result.stderr_throughput = se_unresolved / config.m;
  return result;
}

}  // namespace frameless
