#include "frameless/small_oracle.hpp"

#include <bit>
#include <cmath>
#include <string>
#include <vector>

#include "frameless/monte_carlo.hpp"

namespace frameless {

namespace {

// Neumaier-compensated running sum.
class CompensatedSum {
public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace

OracleResult enumerate_exact(const ProtocolConfig& config) {
  config.validate();
  const int n = config.n;
  const int m = config.m;
  if (n * m > kMaxOracleEdges) {
    throw config_error("exhaustive oracle limited to n * m <= " + std::to_string(kMaxOracleEdges) +
                       ", got " + std::to_string(n * m));
  }

  // slot_weight[j][e]: probability that slot j has a specific pattern with e users.
  std::vector<std::vector<double>> slot_weight(static_cast<std::size_t>(m));
  for (int j = 0; j < m; ++j) {
    const double p = config.access_probability(j);
    auto& w = slot_weight[static_cast<std::size_t>(j)];
    for (int e = 0; e <= n; ++e) w.push_back(std::pow(p, e) * std::pow(1.0 - p, n - e));
  }

  const std::uint32_t slot_mask = (1u << n) - 1u;
  const std::uint64_t graphs = std::uint64_t{1} << (n * m);
  ContentionGraph g(n, m);
  CompensatedSum total;
  CompensatedSum unresolved;
  for (std::uint64_t pattern = 0; pattern < graphs; ++pattern) {
    double weight = 1.0;
    g.clear();
    for (int j = 0; j < m; ++j) {
      const auto bits = static_cast<std::uint32_t>(pattern >> (j * n)) & slot_mask;
      weight *= slot_weight[static_cast<std::size_t>(j)][static_cast<std::size_t>(std::popcount(bits))];
      for (int user = 0; user < n; ++user) {
        if (bits & (1u << user)) g.slots[static_cast<std::size_t>(j)].push_back(user);
      }
    }
    total.add(weight);
    if (weight == 0.0) continue;
    const auto resolved = peel(g);
    unresolved.add(weight * static_cast<double>(n - static_cast<int>(resolved.size())));
  }

  OracleResult out;
  out.enumerated_graphs = graphs;
  out.total_probability = total.value();
  out.exact_per = unresolved.value() / n;
  out.exact_throughput = n * (1.0 - out.exact_per) / m;
  return out;
}

}  // namespace frameless
