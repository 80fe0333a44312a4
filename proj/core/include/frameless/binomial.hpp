#pragma once

#include <vector>

namespace frameless {

/// Table of log(k!) for k = 0..max, built by summing log(k).
class LogFactorial {
public:
  explicit LogFactorial(int max = 0);

  void reserve(int max);
  int max() const { return static_cast<int>(table_.size()) - 1; }

  double operator()(int k) const { return table_[static_cast<std::size_t>(k)]; }
  double log_choose(int n, int k) const;

private:
  std::vector<double> table_;
};

/// The support window of a Binomial(trials, p) pmf that carries everything
/// except relative tails below `rel_cutoff` of the modal term. Weights are
/// normalized to sum to one over the window.
struct BinomialWindow {
  int first = 0;
  std::vector<double> weights;

  int last() const { return first + static_cast<int>(weights.size()) - 1; }
};

BinomialWindow binomial_window(int trials, double p, double rel_cutoff = 1e-20);

}  // namespace frameless
