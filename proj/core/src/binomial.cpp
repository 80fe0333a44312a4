#include "frameless/binomial.hpp"

#include <algorithm>
#include <cmath>

namespace frameless {

LogFactorial::LogFactorial(int max) : table_{0.0} { reserve(max); }

void LogFactorial::reserve(int max) {
  table_.reserve(static_cast<std::size_t>(max) + 1);
  for (int k = static_cast<int>(table_.size()); k <= max; ++k) {
    table_.push_back(table_.back() + std::log(static_cast<double>(k)));
  }
}

double LogFactorial::log_choose(int n, int k) const {
  return (*this)(n) - (*this)(k) - (*this)(n - k);
}

BinomialWindow binomial_window(int trials, double p, double rel_cutoff) {
  BinomialWindow out;
  if (trials <= 0 || p <= 0.0) {
    out.first = 0;
    out.weights = {1.0};
    return out;
  }
  if (p >= 1.0) {
    out.first = trials;
    out.weights = {1.0};
    return out;
  }

  // Walk outwards from the mode with the pmf ratio recurrence; the modal term
  // is fixed at 1 and the window is normalized at the end.
  const int mode = std::min(trials, static_cast<int>(std::floor((trials + 1) * p)));
  const double odds = p / (1.0 - p);

  std::vector<double> up;  // mode+1, mode+2, ...
  double w = 1.0;
  for (int k = mode; k < trials; ++k) {
    w *= odds * static_cast<double>(trials - k) / static_cast<double>(k + 1);
    if (w < rel_cutoff) break;
    up.push_back(w);
  }
  std::vector<double> down;  // mode-1, mode-2, ...
  w = 1.0;
  for (int k = mode; k > 0; --k) {
    w *= static_cast<double>(k) / (odds * static_cast<double>(trials - k + 1));
    if (w < rel_cutoff) break;
    down.push_back(w);
  }

  out.first = mode - static_cast<int>(down.size());
  out.weights.reserve(down.size() + 1 + up.size());
  out.weights.insert(out.weights.end(), down.rbegin(), down.rend());
  out.weights.push_back(1.0);
  out.weights.insert(out.weights.end(), up.begin(), up.end());

  // Ascending order: the small tail terms are accumulated first.
  std::vector<double> sorted = out.weights;
  std::sort(sorted.begin(), sorted.end());
  double total = 0.0;
  for (double x : sorted) total += x;
  for (double& x : out.weights) x /= total;
  return out;
}

}  // namespace frameless
