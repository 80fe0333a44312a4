#include "frameless/bounds.hpp"

#include <algorithm>
#include <cmath>

namespace frameless {

BoundResult per_lower_bound(const ProtocolConfig& config) {
  config.validate();
  const double n = config.n;
  BoundResult out;
  if (const auto* s = std::get_if<SingleBeta>(&config.schedule)) {
    out.exact_bound = std::pow(1.0 - s->beta / n, config.m);
    out.exponential_bound = std::exp(-s->beta * config.m / n);
    return out;
  }
  const auto& t = std::get<TwoStageBeta>(config.schedule);
  const int first = std::min(config.m, t.m_star);
  const int second = config.m - first;
  out.exact_bound = std::pow(1.0 - t.beta1 / n, first) * std::pow(1.0 - t.beta2 / n, second);
  out.exponential_bound = std::exp(-(t.beta1 * first + t.beta2 * second) / n);
  out.extension = true;
  return out;
}

}  // namespace frameless
