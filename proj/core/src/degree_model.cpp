#include "frameless/degree_model.hpp"

#include "frameless/binomial.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace frameless {

namespace {

constexpr double kSumTolerance = 1e-12;

void check_n(int n) {
  if (n < 1) throw config_error("n must be >= 1, got " + std::to_string(n));
}

void check_beta(int n, double beta) {
  if (!std::isfinite(beta) || beta < 0.0 || beta > static_cast<double>(n)) {
    throw config_error("beta = " + std::to_string(beta) + " outside [0, " + std::to_string(n) + "]");
  }
}

DegreeDistribution stage_omega(int n, double beta, OmegaMode mode) {
  return mode == OmegaMode::kPoisson ? poisson_omega(n, beta) : binomial_omega(n, beta);
}

}  // namespace

DegreeDistribution::DegreeDistribution(int n, std::vector<double> omega)
    : n_(n), omega_(std::move(omega)) {
  check_n(n_);
  if (omega_.size() != static_cast<std::size_t>(n_) + 1) {
    throw config_error("degree distribution needs n + 1 entries");
  }
  for (double w : omega_) {
    if (!(w >= 0.0) || w > 1.0 + kSumTolerance) {
      throw config_error("degree probability outside [0, 1]: " + std::to_string(w));
    }
  }
  if (std::abs(total() - 1.0) > kSumTolerance) {
    throw config_error("degree distribution sums to " + std::to_string(total()));
  }
}

double DegreeDistribution::mean() const {
  double s = 0.0;
  for (int d = n_; d >= 0; --d) s += d * omega_[static_cast<std::size_t>(d)];
  return s;
}

double DegreeDistribution::total() const {
  // Tail entries are tiny; summing from the high degrees down keeps them.
  double s = 0.0;
  for (auto it = omega_.rbegin(); it != omega_.rend(); ++it) s += *it;
  return s;
}

std::string_view to_string(OmegaMode mode) {
  return mode == OmegaMode::kPoisson ? "poisson" : "exact-binomial";
}

OmegaMode omega_mode_from_string(std::string_view name) {
  if (name == "exact-binomial" || name == "binomial") return OmegaMode::kExactBinomial;
  if (name == "poisson") return OmegaMode::kPoisson;
  throw config_error("unknown omega mode: " + std::string(name));
}

DegreeDistribution binomial_omega(int n, double beta) {
  check_n(n);
  check_beta(n, beta);
  std::vector<double> omega(static_cast<std::size_t>(n) + 1, 0.0);
  const double p = beta / n;
  if (p <= 0.0) {
    omega.front() = 1.0;
    return DegreeDistribution(n, std::move(omega));
  }
  if (p >= 1.0) {
    omega.back() = 1.0;
    return DegreeDistribution(n, std::move(omega));
  }

  // Anchored at the mode, so large n does not inherit the rounding of (1 - p)^n.
  const BinomialWindow w = binomial_window(n, p, 0.0);
  std::copy(w.weights.begin(), w.weights.end(), omega.begin() + w.first);
  return DegreeDistribution(n, std::move(omega));
}

DegreeDistribution poisson_omega(int n, double beta) {
  check_n(n);
  if (!std::isfinite(beta) || beta < 0.0) throw config_error("beta must be >= 0");
  std::vector<double> omega(static_cast<std::size_t>(n) + 1, 0.0);
  if (beta == 0.0) {
    omega.front() = 1.0;
    return DegreeDistribution(n, std::move(omega));
  }
  std::vector<double> logs(omega.size());
  const double log_beta = std::log(beta);
  for (int i = 0; i <= n; ++i) logs[static_cast<std::size_t>(i)] = i * log_beta - std::lgamma(i + 1.0);
  const double top = *std::max_element(logs.begin(), logs.end());
  double total = 0.0;
  for (std::size_t i = 0; i < omega.size(); ++i) {
    omega[i] = std::exp(logs[i] - top);
    total += omega[i];
  }
  for (double& w : omega) w /= total;
  return DegreeDistribution(n, std::move(omega));
}

DegreeDistribution mix(const DegreeDistribution& a, const DegreeDistribution& b, double w) {
  if (a.n() != b.n()) throw config_error("cannot mix degree distributions over different n");
  if (!(w >= 0.0 && w <= 1.0)) throw config_error("mixture weight outside [0, 1]");
  std::vector<double> omega(static_cast<std::size_t>(a.n()) + 1);
  for (int d = 0; d <= a.n(); ++d) omega[static_cast<std::size_t>(d)] = w * a[d] + (1.0 - w) * b[d];
  return DegreeDistribution(a.n(), std::move(omega));
}

DegreeDistribution two_stage_omega(const ProtocolConfig& config, int m) {
  config.validate();
  const auto* t = std::get_if<TwoStageBeta>(&config.schedule);
  if (t == nullptr) throw config_error("two_stage_omega requires a two-stage schedule");
  if (m < 1) throw config_error("m must be >= 1");
  auto first = binomial_omega(config.n, t->beta1);
  if (m <= t->m_star) return first;
  return mix(first, binomial_omega(config.n, t->beta2), static_cast<double>(t->m_star) / m);
}

DegreeDistribution omega_for(const ProtocolConfig& config, OmegaMode mode) {
  config.validate();
  if (const auto* s = std::get_if<SingleBeta>(&config.schedule)) return stage_omega(config.n, s->beta, mode);
  const auto& t = std::get<TwoStageBeta>(config.schedule);
  auto first = stage_omega(config.n, t.beta1, mode);
  if (config.m <= t.m_star) return first;
  return mix(first, stage_omega(config.n, t.beta2, mode), static_cast<double>(t.m_star) / config.m);
}

}  // namespace frameless
