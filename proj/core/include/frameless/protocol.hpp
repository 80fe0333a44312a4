#pragma once

#include <stdexcept>
#include <string>
#include <variant>

namespace frameless {

/// Raised when a configuration or argument violates its documented domain.
class config_error : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a degree distribution leaves no probability mass in the cloud
/// where a cloud-departure probability is required.
class degenerate_distribution_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct SingleBeta {
  double beta = 0.0;
};

/// Access load beta1 for slots 1..m_star, beta2 afterwards.
struct TwoStageBeta {
  double beta1 = 0.0;
  double beta2 = 0.0;
  int m_star = 1;
};

using BetaSchedule = std::variant<SingleBeta, TwoStageBeta>;

/// A batch of n users contending over m slots. Each user transmits in each
/// slot independently with probability p = beta / n, where beta may depend on
/// the slot index through a two-stage schedule.
struct ProtocolConfig {
  int n = 1;
  BetaSchedule schedule = SingleBeta{};
  int m = 1;

  static ProtocolConfig single(int n, double beta, int m);
  static ProtocolConfig two_stage(int n, double beta1, double beta2, int m_star, int m);

  /// Throws config_error unless n >= 1, m >= 1, every beta in [0, n] and m_star >= 1.
  void validate() const;

  bool is_two_stage() const { return std::holds_alternative<TwoStageBeta>(schedule); }

  /// Transmission probability in the 0-based slot `slot`.
  double access_probability(int slot) const;

  /// Same population and schedule evaluated over a different slot count.
  ProtocolConfig with_slots(int m_slots) const;

  std::string describe() const;
};

}  // namespace frameless
