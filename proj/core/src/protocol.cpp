#include "frameless/protocol.hpp"

#include <cmath>
#include <sstream>

namespace frameless {

namespace {

void check_beta(double beta, int n, const char* name) {
  if (!std::isfinite(beta) || beta < 0.0 || beta > static_cast<double>(n)) {
    std::ostringstream os;
    os << name << " = " << beta << " outside [0, n] with n = " << n;
    throw config_error(os.str());
  }
}

}  // namespace

ProtocolConfig ProtocolConfig::single(int n, double beta, int m) {
  ProtocolConfig cfg{n, SingleBeta{beta}, m};
  cfg.validate();
  return cfg;
}

ProtocolConfig ProtocolConfig::two_stage(int n, double beta1, double beta2, int m_star, int m) {
  ProtocolConfig cfg{n, TwoStageBeta{beta1, beta2, m_star}, m};
  cfg.validate();
  return cfg;
}

void ProtocolConfig::validate() const {
  if (n < 1) throw config_error("n must be >= 1, got " + std::to_string(n));
  if (m < 1) throw config_error("m must be >= 1, got " + std::to_string(m));
  if (const auto* s = std::get_if<SingleBeta>(&schedule)) {
    check_beta(s->beta, n, "beta");
  } else {
    const auto& t = std::get<TwoStageBeta>(schedule);
    check_beta(t.beta1, n, "beta1");
    check_beta(t.beta2, n, "beta2");
    if (t.m_star < 1) throw config_error("m_star must be >= 1, got " + std::to_string(t.m_star));
  }
}

double ProtocolConfig::access_probability(int slot) const {
  if (const auto* s = std::get_if<SingleBeta>(&schedule)) return s->beta / n;
  const auto& t = std::get<TwoStageBeta>(schedule);
  return (slot < t.m_star ? t.beta1 : t.beta2) / n;
}

ProtocolConfig ProtocolConfig::with_slots(int m_slots) const {
  ProtocolConfig cfg = *this;
  cfg.m = m_slots;
  cfg.validate();
  return cfg;
}

std::string ProtocolConfig::describe() const {
  std::ostringstream os;
  os << "n=" << n << " m=" << m;
  if (const auto* s = std::get_if<SingleBeta>(&schedule)) {
    os << " beta=" << s->beta;
  } else {
    const auto& t = std::get<TwoStageBeta>(schedule);
    os << " beta1=" << t.beta1 << " beta2=" << t.beta2 << " m_star=" << t.m_star;
  }
  return os.str();
}

}  // namespace frameless
