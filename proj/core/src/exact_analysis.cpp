#include "frameless/exact_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace frameless {

namespace {

double choose(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  return std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0));
}

struct Box {
  int c_lo = 1, c_hi = 0, r_lo = 1, r_hi = 0;

  void include(int c, int r) {
    if (c_lo > c_hi) {
      c_lo = c_hi = c;
      r_lo = r_hi = r;
      return;
    }
    c_lo = std::min(c_lo, c);
    c_hi = std::max(c_hi, c);
    r_lo = std::min(r_lo, r);
    r_hi = std::max(r_hi, r);
  }
};

}  // namespace

double transition_probability(DecoderState from, const TransitionCounts& step, int u) {
  const auto [c, r] = from;
  const auto [a, b, q] = step;
  if (u < 1 || r <= 0 || a < 1 || a > r || b < 0 || b > c) return 0.0;
  const double cloud = choose(c, b) * std::pow(q, b) * std::pow(1.0 - q, c - b);
  const double inv_u = 1.0 / u;
  const double ripple = choose(r - 1, a - 1) * std::pow(inv_u, a - 1) * std::pow(1.0 - inv_u, r - a);
  return cloud * ripple;
}

// ---------------------------------------------------------------------------
// TransitionWorkspace

const BinomialWindow& TransitionWorkspace::ripple_window(int trials, int u) {
  if (u != cached_u_) {
    std::fill(ripple_ready_.begin(), ripple_ready_.end(), false);
    cached_u_ = u;
  }
  const auto i = static_cast<std::size_t>(trials);
  if (i >= ripple_cache_.size()) {
    ripple_cache_.resize(i + 1);
    ripple_ready_.resize(i + 1, false);
  }
  if (!ripple_ready_[i]) {
    ripple_cache_[i] = binomial_window(trials, 1.0 / u);
    ripple_ready_[i] = true;
  }
  return ripple_cache_[i];
}

const BinomialWindow& TransitionWorkspace::cloud_window(int trials, double q) {
  if (q != cached_q_) {
    std::fill(cloud_ready_.begin(), cloud_ready_.end(), false);
    cached_q_ = q;
  }
  const auto i = static_cast<std::size_t>(trials);
  if (i >= cloud_cache_.size()) {
    cloud_cache_.resize(i + 1);
    cloud_ready_.resize(i + 1, false);
  }
  if (!cloud_ready_[i]) {
    cloud_cache_[i] = binomial_window(trials, q);
    cloud_ready_[i] = true;
  }
  return cloud_cache_[i];
}

// ---------------------------------------------------------------------------
// StateDistribution

StateDistribution::StateDistribution(int n, int m)
    : n_(n),
      m_(m),
      u_(n),
      grid_(static_cast<std::size_t>(m + 1) * static_cast<std::size_t>(m + 1), 0.0),
      failure_(static_cast<std::size_t>(n) + 1, 0.0) {
  if (n < 1 || m < 1) throw config_error("state distribution needs n >= 1 and m >= 1");
}

double StateDistribution::at(int c, int r) const {
  if (c < 0 || r < 0 || c + r > m_) return 0.0;
  return grid_[index(c, r)];
}

double StateDistribution::live_mass() const {
  double s = 0.0;
  for_each([&](DecoderState, double v) { s += v; });
  return s;
}

std::size_t StateDistribution::live_states() const {
  std::size_t k = 0;
  for_each([&](DecoderState, double) { ++k; });
  return k;
}

double StateDistribution::failure_mass() const {
  double s = 0.0;
  for (double v : failure_) s += v;
  return s;
}

double StateDistribution::accounted_mass() const { return live_mass() + failure_mass() + pruned_; }

bool StateDistribution::needs_cloud_departure() const {
  bool found = false;
  for_each([&](DecoderState s, double) { found = found || (s.c > 0 && s.r > 0); });
  return found;
}

void StateDistribution::clear_box() {
  for (int c = c_lo_; c <= c_hi_; ++c) {
    std::fill_n(grid_.begin() + static_cast<std::ptrdiff_t>(index(c, r_lo_)), r_hi_ - r_lo_ + 1, 0.0);
  }
  c_lo_ = r_lo_ = 1;
  c_hi_ = r_hi_ = 0;
}

void StateDistribution::absorb_empty_ripple() {
  if (r_lo_ > 0) return;
  double& sink = failure_[static_cast<std::size_t>(u_)];
  for (int c = c_lo_; c <= c_hi_; ++c) {
    double& v = grid_[index(c, 0)];
    sink += v;
    v = 0.0;
  }
}

void StateDistribution::prune_and_shrink(double threshold) {
  Box box;
  for (int c = c_lo_; c <= c_hi_; ++c) {
    for (int r = r_lo_; r <= r_hi_; ++r) {
      double& v = grid_[index(c, r)];
      if (v == 0.0) continue;
      if (v < threshold) {
        pruned_ += v;
        v = 0.0;
      } else {
        box.include(c, r);
      }
    }
  }
  c_lo_ = box.c_lo;
  c_hi_ = box.c_hi;
  r_lo_ = box.r_lo;
  r_hi_ = box.r_hi;
}

void StateDistribution::advance(double q, double prune_threshold, TransitionWorkspace& ws) {
  if (u_ < 1) throw config_error("decoding already finished (u = 0)");
  if (!(q >= 0.0 && q <= 1.0)) {
    std::ostringstream os;
    os << "cloud-departure probability " << q << " outside [0, 1]";
    throw config_error(os.str());
  }
  absorb_empty_ripple();

  const std::size_t cells = grid_.size();
  if (ws.scratch_.size() != cells) ws.scratch_.assign(cells, 0.0);
  std::vector<double>& mid = ws.scratch_;

  // Ripple departures: one forced leaver plus Binomial(r - 1, 1/u) others,
  // evaluated against the ripple before any cloud slot joins it.
  Box mid_box;
  const int r_start = std::max(r_lo_, 1);
  for (int c = c_lo_; c <= c_hi_; ++c) {
    for (int r = r_start; r <= r_hi_; ++r) {
      const double v = grid_[index(c, r)];
      if (v == 0.0) continue;
      const BinomialWindow& w = ws.ripple_window(r - 1, u_);
      const int left_lo = r - 1 - w.last();
      const int left_hi = r - 1 - w.first;
      double* row = mid.data() + index(c, 0);
      for (std::size_t k = 0; k < w.weights.size(); ++k) {
        row[r - 1 - w.first - static_cast<int>(k)] += v * w.weights[k];
      }
      mid_box.include(c, left_lo);
      mid_box.include(c, left_hi);
    }
  }
  clear_box();

  // Cloud departures: Binomial(c, q) slots move into the ripple.
  Box out_box;
  for (int c = mid_box.c_lo; c <= mid_box.c_hi; ++c) {
    const BinomialWindow* w = nullptr;
    for (int r = mid_box.r_lo; r <= mid_box.r_hi; ++r) {
      double& cell = mid[index(c, r)];
      const double v = cell;
      if (v == 0.0) continue;
      cell = 0.0;
      if (w == nullptr) w = &ws.cloud_window(c, q);
      for (std::size_t k = 0; k < w->weights.size(); ++k) {
        const int b = w->first + static_cast<int>(k);
        grid_[index(c - b, r + b)] += v * w->weights[k];
      }
      out_box.include(c - w->first, r + w->first);
      out_box.include(c - w->last(), r + w->last());
    }
  }
  c_lo_ = out_box.c_lo;
  c_hi_ = out_box.c_hi;
  r_lo_ = out_box.r_lo;
  r_hi_ = out_box.r_hi;

  --u_;
  prune_and_shrink(prune_threshold);
}

StateDistribution transition(const StateDistribution& dist, double q, double prune_threshold) {
  StateDistribution next = dist;
  TransitionWorkspace ws;
  next.advance(q, prune_threshold, ws);
  return next;
}

StateDistribution initial_state(const DegreeDistribution& omega, int m, double prune_threshold) {
  StateDistribution dist(omega.n(), m);
  const double empty = omega[0];
  const double ripple = omega.n() >= 1 ? omega[1] : 0.0;
  const double cloud = std::max(0.0, 1.0 - empty - ripple);

  // Multinomial(m; cloud, ripple, empty) as Binomial(m, cloud) for the cloud
  // followed by Binomial(m - c, ripple / (ripple + empty)) for the ripple.
  const double ripple_share = (ripple + empty) > 0.0 ? ripple / (ripple + empty) : 0.0;
  const BinomialWindow cloud_law = binomial_window(m, cloud);
  Box box;
  for (std::size_t i = 0; i < cloud_law.weights.size(); ++i) {
    const int c = cloud_law.first + static_cast<int>(i);
    const BinomialWindow ripple_law = binomial_window(m - c, ripple_share);
    for (std::size_t j = 0; j < ripple_law.weights.size(); ++j) {
      const int r = ripple_law.first + static_cast<int>(j);
      dist.set_unchecked(c, r, cloud_law.weights[i] * ripple_law.weights[j]);
      box.include(c, r);
    }
  }
  dist.c_lo_ = box.c_lo;
  dist.c_hi_ = box.c_hi;
  dist.r_lo_ = box.r_lo;
  dist.r_hi_ = box.r_hi;
  dist.prune_and_shrink(prune_threshold);
  return dist;
}

// ---------------------------------------------------------------------------
// Cloud-departure probability

double q_u(const DegreeDistribution& omega, int u, double denominator_floor) {
  LogFactorial lf(omega.n());
  return q_u(omega, u, lf, denominator_floor);
}

double q_u(const DegreeDistribution& omega, int u, const LogFactorial& lf, double denominator_floor) {
  const int n = omega.n();
  if (u < 1 || u > n) throw config_error("q_u needs 1 <= u <= n, got u = " + std::to_string(u));
  if (lf.max() < n) throw config_error("log-factorial table too small");

  // A slot of degree d holds j unresolved users with hypergeometric
  // probability h(j) = C(u, j) C(n - u, d - j) / C(n, d). It is in the cloud
  // when j >= 2, and enters the ripple when j == 2 and one of the two is the
  // user resolved next, which happens with probability 2/u.
  double numerator = 0.0;
  double denominator = 0.0;
  for (int d = 2; d <= n; ++d) {
    const double w = omega[d];
    if (w == 0.0) continue;
    const int j_lo = std::max(2, d - (n - u));
    const int j_hi = std::min(d, u);
    if (j_lo > j_hi) continue;
    double h = std::exp(lf.log_choose(u, j_lo) + lf.log_choose(n - u, d - j_lo) - lf.log_choose(n, d));
    if (j_lo == 2) numerator += w * (2.0 / u) * h;
    double tail = 0.0;
    for (int j = j_lo; j <= j_hi; ++j) {
      tail += h;
      if (j == j_hi) break;
      const double ratio = static_cast<double>(u - j) * static_cast<double>(d - j) /
                           (static_cast<double>(j + 1) * static_cast<double>(n - u - d + j + 1));
      h *= ratio;
      if (ratio < 1.0 && h < 1e-20 * tail) break;
    }
    denominator += w * tail;
  }

  if (!(denominator >= denominator_floor)) {
    std::ostringstream os;
    os << "cloud is empty with probability ~1 at u = " << u << " (cloud probability " << denominator
       << " below floor " << denominator_floor << ")";
    throw degenerate_distribution_error(os.str());
  }
  return std::clamp(numerator / denominator, 0.0, 1.0);
}

// ---------------------------------------------------------------------------
// Full pipeline

AnalysisResult analyze(const ProtocolConfig& config, const AnalysisOptions& options) {
  config.validate();
  const DegreeDistribution omega = omega_for(config, options.omega_mode);
  const int n = config.n;

  AnalysisResult result;
  result.config = config;
  result.omega_mode = options.omega_mode;
  result.omega.assign(omega.values().begin(), omega.values().end());
  if (const auto* t = std::get_if<TwoStageBeta>(&config.schedule)) {
    result.approximate = config.m > t->m_star;
  }
  result.approximate = result.approximate || options.omega_mode == OmegaMode::kPoisson;

  LogFactorial lf(n);
  TransitionWorkspace ws;
  StateDistribution dist = initial_state(omega, config.m, options.prune_threshold);
  double defect = std::abs(dist.accounted_mass() - 1.0);
  for (int u = n; u >= 1; --u) {
    const double q = dist.needs_cloud_departure() ? q_u(omega, u, lf, options.denominator_floor) : 0.0;
    dist.advance(q, options.prune_threshold, ws);
    defect = std::max(defect, std::abs(dist.accounted_mass() - 1.0));
  }

  const auto failures = dist.failure_mass_by_u();
  result.failure_profile.assign(failures.begin(), failures.end());
  double unresolved = 0.0;
  for (int u = n; u >= 1; --u) unresolved += (static_cast<double>(u) / n) * failures[static_cast<std::size_t>(u)];
  result.pruned_mass = dist.pruned_mass();
  result.success_mass = dist.success_mass();
  result.per = std::min(1.0, unresolved + result.pruned_mass);
  result.throughput = n * (1.0 - result.per) / config.m;
  result.conservation_defect = defect;
  return result;
}

}  // namespace frameless
