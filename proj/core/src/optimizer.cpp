#include "frameless/optimizer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <thread>
#include <utility>

namespace frameless {

namespace {

// Evaluates fn(i) for i in [0, count) into slot i; the result never depends
// on the number of workers.
template <class T, class Fn>
std::vector<T> evaluate_all(std::size_t count, unsigned threads, Fn fn) {
  std::vector<T> out(count);
  unsigned workers = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, count));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) out[i] = fn(i);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < count && !failed; i = next++) {
          try {
            out[i] = fn(i);
          } catch (...) {
            if (!failed.exchange(true)) failure = std::current_exception();
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

double round_grid(double x) { return std::round(x * 1e9) / 1e9; }

long long beta_key(double beta) { return std::llround(beta * 1e6); }

// Strictly better throughput, ties toward smaller beta then smaller m.
bool better_peak(const PeakPoint& a, const PeakPoint& b) {
  if (a.throughput != b.throughput) return a.throughput > b.throughput;
  if (beta_key(a.beta) != beta_key(b.beta)) return a.beta < b.beta;
  return a.m < b.m;
}

std::vector<int> slot_values(int lo, int hi, int step) {
  std::vector<int> out;
  for (int m = lo; m <= hi; m += step) out.push_back(m);
  return out;
}

}  // namespace

std::vector<double> grid_values(double lo, double hi, double step) {
  if (!(step > 0.0)) throw config_error("grid step must be positive");
  if (!(lo <= hi)) throw config_error("empty grid: lo > hi");
  std::vector<double> out;
  const auto count = static_cast<long long>(std::floor((hi - lo) / step + 1e-9));
  for (long long i = 0; i <= count; ++i) out.push_back(round_grid(lo + static_cast<double>(i) * step));
  return out;
}

PeakResult optimize_peak(int n, const PeakSearch& search) {
  if (n < 1) throw config_error("n must be >= 1");
  if (search.coarse_m_step < 1 || search.fine_m_step < 1) throw config_error("m steps must be >= 1");
  const double beta_hi = std::min(search.beta_hi, static_cast<double>(n));
  const int m_lo = std::max(1, static_cast<int>(std::ceil(search.m_ratio_lo * n - 1e-9)));
  const int m_hi = static_cast<int>(std::floor(search.m_ratio_hi * n + 1e-9));
  if (m_hi < m_lo) throw config_error("empty slot range for peak search");

  std::map<std::pair<long long, int>, PeakPoint> evaluated;
  auto run = [&](const std::vector<double>& betas, const std::vector<int>& slots) {
    std::vector<std::pair<double, int>> todo;
    for (double beta : betas) {
      for (int m : slots) {
        if (!evaluated.contains({beta_key(beta), m})) todo.emplace_back(beta, m);
      }
    }
    auto points = evaluate_all<PeakPoint>(todo.size(), search.threads, [&](std::size_t i) {
      const auto [beta, m] = todo[i];
      const AnalysisResult r = analyze(ProtocolConfig::single(n, beta, m), search.analysis);
      return PeakPoint{beta, m, r.throughput, r.per, r.pruned_mass, r.conservation_defect};
    });
    for (const auto& p : points) evaluated.emplace(std::pair{beta_key(p.beta), p.m}, p);
  };
  auto incumbent = [&] {
    const PeakPoint* best = nullptr;
    for (const auto& [key, p] : evaluated) {
      if (best == nullptr || better_peak(p, *best)) best = &p;
    }
    return *best;
  };

  run(grid_values(search.beta_lo, beta_hi, search.coarse_beta_step),
      slot_values(m_lo, m_hi, search.coarse_m_step));
  const PeakPoint coarse = incumbent();

  const double fine_lo = std::max(search.beta_lo, coarse.beta - search.coarse_beta_step);
  const double fine_hi = std::min(beta_hi, coarse.beta + search.coarse_beta_step);
  run(grid_values(fine_lo, fine_hi, search.fine_beta_step),
      slot_values(std::max(m_lo, coarse.m - search.coarse_m_step), std::min(m_hi, coarse.m + search.coarse_m_step),
                  search.fine_m_step));
  const PeakPoint best = incumbent();

  PeakResult out;
  out.n = n;
  out.beta_max = best.beta;
  out.t_max = best.throughput;
  out.m_max = best.m;
  out.per_at_peak = best.per;
  out.search_trace.reserve(evaluated.size());
  for (const auto& [key, p] : evaluated) out.search_trace.push_back(p);
  return out;
}

TwoStageResult optimize_floor(int n, double beta1, int m_star, const FloorSearch& search) {
  if (n < 1) throw config_error("n must be >= 1");
  if (!(search.target_ratio > 0.0)) throw config_error("target ratio must be positive");
  const int target_m = std::max(1, static_cast<int>(std::lround(search.target_ratio * n)));
  const double beta2_hi = std::min(search.beta2_hi, static_cast<double>(n));

  std::map<long long, FloorPoint> evaluated;
  auto run = [&](const std::vector<double>& betas) {
    std::vector<double> todo;
    for (double b : betas) {
      if (!evaluated.contains(beta_key(b))) todo.push_back(b);
    }
    auto points = evaluate_all<FloorPoint>(todo.size(), search.threads, [&](std::size_t i) {
      const auto cfg = ProtocolConfig::two_stage(n, beta1, todo[i], m_star, target_m);
      const AnalysisResult r = analyze(cfg, search.analysis);
      return FloorPoint{todo[i], r.per, r.pruned_mass, r.conservation_defect};
    });
    for (const auto& p : points) evaluated.emplace(beta_key(p.beta2), p);
  };
  auto incumbent = [&] {
    const FloorPoint* best = nullptr;
    for (const auto& [key, p] : evaluated) {
      if (best == nullptr || p.per < best->per) best = &p;  // map order: ties keep smaller beta2
    }
    return *best;
  };

  run(grid_values(search.beta2_lo, beta2_hi, search.coarse_step));
  const FloorPoint coarse = incumbent();
  run(grid_values(std::max(search.beta2_lo, coarse.beta2 - search.coarse_step),
                  std::min(beta2_hi, coarse.beta2 + search.coarse_step), search.fine_step));
  const FloorPoint best = incumbent();

  TwoStageResult out;
  out.n = n;
  out.beta1 = beta1;
  out.beta2 = best.beta2;
  out.m_star = m_star;
  out.target_m = target_m;
  out.per_at_target = best.per;
  out.single_stage_per = analyze(ProtocolConfig::single(n, beta1, target_m), search.analysis).per;
  for (const auto& [key, p] : evaluated) out.search_trace.push_back(p);
  return out;
}

std::vector<SweepRow> sweep(const ProtocolConfig& family, int m_from, int m_to, int m_step,
                            const SweepOptions& options) {
  family.validate();
  if (m_from < 1 || m_to < m_from || m_step < 1) throw config_error("invalid slot range for sweep");
  const std::vector<int> slots = slot_values(m_from, m_to, m_step);
  return evaluate_all<SweepRow>(slots.size(), options.threads, [&](std::size_t i) {
    const ProtocolConfig cfg = family.with_slots(slots[i]);
    const AnalysisResult r = analyze(cfg, options.analysis);
    SweepRow row;
    row.config = cfg;
    row.m_over_n = static_cast<double>(cfg.m) / cfg.n;
    row.per = r.per;
    row.throughput = r.throughput;
    row.pruned_mass = r.pruned_mass;
    row.conservation_defect = r.conservation_defect;
    row.approximate = r.approximate;
    if (options.simulation) row.simulation = simulate(cfg, *options.simulation);
    return row;
  });
}

}  // namespace frameless
