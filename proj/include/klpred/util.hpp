#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <functional>
#include <limits>
#include <string>
#include <thread>
#include <vector>

namespace klpred {

// Index-parallel loop. Each index must be a self-contained unit of work;
// results land in pre-sized output slots, so totals are order-insensitive
// and independent of the thread count.
inline void parallel_for(std::size_t count, unsigned threads,
                         const std::function<void(std::size_t)>& fn) {
  if (threads == 0) threads = std::thread::hardware_concurrency();
  if (threads <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      fn(i);
    }
  };
  std::vector<std::thread> pool;
  unsigned n = static_cast<unsigned>(std::min<std::size_t>(threads, count));
  pool.reserve(n);
  for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
}

// Shortest round-trippable decimal form, used for every CSV numeric field.
inline std::string format_double(double x) {
  char buf[40];
  if (std::nearbyint(x) == x && std::abs(x) < 1e15) {
    std::snprintf(buf, sizeof(buf), "%.0f", x);
    return buf;
  }
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  // Prefer a shorter representation when it round-trips.
  for (int prec = 1; prec < 17; ++prec) {
    char t[40];
    std::snprintf(t, sizeof(t), "%.*g", prec, x);
    double back = 0.0;
    std::sscanf(t, "%lf", &back);
    if (back == x) return t;
  }
  return buf;
}

// log of the N(0, tau I_p) density at squared radius rho.
inline double log_normal_density(double rho, double tau, int p) {
  return -0.5 * p * std::log(2.0 * M_PI * tau) - rho / (2.0 * tau);
}

inline double log_sum_exp(const std::vector<double>& logs) {
  double m = -std::numeric_limits<double>::infinity();
  for (double v : logs) m = std::max(m, v);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double v : logs) s += std::exp(v - m);
  return m + std::log(s);
}

}  // namespace klpred
