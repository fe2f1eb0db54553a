#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace eulab {

/// Thrown when a trajectory leaves the resolvable regime (NaN/Inf fields or
/// a CFL time step collapsing below the floor). Carries diagnostic norms.
class BlowupError : public std::runtime_error {
 public:
  BlowupError(std::string what, double t, double vmax, double rho_linf)
      : std::runtime_error(std::move(what)), t(t), vmax(vmax), rho_linf(rho_linf) {}
  double t;
  double vmax;
  double rho_linf;
};

inline void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

/// SplitMix64 step; used to derive independent sub-seeds from a user seed.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t s = base ^ (0x9e3779b97f4a7c15ULL * (stream + 1));
  splitmix64(s);
  return splitmix64(s);
}

/// Thread count for ensemble work: EULAB_THREADS overrides hardware_concurrency.
inline int thread_count() {
  if (const char* env = std::getenv("EULAB_THREADS")) {
    int v = std::atoi(env);
    if (v > 0) return v;
  }
  unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

/// Runs fn(i) for i in [0, count). Tasks must be independent; results keyed by
/// index so the outcome does not depend on scheduling.
template <typename Fn>
void parallel_for(int count, Fn&& fn) {
  int nthreads = std::min(thread_count(), count);
  if (nthreads <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr err;
  std::mutex err_mu;
  pool.reserve(nthreads);
  for (int t = 0; t < nthreads; ++t) {
    pool.emplace_back([&] {
      for (;;) {
        int i = next.fetch_add(1);
        if (i >= count) break;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(err_mu);
          if (!err) err = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

}  // namespace eulab
