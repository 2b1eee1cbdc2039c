#pragma once

#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace seqdc {

// SplitMix64 finalizer.  Used to decorrelate derived seeds so that restart r
// of one run never shares a stream with restart r' of another.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  return splitmix64(base ^ splitmix64(index + 0x9e3779b97f4a7c15ULL));
}

// FNV-1a over a byte string, folded through splitmix64.  Stable across runs
// and platforms; used to key per-task seeds off string identifiers.
inline std::uint64_t hash_seed(std::uint64_t base, std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return splitmix64(base ^ splitmix64(h));
}

inline int default_jobs() {
  if (const char* env = std::getenv("SEQDC_JOBS")) {
    int v = std::atoi(env);
    if (v >= 1) return v;
  }
  return 1;
}

// Runs fn(0..n-1) on up to `jobs` worker threads.  Work is handed out through
// an atomic counter; the first exception thrown by any worker is rethrown on
// the calling thread after all workers join.
inline void parallel_for(std::size_t n, int jobs,
                         const std::function<void(std::size_t)>& fn) {
  if (n == 0) return;
  if (jobs < 1) jobs = 1;
  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(jobs), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto body = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::scoped_lock lock(error_mutex);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(body);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace seqdc
