#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <thread>
#include <vector>

#include "bldg/errors.hpp"

namespace bldg {

// Exact unsigned arithmetic with overflow detection.  All counts produced by
// this library are exact integers; silently wrapping would be worse than
// refusing.
inline std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
  unsigned __int128 p = static_cast<unsigned __int128>(a) * b;
  if (p > UINT64_MAX) throw OverflowError("64-bit overflow in exact count");
  return static_cast<std::uint64_t>(p);
}

inline std::uint64_t checked_add(std::uint64_t a, std::uint64_t b) {
  if (UINT64_MAX - a < b) throw OverflowError("64-bit overflow in exact count");
  return a + b;
}

// q^e with overflow check.
inline std::uint64_t upow(std::uint64_t q, unsigned e) {
  std::uint64_t r = 1;
  while (e--) r = checked_mul(r, q);
  return r;
}

// Runs fn(part) for part = 0..parts-1 on up to `threads` worker threads and
// returns the per-part results in part order, so the combined output does not
// depend on the degree of parallelism.  Exceptions are rethrown.
template <class R>
std::vector<R> run_partitioned(int parts, int threads,
                               const std::function<R(int)>& fn) {
  std::vector<R> out(static_cast<size_t>(parts));
  if (threads <= 1 || parts <= 1) {
    for (int i = 0; i < parts; ++i) out[static_cast<size_t>(i)] = fn(i);
    return out;
  }
  std::vector<std::exception_ptr> errs(static_cast<size_t>(parts));
  std::vector<std::thread> pool;
  std::atomic<int> next{0};
  int nw = std::min(threads, parts);
  for (int w = 0; w < nw; ++w) {
    pool.emplace_back([&]() {
      for (;;) {
        int i = next.fetch_add(1);
        if (i >= parts) return;
        try {
          out[static_cast<size_t>(i)] = fn(i);
        } catch (...) {
          errs[static_cast<size_t>(i)] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errs)
    if (e) std::rethrow_exception(e);
  return out;
}

}  // namespace bldg
