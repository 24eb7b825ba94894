#pragma once

// Deterministic fan-out helpers shared by the envelope and the Monte Carlo
// harness. Work items own their outputs, so results never depend on thread
// scheduling.

#include "tobitls/lsdist.hpp"

#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <random>
#include <thread>
#include <vector>

namespace tobitls {

/// Independent generator for (seed, stream, index, attempt).
inline Rng substream(std::uint64_t seed, std::uint64_t stream, std::uint64_t index, std::uint64_t attempt = 0) {
  auto lo = [](std::uint64_t v) { return static_cast<std::uint32_t>(v & 0xffffffffu); };
  auto hi = [](std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); };
  std::seed_seq seq{lo(seed), hi(seed), lo(stream), hi(stream), lo(index), hi(index), lo(attempt), hi(attempt)};
  return Rng(seq);
}

/// Worker count: `requested` when positive, else TOBITLS_THREADS, else the
/// hardware concurrency (at least 1).
int resolve_threads(int requested);

/// Runs body(i) for i in [0, count) on up to `threads` workers. If any call
/// throws, the exception from the smallest failing index is rethrown after
/// all workers stop.
template <typename Body>
void parallel_for(std::size_t count, int threads, Body&& body) {
  const std::size_t workers = std::min<std::size_t>(count, static_cast<std::size_t>(std::max(1, threads)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  // Indices below the first recorded failure still run, so the reported
  // failure is the smallest failing index regardless of scheduling.
  std::atomic<std::size_t> failed_index{count};
  std::mutex mu;
  std::exception_ptr failure;
  auto run = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count || i > failed_index.load()) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (i < failed_index.load()) {
          failed_index.store(i);
          failure = std::current_exception();
        }
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(run);
  run();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace tobitls
