#pragma once

/**
 * @file
 * @brief Counter-based random streams and deterministic chunked parallel loops.
 *
 * Every random draw is a pure function of (seed, stream, sample index, slot), so
 * results do not depend on how samples are split across workers.
 */

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <thread>
#include <vector>

namespace nilarea {

namespace detail {

constexpr std::uint64_t mix64(std::uint64_t z)
{
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30U)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27U)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31U);
}

}  // namespace detail

/// Stateless random stream keyed by (seed, stream id).
class CounterRng
{
public:
  constexpr CounterRng(std::uint64_t seed, std::uint64_t stream) : key_(detail::mix64(seed ^ detail::mix64(stream))) {}

  [[nodiscard]] constexpr std::uint64_t bits(std::uint64_t index, std::uint64_t slot) const
  {
    return detail::mix64(key_ ^ detail::mix64(index * 0x632be59bd9b4e019ULL + detail::mix64(slot + 0x1234567ULL)));
  }

  /// Uniform in [0, 1).
  [[nodiscard]] double uniform(std::uint64_t index, std::uint64_t slot) const
  {
    return static_cast<double>(bits(index, slot) >> 11U) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller, consuming slots 2k and 2k+1.
  [[nodiscard]] double normal(std::uint64_t index, std::uint64_t k) const
  {
    const double u1 = 1.0 - uniform(index, 2 * k + 1000);
    const double u2 = uniform(index, 2 * k + 1001);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  /// Derived stream, e.g. one per task or per candidate.
  [[nodiscard]] CounterRng substream(std::uint64_t id) const
  {
    CounterRng r(0, 0);
    r.key_ = detail::mix64(key_ + detail::mix64(id + 0xabcdefULL));
    return r;
  }

private:
  std::uint64_t key_;
};

/// Number of worker threads used by sample loops; 0 means hardware concurrency.
inline unsigned & worker_count()
{
  static unsigned workers = 1;
  return workers;
}

inline constexpr std::size_t kChunk = 4096;

/**
 * @brief Runs `body(begin, end, chunk_index)` over fixed-size chunks of [0, n).
 *
 * Chunk boundaries depend only on n, so per-chunk partial results merged in
 * chunk order are bitwise independent of the worker count.
 */
template<typename Body>
void for_each_chunk(std::size_t n, Body && body)
{
  const std::size_t chunks = (n + kChunk - 1) / kChunk;
  unsigned workers = worker_count() == 0 ? std::max(1U, std::thread::hardware_concurrency()) : worker_count();
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, chunks));
  auto run = [&](std::size_t c) { body(c * kChunk, std::min(n, (c + 1) * kChunk), c); };
  if (workers <= 1) {
    for (std::size_t c = 0; c < chunks; ++c) { run(c); }
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t c = w; c < chunks; c += workers) { run(c); }
    });
  }
  for (auto & t : pool) { t.join(); }
}

/// Deterministic parallel sum of `f(i)` (returning a fixed-size array-like of doubles).
template<std::size_t K, typename F>
std::array<double, K> chunked_sum(std::size_t n, F && f)
{
  const std::size_t chunks = (n + kChunk - 1) / kChunk;
  std::vector<std::array<double, K>> partial(chunks);
  for_each_chunk(n, [&](std::size_t b, std::size_t e, std::size_t c) {
    std::array<double, K> acc{};
    for (std::size_t i = b; i < e; ++i) {
      const auto v = f(i);
      for (std::size_t k = 0; k < K; ++k) { acc[k] += v[k]; }
    }
    partial[c] = acc;
  });
  std::array<double, K> total{};
  for (const auto & p : partial) {
    for (std::size_t k = 0; k < K; ++k) { total[k] += p[k]; }
  }
  return total;
}

/**
 * @brief Jittered stratified points in the unit cube.
 *
 * `count` samples are spread over k^dim strata with k = floor(count^(1/dim));
 * sample i lies in stratum i mod k^dim. With count a multiple of k^dim each
 * stratum receives the same number of points.
 */
class StratifiedCube
{
public:
  StratifiedCube(int dim, std::size_t count) : dim_(dim)
  {
    per_axis_ = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(std::pow(static_cast<double>(count), 1.0 / dim) + 1e-9)));
    strata_ = 1;
    for (int d = 0; d < dim; ++d) { strata_ *= per_axis_; }
    samples_ = std::max<std::size_t>(1, count / strata_) * strata_;
  }

  [[nodiscard]] std::size_t samples() const { return samples_; }
  [[nodiscard]] int dim() const { return dim_; }

  /// Writes the i-th point (each coordinate in [0,1)) into out[0..dim).
  template<typename Out>
  void point(const CounterRng & rng, std::size_t i, Out & out) const
  {
    std::size_t cell = i % strata_;
    for (int d = 0; d < dim_; ++d) {
      const std::size_t c = cell % per_axis_;
      cell /= per_axis_;
      out[d] = (static_cast<double>(c) + rng.uniform(i, static_cast<std::uint64_t>(d))) / static_cast<double>(per_axis_);
    }
  }

private:
  int dim_;
  std::size_t per_axis_ = 1;
  std::size_t strata_ = 1;
  std::size_t samples_ = 1;
};

}  // namespace nilarea
