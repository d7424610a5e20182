#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <thread>
#include <vector>

namespace qelab {

using Complex = std::complex<double>;

/// Fixed-order pairwise summation; the result depends only on the input order.
template <typename T>
T pairwise_sum(std::span<const T> values) {
  constexpr std::size_t kBlock = 8;
  if (values.empty()) return T{};
  if (values.size() <= kBlock) {
    T acc = values[0];
    for (std::size_t i = 1; i < values.size(); ++i) acc += values[i];
    return acc;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

template <typename T>
T pairwise_sum(const std::vector<T>& values) {
  return pairwise_sum(std::span<const T>(values));
}

struct MeanEstimate {
  double mean = 0.0;
  double std_error = 0.0;
};

/// Sample mean and standard error of the mean (two-pass, pairwise sums).
inline MeanEstimate mean_and_stderr(std::span<const double> samples) {
  MeanEstimate out;
  const std::size_t m = samples.size();
  if (m == 0) return out;
  out.mean = pairwise_sum(samples) / static_cast<double>(m);
  if (m < 2) return out;
  std::vector<double> sq(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double d = samples[i] - out.mean;
    sq[i] = d * d;
  }
  const double var = pairwise_sum(std::span<const double>(sq)) / static_cast<double>(m - 1);
  out.std_error = std::sqrt(var / static_cast<double>(m));
  return out;
}

inline double median(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

/// Process-wide worker count used by parallel_for; 0 means hardware concurrency.
unsigned thread_count();
void set_thread_count(unsigned threads);

namespace detail {
inline thread_local bool inside_worker = false;
}

/// Runs body(i) for i in [0, n). Work units must write only to their own
/// output slot; results are then independent of scheduling. Calls made from
/// inside a worker run serially.
template <typename Body>
void parallel_for(std::size_t n, Body&& body) {
  const unsigned workers =
      detail::inside_worker ? 1u : static_cast<unsigned>(std::min<std::size_t>(thread_count(), n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      detail::inside_worker = true;
      try {
        for (std::size_t i = next++; i < n; i = next++) body(i);
      } catch (...) {
        errors[w] = std::current_exception();
        next = n;
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace qelab
