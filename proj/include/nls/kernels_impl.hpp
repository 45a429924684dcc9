#pragma once

#include <array>
#include <vector>

namespace nls::kernels {

namespace detail {

// Fixed-shape block reduction: partial[b] = pairwise sum of block b, then a
// pairwise sum over the partials. The result does not depend on scheduling.
template <class F>
double blocked_reduce(std::size_t n, F&& f, bool use_threads) {
  if (n == 0) return 0.0;
  const std::size_t nblocks = (n + kBlock - 1) / kBlock;
  std::vector<double> partial(nblocks);
  auto one_block = [&](std::size_t b) {
    std::array<double, kBlock> buf;
    const std::size_t lo = b * kBlock;
    const std::size_t hi = lo + kBlock < n ? lo + kBlock : n;
    for (std::size_t i = lo; i < hi; ++i) buf[i - lo] = f(i);
    partial[b] = pairwise_sum(std::span<const double>(buf.data(), hi - lo));
  };
  if (use_threads) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t b = 0; b < static_cast<std::ptrdiff_t>(nblocks); ++b) one_block(b);
  } else {
    for (std::size_t b = 0; b < nblocks; ++b) one_block(b);
  }
  return pairwise_sum(partial);
}

}  // namespace detail

template <class F>
double reduce(std::size_t n, F&& f) {
  return detail::blocked_reduce(n, std::forward<F>(f), true);
}

}  // namespace nls::kernels
