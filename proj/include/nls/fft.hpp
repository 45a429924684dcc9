#pragma once

#include <complex>
#include <span>

namespace nls {

/// Unnormalized d-dimensional complex DFT on an n^d row-major array.
///
/// Plans are built once per (d, n) with FFTW_ESTIMATE | FFTW_UNALIGNED, so
/// results are deterministic and independent of buffer alignment. Execution
/// is thread-safe; plan creation is serialized internally.
class Fft {
 public:
  static const Fft& get(int d, int n);

  void forward(std::span<const std::complex<double>> in, std::span<std::complex<double>> out) const;
  /// Inverse transform including the 1/n^d normalization.
  void inverse(std::span<const std::complex<double>> in, std::span<std::complex<double>> out) const;

  int d() const { return d_; }
  int n() const { return n_; }

  Fft(const Fft&) = delete;
  Fft& operator=(const Fft&) = delete;
  ~Fft();

 private:
  Fft(int d, int n);
  int d_, n_;
  std::size_t size_;
  void* fwd_ = nullptr;
  void* bwd_ = nullptr;
};

}  // namespace nls
