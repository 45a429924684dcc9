#include "nls/fft.hpp"

#include <fftw3.h>

#include <map>
#include <memory>
#include <mutex>
#include <utility>

#include "nls/field.hpp"

namespace nls {

namespace {
std::mutex& planner_mutex() {
  static std::mutex mu;
  return mu;
}
}  // namespace

Fft::Fft(int d, int n) : d_(d), n_(n), size_(grid_size(d, n)) {
  int dims[3] = {n, n, n};
  auto* a = fftw_alloc_complex(size_);
  auto* b = fftw_alloc_complex(size_);
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  fwd_ = fftw_plan_dft(d, dims, a, b, FFTW_FORWARD, flags);
  bwd_ = fftw_plan_dft(d, dims, a, b, FFTW_BACKWARD, flags);
  fftw_free(a);
  fftw_free(b);
}

Fft::~Fft() {
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(fwd_));
  fftw_destroy_plan(static_cast<fftw_plan>(bwd_));
}

const Fft& Fft::get(int d, int n) {
  static std::map<std::pair<int, int>, std::unique_ptr<Fft>> cache;
  std::lock_guard lock(planner_mutex());
  auto& slot = cache[{d, n}];
  if (!slot) slot.reset(new Fft(d, n));
  return *slot;
}

void Fft::forward(std::span<const std::complex<double>> in, std::span<std::complex<double>> out) const {
  // FFTW never writes to the input of an out-of-place complex transform.
  auto* src = reinterpret_cast<fftw_complex*>(const_cast<std::complex<double>*>(in.data()));
  fftw_execute_dft(static_cast<fftw_plan>(fwd_), src, reinterpret_cast<fftw_complex*>(out.data()));
}

void Fft::inverse(std::span<const std::complex<double>> in, std::span<std::complex<double>> out) const {
  auto* src = reinterpret_cast<fftw_complex*>(const_cast<std::complex<double>*>(in.data()));
  fftw_execute_dft(static_cast<fftw_plan>(bwd_), src, reinterpret_cast<fftw_complex*>(out.data()));
  const double s = 1.0 / static_cast<double>(size_);
  for (auto& z : out) z *= s;
}

}  // namespace nls
