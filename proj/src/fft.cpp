#include "detail/fft.hpp"

#include "hankel/error.hpp"

#include <mutex>

namespace hankel::detail {

namespace {
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
} // namespace

FftPlan::FftPlan(std::size_t n, int sign) : n_(n) {
  if (n == 0) raise(ErrorKind::length, "FFT size must be positive");
  std::lock_guard lock(planner_mutex());
  auto* in = fftw_alloc_complex(n);
  auto* out = fftw_alloc_complex(n);
  // ESTIMATE never touches the arrays and gives plans independent of timing,
  // which keeps results reproducible run to run.
  plan_ = fftw_plan_dft_1d(static_cast<int>(n), in, out, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
  fftw_free(in);
  fftw_free(out);
  if (!plan_) raise(ErrorKind::internal, "FFTW could not create a plan");
}

FftPlan::~FftPlan() {
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(plan_);
}

void FftPlan::execute(const std::complex<double>* in, std::complex<double>* out) const {
  fftw_execute_dft(plan_, reinterpret_cast<fftw_complex*>(const_cast<std::complex<double>*>(in)),
                   reinterpret_cast<fftw_complex*>(out));
}

std::size_t next_power_of_two(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

} // namespace hankel::detail
