#ifndef HANKEL_DETAIL_FFT_HPP
#define HANKEL_DETAIL_FFT_HPP

#include <complex>
#include <cstddef>
#include <vector>

#include <fftw3.h>

namespace hankel::detail {

/// Out-of-place 1-D complex transform of fixed size. Planning is
/// serialized (the FFTW planner is not reentrant); execute() is thread-safe.
class FftPlan {
public:
  FftPlan(std::size_t n, int sign);
  ~FftPlan();
  FftPlan(const FftPlan&) = delete;
  FftPlan& operator=(const FftPlan&) = delete;

  std::size_t size() const { return n_; }
  void execute(const std::complex<double>* in, std::complex<double>* out) const;

private:
  std::size_t n_;
  fftw_plan plan_ = nullptr;
};

std::size_t next_power_of_two(std::size_t n);

} // namespace hankel::detail

#endif
