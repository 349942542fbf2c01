#ifndef HANKEL_SEQUENCES_HPP
#define HANKEL_SEQUENCES_HPP

#include "hankel/model.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace hankel {

/// Inclusive index range [lo, hi].
struct IndexRange {
  std::int64_t lo = 0;
  std::int64_t hi = 0;

  std::int64_t size() const { return hi - lo + 1; }
};

struct SequenceSource {
  enum class Kind { model, custom };
  Kind kind = Kind::custom;
  std::string description;
};

/// h(0..J) materialized; entries are finite and J >= 1.
class SequenceSlice {
public:
  SequenceSlice() = default;
  SequenceSlice(std::vector<complex> values, SequenceSource source = {});

  std::size_t size() const { return values_.size(); }
  std::int64_t last_index() const { return static_cast<std::int64_t>(values_.size()) - 1; }
  const complex& operator[](std::size_t j) const { return values_[j]; }
  const std::vector<complex>& values() const { return values_; }
  const SequenceSource& source() const { return source_; }

private:
  std::vector<complex> values_;
  SequenceSource source_;
};

/// q(j) = j^-1 (log j)^-alpha for j >= 2, and q(0) = q(1) = 0.
double model_sequence(double alpha, std::int64_t j);

/// m-th forward difference of q at j. Large j use a Taylor/Stirling expansion
/// so the value keeps full relative accuracy where direct differencing cancels.
double model_difference(double alpha, int m, std::int64_t j);

enum class LineKind { zero, infinity };

/// Smooth cutoffs: chi_0 = 1 on [0, c1], 0 beyond c2; chi_inf = 0 on [0, C1], 1 beyond C2.
double cutoff_zero(double t, const Cutoffs& cutoffs);
double cutoff_infinity(double t, const Cutoffs& cutoffs);
double cutoff_zero_derivative(double t, const Cutoffs& cutoffs);
double cutoff_infinity_derivative(double t, const Cutoffs& cutoffs);

/// Model kernels q_0(t) = chi_0(t) t^-1 (log 1/t)^-alpha and
/// q_inf(t) = chi_inf(t) t^-1 (log t)^-alpha, t > 0.
double model_kernel(LineKind kind, double alpha, double t, const Cutoffs& cutoffs = {});
double model_kernel_derivative(LineKind kind, double alpha, double t, const Cutoffs& cutoffs = {});

/// Error term g_l(j) attached to one model term.
using ErrorSequence = std::function<complex(std::int64_t)>;

/// scale * j^-power * (log j)^-log_power for j >= 2, zero below.
ErrorSequence power_error_term(complex scale, double power, double log_power);

/// sum_l (b_l q(j) + g_l(j)) zeta_l^-j; `errors` is empty or has one entry per term
/// (empty std::function entries mean g_l = 0).
complex oscillating_sequence(const DiscreteModel& model, const std::vector<ErrorSequence>& errors,
                             std::int64_t j);

SequenceSlice model_slice(double alpha, std::int64_t last);
SequenceSlice oscillating_slice(const DiscreteModel& model, const std::vector<ErrorSequence>& errors,
                                std::int64_t last);
SequenceSlice custom_slice(std::vector<complex> values, std::string description = "custom");

/// h^(m)(j) = h^(m-1)(j+1) - h^(m-1)(j); the result has m fewer entries.
SequenceSlice iterated_difference(const SequenceSlice& h, int m);

/// zeta^-j h(j)
SequenceSlice modulate(const SequenceSlice& h, complex zeta);

struct CertificateThresholds {
  double delta = 0.1;
  double quartile_ratio = 0.05;
};

/// Finite-window evidence that g^(m)(j) = o(j^(-1-m) (log j)^-alpha).
struct DecayCertificate {
  IndexRange window;
  double alpha = 1.0;
  int m = 0;
  CertificateThresholds thresholds;
  std::vector<std::int64_t> j;
  std::vector<double> r;
  double slope = 0.0; // least squares of log r against log log j
  double first_quartile_max = 0.0;
  double last_quartile_max = 0.0;
  bool pass = false;
};

DecayCertificate decay_certificate(const SequenceSlice& g, double alpha, int m, IndexRange window,
                                   CertificateThresholds thresholds = {});

/// Columns j, re, im.
void write_csv(std::ostream& os, const SequenceSlice& h);

} // namespace hankel

#endif
