#ifndef HANKEL_MODEL_HPP
#define HANKEL_MODEL_HPP

#include <complex>
#include <cstdint>
#include <optional>
#include <vector>

namespace hankel {

using complex = std::complex<double>;

inline constexpr double alpha_min = 1e-3;
inline constexpr double alpha_max = 1e3;

/// Throws a domain error unless alpha is finite and in [alpha_min, alpha_max].
void check_alpha(double alpha);

/// Decay exponent alpha, Schatten exponent p = 1/alpha and the number of
/// differences M(alpha) the error-term hypotheses need.
struct AsymptoticOrder {
  double alpha = 1.0;
  double p = 1.0;
  int smoothing_order = 2;

  static AsymptoticOrder from_alpha(double alpha);
};

struct DiscreteTerm {
  complex zeta{1.0, 0.0};
  complex b{1.0, 0.0};
};

/// h(j) = sum_l b_l j^-1 (log j)^-alpha zeta_l^-j; the zeta_l are distinct
/// points of the unit circle.
struct DiscreteModel {
  AsymptoticOrder order;
  std::vector<DiscreteTerm> terms;

  void validate() const;
};

struct LineTerm {
  double a = 0.0;
  complex b{1.0, 0.0};
};

/// b (t0 - t)^m on (0, t0), zero beyond.
struct LocalBump {
  double t0 = 1.0;
  int m = 0;
  complex b{1.0, 0.0};
};

/// Smooth cutoff constants 0 < c1 < c2 < 1 < C1 < C2 for the model kernels.
struct Cutoffs {
  double c1 = 0.25;
  double c2 = 0.5;
  double C1 = 2.0;
  double C2 = 4.0;

  void validate() const;
};

struct ContinuousModel {
  AsymptoticOrder order;
  complex b0{0.0, 0.0};
  std::vector<LineTerm> terms;
  std::optional<LocalBump> local_bump;
  Cutoffs cutoffs;

  void validate() const;
};

struct PredictedLaw {
  double c = 0.0;
  double alpha = 1.0;
};

/// v(alpha) = 2^-alpha pi^(1-2alpha) B(1/(2alpha), 1/2)^alpha
double v_coefficient(double alpha);

/// floor(alpha)+1 for alpha >= 1/2, otherwise 0.
int smoothing_order(double alpha);

PredictedLaw predicted_coefficient(const DiscreteModel& model);

/// With a local bump the order must be m+1; the bump enters through
/// t0 (m! |b|)^(1/alpha) / pi.
PredictedLaw predicted_coefficient(const ContinuousModel& model);

/// m! t0^(m+1) (pi n)^(-m-1)
double weyl_reference(int m, double t0, std::int64_t n);

namespace tolerance {
inline constexpr double closed_form = 1e-12;

bool relative_close(double value, double reference, double rel = closed_form);
} // namespace tolerance

} // namespace hankel

#endif
