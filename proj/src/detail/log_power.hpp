#ifndef HANKEL_DETAIL_LOG_POWER_HPP
#define HANKEL_DETAIL_LOG_POWER_HPP

#include <vector>

namespace hankel::detail {

/// Taylor coefficients c_0..c_order of h -> f(t+h) for f(t) = t^-1 (log t)^-alpha,
/// i.e. c_r = f^(r)(t) / r!. Requires t > 1; the radius of convergence is t-1.
std::vector<double> log_power_taylor(double t, double alpha, int order);

/// m-th forward difference of f at t via the Stirling expansion
/// sum_r m! S(r,m) c_r. Accurate when t is well beyond m.
double log_power_difference(double t, double alpha, int m);

/// m-th forward differences of f(t) = t^-1 (log t)^-alpha for many t at once.
/// f^(r)(t) = t^(-1-r) sum_i C_ri (log t)^(-alpha-i), so the difference is a
/// fixed polynomial in (1/t, 1/log t) once alpha and m are chosen.
class DifferenceTable {
public:
  DifferenceTable(double alpha, int m);

  /// Valid for t >= min_argument().
  double operator()(double t) const;
  double min_argument() const { return min_argument_; }
  int order() const { return m_; }

private:
  double alpha_;
  int m_;
  double min_argument_;
  std::vector<std::vector<double>> coeff_; // coeff_[r - m][i]
};

} // namespace hankel::detail

#endif
