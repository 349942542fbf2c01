#ifndef HANKEL_SYMBOLS_HPP
#define HANKEL_SYMBOLS_HPP

#include "hankel/model.hpp"
#include "hankel/sequences.hpp"

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace hankel {

/// Points closer than this to a singular point are skipped on evaluation grids.
inline constexpr double singular_guard = 1e-6;

/// Symbol on the unit circle, parametrized by theta in (-pi, pi].
class CircleSymbol {
public:
  using Evaluator = std::function<complex(double theta)>;

  CircleSymbol(Evaluator evaluator, std::string descriptor, std::vector<double> singular_angles = {});

  complex operator()(double theta) const;
  complex at(complex mu) const { return (*this)(std::arg(mu)); }

  const std::string& descriptor() const { return descriptor_; }
  const std::vector<double>& singular_angles() const { return singular_; }

private:
  Evaluator evaluator_;
  std::string descriptor_;
  std::vector<double> singular_;
};

/// Symbol on the real line.
class LineSymbol {
public:
  using Evaluator = std::function<complex(double x)>;

  LineSymbol(Evaluator evaluator, std::string descriptor, std::vector<double> singular_points = {});

  complex operator()(double x) const { return evaluator_(x); }

  const std::string& descriptor() const { return descriptor_; }
  const std::vector<double>& singular_points() const { return singular_; }

private:
  Evaluator evaluator_;
  std::string descriptor_;
  std::vector<double> singular_;
};

/// Wraps an angle into (-pi, pi].
double wrap_angle(double theta);

/// sigma(e^{i theta}) = sum_{j>=2} q(j) (e^{ij theta} - e^{-ij theta}).
/// The head is summed up to N = max(2, ceil(1/(2|theta|))); the tail uses
/// M(alpha)+2 summation-by-parts passes and a certified remainder bound.
/// Supports alpha up to 50.
complex sigma_eval(double alpha, double theta, double precision = 1e-12);

/// 2i int_0^inf q_kind(t) sin(xt) dt, split at t = 1/|x| with one integration
/// by parts on the oscillatory tail.
complex sigma_line_eval(LineKind kind, double alpha, double x, double precision = 1e-10,
                        const Cutoffs& cutoffs = {});

/// tau_m(x) = m! (ix)^(-m-1) (e^{i t0 x} - sum_{k<=m} (i t0 x)^k / k!), the
/// symbol of (t0 - t)^m on (0, t0). Taylor branch for |x| < x_switch.
complex tau_eval(int m, double t0, double x);
complex tau_eval(int m, double t0, double x, double x_switch);

CircleSymbol model_circle_symbol(double alpha, double precision = 1e-12);
LineSymbol model_line_symbol(LineKind kind, double alpha, double precision = 1e-10,
                             const Cutoffs& cutoffs = {});
LineSymbol tau_symbol(int m, double t0);

/// mu -> s(mu / zeta)
CircleSymbol rotate_symbol(const CircleSymbol& s, complex zeta);
/// x -> s(x - a)
LineSymbol shift_symbol(const LineSymbol& s, double a);

/// sum_l b_l sigma(mu / zeta_l)
CircleSymbol composite_symbol(const DiscreteModel& model, double precision = 1e-12);
/// b0 sigma_0 + sum_l b_l sigma_inf(x - a_l), plus b tau_m for a local bump.
LineSymbol composite_symbol(const ContinuousModel& model, double precision = 1e-10);

/// Trigonometric polynomial sum_j c_j mu^j over the given index offsets.
CircleSymbol trig_polynomial(std::vector<std::pair<std::int64_t, complex>> coefficients);

/// Trapezoidal approximation of int s(mu) mu^-j dm(mu) on a grid of grid_size
/// points, offset by half a step from the first singular angle. Requires
/// grid_size >= 8 max|j|. The returned slice holds j = 0..j_range.hi, with
/// indices below j_range.lo set to zero.
SequenceSlice fourier_coefficients(const CircleSymbol& s, IndexRange j_range, std::int64_t grid_size);

/// w(x) = (x - i/2) / (x + i/2)
complex cayley_point(double x);
/// x -> -w(x) s(w(x))
LineSymbol cayley_transfer(const CircleSymbol& s);
/// Inverse transfer: omega(e^{i theta}) = -bold_omega(x) / e^{i theta}, x = -cot(theta/2)/2.
CircleSymbol cayley_pullback(const LineSymbol& s);

/// Columns theta, re, im (resp. x, re, im); points inside the singular guard are skipped.
void write_trace(std::ostream& os, const CircleSymbol& s, const std::vector<double>& thetas);
void write_trace(std::ostream& os, const LineSymbol& s, const std::vector<double>& xs);

} // namespace hankel

#endif
