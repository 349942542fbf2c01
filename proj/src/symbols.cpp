#include "hankel/symbols.hpp"

#include "detail/fft.hpp"
#include "detail/format.hpp"
#include "detail/log_power.hpp"
#include "hankel/error.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <sstream>

namespace hankel {

namespace {

constexpr double pi = std::numbers::pi;
constexpr double sigma_alpha_max = 50.0;
constexpr std::int64_t sigma_term_cap = 400'000'000;

std::string describe(const char* what, double value) {
  std::ostringstream os;
  os << what << value;
  return os.str();
}

void check_precision(double precision) {
  if (!(precision > 0.0) || !std::isfinite(precision)) {
    raise(ErrorKind::domain, "precision must be a positive number");
  }
}

// e^{ia} - 1 without cancellation for small a.
complex expm1_i(double a) { return complex(0.0, 2.0 * std::sin(0.5 * a)) * std::polar(1.0, 0.5 * a); }

// sum_{j>=2} q(j) e^{ija} for 0 < a <= pi.
complex sigma_half_series(double alpha, double a, double precision) {
  const int P = smoothing_order(alpha) + 2;
  const auto N = std::max<std::int64_t>(2, static_cast<std::int64_t>(std::ceil(1.0 / (2.0 * a))));

  complex head{};
  for (std::int64_t j = 2; j < N; ++j) head += model_sequence(alpha, j) * std::polar(1.0, j * a);

  const complex mu = std::polar(1.0, a);
  const complex mu_minus_one = expm1_i(a);
  const double gap = std::abs(mu_minus_one);
  const double gap_pow = std::pow(gap, P);

  // sum_{j>J} |Delta^P q(j)| telescopes to |Delta^(P-1) q(J+1)| once the
  // differences keep one sign, which they do beyond a few terms.
  auto bound = [&](std::int64_t J) { return std::abs(model_difference(alpha, P - 1, J + 1)) / gap_pow; };

  const double guess = std::pow(std::tgamma(P) / (precision * gap_pow), 1.0 / P);
  auto J = N + static_cast<std::int64_t>(std::min(guess, 1e12));
  while (bound(J) > precision) {
    if (J > sigma_term_cap) {
      throw ConvergenceError("sigma tail did not reach the requested precision within the term cap",
                             bound(J));
    }
    J += J / 2 + 1;
  }
  J = std::min(J, sigma_term_cap);

  const detail::DifferenceTable table(alpha, P);
  complex rest{};
  complex phase = std::polar(1.0, N * a);
  for (std::int64_t j = N; j <= J; ++j) {
    if ((j - N) % 256 == 0) phase = std::polar(1.0, j * a);
    const double d = static_cast<double>(j) >= table.min_argument() ? table(static_cast<double>(j))
                                                                     : model_difference(alpha, P, j);
    rest += d * phase;
    phase *= mu;
  }

  // T_k = (-Delta^k q(N) mu^N - mu T_{k+1}) / (mu - 1), from T_P down to T_0.
  const complex muN = std::polar(1.0, N * a);
  complex tail = rest;
  for (int k = P - 1; k >= 0; --k) tail = (-model_difference(alpha, k, N) * muN - mu * tail) / mu_minus_one;
  return head + tail;
}

// Gauss-Kronrod over [a, b] split into pieces no longer than `piece`, and
// geometrically near a when a > 0 so t^-2 type growth stays resolved.
template <class F>
double integrate_pieces(F f, double a, double b, double piece, double& error) {
  if (!(b > a)) return 0.0;
  std::vector<double> breaks{a};
  double t = a;
  while (t < b) {
    double next = t + piece;
    if (a > 0.0) next = std::min(next, 2.0 * t);
    next = std::min(next, b);
    breaks.push_back(next);
    t = next;
  }
  double sum = 0.0;
  for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
    // Each piece is mapped onto [-1, 1]: boost compares the error estimate of
    // the reference interval against a tolerance scaled by the true length,
    // so short pieces would otherwise never meet the tolerance.
    const double mid = 0.5 * (breaks[k] + breaks[k + 1]);
    const double half = 0.5 * (breaks[k + 1] - breaks[k]);
    auto g = [&](double s) { return f(mid + half * s) * half; };
    double err = 0.0;
    sum += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(g, -1.0, 1.0, 8, 1e-13, &err);
    error += err;
  }
  return sum;
}

// int_T^inf q_inf'(t) e^{ixt} dt = -e^{ixT} sum_k (-1)^k q^(k+1)(T) / (ix)^(k+1), T beyond C2.
complex asymptotic_tail(double alpha, double x, double T) {
  constexpr int order = 60;
  const auto c = detail::log_power_taylor(T, alpha, order + 1);
  complex sum{};
  const complex ix(0.0, x);
  complex inv_pow = 1.0 / ix;
  double factorial = 1.0; // (k+1)!
  double previous = INFINITY;
  for (int k = 0; k < order; ++k) {
    factorial *= (k + 1);
    const complex term = ((k % 2 == 0) ? 1.0 : -1.0) * factorial * c[k + 1] * inv_pow;
    const double size = std::abs(term);
    if (size > previous) break; // asymptotic series: stop at the smallest term
    sum += term;
    if (size < 1e-18 * std::abs(sum)) break;
    previous = size;
    inv_pow /= ix;
  }
  return -std::polar(1.0, x * T) * sum;
}

double sigma_zero_half(double alpha, double x, const Cutoffs& c, double& error) {
  const double a = std::min(1.0 / x, c.c2);
  // t = a e^{-u} on [0, a]: dt = t du and the integrand is chi_0 (log 1/t)^-alpha sin(xt).
  const double U = std::log(std::max(x * a, 1e-300) / 1e-19) + 1.0;
  auto near = [&](double u) {
    const double t = a * std::exp(-u);
    return cutoff_zero(t, c) * std::pow(-std::log(t), -alpha) * std::sin(x * t);
  };
  double sum = integrate_pieces(near, 0.0, std::max(U, 1.0), 1.0, error);
  if (a < c.c2) {
    auto dq = [&](double t) { return model_kernel_derivative(LineKind::zero, alpha, t, c) * std::cos(x * t); };
    sum += model_kernel(LineKind::zero, alpha, a, c) * std::cos(x * a) / x;
    sum += integrate_pieces(dq, a, c.c2, pi / x, error) / x;
  }
  return sum;
}

double sigma_infinity_half(double alpha, double x, const Cutoffs& c, double& error) {
  const double A = std::max(1.0 / x, c.C1);
  double sum = 0.0;
  if (1.0 / x > c.C1) {
    // Non-oscillatory stretch in log coordinates t = e^u.
    auto body = [&](double u) {
      const double t = std::exp(u);
      return cutoff_infinity(t, c) * std::pow(u, -alpha) * std::sin(x * t);
    };
    sum += integrate_pieces(body, std::log(c.C1), std::log(1.0 / x), 1.0, error);
  }
  // One integration by parts on [A, inf): the boundary term plus (1/x) int q' cos.
  sum += model_kernel(LineKind::infinity, alpha, A, c) * std::cos(x * A) / x;
  const double T = std::max({A, c.C2, 1.0 + 40.0 / x});
  auto dq = [&](double t) { return model_kernel_derivative(LineKind::infinity, alpha, t, c) * std::cos(x * t); };
  double inner = integrate_pieces(dq, A, T, pi / x, error);
  inner += asymptotic_tail(alpha, x, T).real();
  return sum + inner / x;
}

complex tau_taylor(int m, double t0, double x) {
  // m! sum_{k>=m+1} i^(k-m-1) t0^k x^(k-m-1) / k!
  double factorial = std::tgamma(m + 2.0);
  double mfact = std::tgamma(m + 1.0);
  complex ipow{1.0, 0.0};
  complex sum{};
  double t0pow = std::pow(t0, m + 1);
  double xpow = 1.0;
  for (int k = m + 1; k < m + 80; ++k) {
    const complex term = ipow * (t0pow * xpow / factorial);
    sum += term;
    if (std::abs(term) <= 1e-18 * std::abs(sum)) break;
    ipow *= complex(0.0, 1.0);
    t0pow *= t0;
    xpow *= x;
    factorial *= (k + 1);
  }
  return mfact * sum;
}

void check_unit(complex zeta) {
  if (std::abs(std::abs(zeta) - 1.0) > 1e-12) raise(ErrorKind::domain, "zeta must lie on the unit circle");
}

} // namespace

CircleSymbol::CircleSymbol(Evaluator evaluator, std::string descriptor, std::vector<double> singular_angles)
    : evaluator_(std::move(evaluator)), descriptor_(std::move(descriptor)), singular_(std::move(singular_angles)) {
  for (auto& angle : singular_) angle = wrap_angle(angle);
}

complex CircleSymbol::operator()(double theta) const { return evaluator_(wrap_angle(theta)); }

LineSymbol::LineSymbol(Evaluator evaluator, std::string descriptor, std::vector<double> singular_points)
    : evaluator_(std::move(evaluator)), descriptor_(std::move(descriptor)), singular_(std::move(singular_points)) {}

double wrap_angle(double theta) {
  if (theta > -pi && theta <= pi) return theta;
  double w = std::remainder(theta, 2.0 * pi);
  if (w <= -pi) w += 2.0 * pi;
  return w;
}

complex sigma_eval(double alpha, double theta, double precision) {
  check_alpha(alpha);
  check_precision(precision);
  if (alpha > sigma_alpha_max) raise(ErrorKind::domain, describe("sigma_eval supports alpha <= 50, got ", alpha));
  theta = wrap_angle(theta);
  if (theta == 0.0) return {};
  const double a = std::abs(theta);
  // q is real, so sigma = S(mu) - conj(S(mu)) = 2i Im S(mu).
  const double im = sigma_half_series(alpha, a, precision / 2.0).imag();
  return {0.0, theta > 0 ? 2.0 * im : -2.0 * im};
}

complex sigma_line_eval(LineKind kind, double alpha, double x, double precision, const Cutoffs& cutoffs) {
  check_alpha(alpha);
  check_precision(precision);
  cutoffs.validate();
  if (!std::isfinite(x)) raise(ErrorKind::domain, "x must be finite");
  if (x == 0.0) return {};
  const double ax = std::abs(x);
  double error = 0.0;
  const double half = kind == LineKind::zero ? sigma_zero_half(alpha, ax, cutoffs, error)
                                             : sigma_infinity_half(alpha, ax, cutoffs, error);
  if (2.0 * error > precision) {
    throw ConvergenceError("line symbol quadrature above the requested precision", 2.0 * error);
  }
  return {0.0, 2.0 * half * (x > 0 ? 1.0 : -1.0)};
}

complex tau_eval(int m, double t0, double x) { return tau_eval(m, t0, x, 0.5 / t0); }

complex tau_eval(int m, double t0, double x, double x_switch) {
  if (m < 0 || !(t0 > 0.0)) raise(ErrorKind::domain, "tau_eval needs m >= 0 and t0 > 0");
  if (std::abs(x) < x_switch) return tau_taylor(m, t0, x);
  const complex iz(0.0, t0 * x);
  complex partial{};
  complex power{1.0, 0.0};
  double factorial = 1.0;
  for (int k = 0; k <= m; ++k) {
    if (k > 0) {
      power *= iz;
      factorial *= k;
    }
    partial += power / factorial;
  }
  const complex ix(0.0, x);
  return std::tgamma(m + 1.0) * (std::exp(iz) - partial) / std::pow(ix, m + 1);
}

CircleSymbol model_circle_symbol(double alpha, double precision) {
  check_alpha(alpha);
  return CircleSymbol([=](double theta) { return sigma_eval(alpha, theta, precision); },
                      describe("sigma, alpha = ", alpha), {0.0});
}

LineSymbol model_line_symbol(LineKind kind, double alpha, double precision, const Cutoffs& cutoffs) {
  check_alpha(alpha);
  cutoffs.validate();
  const bool zero = kind == LineKind::zero;
  std::vector<double> singular;
  if (!zero) singular.push_back(0.0);
  return LineSymbol([=](double x) { return sigma_line_eval(kind, alpha, x, precision, cutoffs); },
                    describe(zero ? "sigma_0, alpha = " : "sigma_inf, alpha = ", alpha), singular);
}

LineSymbol tau_symbol(int m, double t0) {
  if (m < 0 || !(t0 > 0.0)) raise(ErrorKind::domain, "tau_symbol needs m >= 0 and t0 > 0");
  std::ostringstream os;
  os << "tau_" << m << ", t0 = " << t0;
  return LineSymbol([=](double x) { return tau_eval(m, t0, x); }, os.str());
}

CircleSymbol rotate_symbol(const CircleSymbol& s, complex zeta) {
  check_unit(zeta);
  const double phi = std::arg(zeta);
  auto singular = s.singular_angles();
  for (auto& angle : singular) angle += phi;
  return CircleSymbol([s, phi](double theta) { return s(theta - phi); },
                      s.descriptor() + describe(" rotated by ", phi), singular);
}

LineSymbol shift_symbol(const LineSymbol& s, double a) {
  if (!std::isfinite(a)) raise(ErrorKind::domain, "shift must be finite");
  auto singular = s.singular_points();
  for (auto& p : singular) p += a;
  return LineSymbol([s, a](double x) { return s(x - a); }, s.descriptor() + describe(" shifted by ", a), singular);
}

CircleSymbol composite_symbol(const DiscreteModel& model, double precision) {
  model.validate();
  const auto base = model_circle_symbol(model.order.alpha, precision);
  std::vector<std::pair<CircleSymbol, complex>> parts;
  std::vector<double> singular;
  for (const auto& term : model.terms) {
    parts.emplace_back(rotate_symbol(base, term.zeta), term.b);
    singular.push_back(std::arg(term.zeta));
  }
  return CircleSymbol(
      [parts](double theta) {
        complex sum{};
        for (const auto& [s, b] : parts) {
          if (b != complex{}) sum += b * s(theta);
        }
        return sum;
      },
      describe("composite omega, terms = ", static_cast<double>(model.terms.size())), singular);
}

LineSymbol composite_symbol(const ContinuousModel& model, double precision) {
  model.validate();
  const double alpha = model.order.alpha;
  std::vector<std::pair<LineSymbol, complex>> parts;
  if (model.b0 != complex{}) parts.emplace_back(model_line_symbol(LineKind::zero, alpha, precision, model.cutoffs), model.b0);
  const auto inf = model_line_symbol(LineKind::infinity, alpha, precision, model.cutoffs);
  for (const auto& term : model.terms) parts.emplace_back(shift_symbol(inf, term.a), term.b);
  if (model.local_bump) {
    parts.emplace_back(tau_symbol(model.local_bump->m, model.local_bump->t0), model.local_bump->b);
  }
  std::vector<double> singular;
  for (const auto& [s, b] : parts) {
    for (double p : s.singular_points()) singular.push_back(p);
  }
  return LineSymbol(
      [parts](double x) {
        complex sum{};
        for (const auto& [s, b] : parts) {
          if (b != complex{}) sum += b * s(x);
        }
        return sum;
      },
      describe("composite line omega, parts = ", static_cast<double>(parts.size())), singular);
}

CircleSymbol trig_polynomial(std::vector<std::pair<std::int64_t, complex>> coefficients) {
  return CircleSymbol(
      [coefficients](double theta) {
        complex sum{};
        for (const auto& [j, c] : coefficients) sum += c * std::polar(1.0, static_cast<double>(j) * theta);
        return sum;
      },
      describe("trigonometric polynomial, terms = ", static_cast<double>(coefficients.size())));
}

SequenceSlice fourier_coefficients(const CircleSymbol& s, IndexRange j_range, std::int64_t grid_size) {
  if (j_range.lo < 0 || j_range.hi < j_range.lo) raise(ErrorKind::domain, "index range must satisfy 0 <= lo <= hi");
  if (grid_size < 8 * std::max<std::int64_t>(j_range.hi, 1)) {
    std::ostringstream os;
    os << "grid of " << grid_size << " points cannot resolve j up to " << j_range.hi << " (need >= "
       << 8 * std::max<std::int64_t>(j_range.hi, 1) << ")";
    raise(ErrorKind::resolution, os.str());
  }
  const auto G = static_cast<std::size_t>(grid_size);
  const double step = 2.0 * pi / static_cast<double>(G);
  const double anchor = s.singular_angles().empty() ? 0.0 : s.singular_angles().front();
  const double phi = anchor + 0.5 * step;

  std::vector<complex> samples(G), spectrum(G);
  for (std::size_t k = 0; k < G; ++k) {
    samples[k] = s(phi + step * static_cast<double>(k));
    if (!std::isfinite(samples[k].real()) || !std::isfinite(samples[k].imag())) {
      raise(ErrorKind::domain, "symbol is not finite on the Fourier grid");
    }
  }
  detail::FftPlan plan(G, FFTW_FORWARD);
  plan.execute(samples.data(), spectrum.data());

  std::vector<complex> values(static_cast<std::size_t>(std::max<std::int64_t>(j_range.hi, 1)) + 1);
  for (std::int64_t j = j_range.lo; j <= j_range.hi; ++j) {
    values[j] = spectrum[static_cast<std::size_t>(j) % G] / static_cast<double>(G) *
                std::polar(1.0, -static_cast<double>(j) * phi);
  }
  return custom_slice(std::move(values), "Fourier coefficients of " + s.descriptor());
}

complex cayley_point(double x) { return complex(x, -0.5) / complex(x, 0.5); }

LineSymbol cayley_transfer(const CircleSymbol& s) {
  std::vector<double> singular;
  for (double angle : s.singular_angles()) {
    if (angle != 0.0) singular.push_back(-0.5 / std::tan(0.5 * angle));
  }
  return LineSymbol(
      [s](double x) {
        const complex w = cayley_point(x);
        return -w * s.at(w);
      },
      "Cayley transfer of " + s.descriptor(), singular);
}

CircleSymbol cayley_pullback(const LineSymbol& s) {
  std::vector<double> singular{0.0};
  for (double p : s.singular_points()) singular.push_back(2.0 * std::atan2(1.0, -2.0 * p));
  return CircleSymbol(
      [s](double theta) -> complex {
        if (theta == 0.0) return {};
        const double x = -0.5 / std::tan(0.5 * theta);
        return -s(x) * std::polar(1.0, -theta);
      },
      "Cayley pullback of " + s.descriptor(), singular);
}

void write_trace(std::ostream& os, const CircleSymbol& s, const std::vector<double>& thetas) {
  os << "theta,re,im\n";
  for (double theta : thetas) {
    const double w = wrap_angle(theta);
    bool skip = false;
    for (double angle : s.singular_angles()) {
      if (std::abs(wrap_angle(w - angle)) < singular_guard && !(w == 0.0 && angle == 0.0)) skip = true; // odd zero at 0 is exact
    }
    if (skip) continue;
    const complex v = s(w);
    os << detail::fmt(theta) << ',' << detail::fmt(v.real()) << ',' << detail::fmt(v.imag()) << '\n';
  }
}

void write_trace(std::ostream& os, const LineSymbol& s, const std::vector<double>& xs) {
  os << "x,re,im\n";
  for (double x : xs) {
    bool skip = false;
    for (double p : s.singular_points()) {
      if (std::abs(x - p) < singular_guard && !(x == 0.0 && p == 0.0)) skip = true;
    }
    if (skip) continue;
    const complex v = s(x);
    os << detail::fmt(x) << ',' << detail::fmt(v.real()) << ',' << detail::fmt(v.imag()) << '\n';
  }
}

} // namespace hankel
