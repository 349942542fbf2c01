#include "hankel/sequences.hpp"

#include "detail/format.hpp"
#include "detail/log_power.hpp"
#include "hankel/error.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

namespace hankel {

namespace {

bool finite(complex z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

void check_unit(complex zeta) {
  if (std::abs(std::abs(zeta) - 1.0) > 1e-12) raise(ErrorKind::domain, "zeta must lie on the unit circle");
}

// zeta^-j by repeated squaring keeps the phase error O(log j) ulps.
complex inverse_power(complex zeta, std::int64_t j) {
  complex base = std::conj(zeta) / std::norm(zeta);
  complex result{1.0, 0.0};
  while (j > 0) {
    if (j & 1) result *= base;
    base *= base;
    j >>= 1;
  }
  return result;
}

} // namespace

SequenceSlice::SequenceSlice(std::vector<complex> values, SequenceSource source)
    : values_(std::move(values)), source_(std::move(source)) {
  if (values_.size() < 2) raise(ErrorKind::length, "a sequence slice needs at least h(0), h(1)");
  for (std::size_t j = 0; j < values_.size(); ++j) {
    if (!finite(values_[j])) {
      raise(ErrorKind::domain, "non-finite sequence entry at j = " + std::to_string(j));
    }
  }
}

double model_sequence(double alpha, std::int64_t j) {
  if (j < 2) return 0.0;
  const double t = static_cast<double>(j);
  return 1.0 / t * std::pow(std::log(t), -alpha);
}

double model_difference(double alpha, int m, std::int64_t j) {
  if (m < 0 || j < 0) raise(ErrorKind::domain, "model_difference needs m >= 0 and j >= 0");
  if (m == 0) return model_sequence(alpha, j);
  if (j >= std::max<std::int64_t>(32, 8 * static_cast<std::int64_t>(m) + 1)) {
    return detail::log_power_difference(static_cast<double>(j), alpha, m);
  }
  std::vector<double> d(m + 1);
  for (int k = 0; k <= m; ++k) d[k] = model_sequence(alpha, j + k);
  for (int pass = 0; pass < m; ++pass) {
    for (int k = 0; k < m - pass; ++k) d[k] = d[k + 1] - d[k];
  }
  return d[0];
}

namespace {

double smooth_step_phi(double s) { return s > 0.0 ? std::exp(-1.0 / s) : 0.0; }

// C-infinity step: 0 for s <= 0, 1 for s >= 1.
double smooth_step(double s) {
  if (s <= 0.0) return 0.0;
  if (s >= 1.0) return 1.0;
  const double a = smooth_step_phi(s);
  const double b = smooth_step_phi(1.0 - s);
  return a / (a + b);
}

double smooth_step_derivative(double s) {
  if (s <= 0.0 || s >= 1.0) return 0.0;
  const double a = smooth_step_phi(s);
  const double b = smooth_step_phi(1.0 - s);
  const double da = a / (s * s);
  const double db = b / ((1.0 - s) * (1.0 - s));
  return (da * b + a * db) / ((a + b) * (a + b));
}

} // namespace

double cutoff_zero(double t, const Cutoffs& c) {
  return 1.0 - smooth_step((std::abs(t) - c.c1) / (c.c2 - c.c1));
}

double cutoff_infinity(double t, const Cutoffs& c) {
  return smooth_step((std::abs(t) - c.C1) / (c.C2 - c.C1));
}

double cutoff_zero_derivative(double t, const Cutoffs& c) {
  const double w = c.c2 - c.c1;
  return -smooth_step_derivative((t - c.c1) / w) / w;
}

double cutoff_infinity_derivative(double t, const Cutoffs& c) {
  const double w = c.C2 - c.C1;
  return smooth_step_derivative((t - c.C1) / w) / w;
}

double model_kernel(LineKind kind, double alpha, double t, const Cutoffs& c) {
  if (!(t > 0.0)) return 0.0;
  if (kind == LineKind::zero) {
    if (t >= c.c2) return 0.0;
    return cutoff_zero(t, c) / t * std::pow(-std::log(t), -alpha);
  }
  if (t <= c.C1) return 0.0;
  return cutoff_infinity(t, c) / t * std::pow(std::log(t), -alpha);
}

double model_kernel_derivative(LineKind kind, double alpha, double t, const Cutoffs& c) {
  if (!(t > 0.0)) return 0.0;
  if (kind == LineKind::zero) {
    if (t >= c.c2) return 0.0;
    const double ell = -std::log(t);
    const double base = std::pow(ell, -alpha) / t;
    const double dbase = (-1.0 + alpha / ell) * base / t;
    return cutoff_zero_derivative(t, c) * base + cutoff_zero(t, c) * dbase;
  }
  if (t <= c.C1) return 0.0;
  const double L = std::log(t);
  const double base = std::pow(L, -alpha) / t;
  const double dbase = (-1.0 - alpha / L) * base / t;
  return cutoff_infinity_derivative(t, c) * base + cutoff_infinity(t, c) * dbase;
}

ErrorSequence power_error_term(complex scale, double power, double log_power) {
  return [=](std::int64_t j) -> complex {
    if (j < 2) return {};
    const double t = static_cast<double>(j);
    return scale * (std::pow(t, -power) * std::pow(std::log(t), -log_power));
  };
}

complex oscillating_sequence(const DiscreteModel& model, const std::vector<ErrorSequence>& errors,
                             std::int64_t j) {
  if (j < 0) raise(ErrorKind::domain, "sequence index must be nonnegative");
  if (!errors.empty() && errors.size() != model.terms.size()) {
    raise(ErrorKind::length, "error terms must be absent or given per model term");
  }
  const double q = model_sequence(model.order.alpha, j);
  complex sum{};
  for (std::size_t l = 0; l < model.terms.size(); ++l) {
    complex value = model.terms[l].b * q;
    if (!errors.empty() && errors[l]) value += errors[l](j);
    if (value != complex{}) sum += value * inverse_power(model.terms[l].zeta, j);
  }
  return sum;
}

SequenceSlice model_slice(double alpha, std::int64_t last) {
  if (last < 1) raise(ErrorKind::length, "slice must extend to j >= 1");
  std::vector<complex> values(static_cast<std::size_t>(last) + 1);
  for (std::int64_t j = 0; j <= last; ++j) values[j] = model_sequence(alpha, j);
  std::ostringstream os;
  os << "q(j), alpha = " << alpha;
  return SequenceSlice(std::move(values), {SequenceSource::Kind::model, os.str()});
}

SequenceSlice oscillating_slice(const DiscreteModel& model, const std::vector<ErrorSequence>& errors,
                                std::int64_t last) {
  model.validate();
  if (last < 1) raise(ErrorKind::length, "slice must extend to j >= 1");
  std::vector<complex> values(static_cast<std::size_t>(last) + 1);
  for (std::int64_t j = 0; j <= last; ++j) values[j] = oscillating_sequence(model, errors, j);
  std::ostringstream os;
  os << "oscillating model, alpha = " << model.order.alpha << ", " << model.terms.size() << " term(s)";
  if (!errors.empty()) os << " with error terms";
  return SequenceSlice(std::move(values), {SequenceSource::Kind::model, os.str()});
}

SequenceSlice custom_slice(std::vector<complex> values, std::string description) {
  return SequenceSlice(std::move(values), {SequenceSource::Kind::custom, std::move(description)});
}

SequenceSlice iterated_difference(const SequenceSlice& h, int m) {
  if (m < 0) raise(ErrorKind::domain, "difference order must be nonnegative");
  if (h.size() < static_cast<std::size_t>(m) + 2) {
    raise(ErrorKind::length, "slice too short for " + std::to_string(m) + " differences");
  }
  std::vector<complex> d = h.values();
  for (int pass = 0; pass < m; ++pass) {
    for (std::size_t k = 0; k + 1 < d.size(); ++k) d[k] = d[k + 1] - d[k];
    d.pop_back();
  }
  auto source = h.source();
  if (m > 0) source.description += ", difference order " + std::to_string(m);
  return SequenceSlice(std::move(d), std::move(source));
}

SequenceSlice modulate(const SequenceSlice& h, complex zeta) {
  check_unit(zeta);
  std::vector<complex> out(h.size());
  const complex step = std::conj(zeta) / std::norm(zeta);
  complex phase{1.0, 0.0};
  for (std::size_t j = 0; j < h.size(); ++j) {
    // Re-anchor periodically so the phase does not drift over long slices.
    if (j % 1024 == 0) phase = inverse_power(zeta, static_cast<std::int64_t>(j));
    out[j] = phase * h[j];
    phase *= step;
  }
  auto source = h.source();
  source.description += ", modulated";
  return SequenceSlice(std::move(out), std::move(source));
}

DecayCertificate decay_certificate(const SequenceSlice& g, double alpha, int m, IndexRange window,
                                   CertificateThresholds thresholds) {
  check_alpha(alpha);
  if (m < 0) raise(ErrorKind::domain, "difference order must be nonnegative");
  if (window.lo < 2) raise(ErrorKind::domain, "certificate window must start at j >= 2");
  if (window.hi < window.lo + 3) raise(ErrorKind::length, "certificate window needs at least 4 points");
  const auto d = iterated_difference(g, m);
  if (window.hi > d.last_index()) {
    raise(ErrorKind::length, "certificate window exceeds the slice after " + std::to_string(m) +
                                 " differences");
  }

  DecayCertificate cert;
  cert.window = window;
  cert.alpha = alpha;
  cert.m = m;
  cert.thresholds = thresholds;
  for (std::int64_t j = window.lo; j <= window.hi; ++j) {
    const double t = static_cast<double>(j);
    cert.j.push_back(j);
    cert.r.push_back(std::abs(d[j]) * std::pow(t, 1.0 + m) * std::pow(std::log(t), alpha));
  }

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int count = 0;
  for (std::size_t i = 0; i < cert.r.size(); ++i) {
    if (!(cert.r[i] > 0.0)) continue;
    const double x = std::log(std::log(static_cast<double>(cert.j[i])));
    const double y = std::log(cert.r[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++count;
  }
  const double denom = count * sxx - sx * sx;
  cert.slope = (count >= 2 && denom > 0.0) ? (count * sxy - sx * sy) / denom : 0.0;

  const std::size_t quarter = std::max<std::size_t>(1, cert.r.size() / 4);
  cert.first_quartile_max = *std::max_element(cert.r.begin(), cert.r.begin() + quarter);
  cert.last_quartile_max = *std::max_element(cert.r.end() - quarter, cert.r.end());

  const bool vanishing = cert.first_quartile_max == 0.0 && cert.last_quartile_max == 0.0;
  cert.pass = vanishing || (count >= 2 && cert.slope <= -thresholds.delta) ||
              cert.last_quartile_max < thresholds.quartile_ratio * cert.first_quartile_max;
  return cert;
}

void write_csv(std::ostream& os, const SequenceSlice& h) {
  os << "j,re,im\n";
  for (std::size_t j = 0; j < h.size(); ++j) {
    os << j << ',' << detail::fmt(h[j].real()) << ',' << detail::fmt(h[j].imag()) << '\n';
  }
}

} // namespace hankel
