#include "hankel/model.hpp"

#include "hankel/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace hankel {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
  case ErrorKind::domain: return "domain error";
  case ErrorKind::model: return "model error";
  case ErrorKind::length: return "length error";
  case ErrorKind::convergence: return "convergence error";
  case ErrorKind::validation: return "validation error";
  case ErrorKind::resolution: return "resolution error";
  case ErrorKind::io: return "i/o error";
  case ErrorKind::internal: return "internal error";
  }
  return "error";
}

void raise(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

void check_alpha(double alpha) {
  if (!std::isfinite(alpha) || alpha < alpha_min || alpha > alpha_max) {
    std::ostringstream os;
    os << "alpha = " << alpha << " outside [" << alpha_min << ", " << alpha_max << "]";
    raise(ErrorKind::domain, os.str());
  }
}

AsymptoticOrder AsymptoticOrder::from_alpha(double alpha) {
  check_alpha(alpha);
  return {alpha, 1.0 / alpha, hankel::smoothing_order(alpha)};
}

int smoothing_order(double alpha) {
  check_alpha(alpha);
  return alpha >= 0.5 ? static_cast<int>(std::floor(alpha)) + 1 : 0;
}

double v_coefficient(double alpha) {
  check_alpha(alpha);
  const double x = 1.0 / (2.0 * alpha);
  const double log_beta = std::lgamma(x) + std::lgamma(0.5) - std::lgamma(x + 0.5);
  const double log_v = -alpha * std::numbers::ln2 +
                       (1.0 - 2.0 * alpha) * std::log(std::numbers::pi) + alpha * log_beta;
  return std::exp(log_v);
}

double weyl_reference(int m, double t0, std::int64_t n) {
  if (m < 0 || !(t0 > 0.0) || n < 1) {
    raise(ErrorKind::domain, "weyl_reference needs m >= 0, t0 > 0, n >= 1");
  }
  const double log_value = std::lgamma(m + 1.0) + (m + 1) * std::log(t0) -
                           (m + 1) * std::log(std::numbers::pi * static_cast<double>(n));
  return std::exp(log_value);
}

namespace {

void check_order(const AsymptoticOrder& order) {
  check_alpha(order.alpha);
  if (std::abs(order.p * order.alpha - 1.0) > 1e-15 ||
      order.smoothing_order != hankel::smoothing_order(order.alpha)) {
    raise(ErrorKind::model, "inconsistent asymptotic order (need p = 1/alpha, M = M(alpha))");
  }
}

bool finite(complex z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

double power_sum(double alpha, const std::vector<double>& magnitudes) {
  double sum = 0.0;
  for (double mag : magnitudes) sum += std::pow(mag, 1.0 / alpha);
  return sum;
}

// (sum |b|^(1/alpha))^alpha, returning |b| itself when only one term is nonzero.
double lp_combine(double alpha, const std::vector<double>& magnitudes) {
  std::size_t nonzero = 0;
  double single = 0.0;
  for (double mag : magnitudes) {
    if (mag != 0.0) {
      ++nonzero;
      single = mag;
    }
  }
  if (nonzero <= 1) return single;
  return std::pow(power_sum(alpha, magnitudes), alpha);
}

} // namespace

void DiscreteModel::validate() const {
  check_order(order);
  if (terms.empty()) raise(ErrorKind::model, "discrete model needs at least one term");
  for (std::size_t l = 0; l < terms.size(); ++l) {
    const auto& term = terms[l];
    if (!finite(term.zeta) || !finite(term.b)) raise(ErrorKind::model, "non-finite model term");
    if (std::abs(std::abs(term.zeta) - 1.0) > 1e-12) {
      raise(ErrorKind::domain, "zeta must lie on the unit circle");
    }
    for (std::size_t j = 0; j < l; ++j) {
      if (std::abs(terms[j].zeta - term.zeta) < 1e-12) {
        raise(ErrorKind::model, "zeta values must be pairwise distinct");
      }
    }
  }
}

void Cutoffs::validate() const {
  if (!(0.0 < c1 && c1 < c2 && c2 < 1.0 && 1.0 < C1 && C1 < C2 && std::isfinite(C2))) {
    raise(ErrorKind::model, "cutoffs must satisfy 0 < c1 < c2 < 1 < C1 < C2");
  }
}

void ContinuousModel::validate() const {
  check_order(order);
  cutoffs.validate();
  if (!finite(b0)) raise(ErrorKind::model, "non-finite b0");
  for (std::size_t l = 0; l < terms.size(); ++l) {
    if (!std::isfinite(terms[l].a) || !finite(terms[l].b)) {
      raise(ErrorKind::model, "non-finite tail term");
    }
    for (std::size_t j = 0; j < l; ++j) {
      if (terms[j].a == terms[l].a) raise(ErrorKind::model, "frequencies a_l must be pairwise distinct");
    }
  }
  if (local_bump) {
    const auto& bump = *local_bump;
    if (!(bump.t0 > 0.0) || !std::isfinite(bump.t0) || bump.m < 0 || !finite(bump.b)) {
      raise(ErrorKind::model, "local bump needs t0 > 0 and m >= 0");
    }
    if (b0 != complex{}) {
      raise(ErrorKind::model, "a local bump requires b0 = 0 (both are singular at infinity)");
    }
  }
}

PredictedLaw predicted_coefficient(const DiscreteModel& model) {
  model.validate();
  const double alpha = model.order.alpha;
  std::vector<double> mags;
  for (const auto& term : model.terms) mags.push_back(std::abs(term.b));
  return {v_coefficient(alpha) * lp_combine(alpha, mags), alpha};
}

PredictedLaw predicted_coefficient(const ContinuousModel& model) {
  model.validate();
  const double alpha = model.order.alpha;
  std::vector<double> mags;
  for (const auto& term : model.terms) mags.push_back(std::abs(term.b));

  if (!model.local_bump) {
    mags.push_back(std::abs(model.b0));
    return {v_coefficient(alpha) * lp_combine(alpha, mags), alpha};
  }

  const auto& bump = *model.local_bump;
  if (std::abs(alpha - (bump.m + 1)) > 1e-12) {
    std::ostringstream os;
    os << "local bump of order m = " << bump.m << " needs alpha = m+1 = " << bump.m + 1
       << " (got alpha = " << alpha << "); only then the bump and the tail contribute at the same order";
    raise(ErrorKind::model, os.str());
  }
  const double factorial = std::tgamma(bump.m + 1.0);
  const double local = bump.t0 / std::numbers::pi * std::pow(factorial * std::abs(bump.b), 1.0 / alpha);
  const double tail = std::pow(v_coefficient(alpha), 1.0 / alpha) * power_sum(alpha, mags);
  return {std::pow(local + tail, alpha), alpha};
}

namespace tolerance {
bool relative_close(double value, double reference, double rel) {
  return std::abs(value - reference) <= rel * std::max(std::abs(reference), 1e-300);
}
} // namespace tolerance

} // namespace hankel
