#include "hankel/asymptotics.hpp"

#include "detail/format.hpp"
#include "hankel/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>

namespace hankel {

double AsymptoticFit::relative_deviation() const {
  if (!predicted || !(predicted->c > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  return std::abs(c_hat - predicted->c) / predicted->c;
}

AsymptoticFit fit_power_law(const std::vector<double>& values, IndexRange window, const FitOptions& options) {
  if (window.lo < 2) raise(ErrorKind::domain, "fit window must start at n >= 2");
  if (window.size() < 8) raise(ErrorKind::length, "fit window needs at least 8 points");
  if (window.hi > static_cast<std::int64_t>(values.size())) {
    std::ostringstream os;
    os << "fit window [" << window.lo << ", " << window.hi << "] exceeds the " << values.size() << " computed values";
    raise(ErrorKind::length, os.str());
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const auto count = static_cast<double>(window.size());
  for (std::int64_t n = window.lo; n <= window.hi; ++n) {
    const double s = values[n - 1];
    if (!(s > 0.0)) {
      std::ostringstream os;
      os << "s_" << n << " = " << s << " is not positive; cannot fit in log scale";
      raise(ErrorKind::domain, os.str());
    }
    const double x = std::log(static_cast<double>(n));
    const double y = std::log(s);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double slope = (count * sxy - sx * sy) / (count * sxx - sx * sx);
  const double intercept = (sy - slope * sx) / count;

  AsymptoticFit fit;
  fit.window = window;
  fit.alpha_hat = -slope;
  fit.c_hat_free = std::exp(intercept);
  fit.c_hat = fit.c_hat_free;
  fit.predicted = options.predicted;

  double rss = 0.0;
  for (std::int64_t n = window.lo; n <= window.hi; ++n) {
    const double r = std::log(values[n - 1]) - (intercept + slope * std::log(static_cast<double>(n)));
    rss += r * r;
  }
  fit.residual_rms = std::sqrt(rss / count);

  if (options.fixed_alpha) {
    double sum = 0.0;
    for (std::int64_t n = window.lo; n <= window.hi; ++n) {
      sum += std::pow(static_cast<double>(n), *options.fixed_alpha) * values[n - 1];
    }
    fit.c_hat = sum / count;
    fit.fixed_alpha = true;
  }
  return fit;
}

AsymptoticFit fit_power_law(const SingularValueSeries& series, IndexRange window, const FitOptions& options) {
  return fit_power_law(series.values, window, options);
}

IndexRange default_window(std::size_t k) {
  return {static_cast<std::int64_t>(std::max<std::size_t>(10, k / 10)), static_cast<std::int64_t>(k / 2)};
}

double log_log_slope(const std::vector<double>& values, IndexRange window) {
  if (window.lo < 1 || window.hi <= window.lo || window.hi > static_cast<std::int64_t>(values.size())) {
    raise(ErrorKind::length, "slope window must lie inside the series and hold two points");
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  double count = 0;
  for (std::int64_t n = window.lo; n <= window.hi; ++n) {
    const double s = values[n - 1];
    if (!(s > 0.0)) raise(ErrorKind::domain, "slope needs positive values");
    const double x = std::log(static_cast<double>(n)), y = std::log(s);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    count += 1;
  }
  return (count * sxy - sx * sy) / (count * sxx - sx * sx);
}

std::vector<double> geometric_eps_grid(double hi, double lo, double ratio) {
  if (!(hi > 0.0) || !(lo > 0.0) || !(lo <= hi) || !(ratio > 0.0 && ratio < 1.0)) {
    raise(ErrorKind::domain, "eps grid needs 0 < lo <= hi and ratio in (0, 1)");
  }
  std::vector<double> grid;
  for (double eps = hi; eps >= lo * (1.0 - 1e-12); eps *= ratio) grid.push_back(eps);
  return grid;
}

LocalizationReport localization_check(const std::vector<SingularValueSeries>& parts,
                                      const SingularValueSeries& combined, const std::vector<double>& eps_grid,
                                      const TrustInputs& trust) {
  if (parts.empty()) raise(ErrorKind::validation, "localization check needs at least one part");
  for (const auto& p : parts) {
    if (p.meta.dimension != combined.meta.dimension) {
      raise(ErrorKind::validation, "parts and combined spectra must come from sections of equal dimension");
    }
  }
  if (!trust.parts_coarse.empty() && trust.parts_coarse.size() != parts.size()) {
    raise(ErrorKind::validation, "coarse spectra must be given for every part");
  }

  LocalizationReport report;
  report.eps_grid = eps_grid;
  report.part_counts.resize(parts.size());
  for (std::size_t e = 0; e < eps_grid.size(); ++e) {
    const double eps = eps_grid[e];
    if (e > 0 && !(eps < eps_grid[e - 1])) raise(ErrorKind::validation, "eps grid must be decreasing");
    bool trusted = true;
    std::size_t summed = 0;
    for (std::size_t l = 0; l < parts.size(); ++l) {
      const std::size_t c = counting_function(parts[l], eps);
      report.part_counts[l].push_back(c);
      summed += c;
      if (c >= parts[l].size()) trusted = false;
      if (!trust.parts_coarse.empty() && counting_function(trust.parts_coarse[l], eps) != c) trusted = false;
    }
    if (trust.count_range && (static_cast<std::int64_t>(summed) < trust.count_range->lo ||
                              static_cast<std::int64_t>(summed) > trust.count_range->hi)) {
      trusted = false;
    }
    const std::size_t comb = counting_function(combined, eps);
    if (comb >= combined.size()) trusted = false;
    if (trust.combined_coarse && counting_function(*trust.combined_coarse, eps) != comb) trusted = false;

    report.combined_counts.push_back(comb);
    report.summed_counts.push_back(summed);
    report.trusted.push_back(trusted);
    double d = std::numeric_limits<double>::quiet_NaN();
    if (trusted) {
      d = summed == 0 ? (comb == 0 ? 0.0 : std::numeric_limits<double>::infinity())
                      : std::abs(static_cast<double>(comb) - static_cast<double>(summed)) / static_cast<double>(summed);
      report.max_discrepancy = std::max(report.max_discrepancy, d);
      ++report.trusted_count;
    }
    report.discrepancy.push_back(d);
  }
  return report;
}

std::size_t Synthesis::ground_truth_count(double eps) const {
  std::size_t total = 0;
  for (const auto& block : blocks) total += std::count_if(block.begin(), block.end(), [eps](double s) { return s > eps; });
  return total;
}

namespace {

Eigen::MatrixXd random_orthogonal(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Eigen::MatrixXd g(n, n);
  for (Eigen::Index j = 0; j < g.cols(); ++j) {
    for (Eigen::Index i = 0; i < g.rows(); ++i) g(i, j) = normal(rng);
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  // Fix column signs by R's diagonal so Q is Haar distributed.
  const Eigen::MatrixXd& r = qr.matrixQR();
  for (Eigen::Index j = 0; j < q.cols(); ++j) {
    if (r(j, j) < 0) q.col(j) *= -1.0;
  }
  return q;
}

} // namespace

Synthesis block_orthogonal_synthesis(const std::vector<std::vector<double>>& spectra,
                                     const std::optional<CrossPerturbation>& perturbation, std::uint64_t seed,
                                     std::size_t ambient_dimension) {
  std::size_t total = 0;
  for (const auto& s : spectra) {
    for (double v : s) {
      if (!(v >= 0.0) || !std::isfinite(v)) raise(ErrorKind::domain, "block spectra must be finite and nonnegative");
    }
    total += s.size();
  }
  if (total == 0) raise(ErrorKind::length, "block spectra are empty");
  const std::size_t D = ambient_dimension == 0 ? total : ambient_dimension;
  if (total > D) {
    std::ostringstream os;
    os << "blocks need " << total << " dimensions but the ambient dimension is " << D;
    raise(ErrorKind::length, os.str());
  }

  std::mt19937_64 rng(seed);
  const Eigen::MatrixXd U = random_orthogonal(D, rng);
  const Eigen::MatrixXd V = random_orthogonal(D, rng);
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(D, D);
  std::size_t offset = 0;
  for (const auto& s : spectra) {
    for (std::size_t i = 0; i < s.size(); ++i) {
      A.noalias() += s[i] * U.col(offset + i) * V.col(offset + i).transpose();
    }
    offset += s.size();
  }
  if (perturbation) {
    const Eigen::MatrixXd X = random_orthogonal(D, rng);
    const Eigen::MatrixXd Y = random_orthogonal(D, rng);
    for (std::size_t n = 1; n <= D; ++n) {
      const double value = perturbation->scale * std::pow(static_cast<double>(n), -perturbation->power);
      A.noalias() += value * X.col(n - 1) * Y.col(n - 1).transpose();
    }
  }

  Synthesis out;
  out.blocks = spectra;
  for (const auto& s : spectra) out.union_sorted.insert(out.union_sorted.end(), s.begin(), s.end());
  std::sort(out.union_sorted.begin(), out.union_sorted.end(), std::greater<>());
  out.matrix = DenseMatrix(D, D);
  for (std::size_t j = 0; j < D; ++j) {
    for (std::size_t i = 0; i < D; ++i) out.matrix(i, j) = A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
  return out;
}

void write_csv(std::ostream& os, const LocalizationReport& report) {
  os << "eps,combined,summed\n";
  for (std::size_t e = 0; e < report.eps_grid.size(); ++e) {
    os << detail::fmt(report.eps_grid[e]) << ',' << report.combined_counts[e] << ',' << report.summed_counts[e] << '\n';
  }
}

} // namespace hankel
