#include <doctest.h>

#include "hankel/asymptotics.hpp"
#include "hankel/error.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <random>
#include <sstream>

using namespace hankel;

namespace {

SingularValueSeries series_of(std::vector<double> v, std::size_t dimension = 0) {
  SingularValueSeries s;
  s.values = std::move(v);
  s.meta.dimension = dimension ? dimension : s.values.size();
  return s;
}

std::vector<double> power_law(double c, double alpha, std::size_t count) {
  std::vector<double> v(count);
  for (std::size_t n = 1; n <= count; ++n) v[n - 1] = c * std::pow(static_cast<double>(n), -alpha);
  return v;
}

std::vector<double> eigen_singular_values(const DenseMatrix& m) {
  Eigen::MatrixXcd a(m.rows, m.cols);
  for (std::size_t j = 0; j < m.cols; ++j) {
    for (std::size_t i = 0; i < m.rows; ++i) a(i, j) = m(i, j);
  }
  const Eigen::VectorXd s = Eigen::BDCSVD<Eigen::MatrixXcd>(a).singularValues();
  return {s.data(), s.data() + s.size()};
}

} // namespace

TEST_CASE("fit of an exact power law") {
  const auto fit = fit_power_law(power_law(2.0, 1.0, 100), {5, 60});
  CHECK(fit.alpha_hat == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(fit.c_hat == doctest::Approx(2.0).epsilon(1e-13));
  CHECK(fit.residual_rms <= 1e-13);
  CHECK_FALSE(fit.fixed_alpha);
  CHECK(std::isnan(fit.relative_deviation()));

  const auto fixed = fit_power_law(power_law(2.0, 1.0, 100), {5, 60}, {1.0, PredictedLaw{2.5, 1.0}});
  CHECK(fixed.fixed_alpha);
  CHECK(fixed.c_hat == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(fixed.relative_deviation() == doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("fit of a corrected power law") {
  std::vector<double> v(200);
  for (std::size_t n = 1; n <= 200; ++n) v[n - 1] = std::pow(static_cast<double>(n), -0.5) * (1.0 + 1.0 / n);
  const auto fit = fit_power_law(v, {50, 200}, {0.5, {}});
  CHECK(fit.alpha_hat >= 0.49);
  CHECK(fit.alpha_hat <= 0.51);
  CHECK(fit.c_hat >= 0.98);
  CHECK(fit.c_hat <= 1.02);
  // The free intercept absorbs the slope bias of the 1/n correction.
  CHECK(fit.c_hat_free > 1.02);
}

TEST_CASE("fit under multiplicative noise") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> noise(-0.01, 0.01);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> v(200);
    for (std::size_t n = 1; n <= 200; ++n) v[n - 1] = (1.0 + noise(rng)) / static_cast<double>(n);
    const auto fit = fit_power_law(v, {20, 200});
    CHECK(std::abs(fit.alpha_hat - 1.0) <= 0.02);
  }
}

TEST_CASE("fit is scale equivariant") {
  std::vector<double> v(120);
  for (std::size_t n = 1; n <= 120; ++n) v[n - 1] = std::pow(static_cast<double>(n), -1.3) * (1.0 + 0.3 * std::sin(n));
  const auto base = fit_power_law(v, {10, 100}, {1.3, {}});
  for (double lambda : {1e-3, 0.7, 42.0}) {
    auto scaled = v;
    for (auto& x : scaled) x *= lambda;
    const auto fit = fit_power_law(scaled, {10, 100}, {1.3, {}});
    CHECK(fit.alpha_hat == doctest::Approx(base.alpha_hat).epsilon(1e-12));
    CHECK(fit.c_hat == doctest::Approx(lambda * base.c_hat).epsilon(1e-12));
    CHECK(fit.c_hat_free == doctest::Approx(lambda * base.c_hat_free).epsilon(1e-12));
  }
}

TEST_CASE("fit errors") {
  const auto v = power_law(1.0, 1.0, 50);
  auto expect = [&](IndexRange w, ErrorKind kind, const std::vector<double>& values) {
    try {
      fit_power_law(values, w);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == kind);
    }
  };
  expect({1, 20}, ErrorKind::domain, v);
  expect({2, 8}, ErrorKind::length, v);
  expect({10, 60}, ErrorKind::length, v);
  auto with_zero = v;
  with_zero[14] = 0.0;
  expect({10, 30}, ErrorKind::domain, with_zero);
}

TEST_CASE("default window and eps grid") {
  CHECK(default_window(120).lo == 12);
  CHECK(default_window(120).hi == 60);
  CHECK(default_window(40).lo == 10);
  CHECK(default_window(40).hi == 20);
  const auto grid = geometric_eps_grid(1.0, 0.5);
  CHECK(grid.front() == 1.0);
  for (std::size_t i = 1; i < grid.size(); ++i) CHECK(grid[i] == doctest::Approx(0.9 * grid[i - 1]).epsilon(1e-15));
  CHECK(grid.back() >= 0.5 * (1 - 1e-12));
  CHECK(grid.back() * 0.9 < 0.5);
  CHECK_THROWS_AS(geometric_eps_grid(1.0, 2.0), Error);
  CHECK_THROWS_AS(geometric_eps_grid(1.0, 0.5, 1.0), Error);
}

TEST_CASE("log-log slope") {
  CHECK(log_log_slope(power_law(3.0, 2.5, 40), {4, 40}) == doctest::Approx(-2.5).epsilon(1e-13));
  CHECK_THROWS_AS(log_log_slope(power_law(3.0, 2.5, 40), {4, 41}), Error);
}

TEST_CASE("self localization has zero discrepancy") {
  const auto s = series_of(power_law(1.0, 1.0, 200));
  const auto report = localization_check({s}, s, geometric_eps_grid(0.5, 0.01));
  CHECK(report.trusted_count > 0);
  CHECK(report.max_discrepancy == 0.0);
  for (std::size_t i = 1; i < report.eps_grid.size(); ++i) {
    CHECK(report.combined_counts[i] >= report.combined_counts[i - 1]);
    CHECK(report.summed_counts[i] >= report.summed_counts[i - 1]);
  }
}

TEST_CASE("trust region") {
  const auto s = series_of(power_law(1.0, 1.0, 50));
  // Counts reaching the number of computed values are not trusted.
  const auto report = localization_check({s}, s, {0.5, 0.1, 0.01});
  CHECK(report.trusted[0]);
  CHECK(report.trusted[1]);
  CHECK_FALSE(report.trusted[2]);
  CHECK(std::isnan(report.discrepancy[2]));

  TrustInputs range;
  range.count_range = IndexRange{5, 40};
  const auto ranged = localization_check({s}, s, {0.5, 0.1, 0.05}, range);
  CHECK_FALSE(ranged.trusted[0]);
  CHECK(ranged.trusted[1]);
  CHECK(ranged.trusted[2]);

  TrustInputs coarse;
  coarse.combined_coarse = series_of(power_law(0.9, 1.0, 50));
  coarse.parts_coarse = {series_of(power_law(0.9, 1.0, 50))};
  const auto unstable = localization_check({s}, s, {0.5, 0.1}, coarse);
  CHECK(unstable.trusted[0]);
  CHECK_FALSE(unstable.trusted[1]);

  CHECK_THROWS_AS(localization_check({series_of({1.0, 0.5}, 3)}, s, {0.5}), Error);
  CHECK_THROWS_AS(localization_check({s}, s, {0.1, 0.5}), Error);
}

TEST_CASE("discrepancy values") {
  const auto a = series_of({1.0, 0.8, 0.6, 0.4, 0.2, 0.1}, 6);
  const auto b = series_of({0.7, 0.3, 0.05, 0.01, 0.0, 0.0}, 6);
  const auto combined = series_of({1.0, 0.8, 0.7, 0.6, 0.55, 0.2}, 6);
  const auto report = localization_check({a, b}, combined, {0.9, 0.5});
  CHECK(report.summed_counts[0] == 1);
  CHECK(report.combined_counts[0] == 1);
  CHECK(report.summed_counts[1] == 4);
  CHECK(report.combined_counts[1] == 5);
  CHECK(report.discrepancy[1] == 0.25);
  CHECK(report.part_counts.size() == 2);
  std::ostringstream os;
  write_csv(os, report);
  CHECK(os.str() == "eps,combined,summed\n0.90000000000000002,1,1\n0.5,5,4\n");
}

TEST_CASE("block-orthogonal synthesis has the union spectrum") {
  std::vector<double> a, b;
  for (int n = 0; n < 12; ++n) a.push_back(std::pow(0.5, n));
  for (int n = 1; n <= 8; ++n) b.push_back(std::pow(1.0 / 3.0, n));
  const auto syn = block_orthogonal_synthesis({a, b}, std::nullopt, 17);
  CHECK(syn.matrix.rows == 20);
  const auto s = eigen_singular_values(syn.matrix);
  REQUIRE(s.size() == syn.union_sorted.size());
  for (std::size_t i = 0; i < s.size(); ++i) CHECK(std::abs(s[i] - syn.union_sorted[i]) <= 1e-12);

  const auto dims = syn.matrix.rows;
  const auto combined = series_of(s, dims);
  const auto report =
      localization_check({series_of(a, dims), series_of(b, dims)}, combined, geometric_eps_grid(1.5, 1e-6));
  for (std::size_t i = 0; i < report.eps_grid.size(); ++i) {
    CHECK(report.combined_counts[i] == report.summed_counts[i]);
    CHECK(report.summed_counts[i] == syn.ground_truth_count(report.eps_grid[i]));
  }
  CHECK(report.max_discrepancy == 0.0);
}

TEST_CASE("synthesis is reproducible and checks the ambient dimension") {
  const std::vector<std::vector<double>> spectra = {{1.0, 0.5}, {0.7}};
  const auto x = block_orthogonal_synthesis(spectra, CrossPerturbation{}, 3, 6);
  const auto y = block_orthogonal_synthesis(spectra, CrossPerturbation{}, 3, 6);
  CHECK(x.matrix.data == y.matrix.data);
  CHECK(x.matrix.rows == 6);
  CHECK_THROWS_AS(block_orthogonal_synthesis(spectra, std::nullopt, 3, 2), Error);
}

TEST_CASE("cross perturbation barely moves the fitted coefficient") {
  const auto a = power_law(1.0, 2.0, 120), b = power_law(0.5, 2.0, 120);
  const auto exact = block_orthogonal_synthesis({a, b}, std::nullopt, 99);
  const auto perturbed = block_orthogonal_synthesis({a, b}, CrossPerturbation{1e-3, 4.0}, 99);
  const FitOptions options{2.0, {}};
  const auto f0 = fit_power_law(eigen_singular_values(exact.matrix), {10, 50}, options);
  const auto f1 = fit_power_law(eigen_singular_values(perturbed.matrix), {10, 50}, options);
  CHECK(std::abs(f1.c_hat - f0.c_hat) <= 0.05 * f0.c_hat);
  CHECK(f1.c_hat != f0.c_hat);
}
