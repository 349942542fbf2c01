#include <doctest.h>

#include "hankel/error.hpp"
#include "hankel/operators.hpp"
#include "hankel/spectra.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

using namespace hankel;

namespace {

std::vector<complex> random_vector(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::vector<complex> v(n);
  for (auto& x : v) x = {normal(rng), normal(rng)};
  return v;
}

SequenceSlice geometric(std::size_t n) {
  std::vector<complex> g(2 * n - 1);
  for (std::size_t j = 0; j < g.size(); ++j) g[j] = std::pow(0.5, static_cast<double>(j));
  return custom_slice(std::move(g));
}

SingularValueSeries series_of(std::vector<double> v) {
  SingularValueSeries s;
  s.values = std::move(v);
  s.meta.dimension = s.values.size();
  return s;
}

Eigen::VectorXd eigen_singular_values(const DenseMatrix& m) {
  Eigen::MatrixXcd a(m.rows, m.cols);
  for (std::size_t j = 0; j < m.cols; ++j) {
    for (std::size_t i = 0; i < m.rows; ++i) a(i, j) = m(i, j);
  }
  return Eigen::JacobiSVD<Eigen::MatrixXcd>(a).singularValues();
}

} // namespace

TEST_CASE("dense SVD of the rank-one section") {
  const auto s = dense_svd(HankelSection::build(geometric(40), 40));
  CHECK(s.size() == 40);
  CHECK(std::abs(s.s(1) - 4.0 / 3.0) <= 1e-9);
  CHECK(s.s(2) <= 1e-10);
  CHECK(s.meta.method == SvdMethod::dense);
  CHECK(s.meta.dimension == 40);
}

TEST_CASE("dense SVD agrees with an independent SVD") {
  const std::size_t n = 96;
  const auto section = HankelSection::build(custom_slice(random_vector(2 * n - 1, 4)), n);
  const auto s = dense_svd(section);
  const auto ref = eigen_singular_values(section.dense());
  for (std::size_t k = 0; k < n; ++k) CHECK(std::abs(s.values[k] - ref(k)) <= 1e-12 * ref(0));
  for (std::size_t k = 1; k < n; ++k) CHECK(s.values[k] <= s.values[k - 1]);
}

TEST_CASE("Hilbert sections stay below pi") {
  double previous = 0.0;
  for (std::size_t n : {64, 256, 1024}) {
    std::vector<complex> h(2 * n - 1);
    for (std::size_t j = 0; j < h.size(); ++j) h[j] = 1.0 / (j + 1.0);
    const double s1 = dense_svd(HankelSection::build(custom_slice(std::move(h)), n)).s(1);
    CHECK(s1 > previous);
    CHECK(s1 < std::numbers::pi);
    previous = s1;
  }
}

TEST_CASE("zero section and dense cap") {
  const auto z = dense_svd(HankelSection::build(custom_slice(std::vector<complex>(15)), 8));
  for (double v : z.values) CHECK(v == 0.0);
  const auto big = HankelSection::build(geometric(64), 64);
  CHECK_THROWS_AS(dense_svd(big, 32), Error);
  try {
    dense_svd(big, 32);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::length);
  }
}

TEST_CASE("Lanczos matches dense on a random section") {
  const std::size_t n = 512;
  const auto section = HankelSection::build(custom_slice(random_vector(2 * n - 1, 77)), n);
  const auto dense = dense_svd(section);
  const auto top = lanczos_topk(section, 10, 1e-12, 1);
  REQUIRE(top.size() == 10);
  CHECK(top.meta.converged);
  CHECK(top.meta.method == SvdMethod::lanczos);
  for (std::size_t k = 1; k <= 10; ++k) CHECK(std::abs(top.s(k) - dense.s(k)) <= 1e-10 * dense.s(k));
}

TEST_CASE("Lanczos on the rank-one section") {
  const auto top = lanczos_topk(HankelSection::build(geometric(4096), 4096), 3, 1e-12, 9);
  CHECK(std::abs(top.s(1) - 4.0 / 3.0) <= 1e-9);
  CHECK(top.s(2) <= 1e-8);
  CHECK(top.s(3) <= 1e-8);
}

TEST_CASE("Lanczos on a single entry section") {
  std::vector<complex> g(15);
  g[0] = {0.0, -2.5};
  const auto top = lanczos_topk(HankelSection::build(custom_slice(g), 8), 1, 1e-12, 2);
  CHECK(std::abs(top.s(1) - 2.5) <= 1e-12);
}

TEST_CASE("Lanczos rejects k above N/4") {
  const auto section = HankelSection::build(geometric(64), 64);
  CHECK_THROWS_AS(lanczos_topk(section, 17, 1e-10, 1), Error);
  CHECK_NOTHROW(lanczos_topk(section, 16, 1e-10, 1));
}

TEST_CASE("Lanczos is deterministic and seed independent") {
  const std::size_t n = 1024;
  const auto section = HankelSection::build(model_slice(1.0, 2 * n - 2), n);
  const auto a = lanczos_topk(section, 20, 1e-11, 5), b = lanczos_topk(section, 20, 1e-11, 5);
  const auto c = lanczos_topk(section, 20, 1e-11, 6);
  CHECK(a.values == b.values);
  for (std::size_t k = 1; k <= 20; ++k) CHECK(std::abs(a.s(k) - c.s(k)) <= 1e-10 * a.s(1));
}

TEST_CASE("Lanczos flags non-convergence") {
  const std::size_t n = 256;
  // A random section has a flat spectrum, so 41 steps cannot resolve 40 values.
  const auto section = HankelSection::build(custom_slice(random_vector(2 * n - 1, 13)), n);
  const auto partial = lanczos_topk(section, 40, 1e-14, 3, 41);
  CHECK_FALSE(partial.meta.converged);
  CHECK(partial.meta.converged_count < 40);
}

TEST_CASE("counting function") {
  const auto s = series_of({3.0, 2.0, 1.0});
  CHECK(counting_function(s, 1.5) == 2);
  CHECK(counting_function(s, 3.0) == 0);
  CHECK(counting_function(s, 10.0) == 0);
  CHECK(counting_function(s, 2.0) == 1);
  CHECK(counting_function(s, 0.5) == 3);
  for (std::size_t k = 1; k <= 3; ++k) {
    CHECK(counting_function(s, s.s(k) - 1e-12) >= k);
    CHECK(counting_function(s, s.s(k)) < k);
  }
}

TEST_CASE("convergence study on the rank-one builder") {
  OperatorBuilder builder = [](std::size_t n) -> std::unique_ptr<LinearOperator> {
    return std::make_unique<HankelSection>(HankelSection::build(geometric(n), n));
  };
  StudyOptions options;
  options.seed = 3;
  const auto study = convergence_study(builder, 3, {256, 512, 1024, 2048}, options);
  REQUIRE(study.series.size() == 4);
  for (double d : study.max_drift) CHECK(d <= 1e-9);
  CHECK(study.stabilized);
  CHECK(study.monotone);
  CHECK(study.series[0].meta.method == SvdMethod::dense);
  CHECK(study.series[3].meta.method == SvdMethod::lanczos);
}

TEST_CASE("convergence study is monotone and thread independent") {
  OperatorBuilder builder = [](std::size_t n) -> std::unique_ptr<LinearOperator> {
    return std::make_unique<HankelSection>(HankelSection::build(model_slice(1.0, 2 * n - 2), n));
  };
  StudyOptions options;
  options.seed = 11;
  options.dense_threshold = 512;
  const std::vector<std::size_t> dims = {256, 512, 1024, 2048};
  const auto one = convergence_study(builder, 24, dims, options);
  options.threads = 3;
  const auto three = convergence_study(builder, 24, dims, options);
  CHECK(one.monotone);
  for (std::size_t i = 0; i < dims.size(); ++i) CHECK(one.series[i].values == three.series[i].values);
  for (std::size_t i = 1; i < dims.size(); ++i) {
    for (std::size_t k = 1; k <= 24; ++k) CHECK(one.series[i].s(k) >= one.series[i - 1].s(k) * (1 - 1e-10));
  }
  // Drift shrinks as N grows.
  CHECK(one.max_drift.back() < one.max_drift.front());
  CHECK_THROWS_AS(convergence_study(builder, 4, {256}, options), Error);
  CHECK_THROWS_AS(convergence_study(builder, 4, {512, 256}, options), Error);
}

TEST_CASE("modulation leaves the dense spectrum unchanged") {
  const std::size_t n = 128;
  const auto h = custom_slice(random_vector(2 * n - 1, 12));
  const auto a = dense_svd(HankelSection::build(h, n));
  const auto b = dense_svd(HankelSection::build(modulate(h, std::polar(1.0, -0.7)), n));
  for (std::size_t k = 0; k < n; ++k) CHECK(std::abs(a.values[k] - b.values[k]) <= 1e-12 * a.values[0]);
}

TEST_CASE("singular vector mass") {
  DenseMatrix m(4, 4);
  m(0, 0) = 3.0;
  m(3, 3) = 1.0;
  const auto mass = singular_vector_mass(m, 2, {false, false, false, true});
  CHECK(mass[0] <= 1e-15);
  CHECK(std::abs(mass[1] - 1.0) <= 1e-15);
}

TEST_CASE("series CSV") {
  const auto s = series_of({2.0, 0.5});
  std::ostringstream plain;
  write_csv(plain, s);
  CHECK(plain.str() == "n,s_n,n^alpha*s_n,reference,relative_gap\n1,2,,,\n2,0.5,,,\n");
  std::ostringstream law;
  write_csv(law, s, PredictedLaw{2.0, 1.0});
  CHECK(law.str() == "n,s_n,n^alpha*s_n,reference,relative_gap\n1,2,2,2,0\n2,0.5,1,1,-0.5\n");
}
