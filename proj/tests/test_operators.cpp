#include <doctest.h>

#include "hankel/error.hpp"
#include "hankel/operators.hpp"
#include "hankel/spectra.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

using namespace hankel;

namespace {

constexpr double pi = std::numbers::pi;

std::vector<complex> random_vector(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::vector<complex> v(n);
  for (auto& x : v) x = {normal(rng), normal(rng)};
  return v;
}

Eigen::MatrixXcd to_eigen(const DenseMatrix& m) {
  Eigen::MatrixXcd a(m.rows, m.cols);
  for (std::size_t j = 0; j < m.cols; ++j) {
    for (std::size_t i = 0; i < m.rows; ++i) a(i, j) = m(i, j);
  }
  return a;
}

Eigen::VectorXd eigen_singular_values(const Eigen::MatrixXcd& a) { return Eigen::BDCSVD<Eigen::MatrixXcd>(a).singularValues(); }

Eigen::MatrixXcd hankel_matrix(const std::vector<complex>& gen, std::size_t n) {
  Eigen::MatrixXcd a(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = 0; k < n; ++k) a(j, k) = gen[j + k];
  }
  return a;
}

double norm1(const std::vector<complex>& u) {
  double s = 0.0;
  for (const auto& x : u) s += std::abs(x);
  return s;
}

double norm_inf(const std::vector<complex>& u) {
  double s = 0.0;
  for (const auto& x : u) s = std::max(s, std::abs(x));
  return s;
}

} // namespace

TEST_CASE("section examples") {
  std::vector<complex> delta(5);
  delta[0] = 1.0;
  const auto d = HankelSection::build(custom_slice(delta), 3).dense();
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) CHECK(d(i, j) == (i == 0 && j == 0 ? complex(1.0) : complex{}));
  }
  const auto ramp = HankelSection::build(custom_slice({0.0, 1.0, 2.0}), 2).dense();
  CHECK(ramp(0, 0) == 0.0);
  CHECK(ramp(0, 1) == 1.0);
  CHECK(ramp(1, 0) == 1.0);
  CHECK(ramp(1, 1) == 2.0);
  CHECK_THROWS_AS(HankelSection::build(custom_slice({0.0, 1.0, 2.0}), 3), Error);
}

TEST_CASE("section entries are gen(j+k)") {
  const auto gen = random_vector(127, 3);
  const auto section = HankelSection::build(custom_slice(gen), 64);
  const auto d = section.dense();
  CHECK(section.embedding_size() == 128);
  for (std::size_t j = 0; j < 64; ++j) {
    for (std::size_t k = 0; k < 64; ++k) {
      CHECK(section.entry(j, k) == gen[j + k]);
      CHECK(std::abs(d(j, k) - gen[j + k]) <= 1e-13 * norm_inf(gen));
    }
  }
}

TEST_CASE("matvec examples") {
  std::vector<complex> geometric(79);
  for (std::size_t j = 0; j < geometric.size(); ++j) geometric[j] = std::pow(0.5, static_cast<double>(j));
  const auto section = HankelSection::build(custom_slice(geometric), 40);
  std::vector<complex> e0(40);
  e0[0] = 1.0;
  const auto out = hankel_matvec(section, e0);
  for (std::size_t j = 0; j < 40; ++j) CHECK(std::abs(out[j] - geometric[j]) <= 1e-15);
  CHECK_THROWS_AS(hankel_matvec(section, std::vector<complex>(39)), Error);
}

TEST_CASE("FFT matvec agrees with the dense product") {
  for (std::size_t n = 2; n <= 256; n *= 2) {
    CAPTURE(n);
    const auto gen = random_vector(2 * n - 1, n);
    const auto u = random_vector(n, 1000 + n);
    const auto section = HankelSection::build(custom_slice(gen), n);
    const auto a = hankel_matrix(gen, n);
    const Eigen::VectorXcd eu = Eigen::Map<const Eigen::VectorXcd>(u.data(), n);
    const Eigen::VectorXcd ref = a * eu, ref_adj = a.adjoint() * eu;
    const auto fast = section.apply(u), fast_adj = section.apply_adjoint(u);
    const double scale = norm_inf(gen) * norm1(u);
    for (std::size_t j = 0; j < n; ++j) {
      CHECK(std::abs(fast[j] - ref(j)) <= 1e-12 * scale);
      CHECK(std::abs(fast_adj[j] - ref_adj(j)) <= 1e-12 * scale);
    }
  }
}

TEST_CASE("adjoint identity") {
  const std::size_t n = 100;
  const auto section = HankelSection::build(custom_slice(random_vector(2 * n - 1, 8)), n);
  const auto u = random_vector(n, 9), v = random_vector(n, 10);
  const auto au = section.apply(u), av = section.apply_adjoint(v);
  complex lhs{}, rhs{};
  for (std::size_t j = 0; j < n; ++j) {
    lhs += std::conj(v[j]) * au[j];
    rhs += std::conj(av[j]) * u[j];
  }
  CHECK(std::abs(lhs - rhs) <= 1e-11 * std::abs(lhs));
}

TEST_CASE("modulation commutes with sections") {
  const std::size_t n = 48;
  const auto gen = random_vector(2 * n - 1, 21);
  const complex zeta = std::polar(1.0, 2.2);
  const auto h = custom_slice(gen);
  const auto a = HankelSection::build(h, n).dense();
  const auto b = HankelSection::build(modulate(h, zeta), n).dense();
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = 0; k < n; ++k) {
      const complex expected = std::pow(zeta, -static_cast<int>(j)) * a(j, k) * std::pow(zeta, -static_cast<int>(k));
      CHECK(std::abs(b(j, k) - expected) <= 1e-12 * std::abs(a(j, k)) + 1e-15);
    }
  }
}

TEST_CASE("truncation monotonicity") {
  const auto h = model_slice(1.0, 2 * 256);
  double previous[3] = {0.0, 0.0, 0.0};
  for (std::size_t n : {32, 64, 128, 256}) {
    const auto s = eigen_singular_values(to_eigen(HankelSection::build(h, n).dense()));
    for (int k = 0; k < 3; ++k) {
      CHECK(s(k) >= previous[k] - 1e-14);
      previous[k] = s(k);
    }
  }
}

TEST_CASE("Gauss-Legendre rule") {
  for (std::size_t n : {1, 2, 5, 10, 17}) {
    std::vector<double> x, w;
    gauss_legendre(n, x, w);
    CHECK(std::is_sorted(x.begin(), x.end()));
    for (double wi : w) CHECK(wi > 0.0);
    for (std::size_t p = 0; p < 2 * n; ++p) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += w[i] * std::pow(x[i], static_cast<double>(p));
      const double exact = p % 2 ? 0.0 : 2.0 / (p + 1.0);
      CAPTURE(n);
      CAPTURE(p);
      CHECK(std::abs(s - exact) <= 1e-14);
    }
  }
}

TEST_CASE("bump reference values") {
  const auto r0 = reference_singular_values_bump(0, 1.0, 2);
  CHECK(r0[0] == doctest::Approx(0.636620).epsilon(1e-6));
  CHECK(r0[1] == doctest::Approx(0.212207).epsilon(1e-6));
  const auto r1 = reference_singular_values_bump(1, 1.0, 1);
  CHECK(r1[0] == doctest::Approx(1.0 / (1.8751041 * 1.8751041)).epsilon(1e-7));
  CHECK(r1[0] == doctest::Approx(0.2844134).epsilon(1e-6));
  const auto r3 = reference_singular_values_bump(0, 3.0, 5);
  const auto r = reference_singular_values_bump(0, 1.0, 5);
  for (int i = 0; i < 5; ++i) CHECK(r3[i] == doctest::Approx(3.0 * r[i]).epsilon(1e-15));
  CHECK_THROWS_AS(reference_singular_values_bump(2, 1.0, 3), Error);
}

TEST_CASE("beam roots") {
  const auto roots = beam_roots(30);
  CHECK(roots[0] == doctest::Approx(1.8751041).epsilon(1e-7));
  CHECK(roots[1] == doctest::Approx(4.6940911).epsilon(1e-7));
  for (std::size_t n = 0; n < roots.size(); ++n) {
    const double b = roots[n];
    CHECK(std::abs(std::cos(b) * std::cosh(b) + 1.0) <= 1e-12 * std::cosh(b));
    if (n > 0) CHECK(b > roots[n - 1]);
    if (n > 0) CHECK(std::abs(b - (n + 0.5) * pi) < 0.02);
  }
}

TEST_CASE("bump discretization matches the closed form") {
  const auto d = discretize_kernel(KernelSpec::pure_bump(0, 1.0), 0.0, 1.0, 40, 8);
  const auto s = dense_svd(d);
  for (std::size_t n = 1; n <= 3; ++n) CHECK(std::abs(s.s(n) - 1.0 / (pi * (n - 0.5))) <= 1e-6 * s.s(n));
  CHECK(s.s(1) == doctest::Approx(0.63662).epsilon(1e-5));
  CHECK(s.s(2) == doctest::Approx(0.21221).epsilon(1e-5));
  CHECK(s.s(3) == doctest::Approx(0.12732).epsilon(1e-4));

  const auto finer = dense_svd(discretize_kernel(KernelSpec::pure_bump(0, 1.0), 0.0, 1.0, 80, 8));
  CHECK(std::abs(finer.s(1) - s.s(1)) <= 1e-9);

  const auto d1 = dense_svd(discretize_kernel(KernelSpec::pure_bump(1, 2.0), 0.0, 2.0, 40, 8));
  const auto r1 = reference_singular_values_bump(1, 2.0, 3);
  for (std::size_t n = 1; n <= 3; ++n) CHECK(std::abs(d1.s(n) - r1[n - 1]) <= 1e-6 * r1[n - 1]);
}

TEST_CASE("bump discretization null space") {
  MeshSpec mesh;
  mesh.grading = MeshSpec::Grading::uniform;
  mesh.t_min = 0.0;
  mesh.t_max = 2.0;
  mesh.panels = 80;
  mesh.nodes_per_panel = 8;
  for (int m : {0, 1}) {
    const auto d = discretize_kernel(KernelSpec::pure_bump(m, 1.0), mesh);
    std::vector<bool> beyond(d.nodes.size());
    for (std::size_t i = 0; i < d.nodes.size(); ++i) beyond[i] = d.nodes[i] > 1.0;
    CHECK(std::count(beyond.begin(), beyond.end(), true) > 0);
    for (double mass : singular_vector_mass(d.matrix, 10, beyond)) CHECK(mass <= 1e-8);
  }
}

TEST_CASE("exponential kernel is rank one") {
  const auto spec = KernelSpec::custom([](double t) { return complex(std::exp(-t)); }, "e^-t");
  const auto d = discretize_kernel(spec, 1e-14, 60.0, 96, 10);
  const auto s = dense_svd(d);
  CHECK(std::abs(s.s(1) - 0.5) <= 1e-9);
  CHECK(s.s(2) <= 1e-8);
}

TEST_CASE("discretization invariants") {
  const auto spec = KernelSpec::custom([](double t) { return complex(1.0 / (1.0 + t * t)); }, "1/(1+t^2)");
  const auto d = discretize_kernel(spec, 1e-4, 1e3, 24, 6);
  CHECK(std::is_sorted(d.nodes.begin(), d.nodes.end()));
  CHECK(std::adjacent_find(d.nodes.begin(), d.nodes.end()) == d.nodes.end());
  for (double w : d.weights) CHECK(w > 0.0);
  for (std::size_t i = 0; i < d.rows(); ++i) {
    for (std::size_t j = 0; j < d.cols(); j += 7) {
      const complex expected = std::sqrt(d.weights[i]) * spec(d.nodes[i] + d.nodes[j]) * std::sqrt(d.weights[j]);
      CHECK(std::abs(d.matrix(i, j) - expected) <= 1e-15 * std::abs(expected) + 1e-300);
    }
  }

  // Reordering nodes permutes rows and columns together.
  const std::size_t n = d.rows();
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  std::shuffle(perm.begin(), perm.end(), std::mt19937_64(5));
  DenseMatrix shuffled(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) shuffled(i, j) = d.matrix(perm[i], perm[j]);
  }
  const auto a = dense_svd(d), b = dense_svd(shuffled);
  for (std::size_t k = 1; k <= 10; ++k) CHECK(std::abs(a.s(k) - b.s(k)) <= 1e-13 * a.s(1));
}

TEST_CASE("mesh validation") {
  MeshSpec mesh;
  mesh.t_min = 0.0;
  CHECK_THROWS_AS(mesh.validate(), Error);
  mesh.t_min = 1.0;
  mesh.t_max = 0.5;
  CHECK_THROWS_AS(mesh.validate(), Error);
  CHECK(MeshSpec::defaults_for(KernelSpec::pure_bump(0, 2.0)).t_max == 2.0);
  CHECK(MeshSpec::defaults_for(KernelSpec::pure_bump(0, 2.0)).grading == MeshSpec::Grading::uniform);
}

TEST_CASE("bump profile") {
  CHECK(bump_profile(0, 1.0, 1.0) == 1.0);
  CHECK(bump_profile(1, 1.0, 1.0) == 0.0);
  CHECK(bump_profile(2, 1.0, 0.5) == 0.25);
  CHECK(bump_profile(0, 1.0, 1.5) == 0.0);
}

TEST_CASE("cross gram examples") {
  const std::size_t n = 32;
  const auto h = custom_slice(random_vector(2 * n - 1, 31));
  const auto zero = custom_slice(std::vector<complex>(2 * n - 1));
  const auto z = cross_gram(h, zero, n);
  const auto u = random_vector(n, 32);
  for (const auto& x : z.apply(u)) CHECK(x == complex{});

  const auto self = dense_svd(cross_gram(h, h, n));
  const auto s = eigen_singular_values(hankel_matrix(h.values(), n));
  for (std::size_t k = 1; k <= n; ++k) CHECK(std::abs(self.s(k) - s(k - 1) * s(k - 1)) <= 1e-10 * s(0) * s(0));
  CHECK_THROWS_AS(CrossGram(HankelSection::build(h, 8), HankelSection::build(h, 9)), Error);
}

TEST_CASE("cross gram of opposite model terms decays fast") {
  const std::size_t n = 2048;
  DiscreteModel plus, minus;
  plus.order = minus.order = AsymptoticOrder::from_alpha(1.0);
  plus.terms = {{{1, 0}, {1, 0}}};
  minus.terms = {{{-1, 0}, {1, 0}}};
  const auto g = cross_gram(oscillating_slice(plus, {}, 2 * n - 2), oscillating_slice(minus, {}, 2 * n - 2), n);
  const auto s = dense_svd(g);
  // Least-squares slope of log s_n against log n, n in [4, 40].
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int count = 0;
  for (std::size_t k = 4; k <= 40; ++k) {
    const double x = std::log(static_cast<double>(k)), y = std::log(s.s(k));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++count;
  }
  const double slope = (count * sxy - sx * sy) / (count * sxx - sx * sx);
  CHECK(slope <= -3.0);
}
