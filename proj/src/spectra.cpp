#include "hankel/spectra.hpp"

#include "detail/format.hpp"
#include "hankel/error.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <lapacke.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

namespace hankel {

namespace {

using MatrixXc = Eigen::Matrix<complex, Eigen::Dynamic, Eigen::Dynamic>;
using VectorXc = Eigen::Matrix<complex, Eigen::Dynamic, 1>;

void check_cap(std::size_t rows, std::size_t cols, std::size_t cap) {
  if (std::max(rows, cols) > cap) {
    std::ostringstream os;
    os << "dense SVD of a " << rows << " x " << cols << " matrix exceeds the dense cap " << cap;
    raise(ErrorKind::length, os.str());
  }
}

VectorXc random_unit(std::mt19937_64& rng, Eigen::Index n) {
  std::normal_distribution<double> normal;
  VectorXc v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = complex(normal(rng), normal(rng));
  return v / v.norm();
}

// Two passes of classical Gram-Schmidt against the first `count` columns.
void reorthogonalize(const MatrixXc& basis, Eigen::Index count, VectorXc& v) {
  if (count == 0) return;
  for (int pass = 0; pass < 2; ++pass) {
    const VectorXc h = basis.leftCols(count).adjoint() * v;
    v.noalias() -= basis.leftCols(count) * h;
  }
}

// Fresh direction orthogonal to the basis, used after a breakdown.
VectorXc restart_vector(const MatrixXc& basis, Eigen::Index count, std::mt19937_64& rng) {
  for (int attempt = 0; attempt < 8; ++attempt) {
    VectorXc v = random_unit(rng, basis.rows());
    reorthogonalize(basis, count, v);
    const double norm = v.norm();
    if (norm > 1e-8) return v / norm;
  }
  raise(ErrorKind::convergence, "Lanczos could not find a direction orthogonal to the Krylov basis");
}

void ensure_columns(MatrixXc& m, Eigen::Index needed) {
  if (m.cols() >= needed) return;
  m.conservativeResize(Eigen::NoChange, std::max<Eigen::Index>(needed, 2 * m.cols()));
}

} // namespace

const char* to_string(SvdMethod method) { return method == SvdMethod::dense ? "dense" : "lanczos"; }

SingularValueSeries dense_svd(const DenseMatrix& matrix, std::size_t dense_cap) {
  check_cap(matrix.rows, matrix.cols, dense_cap);
  SingularValueSeries out;
  out.meta.dimension = std::max(matrix.rows, matrix.cols);
  out.meta.method = SvdMethod::dense;
  out.meta.tolerance = std::numeric_limits<double>::epsilon();
  out.meta.source = "explicit matrix";
  const std::size_t kmin = std::min(matrix.rows, matrix.cols);
  if (kmin == 0) return out;

  std::vector<complex> a = matrix.data;
  std::vector<double> s(kmin);
  const auto m = static_cast<lapack_int>(matrix.rows);
  const auto n = static_cast<lapack_int>(matrix.cols);
  const lapack_int info = LAPACKE_zgesdd(LAPACK_COL_MAJOR, 'N', m, n, reinterpret_cast<lapack_complex_double*>(a.data()),
                                         m, s.data(), nullptr, 1, nullptr, 1);
  if (info != 0) {
    std::ostringstream os;
    os << "LAPACK zgesdd failed with info = " << info;
    raise(ErrorKind::convergence, os.str());
  }
  std::sort(s.begin(), s.end(), std::greater<>());
  out.values = std::move(s);
  out.meta.converged_count = out.values.size();
  return out;
}

SingularValueSeries dense_svd(const LinearOperator& op, std::size_t dense_cap) {
  check_cap(op.rows(), op.cols(), dense_cap);
  auto series = dense_svd(op.dense(), dense_cap);
  series.meta.source = op.describe();
  return series;
}

SingularValueSeries lanczos_topk(const LinearOperator& op, std::size_t k, double tol, std::uint64_t seed,
                                 std::size_t max_steps) {
  const std::size_t n = std::min(op.rows(), op.cols());
  if (k == 0) raise(ErrorKind::validation, "k must be positive");
  if (4 * k > n) {
    std::ostringstream os;
    os << "lanczos_topk needs k <= N/4 (k = " << k << ", N = " << n << ")";
    raise(ErrorKind::validation, os.str());
  }
  if (!(tol > 0.0)) raise(ErrorKind::validation, "tolerance must be positive");
  if (max_steps == 0) max_steps = std::min(n, std::max<std::size_t>(6 * k + 60, 200));
  max_steps = std::min(max_steps, n - 1); // a breakdown restart needs a spare direction

  const auto rows = static_cast<Eigen::Index>(op.rows());
  const auto cols = static_cast<Eigen::Index>(op.cols());
  std::mt19937_64 rng(seed);

  const Eigen::Index initial = std::min<Eigen::Index>(2 * k + 10, static_cast<Eigen::Index>(max_steps));
  MatrixXc V(cols, initial + 1), U(rows, initial + 1);
  std::vector<double> alpha, beta;

  V.col(0) = random_unit(rng, cols);
  VectorXc u(rows), v(cols);
  double scale = 0.0; // running norm estimate for breakdown tests

  auto step_u = [&](Eigen::Index j) {
    op.apply(V.col(j).data(), u.data());
    if (j > 0) u -= beta[j - 1] * U.col(j - 1);
    reorthogonalize(U, j, u);
    double a = u.norm();
    scale = std::max(scale, a);
    ensure_columns(U, j + 1);
    if (a <= 1e-14 * std::max(scale, 1e-300)) {
      U.col(j) = restart_vector(U, j, rng);
      a = 0.0;
    } else {
      U.col(j) = u / a;
    }
    alpha.push_back(a);
  };
  auto step_v = [&](Eigen::Index j) {
    op.apply_adjoint(U.col(j).data(), v.data());
    v -= alpha[j] * V.col(j);
    reorthogonalize(V, j + 1, v);
    double b = v.norm();
    scale = std::max(scale, b);
    ensure_columns(V, j + 2);
    if (b <= 1e-14 * std::max(scale, 1e-300)) {
      V.col(j + 1) = restart_vector(V, j + 1, rng);
      b = 0.0;
    } else {
      V.col(j + 1) = v / b;
    }
    beta.push_back(b);
  };

  SingularValueSeries out;
  out.meta.dimension = n;
  out.meta.method = SvdMethod::lanczos;
  out.meta.tolerance = tol;
  out.meta.reorthogonalization = "full (two-pass classical Gram-Schmidt)";
  out.meta.seed = seed;
  out.meta.source = op.describe();

  Eigen::Index m = 0;
  Eigen::Index next_check = initial;
  while (true) {
    step_u(m);
    step_v(m);
    ++m;
    if (m < next_check && m < static_cast<Eigen::Index>(max_steps)) continue;

    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
      B(i, i) = alpha[i];
      if (i + 1 < m) B(i, i + 1) = beta[i];
    }
    Eigen::BDCSVD<Eigen::MatrixXd> svd(B, Eigen::ComputeFullU);
    const auto& sv = svd.singularValues();
    const auto& P = svd.matrixU();
    const double s1 = sv.size() ? sv[0] : 0.0;
    const double beta_m = beta[m - 1];
    std::size_t good = 0;
    while (good < k && good < static_cast<std::size_t>(m) &&
           beta_m * std::abs(P(m - 1, static_cast<Eigen::Index>(good))) <= tol * s1) {
      ++good;
    }
    const bool done = good == k;
    if (done || m >= static_cast<Eigen::Index>(max_steps)) {
      const std::size_t take = std::min<std::size_t>(k, static_cast<std::size_t>(m));
      out.values.assign(sv.data(), sv.data() + take);
      out.meta.converged = done;
      out.meta.converged_count = good;
      out.meta.steps = static_cast<std::size_t>(m);
      return out;
    }
    next_check = std::min<Eigen::Index>(static_cast<Eigen::Index>(max_steps), m + std::max<Eigen::Index>(5, m / 8));
  }
}

std::size_t counting_function(const SingularValueSeries& series, double eps) {
  if (!(eps > 0.0)) raise(ErrorKind::domain, "eps must be positive");
  return static_cast<std::size_t>(
      std::count_if(series.values.begin(), series.values.end(), [eps](double s) { return s > eps; }));
}

ConvergenceStudy convergence_study(const OperatorBuilder& builder, std::size_t k, const std::vector<std::size_t>& dims,
                                   const StudyOptions& options) {
  if (dims.size() < 2) raise(ErrorKind::validation, "a convergence study needs at least two dimensions");
  for (std::size_t i = 1; i < dims.size(); ++i) {
    if (dims[i] <= dims[i - 1]) raise(ErrorKind::validation, "dimensions must be strictly increasing");
  }

  ConvergenceStudy study;
  study.dims = dims;
  study.drift_threshold = options.drift_threshold;
  study.series.resize(dims.size());

  auto run = [&](std::size_t i) {
    const auto op = builder(dims[i]);
    bool dense = options.method == StudyOptions::Method::dense ||
                 (options.method == StudyOptions::Method::automatic && dims[i] <= options.dense_threshold);
    SingularValueSeries s;
    if (dense) {
      s = dense_svd(*op, options.dense_cap);
      if (s.values.size() > k) s.values.resize(k);
    } else {
      s = lanczos_topk(*op, k, options.tol, options.seed, 0);
    }
    study.series[i] = std::move(s);
  };

  const unsigned threads = std::max(1u, std::min<unsigned>(options.threads, static_cast<unsigned>(dims.size())));
  if (threads == 1) {
    for (std::size_t i = 0; i < dims.size(); ++i) run(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> failures(dims.size());
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < dims.size(); i = next++) {
          try {
            run(i);
          } catch (...) {
            failures[i] = std::current_exception();
          }
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& f : failures) {
      if (f) std::rethrow_exception(f);
    }
  }

  for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
    const auto& a = study.series[i].values;
    const auto& b = study.series[i + 1].values;
    const std::size_t len = std::min(a.size(), b.size());
    const double floor = options.drift_floor * (b.empty() ? 0.0 : b[0]);
    std::vector<double> d(len, std::numeric_limits<double>::quiet_NaN());
    double worst = 0.0;
    for (std::size_t n = 0; n < len; ++n) {
      if (!(b[n] > floor) || !(a[n] > floor)) continue;
      d[n] = std::abs(b[n] - a[n]) / b[n];
      worst = std::max(worst, d[n]);
      // Compression can only shrink singular values, up to the solver tolerance.
      if (a[n] > b[n] * (1.0 + 1e-8) + options.tol * b[0]) study.monotone = false;
    }
    study.drift.push_back(std::move(d));
    study.max_drift.push_back(worst);
  }
  study.stabilized = study.max_drift.back() < options.drift_threshold;
  return study;
}

std::vector<double> singular_vector_mass(const DenseMatrix& matrix, std::size_t count, const std::vector<bool>& mask) {
  if (mask.size() != matrix.rows || matrix.rows != matrix.cols) {
    raise(ErrorKind::length, "mask must match a square matrix");
  }
  Eigen::Map<const MatrixXc> a(matrix.data.data(), static_cast<Eigen::Index>(matrix.rows),
                               static_cast<Eigen::Index>(matrix.cols));
  Eigen::BDCSVD<MatrixXc> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  count = std::min<std::size_t>(count, static_cast<std::size_t>(svd.singularValues().size()));
  std::vector<double> mass(count, 0.0);
  for (std::size_t c = 0; c < count; ++c) {
    double left = 0.0, right = 0.0;
    for (std::size_t i = 0; i < mask.size(); ++i) {
      if (!mask[i]) continue;
      left += std::norm(svd.matrixU()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)));
      right += std::norm(svd.matrixV()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)));
    }
    mass[c] = std::max(left, right);
  }
  return mass;
}

void write_csv(std::ostream& os, const SingularValueSeries& series, const std::optional<PredictedLaw>& law) {
  os << "n,s_n,n^alpha*s_n,reference,relative_gap\n";
  for (std::size_t i = 0; i < series.values.size(); ++i) {
    const std::size_t n = i + 1;
    const double s = series.values[i];
    os << n << ',' << detail::fmt(s);
    if (law) {
      const double scaled = std::pow(static_cast<double>(n), law->alpha) * s;
      const double reference = law->c * std::pow(static_cast<double>(n), -law->alpha);
      const double gap = reference > 0.0 ? (s - reference) / reference : 0.0;
      os << ',' << detail::fmt(scaled) << ',' << detail::fmt(reference) << ',' << detail::fmt(gap) << '\n';
    } else {
      os << ",,,\n";
    }
  }
}

} // namespace hankel
