#ifndef HANKEL_SPECTRA_HPP
#define HANKEL_SPECTRA_HPP

#include "hankel/model.hpp"
#include "hankel/operators.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace hankel {

inline constexpr std::size_t default_dense_cap = 4096;

enum class SvdMethod { dense, lanczos };

const char* to_string(SvdMethod method);

struct SeriesMeta {
  std::size_t dimension = 0;
  SvdMethod method = SvdMethod::dense;
  double tolerance = 0.0;
  std::string reorthogonalization = "none";
  std::uint64_t seed = 0;
  bool converged = true;
  std::size_t converged_count = 0; // leading values meeting the residual test
  std::size_t steps = 0;           // Lanczos steps taken
  std::string source;
};

/// Nonincreasing, nonnegative values.
struct SingularValueSeries {
  std::vector<double> values;
  SeriesMeta meta;

  std::size_t size() const { return values.size(); }
  /// 1-based access, s_n.
  double s(std::size_t n) const { return values.at(n - 1); }
};

SingularValueSeries dense_svd(const LinearOperator& op, std::size_t dense_cap = default_dense_cap);
SingularValueSeries dense_svd(const DenseMatrix& matrix, std::size_t dense_cap = default_dense_cap);

/// Top-k values by Golub-Kahan bidiagonalization with full (two-pass
/// classical Gram-Schmidt) reorthogonalization. A value counts as converged
/// when beta_m |p_i(m)| <= tol s_1. Without convergence within max_steps the
/// series comes back with meta.converged = false.
SingularValueSeries lanczos_topk(const LinearOperator& op, std::size_t k, double tol, std::uint64_t seed,
                                 std::size_t max_steps = 0);

/// #{n : s_n > eps}
std::size_t counting_function(const SingularValueSeries& series, double eps);

struct StudyOptions {
  enum class Method { automatic, dense, lanczos };

  Method method = Method::automatic; // automatic: dense up to dense_threshold, Lanczos above
  std::size_t dense_threshold = 1024;
  std::size_t dense_cap = default_dense_cap;
  double tol = 1e-10;
  std::uint64_t seed = 0;
  double drift_threshold = 0.02;
  double drift_floor = 1e-8; // values below drift_floor * s_1 are not compared
  unsigned threads = 1;
};

struct ConvergenceStudy {
  std::vector<std::size_t> dims;
  std::vector<SingularValueSeries> series;
  /// drift[i][n-1] = |s_n(N_{i+1}) - s_n(N_i)| / s_n(N_{i+1}); NaN where not compared.
  std::vector<std::vector<double>> drift;
  std::vector<double> max_drift;
  double drift_threshold = 0.02;
  bool stabilized = false;
  bool monotone = true; // s_n nondecreasing along dims for every compared n
};

using OperatorBuilder = std::function<std::unique_ptr<LinearOperator>(std::size_t)>;

/// N-points may run concurrently; results are stored by position so the
/// output does not depend on scheduling.
ConvergenceStudy convergence_study(const OperatorBuilder& builder, std::size_t k, const std::vector<std::size_t>& dims,
                                   const StudyOptions& options = {});

/// For each of the leading `count` singular pairs, the larger of the left and
/// right singular-vector mass carried by indices with mask[i] = true.
std::vector<double> singular_vector_mass(const DenseMatrix& matrix, std::size_t count, const std::vector<bool>& mask);

/// Columns n, s_n, n^alpha s_n, reference, relative gap. Without a law the
/// last three columns are left empty.
void write_csv(std::ostream& os, const SingularValueSeries& series, const std::optional<PredictedLaw>& law = {});

} // namespace hankel

#endif
