#ifndef HANKEL_OPERATORS_HPP
#define HANKEL_OPERATORS_HPP

#include "hankel/model.hpp"
#include "hankel/sequences.hpp"

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace hankel {

/// Column-major complex matrix.
struct DenseMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<complex> data;

  DenseMatrix() = default;
  DenseMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c) {}

  complex& operator()(std::size_t i, std::size_t j) { return data[i + j * rows]; }
  const complex& operator()(std::size_t i, std::size_t j) const { return data[i + j * rows]; }
};

/// Matrix action with its adjoint; implementations are reentrant.
class LinearOperator {
public:
  virtual ~LinearOperator() = default;

  virtual std::size_t rows() const = 0;
  virtual std::size_t cols() const = 0;
  virtual void apply(const complex* u, complex* out) const = 0;
  virtual void apply_adjoint(const complex* u, complex* out) const = 0;
  virtual std::string describe() const = 0;

  /// Explicit matrix; the default applies the operator to unit vectors.
  virtual DenseMatrix dense() const;

  std::vector<complex> apply(const std::vector<complex>& u) const;
  std::vector<complex> apply_adjoint(const std::vector<complex>& u) const;
};

/// N x N section with entries gen(j+k), applied through a circulant embedding
/// of size next_pow2(2N-1). Copies share the precomputed transforms.
class HankelSection final : public LinearOperator {
public:
  static HankelSection build(const SequenceSlice& h, std::size_t n);

  std::size_t n() const;
  std::size_t embedding_size() const;
  const std::vector<complex>& gen() const;
  complex entry(std::size_t j, std::size_t k) const { return gen()[j + k]; }

  std::size_t rows() const override { return n(); }
  std::size_t cols() const override { return n(); }
  void apply(const complex* u, complex* out) const override;
  void apply_adjoint(const complex* u, complex* out) const override;
  std::string describe() const override;
  DenseMatrix dense() const override;

  using LinearOperator::apply;
  using LinearOperator::apply_adjoint;

private:
  struct Impl;
  explicit HankelSection(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<const Impl> impl_;
};

/// (Gamma u)(j) = sum_k gen(j+k) u(k)
std::vector<complex> hankel_matvec(const HankelSection& section, const std::vector<complex>& u);

/// u -> Gamma(h1)* Gamma(h2) u on the n-dimensional truncation.
class CrossGram final : public LinearOperator {
public:
  CrossGram(const SequenceSlice& h1, const SequenceSlice& h2, std::size_t n);
  CrossGram(HankelSection first, HankelSection second);

  std::size_t rows() const override { return first_.n(); }
  std::size_t cols() const override { return first_.n(); }
  void apply(const complex* u, complex* out) const override;
  void apply_adjoint(const complex* u, complex* out) const override;
  std::string describe() const override;

  using LinearOperator::apply;
  using LinearOperator::apply_adjoint;

private:
  HankelSection first_;
  HankelSection second_;
};

CrossGram cross_gram(const SequenceSlice& h1, const SequenceSlice& h2, std::size_t n);

class MatrixOperator final : public LinearOperator {
public:
  explicit MatrixOperator(DenseMatrix matrix, std::string description = "explicit matrix");

  const DenseMatrix& matrix() const { return matrix_; }
  std::size_t rows() const override { return matrix_.rows; }
  std::size_t cols() const override { return matrix_.cols; }
  void apply(const complex* u, complex* out) const override;
  void apply_adjoint(const complex* u, complex* out) const override;
  std::string describe() const override { return description_; }
  DenseMatrix dense() const override { return matrix_; }

  using LinearOperator::apply;
  using LinearOperator::apply_adjoint;

private:
  DenseMatrix matrix_;
  std::string description_;
};

/// Extra kernel term b e^{-rate t} (a smooth error term).
struct ExponentialTerm {
  complex b{1.0, 0.0};
  double rate = 1.0;
};

/// Kernel h(t) of an integral Hankel operator. The smooth part is evaluated
/// pointwise; a local bump (t0 - t)^m 1(t < t0) is kept separate because its
/// jump (or kink) along t + s = t0 needs exact treatment.
struct KernelSpec {
  std::function<complex(double)> smooth;
  std::optional<LocalBump> bump;
  std::string description;

  static KernelSpec from_model(const ContinuousModel& model, const std::vector<ExponentialTerm>& extra = {});
  static KernelSpec pure_bump(int m, double t0, complex b = {1.0, 0.0});
  static KernelSpec custom(std::function<complex(double)> h, std::string description);

  bool is_pure_bump() const { return bump.has_value() && !smooth; }
  /// Full kernel; at t = t0 the bump takes its left limit.
  complex operator()(double t) const;
};

/// Value of (t0 - t)^m 1(t <= t0), left limit at t0.
double bump_profile(int m, double t0, double t);

struct MeshSpec {
  enum class Grading { logarithmic, uniform };

  double t_min = 6.14421235332821e-06; // e^-12
  double t_max = 162754.791419004;     // e^12
  std::size_t panels = 96;
  std::size_t nodes_per_panel = 10;
  Grading grading = Grading::logarithmic;

  /// Defaults per kernel: a pure bump gets a uniform mesh on [0, t0].
  static MeshSpec defaults_for(const KernelSpec& spec);
  void validate() const;
};

struct IntegralDiscretization final : public LinearOperator {
  MeshSpec mesh;
  std::vector<double> panel_edges;
  std::vector<double> nodes;
  std::vector<double> weights;
  std::size_t galerkin_blocks = 0; // panel pairs integrated exactly across t + s = t0
  DenseMatrix matrix;              // sqrt(w_i) h(t_i + t_j) sqrt(w_j)
  std::string kernel_description;

  std::size_t rows() const override { return nodes.size(); }
  std::size_t cols() const override { return nodes.size(); }
  void apply(const complex* u, complex* out) const override;
  void apply_adjoint(const complex* u, complex* out) const override;
  std::string describe() const override;
  DenseMatrix dense() const override { return matrix; }

  using LinearOperator::apply;
  using LinearOperator::apply_adjoint;
};

/// Composite Gauss-Legendre Nystrom discretization. Panel pairs whose box is
/// cut by t + s = t0 get exact Galerkin entries in the orthonormal basis
/// l_i / sqrt(w_i), which the Nystrom entries equal for polynomial kernels.
IntegralDiscretization discretize_kernel(const KernelSpec& spec, const MeshSpec& mesh);
IntegralDiscretization discretize_kernel(const KernelSpec& spec, double t_min, double t_max,
                                         std::size_t panels, std::size_t nodes_per_panel);

/// Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre(std::size_t n, std::vector<double>& nodes, std::vector<double>& weights);

/// m = 0: t0 / (pi (n - 1/2)); m = 1: t0^2 / beta_n^2 with cos(beta) cosh(beta) = -1.
std::vector<double> reference_singular_values_bump(int m, double t0, std::size_t count);

/// Roots of cos(beta) cosh(beta) = -1 by safeguarded Newton.
std::vector<double> beam_roots(std::size_t count);

} // namespace hankel

#endif
