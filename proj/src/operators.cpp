#include "hankel/operators.hpp"

#include "detail/fft.hpp"
#include "hankel/error.hpp"
#include "hankel/symbols.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace hankel {

namespace {

using MatrixXc = Eigen::Matrix<complex, Eigen::Dynamic, Eigen::Dynamic>;
using VectorXc = Eigen::Matrix<complex, Eigen::Dynamic, 1>;

Eigen::Map<const MatrixXc> view(const DenseMatrix& m) {
  return {m.data.data(), static_cast<Eigen::Index>(m.rows), static_cast<Eigen::Index>(m.cols)};
}

void check_size(const char* what, std::size_t got, std::size_t want) {
  if (got != want) {
    std::ostringstream os;
    os << what << ": vector of length " << got << " where " << want << " is required";
    raise(ErrorKind::length, os.str());
  }
}

} // namespace

DenseMatrix LinearOperator::dense() const {
  DenseMatrix m(rows(), cols());
  std::vector<complex> e(cols()), column(rows());
  for (std::size_t k = 0; k < cols(); ++k) {
    e[k] = 1.0;
    apply(e.data(), column.data());
    std::copy(column.begin(), column.end(), m.data.begin() + k * rows());
    e[k] = 0.0;
  }
  return m;
}

std::vector<complex> LinearOperator::apply(const std::vector<complex>& u) const {
  check_size("apply", u.size(), cols());
  std::vector<complex> out(rows());
  apply(u.data(), out.data());
  return out;
}

std::vector<complex> LinearOperator::apply_adjoint(const std::vector<complex>& u) const {
  check_size("apply_adjoint", u.size(), rows());
  std::vector<complex> out(cols());
  apply_adjoint(u.data(), out.data());
  return out;
}

// ---------------------------------------------------------------- sections

struct HankelSection::Impl {
  std::size_t n = 0;
  std::size_t L = 0;
  std::vector<complex> gen;
  std::vector<complex> gen_hat;  // transform of gen, zero padded to L
  std::vector<complex> conj_hat; // transform of conj(gen)
  std::unique_ptr<detail::FftPlan> forward;
  std::unique_ptr<detail::FftPlan> backward;
  std::string source;

  void multiply(const std::vector<complex>& hat, const complex* u, complex* out) const {
    // Reversing u turns the Hankel product into a convolution; entries
    // n-1 .. 2n-2 of the circular convolution are free of wrap-around for L >= 2n-1.
    std::vector<complex> buffer(L), spectrum(L);
    for (std::size_t k = 0; k < n; ++k) buffer[k] = u[n - 1 - k];
    forward->execute(buffer.data(), spectrum.data());
    for (std::size_t i = 0; i < L; ++i) spectrum[i] *= hat[i];
    backward->execute(spectrum.data(), buffer.data());
    const double scale = 1.0 / static_cast<double>(L);
    for (std::size_t j = 0; j < n; ++j) out[j] = buffer[j + n - 1] * scale;
  }
};

HankelSection HankelSection::build(const SequenceSlice& h, std::size_t n) {
  if (n == 0) raise(ErrorKind::length, "section dimension must be positive");
  if (h.size() < 2 * n - 1) {
    std::ostringstream os;
    os << "section of size " << n << " needs h(0.." << 2 * n - 2 << "), slice has " << h.size() << " entries";
    raise(ErrorKind::length, os.str());
  }
  auto impl = std::make_shared<Impl>();
  impl->n = n;
  impl->L = detail::next_power_of_two(2 * n - 1);
  impl->gen.assign(h.values().begin(), h.values().begin() + (2 * n - 1));
  impl->source = h.source().description;
  impl->forward = std::make_unique<detail::FftPlan>(impl->L, FFTW_FORWARD);
  impl->backward = std::make_unique<detail::FftPlan>(impl->L, FFTW_BACKWARD);

  std::vector<complex> padded(impl->L);
  impl->gen_hat.resize(impl->L);
  impl->conj_hat.resize(impl->L);
  std::copy(impl->gen.begin(), impl->gen.end(), padded.begin());
  impl->forward->execute(padded.data(), impl->gen_hat.data());
  for (std::size_t i = 0; i < impl->gen.size(); ++i) padded[i] = std::conj(impl->gen[i]);
  impl->forward->execute(padded.data(), impl->conj_hat.data());
  return HankelSection(std::move(impl));
}

std::size_t HankelSection::n() const { return impl_->n; }
std::size_t HankelSection::embedding_size() const { return impl_->L; }
const std::vector<complex>& HankelSection::gen() const { return impl_->gen; }

void HankelSection::apply(const complex* u, complex* out) const { impl_->multiply(impl_->gen_hat, u, out); }

// Gamma(h)* = Gamma(conj h): the matrix is symmetric.
void HankelSection::apply_adjoint(const complex* u, complex* out) const {
  impl_->multiply(impl_->conj_hat, u, out);
}

std::string HankelSection::describe() const {
  std::ostringstream os;
  os << "Hankel section N = " << impl_->n << " of " << impl_->source;
  return os.str();
}

DenseMatrix HankelSection::dense() const {
  const std::size_t n = impl_->n;
  DenseMatrix m(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t j = 0; j < n; ++j) m(j, k) = impl_->gen[j + k];
  }
  return m;
}

std::vector<complex> hankel_matvec(const HankelSection& section, const std::vector<complex>& u) {
  return section.apply(u);
}

CrossGram::CrossGram(const SequenceSlice& h1, const SequenceSlice& h2, std::size_t n)
    : CrossGram(HankelSection::build(h1, n), HankelSection::build(h2, n)) {}

CrossGram::CrossGram(HankelSection first, HankelSection second)
    : first_(std::move(first)), second_(std::move(second)) {
  if (first_.n() != second_.n()) raise(ErrorKind::length, "cross product needs sections of equal size");
}

void CrossGram::apply(const complex* u, complex* out) const {
  std::vector<complex> mid(second_.n());
  second_.apply(u, mid.data());
  first_.apply_adjoint(mid.data(), out);
}

void CrossGram::apply_adjoint(const complex* u, complex* out) const {
  std::vector<complex> mid(first_.n());
  first_.apply(u, mid.data());
  second_.apply_adjoint(mid.data(), out);
}

std::string CrossGram::describe() const {
  return "cross product [" + first_.describe() + "]* [" + second_.describe() + "]";
}

CrossGram cross_gram(const SequenceSlice& h1, const SequenceSlice& h2, std::size_t n) {
  return CrossGram(h1, h2, n);
}

MatrixOperator::MatrixOperator(DenseMatrix matrix, std::string description)
    : matrix_(std::move(matrix)), description_(std::move(description)) {
  if (matrix_.data.size() != matrix_.rows * matrix_.cols) raise(ErrorKind::length, "matrix storage size mismatch");
}

void MatrixOperator::apply(const complex* u, complex* out) const {
  Eigen::Map<const VectorXc> x(u, static_cast<Eigen::Index>(matrix_.cols));
  Eigen::Map<VectorXc> y(out, static_cast<Eigen::Index>(matrix_.rows));
  y.noalias() = view(matrix_) * x;
}

void MatrixOperator::apply_adjoint(const complex* u, complex* out) const {
  Eigen::Map<const VectorXc> x(u, static_cast<Eigen::Index>(matrix_.rows));
  Eigen::Map<VectorXc> y(out, static_cast<Eigen::Index>(matrix_.cols));
  y.noalias() = view(matrix_).adjoint() * x;
}

// ----------------------------------------------------------------- kernels

double bump_profile(int m, double t0, double t) {
  if (t > t0) return 0.0;
  return m == 0 ? 1.0 : std::pow(t0 - t, m);
}

KernelSpec KernelSpec::from_model(const ContinuousModel& model, const std::vector<ExponentialTerm>& extra) {
  model.validate();
  const double alpha = model.order.alpha;
  const Cutoffs cutoffs = model.cutoffs;
  const complex b0 = model.b0;
  const auto terms = model.terms;

  KernelSpec spec;
  spec.bump = model.local_bump;
  const bool has_smooth = b0 != complex{} || !terms.empty() || !extra.empty();
  if (has_smooth) {
    spec.smooth = [=](double t) {
      complex value{};
      if (b0 != complex{}) value += b0 * model_kernel(LineKind::zero, alpha, t, cutoffs);
      if (!terms.empty()) {
        const double qi = model_kernel(LineKind::infinity, alpha, t, cutoffs);
        if (qi != 0.0) {
          for (const auto& term : terms) value += term.b * qi * std::polar(1.0, -term.a * t);
        }
      }
      for (const auto& e : extra) value += e.b * std::exp(-e.rate * t);
      return value;
    };
  }
  std::ostringstream os;
  os << "continuous model, alpha = " << alpha << ", b0 = " << b0 << ", " << terms.size() << " tail term(s)";
  if (model.local_bump) os << ", bump m = " << model.local_bump->m << " t0 = " << model.local_bump->t0;
  if (!extra.empty()) os << ", " << extra.size() << " exponential term(s)";
  spec.description = os.str();
  return spec;
}

KernelSpec KernelSpec::pure_bump(int m, double t0, complex b) {
  if (m < 0 || !(t0 > 0.0)) raise(ErrorKind::domain, "bump needs m >= 0 and t0 > 0");
  KernelSpec spec;
  spec.bump = LocalBump{t0, m, b};
  std::ostringstream os;
  os << "bump (t0 - t)^" << m << ", t0 = " << t0;
  spec.description = os.str();
  return spec;
}

KernelSpec KernelSpec::custom(std::function<complex(double)> h, std::string description) {
  KernelSpec spec;
  spec.smooth = std::move(h);
  spec.description = std::move(description);
  return spec;
}

complex KernelSpec::operator()(double t) const {
  complex value{};
  if (smooth) value += smooth(t);
  if (bump) value += bump->b * bump_profile(bump->m, bump->t0, t);
  return value;
}

MeshSpec MeshSpec::defaults_for(const KernelSpec& spec) {
  MeshSpec mesh;
  if (spec.is_pure_bump()) {
    mesh.grading = Grading::uniform;
    mesh.t_min = 0.0;
    mesh.t_max = spec.bump->t0;
  }
  return mesh;
}

void MeshSpec::validate() const {
  const bool log_ok = grading != Grading::logarithmic || t_min > 0.0;
  if (!(t_min >= 0.0) || !(t_max > t_min) || !std::isfinite(t_max) || !log_ok) {
    raise(ErrorKind::validation, "mesh needs 0 <= t_min < t_max (t_min > 0 for logarithmic grading)");
  }
  if (panels == 0 || nodes_per_panel == 0 || nodes_per_panel > 64) {
    raise(ErrorKind::validation, "mesh needs panels >= 1 and 1..64 nodes per panel");
  }
}

void gauss_legendre(std::size_t n, std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 1.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (std::size_t k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // Re-evaluate the derivative at the converged root for the weight.
    double p0 = 1.0, p1 = x;
    for (std::size_t k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n == 1 ? 1.0 : n * (x * p1 - p0) / (x * x - 1.0);
    nodes[i] = -x;
    nodes[n - 1 - i] = x;
    weights[i] = weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
}

namespace {

struct Panel {
  double lo, hi;
  std::size_t offset; // index of the first node
};

// Barycentric Lagrange basis on the panel's Gauss-Legendre nodes.
struct LagrangeBasis {
  std::vector<double> ref_nodes;
  std::vector<double> bary;

  explicit LagrangeBasis(const std::vector<double>& x) : ref_nodes(x), bary(x.size(), 1.0) {
    for (std::size_t i = 0; i < x.size(); ++i) {
      for (std::size_t k = 0; k < x.size(); ++k) {
        if (k != i) bary[i] /= (x[i] - x[k]);
      }
    }
  }

  // Values of all basis polynomials at reference point s in [-1, 1].
  void eval(double s, std::vector<double>& out) const {
    const std::size_t n = ref_nodes.size();
    out.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      if (s == ref_nodes[i]) {
        out[i] = 1.0;
        return;
      }
    }
    double denom = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      out[i] = bary[i] / (s - ref_nodes[i]);
      denom += out[i];
    }
    for (auto& v : out) v /= denom;
  }
};

std::vector<double> mesh_edges(const MeshSpec& mesh, const std::optional<LocalBump>& bump) {
  std::vector<double> edges(mesh.panels + 1);
  for (std::size_t k = 0; k <= mesh.panels; ++k) {
    const double s = static_cast<double>(k) / static_cast<double>(mesh.panels);
    edges[k] = mesh.grading == MeshSpec::Grading::uniform
                   ? mesh.t_min + s * (mesh.t_max - mesh.t_min)
                   : std::exp(std::log(mesh.t_min) + s * (std::log(mesh.t_max) - std::log(mesh.t_min)));
  }
  edges.front() = mesh.t_min;
  edges.back() = mesh.t_max;
  if (bump && bump->t0 > mesh.t_min && bump->t0 < mesh.t_max) {
    const double t0 = bump->t0;
    const bool present = std::any_of(edges.begin(), edges.end(),
                                     [&](double e) { return std::abs(e - t0) <= 1e-14 * t0; });
    if (!present) {
      edges.push_back(t0);
      std::sort(edges.begin(), edges.end());
    }
  }
  return edges;
}

// Exact Galerkin block of b (t0 - t - s)^m 1(t + s < t0) between panels P (rows) and Q (columns).
void bump_block(const LocalBump& bump, const Panel& P, const Panel& Q, const LagrangeBasis& basis,
                const std::vector<double>& weights, DenseMatrix& K) {
  const std::size_t p = basis.ref_nodes.size();
  const std::size_t nq = p + static_cast<std::size_t>(bump.m) + 2;
  std::vector<double> gx, gw;
  gauss_legendre(nq, gx, gw);

  std::vector<double> cuts{P.lo, P.hi, bump.t0 - Q.hi, bump.t0 - Q.lo};
  std::sort(cuts.begin(), cuts.end());
  std::vector<double> lt, ls;
  std::vector<std::vector<complex>> block(p, std::vector<complex>(p));
  const double hp = 0.5 * (P.hi - P.lo), hq = 0.5 * (Q.hi - Q.lo);

  for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
    const double a = std::max(cuts[c], P.lo), b = std::min(cuts[c + 1], P.hi);
    if (!(b > a)) continue;
    for (std::size_t it = 0; it < nq; ++it) {
      const double t = 0.5 * (a + b) + 0.5 * (b - a) * gx[it];
      const double wt = 0.5 * (b - a) * gw[it];
      const double upper = std::min(Q.hi, bump.t0 - t);
      if (!(upper > Q.lo)) continue;
      basis.eval((t - 0.5 * (P.lo + P.hi)) / hp, lt);
      std::vector<double> inner(p, 0.0);
      for (std::size_t is = 0; is < nq; ++is) {
        const double s = 0.5 * (Q.lo + upper) + 0.5 * (upper - Q.lo) * gx[is];
        const double ws = 0.5 * (upper - Q.lo) * gw[is];
        basis.eval((s - 0.5 * (Q.lo + Q.hi)) / hq, ls);
        const double k = bump.m == 0 ? 1.0 : std::pow(bump.t0 - t - s, bump.m);
        for (std::size_t j = 0; j < p; ++j) inner[j] += ws * k * ls[j];
      }
      for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = 0; j < p; ++j) block[i][j] += wt * lt[i] * inner[j];
      }
    }
  }
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = 0; j < p; ++j) {
      const std::size_t r = P.offset + i, col = Q.offset + j;
      K(r, col) += bump.b * block[i][j] / std::sqrt(weights[r] * weights[col]);
    }
  }
}

} // namespace

IntegralDiscretization discretize_kernel(const KernelSpec& spec, const MeshSpec& mesh) {
  mesh.validate();
  if (!spec.smooth && !spec.bump) raise(ErrorKind::validation, "kernel has no terms");

  IntegralDiscretization d;
  d.mesh = mesh;
  d.kernel_description = spec.description;
  d.panel_edges = mesh_edges(mesh, spec.bump);

  const std::size_t p = mesh.nodes_per_panel;
  std::vector<double> gx, gw;
  gauss_legendre(p, gx, gw);
  std::vector<Panel> panels;
  for (std::size_t k = 0; k + 1 < d.panel_edges.size(); ++k) {
    const double lo = d.panel_edges[k], hi = d.panel_edges[k + 1];
    panels.push_back({lo, hi, d.nodes.size()});
    for (std::size_t i = 0; i < p; ++i) {
      d.nodes.push_back(0.5 * (lo + hi) + 0.5 * (hi - lo) * gx[i]);
      d.weights.push_back(0.5 * (hi - lo) * gw[i]);
    }
  }
  const std::size_t n = d.nodes.size();
  std::vector<double> root_w(n);
  for (std::size_t i = 0; i < n; ++i) root_w[i] = std::sqrt(d.weights[i]);

  d.matrix = DenseMatrix(n, n);
  auto& K = d.matrix;
  auto panel_of = [&](std::size_t i) { return i / p; };

  // Nystrom part; the kernel depends on t_i + t_j only, so K is symmetric.
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = j; i < n; ++i) {
      const double t = d.nodes[i] + d.nodes[j];
      complex h{};
      try {
        if (spec.smooth) h += spec.smooth(t);
      } catch (const Error& e) {
        std::ostringstream os;
        os << "kernel evaluation failed at t = " << t << " (panels " << panel_of(i) << ", " << panel_of(j)
           << "): " << e.what();
        raise(e.kind(), os.str());
      }
      if (spec.bump) {
        const auto& P = panels[panel_of(i)];
        const auto& Q = panels[panel_of(j)];
        const bool cut = P.lo + Q.lo < spec.bump->t0 && spec.bump->t0 < P.hi + Q.hi;
        if (!cut) h += spec.bump->b * bump_profile(spec.bump->m, spec.bump->t0, t);
      }
      if (!std::isfinite(h.real()) || !std::isfinite(h.imag())) {
        std::ostringstream os;
        os << "kernel is not finite at t = " << t << " (panels " << panel_of(i) << ", " << panel_of(j) << ")";
        raise(ErrorKind::domain, os.str());
      }
      K(i, j) = K(j, i) = root_w[i] * h * root_w[j];
    }
  }

  if (spec.bump) {
    const LagrangeBasis basis(gx);
    for (const auto& P : panels) {
      for (const auto& Q : panels) {
        if (P.lo + Q.lo < spec.bump->t0 && spec.bump->t0 < P.hi + Q.hi) {
          bump_block(*spec.bump, P, Q, basis, d.weights, K);
          ++d.galerkin_blocks;
        }
      }
    }
  }
  return d;
}

IntegralDiscretization discretize_kernel(const KernelSpec& spec, double t_min, double t_max, std::size_t panels,
                                         std::size_t nodes_per_panel) {
  MeshSpec mesh = MeshSpec::defaults_for(spec);
  if (!spec.is_pure_bump()) mesh.grading = MeshSpec::Grading::logarithmic;
  mesh.t_min = t_min;
  mesh.t_max = t_max;
  mesh.panels = panels;
  mesh.nodes_per_panel = nodes_per_panel;
  if (spec.is_pure_bump()) {
    // Beyond t0 the pure bump kernel vanishes on the whole box, so the mesh stops at t0.
    mesh.t_max = std::min(t_max, spec.bump->t0);
    mesh.grading = MeshSpec::Grading::uniform;
  }
  return discretize_kernel(spec, mesh);
}

void IntegralDiscretization::apply(const complex* u, complex* out) const {
  Eigen::Map<const VectorXc> x(u, static_cast<Eigen::Index>(matrix.cols));
  Eigen::Map<VectorXc> y(out, static_cast<Eigen::Index>(matrix.rows));
  y.noalias() = view(matrix) * x;
}

void IntegralDiscretization::apply_adjoint(const complex* u, complex* out) const {
  Eigen::Map<const VectorXc> x(u, static_cast<Eigen::Index>(matrix.rows));
  Eigen::Map<VectorXc> y(out, static_cast<Eigen::Index>(matrix.cols));
  y.noalias() = view(matrix).adjoint() * x;
}

std::string IntegralDiscretization::describe() const {
  std::ostringstream os;
  os << "Nystrom discretization (" << (panel_edges.size() - 1) << " panels x " << mesh.nodes_per_panel
     << " nodes on [" << mesh.t_min << ", " << mesh.t_max << "]) of " << kernel_description;
  return os.str();
}

// ------------------------------------------------------------ references

std::vector<double> beam_roots(std::size_t count) {
  constexpr double pi = std::numbers::pi;
  // cos(b) + 1/cosh(b) has the same roots and stays O(1).
  auto f = [](double b) { return std::cos(b) + 1.0 / std::cosh(b); };
  auto df = [](double b) { return -std::sin(b) - std::tanh(b) / std::cosh(b); };
  std::vector<double> roots;
  for (std::size_t n = 1; n <= count; ++n) {
    double lo = n == 1 ? 0.5 * pi : (n - 1.0) * pi;
    double hi = n * pi;
    double flo = f(lo);
    double x = (n - 0.5) * pi;
    bool converged = false;
    for (int iter = 0; iter < 200; ++iter) {
      const double fx = f(x);
      if (fx == 0.0) {
        converged = true;
        break;
      }
      if ((fx > 0) == (flo > 0)) {
        lo = x;
        flo = fx;
      } else {
        hi = x;
      }
      double next = x - fx / df(x);
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      if (std::abs(next - x) <= 4e-16 * x || hi - lo <= 4e-16 * x) {
        x = next;
        converged = true;
        break;
      }
      x = next;
    }
    if (!converged) {
      std::ostringstream os;
      os << "beam root " << n << " not converged; bracket [" << lo << ", " << hi << "]";
      raise(ErrorKind::convergence, os.str());
    }
    roots.push_back(x);
  }
  return roots;
}

std::vector<double> reference_singular_values_bump(int m, double t0, std::size_t count) {
  if (!(t0 > 0.0)) raise(ErrorKind::domain, "t0 must be positive");
  std::vector<double> values;
  if (m == 0) {
    for (std::size_t n = 1; n <= count; ++n) values.push_back(t0 / (std::numbers::pi * (n - 0.5)));
  } else if (m == 1) {
    for (double beta : beam_roots(count)) values.push_back(t0 * t0 / (beta * beta));
  } else {
    raise(ErrorKind::domain, "closed-form bump spectra exist for m = 0 and m = 1 only");
  }
  return values;
}

} // namespace hankel
