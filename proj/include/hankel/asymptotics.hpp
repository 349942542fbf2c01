#ifndef HANKEL_ASYMPTOTICS_HPP
#define HANKEL_ASYMPTOTICS_HPP

#include "hankel/model.hpp"
#include "hankel/operators.hpp"
#include "hankel/sequences.hpp"
#include "hankel/spectra.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

namespace hankel {

struct FitOptions {
  std::optional<double> fixed_alpha;     // window mean of n^alpha s_n replaces the free intercept
  std::optional<PredictedLaw> predicted; // carried into the result for comparison
};

struct AsymptoticFit {
  double alpha_hat = 0.0;
  double c_hat = 0.0;
  double c_hat_free = 0.0; // exp(intercept) of the free fit
  IndexRange window;       // 1-based n
  double residual_rms = 0.0;
  bool fixed_alpha = false;
  std::optional<PredictedLaw> predicted;

  /// |c_hat - c| / c against the predicted law; NaN without one.
  double relative_deviation() const;
};

/// Least squares of log s_n on log n over the window (length >= 8, n_lo >= 2).
AsymptoticFit fit_power_law(const SingularValueSeries& series, IndexRange window, const FitOptions& options = {});
AsymptoticFit fit_power_law(const std::vector<double>& values, IndexRange window, const FitOptions& options = {});

/// [max(10, k/10), k/2]
IndexRange default_window(std::size_t k);

/// Slope of log s_n against log n over the window (1-based).
double log_log_slope(const std::vector<double>& values, IndexRange window);

/// Decreasing grid hi, hi r, hi r^2, ... down to lo.
std::vector<double> geometric_eps_grid(double hi, double lo, double ratio = 0.9);

/// Coarser-N spectra used to decide which eps have N-stable counts.
struct TrustInputs {
  std::optional<SingularValueSeries> combined_coarse;
  std::vector<SingularValueSeries> parts_coarse;
  std::optional<IndexRange> count_range; // summed count must lie in [lo, hi]
};

struct LocalizationReport {
  std::vector<double> eps_grid;
  std::vector<std::size_t> combined_counts;
  std::vector<std::size_t> summed_counts;
  std::vector<std::vector<std::size_t>> part_counts;
  std::vector<double> discrepancy; // NaN where eps lies outside the trust region
  std::vector<bool> trusted;
  std::vector<double> cross_decay_slopes;
  double max_discrepancy = 0.0; // over trusted eps
  std::size_t trusted_count = 0;
};

/// Compares n(eps; combined) with sum_l n(eps; part_l). An eps is trusted when
/// every count stays below the number of computed values, the summed count
/// lies in the optional count range and, if coarse spectra are given, every
/// count agrees with the one at the coarser N.
LocalizationReport localization_check(const std::vector<SingularValueSeries>& parts,
                                      const SingularValueSeries& combined, const std::vector<double>& eps_grid,
                                      const TrustInputs& trust = {});

struct CrossPerturbation {
  double scale = 1e-3;
  double power = 4.0;
};

struct Synthesis {
  DenseMatrix matrix;
  std::vector<std::vector<double>> blocks;
  std::vector<double> union_sorted; // exact singular values without perturbation

  /// sum_l #{s in block l : s > eps}
  std::size_t ground_truth_count(double eps) const;
};

/// A = sum_l U_l diag(s_l) V_l^T with U_l, V_l taken from disjoint column
/// ranges of two random orthogonal matrices, so the blocks are exactly
/// orthogonal. The optional perturbation adds X diag(scale n^-power) Y^T with
/// independent random orthonormal X, Y, which couples the blocks.
Synthesis block_orthogonal_synthesis(const std::vector<std::vector<double>>& spectra,
                                     const std::optional<CrossPerturbation>& perturbation, std::uint64_t seed,
                                     std::size_t ambient_dimension = 0);

/// Columns eps, combined, summed.
void write_csv(std::ostream& os, const LocalizationReport& report);

} // namespace hankel

#endif
