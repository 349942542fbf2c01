#include "detail/log_power.hpp"

#include <algorithm>
#include <cmath>

namespace hankel::detail {

std::vector<double> log_power_taylor(double t, double alpha, int order) {
  const int n = order + 1;
  const double L = std::log(t);

  // Work in s = h/t; w(s) = log(1+s)/L has w_0 = 0.
  std::vector<double> a(n, 0.0); // a = 1 + w
  a[0] = 1.0;
  for (int k = 1; k < n; ++k) a[k] = ((k % 2 == 1) ? 1.0 : -1.0) / (k * L);

  // g = a^(-alpha), using n a_0 g_n = sum_k ((beta+1) k - n) a_k g_{n-k}.
  const double beta = -alpha;
  std::vector<double> g(n, 0.0);
  g[0] = 1.0;
  for (int r = 1; r < n; ++r) {
    double acc = 0.0;
    for (int k = 1; k <= r; ++k) acc += ((beta + 1.0) * k - r) * a[k] * g[r - k];
    g[r] = acc / r;
  }

  // Multiply by (1+s)^-1 and rescale to the variable h.
  std::vector<double> c(n, 0.0);
  const double lead = 1.0 / t * std::pow(L, -alpha);
  double scale = lead;
  for (int r = 0; r < n; ++r) {
    double acc = 0.0;
    for (int k = 0; k <= r; ++k) acc += (((r - k) % 2 == 0) ? 1.0 : -1.0) * g[k];
    c[r] = acc * scale;
    scale /= t;
  }
  return c;
}

double log_power_difference(double t, double alpha, int m) {
  if (m == 0) return std::pow(t, -1.0) * std::pow(std::log(t), -alpha);

  constexpr int max_order = 80;
  const auto c = log_power_taylor(t, alpha, max_order);

  // F(r,P) = P! S(r,P) obeys F(r,P) = P (F(r-1,P) + F(r-1,P-1)).
  std::vector<double> F(m + 1, 0.0);
  F[0] = 1.0; // r = 0
  double sum = 0.0;
  for (int r = 1; r <= max_order; ++r) {
    for (int p = std::min(r, m); p >= 1; --p) F[p] = p * (F[p] + F[p - 1]);
    F[0] = 0.0;
    if (r < m) continue;
    const double term = F[m] * c[r];
    sum += term;
    if (r > m + 2 && std::abs(term) <= 1e-18 * std::abs(sum)) break;
  }
  return sum;
}

DifferenceTable::DifferenceTable(double alpha, int m)
    : alpha_(alpha), m_(m), min_argument_(std::max(32.0, 8.0 * m + 1.0)) {
  const int top = m + 30;
  // E[r][i] = C_ri / r!, built by differentiating t^(-1-r) L^(-alpha-i).
  std::vector<std::vector<double>> E(top + 1);
  E[0] = {1.0};
  for (int r = 0; r < top; ++r) {
    E[r + 1].assign(r + 2, 0.0);
    for (int i = 0; i <= r; ++i) {
      E[r + 1][i] -= (1.0 + r) * E[r][i] / (r + 1.0);
      E[r + 1][i + 1] -= (alpha + i) * E[r][i] / (r + 1.0);
    }
  }
  // Weights m! S(r, m) multiply c_r = f^(r) / r!.
  std::vector<double> F(m + 1, 0.0);
  F[0] = 1.0;
  coeff_.clear();
  if (m == 0) coeff_.push_back(E[0]);
  for (int r = 1; r <= top; ++r) {
    for (int p = std::min(r, m); p >= 1; --p) F[p] = p * (F[p] + F[p - 1]);
    F[0] = 0.0;
    if (r < m) continue;
    std::vector<double> row(E[r].size());
    for (std::size_t i = 0; i < row.size(); ++i) row[i] = F[m] * E[r][i];
    coeff_.push_back(std::move(row));
  }
}

double DifferenceTable::operator()(double t) const {
  const double u = 1.0 / t;
  const double L = std::log(t);
  const double v = 1.0 / L;
  double upow = std::pow(u, m_);
  double sum = 0.0;
  for (std::size_t k = 0; k < coeff_.size(); ++k) {
    const auto& row = coeff_[k];
    double poly = 0.0;
    for (std::size_t i = row.size(); i-- > 0;) poly = poly * v + row[i];
    const double term = upow * poly;
    sum += term;
    if (k > 1 && std::abs(term) <= 1e-17 * std::abs(sum)) break;
    upow *= u;
  }
  return sum * u * std::pow(L, -alpha_);
}

} // namespace hankel::detail
