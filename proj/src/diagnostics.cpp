#include "klr/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "klr/dense_kernels.hpp"
#include "klr/orthonormal_basis.hpp"
#include "klr/rng.hpp"

namespace klr {

namespace {

constexpr double kConclusionSlack = 1e-10;

void require_descending(const Vector& sigma) {
  require(sigma.allFinite(), "spectrum must be finite");
  for (Index i = 1; i < sigma.size(); ++i)
    if (sigma[i] > sigma[i - 1]) throw ContractError("spectrum must be sorted in descending order");
}

double relative_gap(double a, double b) { return b == 0.0 ? (a == 0.0 ? 0.0 : std::numeric_limits<double>::infinity()) : std::abs(a - b) / std::abs(b); }

}  // namespace

double bth_order_gap(const Vector& sigma, Index k, Index b) {
  require_descending(sigma);
  require(k >= 1 && k <= sigma.size(), "k must lie in [1, n]");
  require(b >= 1 && b <= k, "b must lie in [1, k]");
  if (b == k) return 1.0;
  double best = std::numeric_limits<double>::infinity();
  std::vector<std::pair<double, Index>> dist;
  for (Index i = 0; i < k; ++i) {
    dist.clear();
    for (Index j = 0; j < k; ++j)
      if (j != i) dist.emplace_back(relative_gap(sigma[i], sigma[j]), j);
    std::stable_sort(dist.begin(), dist.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
    // dist[b-1] is the nearest index outside N_i.
    best = std::min(best, dist[static_cast<std::size_t>(b - 1)].first);
  }
  return best;
}

GapReport gap_report(const Vector& sigma, Index k, const std::vector<Index>& ell_list, const std::vector<Index>& b_list) {
  require_descending(sigma);
  require(k >= 1 && k <= sigma.size(), "k must lie in [1, n]");
  require(sigma[k - 1] > 0.0, "sigma_k must be positive");
  GapReport r;
  r.g_min_over_next = std::numeric_limits<double>::infinity();
  r.g_min_over_self = std::numeric_limits<double>::infinity();
  for (Index i = 0; i + 1 < k; ++i) {
    r.g_min_over_next = std::min(r.g_min_over_next, relative_gap(sigma[i], sigma[i + 1]));
    r.g_min_over_self = std::min(r.g_min_over_self, (sigma[i] - sigma[i + 1]) / sigma[i]);
  }
  for (Index ell : ell_list) {
    require(ell >= k, "ell must be at least k");
    require(ell < sigma.size(), "ell + 1 exceeds the spectrum length");
    r.g_k_to_ell[ell] = (sigma[k - 1] - sigma[ell]) / sigma[k - 1];
  }
  for (Index b : b_list) r.g_min_b[b] = bth_order_gap(sigma, k, b);
  return r;
}

GoodnessReport kl_goodness(const Matrix& u_k, const Matrix& b, Index k) {
  require(k >= 1, "k must be positive");
  require(u_k.cols() == k, "U_k must have k columns");
  if (b.rows() != u_k.rows()) throw ContractError("B and U_k have different row counts");
  require(b.cols() >= k, "B needs at least k columns");
  const Matrix q = orthonormalize(b).matrix();
  GoodnessReport r;
  if (q.cols() < k) {
    r.smallest_singular_value = 0.0;
    r.L = std::numeric_limits<double>::infinity();
    return r;
  }
  const Vector s = singular_values(u_k.transpose() * q);
  r.smallest_singular_value = s[k - 1];
  r.L = s[k - 1] > 0.0 ? 1.0 / (s[k - 1] * s[k - 1]) : std::numeric_limits<double>::infinity();
  return r;
}

ChiSquareCheck chi_square_min_check(Index k, double delta, std::int64_t trials, std::uint64_t seed) {
  require(k >= 1, "k must be positive");
  require(delta > 0.0 && delta < 1.0, "delta must lie in (0, 1)");
  return chi_square_min_check(k, delta, trials, seed, 2.0 * delta * delta / (std::numbers::pi * double(k) * double(k)));
}

ChiSquareCheck chi_square_min_check(Index k, double delta, std::int64_t trials, std::uint64_t seed, double threshold) {
  require(k >= 1, "k must be positive");
  require(trials >= 1, "need at least one trial");
  require(delta >= 0.0 && delta <= 1.0, "delta must lie in [0, 1]");
  Rng rng(seed, hash_label("chi-square-min"));
  std::int64_t hits = 0;
  for (std::int64_t t = 0; t < trials; ++t) {
    double smallest = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < k; ++i) {
      const double g = rng.normal();
      smallest = std::min(smallest, g * g);
    }
    if (smallest >= threshold) ++hits;
  }
  ChiSquareCheck c;
  c.threshold = threshold;
  c.frequency = double(hits) / double(trials);
  const double p = 1.0 - delta;
  c.lower_bound = p - 3.0 * std::sqrt(p * (1.0 - p) / double(trials));
  return c;
}

double min_relative_eigengap(const Vector& eigenvalues) {
  require(eigenvalues.size() >= 2, "need at least two eigenvalues");
  std::vector<double> l(eigenvalues.begin(), eigenvalues.end());
  std::sort(l.begin(), l.end(), std::greater<>());
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < l.size(); ++i) best = std::min(best, relative_gap(l[i], l[i + 1]));
  return best;
}

bool Implication::conclusion() const noexcept {
  return conclusion_lhs <= conclusion_rhs * (1.0 + kConclusionSlack);
}

bool TransferReport::all_hold() const noexcept {
  if (skipped) return true;
  for (const auto& s : singular_value)
    if (!s.holds()) return false;
  return spectral.holds() && frobenius.holds();
}

TransferReport perturbation_transfer_check(const Matrix& a, const Vector& d, const Matrix& q, Index k, double eps) {
  require(a.rows() == a.cols(), "A must be square");
  require(d.size() == a.rows(), "D must match A");
  require(q.rows() == a.rows(), "Q row count does not match A");
  require(k >= 1 && k < a.rows(), "k must lie in [1, n)");
  require(eps > 0.0 && eps < 1.0, "eps must lie in (0, 1)");
  const Index n = a.rows();
  const Vector s = singular_values(a);
  TransferReport r;
  const double d_norm = d.size() ? d.cwiseAbs().maxCoeff() : 0.0;
  if (d_norm > eps / (3.0 * double(n)) * s[k]) {
    r.skipped = true;
    return r;
  }
  Matrix at = a;
  at.diagonal() += d;
  const Vector st = singular_values(at);

  const Matrix atq = at.transpose() * q;
  const Matrix aq = a.transpose() * q;
  for (Index i = 0; i < std::min<Index>(q.cols(), k); ++i) {
    Implication imp;
    imp.hypothesis_lhs = std::abs(atq.col(i).squaredNorm() - st[i] * st[i]);
    imp.hypothesis_rhs = eps * st[k] * st[k];
    imp.conclusion_lhs = std::abs(aq.col(i).squaredNorm() - s[i] * s[i]);
    imp.conclusion_rhs = 8.0 * eps * s[i] * s[i];
    r.singular_value.push_back(imp);
  }

  const Matrix res_t = at - q * (q.transpose() * at);
  const Matrix res = a - q * (q.transpose() * a);
  const Vector rs_t = singular_values(res_t);
  const Vector rs = singular_values(res);

  r.spectral.hypothesis_lhs = rs_t[0];
  r.spectral.hypothesis_rhs = (1.0 + eps) * st[k];
  r.spectral.conclusion_lhs = rs[0];
  r.spectral.conclusion_rhs = (1.0 + 2.0 * eps) * s[k];

  r.frobenius.hypothesis_lhs = res_t.norm();
  r.frobenius.hypothesis_rhs = (1.0 + eps) * st.tail(n - k).stableNorm();
  r.frobenius.conclusion_lhs = res.norm();
  r.frobenius.conclusion_rhs = (1.0 + 4.0 * eps) * s.tail(n - k).stableNorm();
  return r;
}

Implication spectral_square_check(const Matrix& a, const Matrix& q, double eps) {
  require(q.rows() == a.rows(), "Q row count does not match A");
  require(eps >= 0.0, "eps must be non-negative");
  const Index k = q.cols();
  const Vector s = singular_values(a);
  const double sk1 = k < s.size() ? s[k] : 0.0;
  const Matrix g = a * a.transpose();
  Implication imp;
  imp.hypothesis_lhs = singular_values(g - q * (q.transpose() * g))[0];
  imp.hypothesis_rhs = (1.0 + eps) * sk1 * sk1;
  imp.conclusion_lhs = singular_values(a - q * (q.transpose() * a))[0];
  imp.conclusion_rhs = (1.0 + eps) * sk1;
  return imp;
}

}  // namespace klr
