#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "klr/types.hpp"

namespace klr {

struct GapReport {
  double g_min_over_next = 0.0;  // min_{i<k} (s_i - s_{i+1}) / s_{i+1}
  double g_min_over_self = 0.0;  // min_{i<k} (s_i - s_{i+1}) / s_i
  std::map<Index, double> g_k_to_ell;  // (s_k - s_{ell+1}) / s_k
  std::map<Index, double> g_min_b;     // bth-order gap; b = k gives 1
};

/// Gap statistics of a descending spectrum. For k = 1 the minimum over an
/// empty set of consecutive pairs is +infinity.
GapReport gap_report(const Vector& sigma, Index k, const std::vector<Index>& ell_list,
                     const std::vector<Index>& b_list);

/// bth-order gap alone: for each i in the top k, drop its b-1 nearest
/// relative neighbours (ties by ascending index) and take the smallest
/// remaining |s_i - s_j| / s_j.
double bth_order_gap(const Vector& sigma, Index k, Index b);

struct GoodnessReport {
  double L = 1.0;                       // +infinity when U_kᵀQ is rank deficient
  double smallest_singular_value = 1.0; // sigma_k(U_kᵀQ)
};

/// (k, L)-goodness of B for the subspace spanned by U_k (n x k, orthonormal).
GoodnessReport kl_goodness(const Matrix& u_k, const Matrix& b, Index k);

struct ChiSquareCheck {
  double threshold = 0.0;
  double frequency = 0.0;     // fraction of trials with min g_i² >= threshold
  double lower_bound = 0.0;   // 1 - delta - 3 * binomial standard error
  [[nodiscard]] bool passes() const noexcept { return frequency >= lower_bound; }
};

/// Samples k standard normals per trial and counts how often the smallest
/// square clears 2 delta² / (pi k²).
ChiSquareCheck chi_square_min_check(Index k, double delta, std::int64_t trials, std::uint64_t seed);
/// Same sampling with an explicit threshold.
ChiSquareCheck chi_square_min_check(Index k, double delta, std::int64_t trials, std::uint64_t seed, double threshold);

/// min_i |l_i - l_{i+1}| / |l_{i+1}| over the descending eigenvalues.
double min_relative_eigengap(const Vector& eigenvalues);

/// One "if hypothesis then conclusion" evaluation.
struct Implication {
  double hypothesis_lhs = 0.0, hypothesis_rhs = 0.0;
  double conclusion_lhs = 0.0, conclusion_rhs = 0.0;
  [[nodiscard]] bool hypothesis() const noexcept { return hypothesis_lhs <= hypothesis_rhs; }
  [[nodiscard]] bool conclusion() const noexcept;
  [[nodiscard]] bool holds() const noexcept { return !hypothesis() || conclusion(); }
};

struct TransferReport {
  bool skipped = false;  // ||D||_2 above eps sigma_{k+1}(A) / (3n)
  std::vector<Implication> singular_value;  // one per column of Q
  Implication spectral;
  Implication frobenius;
  [[nodiscard]] bool all_hold() const noexcept;
};

/// Evaluates the three perturbation transfer implications for square A,
/// A~ = A + diag(d) and orthonormal Q (n x k), with constants 8 eps, 2 eps,
/// 4 eps.
TransferReport perturbation_transfer_check(const Matrix& a, const Vector& d, const Matrix& q, Index k, double eps);

/// If ||AAᵀ - QQᵀAAᵀ||_2 <= (1+eps) sigma_{k+1}² then
/// ||A - QQᵀA||_2 <= (1+eps) sigma_{k+1}, with k = Q.cols().
Implication spectral_square_check(const Matrix& a, const Matrix& q, double eps);

}  // namespace klr
