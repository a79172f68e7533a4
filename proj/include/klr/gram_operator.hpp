#pragma once

#include <cstdint>
#include <string_view>
#include <variant>

#include "klr/execution.hpp"
#include "klr/types.hpp"

namespace klr {

/// Random diagonal D with i.i.d. entries uniform on [-delta, +delta].
/// Rebuilding from (n, delta, seed) reproduces the same entries bit for bit.
struct DiagonalPerturbation {
  double delta = 0.0;
  std::uint64_t seed = 0;
  Vector entries;

  static DiagonalPerturbation draw(Index n, double delta, std::uint64_t seed);

  /// Operator norm of D, i.e. max_i |d_i|.
  [[nodiscard]] double norm() const;
};

/// Matrix-free applier of G = A Aᵀ. Solvers touch the input only through
/// this type; every vector G is applied to bumps apply_count() by one,
/// regardless of how many products with A that takes.
class GramOperator {
 public:
  /// G = diag(a)², for a diagonal (possibly perturbed, hence signed) A.
  static GramOperator diagonal(Vector a);
  /// G = diag(sigma²). Requires sigma >= 0.
  static GramOperator from_spectrum(Vector sigma);
  /// G = A Aᵀ for dense A (n x d), applied as A (Aᵀ x).
  static GramOperator dense(Matrix a);

  [[nodiscard]] Index rows() const noexcept { return rows_; }

  Vector apply(const Vector& x);
  Matrix apply_block(const Matrix& x, Execution exec = Execution::serial);

  [[nodiscard]] std::int64_t apply_count() const noexcept { return count_; }
  void reset_count() noexcept { count_ = 0; }

  [[nodiscard]] std::string_view kind() const noexcept;
  [[nodiscard]] bool has_shift() const noexcept { return shift_.size() > 0; }

  /// Copy of this operator applying G + diag(d). The copy starts with a zero
  /// counter.
  [[nodiscard]] GramOperator with_shift(const Vector& d) const;

  /// Dense G, for tests and small diagnostics. Not counted.
  [[nodiscard]] Matrix to_dense() const;

 private:
  struct Diagonal {
    Vector squared;  // diag(a)² entries
  };
  struct Dense {
    Matrix a;
  };

  GramOperator(std::variant<Diagonal, Dense> kernel, Index rows)
      : kernel_(std::move(kernel)), rows_(rows) {}

  void check_input(const Matrix& x) const;

  std::variant<Diagonal, Dense> kernel_;
  Vector shift_;
  Index rows_ = 0;
  std::int64_t count_ = 0;
};

/// PSD route: A is diagonal with entries sigma, the result applies
/// (A + D)(A + D)ᵀ with D drawn from (delta, seed).
GramOperator perturb_diagonal(const Vector& sigma, double delta, std::uint64_t seed);

/// PSD route for a dense symmetric A: applies (A + D)².
GramOperator perturb_diagonal(const Matrix& symmetric, double delta, std::uint64_t seed);

/// Rectangular route: applies A Aᵀ + D on top of an existing Gram operator.
GramOperator perturb_diagonal(const GramOperator& op, double delta, std::uint64_t seed);

/// Delta = eps * sigma_{k+1} / (3n), the PSD-route choice.
double recommended_delta(double sigma_kplus1, Index n, double eps);

/// Delta = eps * sigma_{k+1}² / (3n), the rectangular (Gram) route.
double recommended_delta_gram(double sigma_kplus1, Index n, double eps);

}  // namespace klr
