#pragma once

#include <variant>

#include "klr/gram_operator.hpp"
#include "klr/types.hpp"

namespace klr {

/// The matrix A itself, as seen by error metrics (never by solvers). Either a
/// diagonal A = diag(entries) or a dense n x d matrix. Singular values are
/// computed once at construction: exactly (sorted |entries|) for diagonals,
/// by SVD for dense inputs.
class InputMatrix {
 public:
  static InputMatrix diagonal(Vector entries);
  static InputMatrix dense(Matrix a);

  [[nodiscard]] Index rows() const noexcept;
  [[nodiscard]] Index cols() const noexcept;
  [[nodiscard]] bool is_diagonal() const noexcept { return std::holds_alternative<Vector>(data_); }

  /// Diagonal entries; only valid when is_diagonal().
  [[nodiscard]] const Vector& diagonal_entries() const { return std::get<Vector>(data_); }
  /// Dense storage; only valid when !is_diagonal().
  [[nodiscard]] const Matrix& dense_matrix() const { return std::get<Matrix>(data_); }

  [[nodiscard]] Matrix multiply(const Matrix& x) const;            // A x
  [[nodiscard]] Matrix multiply_transpose(const Matrix& y) const;  // Aᵀ y
  [[nodiscard]] Matrix to_dense() const;
  [[nodiscard]] InputMatrix transposed() const;

  /// Descending singular values (length min(rows, cols)).
  [[nodiscard]] const Vector& singular_values() const noexcept { return sigma_; }

 private:
  InputMatrix(std::variant<Vector, Matrix> data, Vector sigma) : data_(std::move(data)), sigma_(std::move(sigma)) {}

  std::variant<Vector, Matrix> data_;
  Vector sigma_;
};

/// The solver-facing view: diagonal inputs become diag(entries²), dense ones
/// apply A (Aᵀ x).
GramOperator as_operator(const InputMatrix& a);
GramOperator as_operator(const Vector& sigma);
GramOperator as_operator(const Matrix& a);

}  // namespace klr
