#include "klr/input_matrix.hpp"

#include <algorithm>
#include <functional>

#include "klr/dense_kernels.hpp"

namespace klr {

InputMatrix InputMatrix::diagonal(Vector entries) {
  require(entries.size() > 0, "diagonal input needs at least one entry");
  require(entries.allFinite(), "diagonal input must be finite");
  Vector sigma = entries.cwiseAbs();
  std::sort(sigma.begin(), sigma.end(), std::greater<>());
  return InputMatrix(std::move(entries), std::move(sigma));
}

InputMatrix InputMatrix::dense(Matrix a) {
  require(a.rows() > 0 && a.cols() > 0, "dense input must be non-empty");
  require(a.allFinite(), "dense input must be finite");
  Vector sigma = klr::singular_values(a);
  return InputMatrix(std::move(a), std::move(sigma));
}

Index InputMatrix::rows() const noexcept {
  return is_diagonal() ? std::get<Vector>(data_).size() : std::get<Matrix>(data_).rows();
}

Index InputMatrix::cols() const noexcept {
  return is_diagonal() ? std::get<Vector>(data_).size() : std::get<Matrix>(data_).cols();
}

Matrix InputMatrix::multiply(const Matrix& x) const {
  if (x.rows() != cols()) throw ContractError("A * X: inner dimensions differ");
  if (is_diagonal()) return diagonal_entries().asDiagonal() * x;
  return dense_matrix() * x;
}

Matrix InputMatrix::multiply_transpose(const Matrix& y) const {
  if (y.rows() != rows()) throw ContractError("Aᵀ * Y: inner dimensions differ");
  if (is_diagonal()) return diagonal_entries().asDiagonal() * y;
  return dense_matrix().transpose() * y;
}

Matrix InputMatrix::to_dense() const {
  if (is_diagonal()) return diagonal_entries().asDiagonal();
  return dense_matrix();
}

InputMatrix InputMatrix::transposed() const {
  if (is_diagonal()) return *this;
  return InputMatrix(Matrix(dense_matrix().transpose()), sigma_);
}

GramOperator as_operator(const InputMatrix& a) {
  if (a.is_diagonal()) return GramOperator::diagonal(a.diagonal_entries());
  return GramOperator::dense(a.dense_matrix());
}

GramOperator as_operator(const Vector& sigma) { return GramOperator::from_spectrum(sigma); }

GramOperator as_operator(const Matrix& a) { return GramOperator::dense(a); }

}  // namespace klr
