#include "klr/orthonormal_basis.hpp"

#include <algorithm>
#include <cmath>

namespace klr {

OrthonormalBasis::OrthonormalBasis(Index rows, Index capacity_hint)
    : storage_(rows, std::max<Index>(capacity_hint, 0)), rows_(rows) {
  require(rows >= 0, "basis row count must be non-negative");
}

OrthonormalBasis OrthonormalBasis::from_orthonormal(Matrix columns) {
  OrthonormalBasis basis(columns.rows(), columns.cols());
  basis.storage_ = std::move(columns);
  basis.size_ = basis.storage_.cols();
  basis.attempts_ = basis.size_;
  if (basis.orthogonality_error() > 1e-10)
    throw ContractError("columns passed to from_orthonormal are not orthonormal");
  return basis;
}

void OrthonormalBasis::grow_to(Index needed) {
  if (needed <= storage_.cols()) return;
  const Index capacity = std::max<Index>(needed, 2 * storage_.cols() + 4);
  Matrix bigger(rows_, capacity);
  bigger.leftCols(size_) = storage_.leftCols(size_);
  storage_.swap(bigger);
}

void OrthonormalBasis::append_unchecked(const Vector& v) {
  require(v.size() == rows_, "column length does not match basis rows");
  grow_to(size_ + 1);
  storage_.col(size_) = v;
  ++size_;
  ++attempts_;
}

ExtendOutcome OrthonormalBasis::extend(Vector v, double drop_tol) {
  return extend_against_window(std::move(v), 0, drop_tol);
}

ExtendOutcome OrthonormalBasis::extend_against_window(Vector v, Index first, double drop_tol) {
  if (v.size() != rows_) throw ContractError("vector length does not match basis rows");
  require(drop_tol > 0.0, "drop_tol must be positive");
  require(first >= 0 && first <= size_, "window start out of range");
  const Index candidate = attempts_++;

  const double input_norm = v.norm();
  if (!std::isfinite(input_norm)) throw ContractError("cannot orthogonalize a non-finite vector");

  for (int pass = 0; pass < 2; ++pass) {
    for (Index j = first; j < size_; ++j) {
      const double coeff = storage_.col(j).dot(v);
      v.noalias() -= coeff * storage_.col(j);
    }
  }
  const double residual = v.norm();
  if (input_norm == 0.0 || residual < drop_tol * input_norm) {
    drop_log_.push_back(candidate);
    return ExtendOutcome::dropped;
  }
  grow_to(size_ + 1);
  storage_.col(size_) = v / residual;
  ++size_;
  return ExtendOutcome::appended;
}

double OrthonormalBasis::orthogonality_error() const {
  if (size_ == 0) return 0.0;
  const auto z = columns();
  Matrix gram = z.transpose() * z;
  gram.diagonal().array() -= 1.0;
  return gram.cwiseAbs().maxCoeff();
}

ExtendOutcome mgs_extend(OrthonormalBasis& basis, const Vector& v, double drop_tol) {
  return basis.extend(v, drop_tol);
}

OrthonormalBasis orthonormalize(const Matrix& b, double drop_tol) {
  OrthonormalBasis basis(b.rows(), b.cols());
  for (Index j = 0; j < b.cols(); ++j) basis.extend(b.col(j), drop_tol);
  return basis;
}

}  // namespace klr
