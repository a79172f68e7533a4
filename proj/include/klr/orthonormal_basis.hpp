#pragma once

#include <vector>

#include "klr/types.hpp"

namespace klr {

inline constexpr double kDefaultDropTol = 1e-12;

enum class ExtendOutcome { appended, dropped };

/// Column-orthonormal n x m matrix grown one column at a time by two-pass
/// modified Gram-Schmidt. Columns whose residual falls below
/// drop_tol * (input norm) are discarded and their candidate index recorded.
class OrthonormalBasis {
 public:
  OrthonormalBasis() = default;
  explicit OrthonormalBasis(Index rows, Index capacity_hint = 0);

  /// Adopts columns that are already orthonormal (checked to 1e-10).
  static OrthonormalBasis from_orthonormal(Matrix columns);

  [[nodiscard]] Index rows() const noexcept { return rows_; }
  [[nodiscard]] Index size() const noexcept { return size_; }
  [[nodiscard]] bool empty() const noexcept { return size_ == 0; }

  [[nodiscard]] auto columns() const { return storage_.leftCols(size_); }
  [[nodiscard]] auto column(Index j) const { return storage_.col(j); }
  [[nodiscard]] Matrix matrix() const { return storage_.leftCols(size_); }

  /// Candidate indices (0-based, in insertion-attempt order) that were dropped.
  [[nodiscard]] const std::vector<Index>& drop_log() const noexcept { return drop_log_; }
  [[nodiscard]] Index attempts() const noexcept { return attempts_; }

  /// Orthogonalize v against every column (two MGS passes), normalize, append.
  ExtendOutcome extend(Vector v, double drop_tol = kDefaultDropTol);

  /// Same, but only against columns [first, size()). Used by the Lanczos-local
  /// policy; the result is then orthogonal to the window only.
  ExtendOutcome extend_against_window(Vector v, Index first, double drop_tol = kDefaultDropTol);

  /// Appends a unit column without orthogonalizing (caller guarantees it).
  void append_unchecked(const Vector& v);

  /// max |ZᵀZ - I|.
  [[nodiscard]] double orthogonality_error() const;

 private:
  void grow_to(Index needed);

  Matrix storage_;
  Index rows_ = 0;
  Index size_ = 0;
  Index attempts_ = 0;
  std::vector<Index> drop_log_;
};

/// Two-pass MGS extension, free-function form.
ExtendOutcome mgs_extend(OrthonormalBasis& basis, const Vector& v, double drop_tol = kDefaultDropTol);

/// Orthonormal basis for the column span of b (dependent columns dropped).
OrthonormalBasis orthonormalize(const Matrix& b, double drop_tol = kDefaultDropTol);

}  // namespace klr
