#pragma once

#include "klr/orthonormal_basis.hpp"
#include "klr/types.hpp"

namespace klr {

struct SymmetricEigen {
  Vector values;   // descending
  Matrix vectors;  // orthonormal columns, paired with values
};

/// Full symmetric eigendecomposition of a small projected matrix. M is
/// symmetrized first; it must already be symmetric to 1e-8 relative.
/// Ties in the eigenvalues keep the solver's original (ascending) order.
SymmetricEigen eigh_small(const Matrix& m);

/// The top `count` eigenpairs only (count <= rows). Same ordering rules.
SymmetricEigen eigh_top(const Matrix& m, Index count);

/// sqrt(m - ||UᵀV||_F²), evaluated as ||V - U UᵀV||_F so that nearly equal
/// spans do not lose digits to cancellation.
double principal_angle_distance(const Matrix& u, const Matrix& v);
double principal_angle_distance(const OrthonormalBasis& u, const OrthonormalBasis& v);

/// Singular values, descending.
Vector singular_values(const Matrix& a);

}  // namespace klr
