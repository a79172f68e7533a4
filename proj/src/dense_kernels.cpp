#include "klr/dense_kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include <lapacke.h>

namespace klr {

namespace {

Matrix symmetrized(const Matrix& m) {
  if (m.rows() != m.cols()) throw ContractError("eigh needs a square matrix");
  if (!m.allFinite()) throw ContractError("eigh input contains non-finite entries");
  const double scale = m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
  const double asym = m.size() == 0 ? 0.0 : (m - m.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-8 * scale) throw ContractError("eigh input is not symmetric");
  return 0.5 * (m + m.transpose());
}

// LAPACK returns ascending values; reorder descending, ties by ascending
// position in the LAPACK output.
SymmetricEigen sort_descending(const Vector& ascending, const Matrix& vectors) {
  const Index count = ascending.size();
  std::vector<Index> order(static_cast<std::size_t>(count));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return ascending[a] > ascending[b]; });
  SymmetricEigen out{Vector(count), Matrix(vectors.rows(), count)};
  for (Index j = 0; j < count; ++j) {
    out.values[j] = ascending[order[static_cast<std::size_t>(j)]];
    out.vectors.col(j) = vectors.col(order[static_cast<std::size_t>(j)]);
  }
  return out;
}

// Tridiagonalize with Eigen, then MRRR on the tridiagonal for the top
// `count` pairs only.
SymmetricEigen tridiagonal_top(const Matrix& a, Index count) {
  const auto n = static_cast<lapack_int>(a.rows());
  const auto want = static_cast<lapack_int>(count);
  Eigen::Tridiagonalization<Matrix> tri(a);
  Vector diag = tri.diagonal();
  Vector off = Vector::Zero(n);
  off.head(n - 1) = tri.subDiagonal();
  Vector w(n);
  Matrix z(n, want);
  std::vector<lapack_int> support(2 * static_cast<std::size_t>(want));
  lapack_int found = 0;
  lapack_logical tryrac = 1;
  const char range = want == n ? 'A' : 'I';
  const lapack_int info = LAPACKE_dstemr(LAPACK_COL_MAJOR, 'V', range, n, diag.data(), off.data(), 0.0, 0.0,
                                         n - want + 1, n, &found, w.data(), z.data(), n, want, support.data(), &tryrac);
  if (info != 0 || found != want) return {Vector(0), Matrix(0, 0)};
  const Matrix vectors = tri.matrixQ() * z;
  return sort_descending(w.head(found), vectors);
}

// some OpenBLAS kernel builds break the dense LAPACK drivers; check anyway
bool trustworthy(const Matrix& a, const SymmetricEigen& e) {
  const Index count = e.values.size();
  if (e.vectors.cols() != count || e.vectors.rows() != a.rows() || !e.vectors.allFinite()) return false;
  const double scale = std::max(a.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
  const double tol = 1e-10 * std::max<double>(1.0, double(a.rows()));
  const Matrix gram = e.vectors.transpose() * e.vectors - Matrix::Identity(count, count);
  if (count > 0 && gram.cwiseAbs().maxCoeff() > tol) return false;
  const Matrix res = a * e.vectors - e.vectors * e.values.asDiagonal();
  return count == 0 || res.cwiseAbs().maxCoeff() <= tol * scale;
}

SymmetricEigen eigen_fallback(const Matrix& a, Index count) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(a);
  if (es.info() != Eigen::Success) throw std::runtime_error("symmetric eigensolver failed to converge");
  return sort_descending(es.eigenvalues().tail(count), es.eigenvectors().rightCols(count));
}

SymmetricEigen symmetric_top(const Matrix& a, Index count) {
  if (a.rows() == 0 || count == 0) return {Vector(0), Matrix(a.rows(), 0)};
  if (a.rows() == 1) return {a.diagonal(), Matrix::Ones(1, 1)};
  SymmetricEigen e = tridiagonal_top(a, count);
  if (trustworthy(a, e)) return e;
  return eigen_fallback(a, count);
}

}  // namespace

SymmetricEigen eigh_small(const Matrix& m) { return symmetric_top(symmetrized(m), m.rows()); }

SymmetricEigen eigh_top(const Matrix& m, Index count) {
  require(count >= 0 && count <= m.rows(), "eigh_top count out of range");
  return symmetric_top(symmetrized(m), count);
}

double principal_angle_distance(const Matrix& u, const Matrix& v) {
  if (u.rows() != v.rows()) throw ContractError("principal angles need bases of the same ambient dimension");
  if (u.cols() != v.cols()) throw ContractError("principal angles need bases of equal width");
  const Matrix residual = v - u * (u.transpose() * v);
  return residual.norm();
}

double principal_angle_distance(const OrthonormalBasis& u, const OrthonormalBasis& v) {
  return principal_angle_distance(u.matrix(), v.matrix());
}

Vector singular_values(const Matrix& a) {
  if (a.size() == 0) return Vector(0);
  Eigen::BDCSVD<Matrix> svd(a);
  return svd.singularValues();
}

}  // namespace klr
