#include "klr/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "klr/dense_kernels.hpp"

namespace klr {

Norm Norm::schatten(double p) {
  require(p >= 1.0, "Schatten p must be at least 1");
  if (std::isinf(p)) return spectral();
  return {Kind::schatten, p};
}

double schatten_from_values(const Vector& values, double p) {
  require(p >= 1.0, "Schatten p must be at least 1");
  if (values.size() == 0) return 0.0;
  const double top = values.cwiseAbs().maxCoeff();
  if (top == 0.0 || std::isinf(p)) return top;
  if (p == 2.0) return values.stableNorm();
  double sum = 0.0;
  // Smallest first, scaled by the largest, to keep the sum accurate.
  std::vector<double> scaled(values.begin(), values.end());
  for (double& v : scaled) v = std::abs(v) / top;
  std::sort(scaled.begin(), scaled.end());
  for (double v : scaled) sum += std::pow(v, p);
  return top * std::pow(sum, 1.0 / p);
}

double optimal_residual(const Vector& sigma, Index k, Norm norm) {
  require(k >= 0, "rank k must be non-negative");
  if (k >= sigma.size()) return 0.0;
  const Vector tail = sigma.tail(sigma.size() - k);
  switch (norm.kind) {
    case Norm::Kind::frobenius:
      return tail.stableNorm();
    case Norm::Kind::spectral:
      return tail.cwiseAbs().maxCoeff();
    case Norm::Kind::schatten:
      return schatten_from_values(tail, norm.p);
  }
  return 0.0;
}

Vector residual_singular_values(const InputMatrix& a, const Matrix& q) {
  if (q.rows() != a.rows()) throw ContractError("Q row count does not match A");
  Matrix r = a.to_dense();
  if (q.cols() > 0) r -= q * (q.transpose() * r);
  return singular_values(r);
}

namespace {

// ||(I - QQᵀ) diag(a)||_F without forming the n x n residual. Rows where Q
// has most of its mass get the explicit column residual; elsewhere
// 1 - ||Q_j||² is already accurate to relative precision.
double diagonal_frobenius_residual(const Vector& a, const Matrix& q) {
  const Index n = a.size();
  const Vector row_mass = q.rowwise().squaredNorm();
  double sum = 0.0;
  std::vector<double> terms;
  terms.reserve(static_cast<std::size_t>(n));
  for (Index j = 0; j < n; ++j) {
    const double aj2 = a[j] * a[j];
    if (aj2 == 0.0) continue;
    double col;
    if (row_mass[j] > 0.25) {
      Vector r = -(q * q.row(j).transpose());
      r[j] += 1.0;
      col = r.squaredNorm();
    } else {
      col = 1.0 - row_mass[j];
    }
    terms.push_back(aj2 * col);
  }
  std::sort(terms.begin(), terms.end());
  for (double t : terms) sum += t;
  return std::sqrt(sum);
}

}  // namespace

double residual_norm(const InputMatrix& a, const Matrix& q, Norm norm) {
  if (q.rows() != a.rows()) throw ContractError("Q row count does not match A");
  if (norm.kind == Norm::Kind::frobenius) {
    if (a.is_diagonal()) return diagonal_frobenius_residual(a.diagonal_entries(), q);
    const Matrix& d = a.dense_matrix();
    if (q.cols() == 0) return d.norm();
    return (d - q * (q.transpose() * d)).norm();
  }
  const Vector values = residual_singular_values(a, q);
  if (norm.kind == Norm::Kind::spectral) return values.size() ? values[0] : 0.0;
  return schatten_from_values(values, norm.p);
}

double epsilon_empirical(const InputMatrix& a, const Matrix& q, Index k, Norm norm) {
  require(k >= 1, "rank k must be positive");
  const double opt = optimal_residual(a.singular_values(), k, norm);
  if (!(opt > 0.0)) throw ContractError("epsilon is undefined: A - A_k is zero (A has rank at most k)");
  return (residual_norm(a, q, norm) - opt) / opt;
}

double schatten_residual(const InputMatrix& a, const Matrix& z, double p) {
  const Norm norm = std::isinf(p) ? Norm::spectral() : Norm::schatten(p);
  if (norm.kind == Norm::Kind::schatten && p == 2.0) return residual_norm(a, z, Norm::frobenius());
  return residual_norm(a, z, norm);
}

SchattenPipelineResult schatten_pipeline(const InputMatrix& a, const SolverConfig& cfg,
                                         const std::vector<double>& p_values) {
  SchattenPipelineResult out;
  const Index k = cfg.target_rank;

  GramOperator on_transpose = as_operator(a.transposed());
  const SolverResult run_t = single_vector_krylov(on_transpose, cfg);
  out.q = run_t.q;
  out.matvecs = run_t.matvecs;
  out.z = orthonormalize(a.multiply(out.q), cfg.drop_tol).matrix();

  GramOperator direct_op = as_operator(a);
  const SolverResult run_direct = single_vector_krylov(direct_op, cfg);

  const Vector two_step_values = residual_singular_values(a, out.z);
  const Vector direct_values = residual_singular_values(a, run_direct.q);
  for (double p : p_values) {
    require(p >= 1.0, "Schatten p must be at least 1");
    out.p_values.push_back(p);
    out.two_step.push_back(schatten_from_values(two_step_values, p));
    out.direct.push_back(schatten_from_values(direct_values, p));
    out.optimum.push_back(optimal_residual(a.singular_values(), k, std::isinf(p) ? Norm::spectral() : Norm::schatten(p)));
  }
  return out;
}

SingularValueErrors singular_value_errors(const GramOperator& op, const Matrix& q, const Vector& sigma, Index k) {
  require(k >= 1, "rank k must be positive");
  if (q.rows() != op.rows()) throw ContractError("Q row count does not match the operator");
  const Index m = std::min<Index>(q.cols(), k);
  require(sigma.size() >= m, "spectrum is shorter than the number of vectors");
  GramOperator copy = op;
  const Matrix gq = copy.apply_block(q.leftCols(m));
  SingularValueErrors out;
  out.errors.resize(m);
  const double tail = sigma.size() > k ? sigma[k] * sigma[k] : 0.0;
  out.absolute = !(tail > 0.0);
  for (Index i = 0; i < m; ++i) {
    const double err = std::abs(q.col(i).dot(gq.col(i)) - sigma[i] * sigma[i]);
    out.errors[i] = out.absolute ? err : err / tail;
  }
  return out;
}

}  // namespace klr
