#pragma once

#include <limits>
#include <vector>

#include "klr/gram_operator.hpp"
#include "klr/input_matrix.hpp"
#include "klr/krylov.hpp"
#include "klr/types.hpp"

namespace klr {

inline constexpr double kEpsilonFloor = 1e-15;
inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Which norm a residual is measured in. Schatten p = 2 is Frobenius,
/// p = infinity is spectral.
struct Norm {
  enum class Kind { frobenius, spectral, schatten } kind = Kind::frobenius;
  double p = 2.0;

  static Norm frobenius() { return {Kind::frobenius, 2.0}; }
  static Norm spectral() { return {Kind::spectral, kInfinity}; }
  static Norm schatten(double p);
};

/// (sum v_i^p)^(1/p) for non-negative v; p = infinity gives max v_i.
double schatten_from_values(const Vector& values, double p);

/// ||A - A_k|| from the descending singular values alone.
double optimal_residual(const Vector& sigma, Index k, Norm norm = Norm::frobenius());

/// Singular values of A - Q QᵀA (dense evaluation).
Vector residual_singular_values(const InputMatrix& a, const Matrix& q);

/// ||A - Q QᵀA||. Frobenius on a diagonal A is evaluated row by row so that
/// the excess over the optimum stays resolvable near 1e-15.
double residual_norm(const InputMatrix& a, const Matrix& q, Norm norm = Norm::frobenius());

/// (||A - QQᵀA|| - ||A - A_k||) / ||A - A_k||, unfloored.
/// Throws ContractError when ||A - A_k|| = 0.
double epsilon_empirical(const InputMatrix& a, const Matrix& q, Index k, Norm norm = Norm::frobenius());

/// Reporting floor: max(raw, 1e-15).
inline double floor_epsilon(double raw) noexcept { return raw < kEpsilonFloor ? kEpsilonFloor : raw; }

/// ||A - Z ZᵀA||_p for p >= 1 (p = infinity allowed).
double schatten_residual(const InputMatrix& a, const Matrix& z, double p);

struct SchattenPipelineResult {
  Matrix q;                            // d x k, from the run on Aᵀ
  Matrix z;                            // n x k, orthonormal basis of A Q
  std::vector<double> p_values;
  std::vector<double> two_step;        // ||A - Z ZᵀA||_p
  std::vector<double> direct;          // ||A - Q' Q'ᵀA||_p, Q' from a run on A itself
  std::vector<double> optimum;         // ||A - A_k||_p
  std::int64_t matvecs = 0;            // of the run on Aᵀ
};

/// Runs single-vector Krylov on Aᵀ (operator AᵀA), sets Z = orth(AQ), and
/// evaluates both residual families at every p in p_values.
SchattenPipelineResult schatten_pipeline(const InputMatrix& a, const SolverConfig& cfg,
                                         const std::vector<double>& p_values);

struct SingularValueErrors {
  Vector errors;          // |q_iᵀGq_i - sigma_i²| / sigma_{k+1}², or absolute when flagged
  bool absolute = false;  // sigma_{k+1} = 0 (or unavailable)
};

/// Per-vector singular value estimate errors. Works on a copy of op, so the
/// caller's counter is untouched.
SingularValueErrors singular_value_errors(const GramOperator& op, const Matrix& q, const Vector& sigma, Index k);

}  // namespace klr
