#include "klr/krylov.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "klr/dense_kernels.hpp"
#include "klr/rng.hpp"

namespace klr {

const char* to_string(OrthoPolicy policy) noexcept {
  switch (policy) {
    case OrthoPolicy::full_reorth:
      return "full_reorth";
    case OrthoPolicy::lanczos_local:
      return "lanczos_local";
  }
  return "unknown";
}

namespace {

// numerical rank cut for orth(K) under local orthogonalization; keeps the
// R^-1 amplification of roundoff near 1e-12
constexpr double kLocalRankTol = 1e-4;

void grow_columns(Matrix& m, Index rows, Index needed) {
  if (needed <= m.cols()) return;
  m.conservativeResize(rows, std::max<Index>(needed, 2 * m.cols() + 4));
}

void grow_square(Matrix& m, Index needed) {
  if (needed <= m.cols()) return;
  m.conservativeResize(std::max<Index>(needed, 2 * m.cols() + 4), std::max<Index>(needed, 2 * m.cols() + 4));
}

// Rayleigh-Ritz from a basis Z and its products GZ.
SolverResult ritz_from(const Matrix& z, const Matrix& gz, Index k) {
  SolverResult res;
  const Index m = z.cols();
  res.subspace_dim = m;
  res.rank_deficient = m < k;
  if (m == 0) {
    res.q = Matrix(z.rows(), 0);
    res.ritz_values = Vector(0);
    return res;
  }
  Matrix proj = z.transpose() * gz;
  proj = 0.5 * (proj + proj.transpose()).eval();
  const SymmetricEigen eig = eigh_top(proj, std::min(k, m));
  res.q = z * eig.vectors;
  res.ritz_values = eig.values;
  return res;
}

void check_rank_and_iterations(const SolverConfig& cfg) {
  require(cfg.target_rank >= 1, "target rank k must be positive");
  require(cfg.block_size >= 1, "block size b must be positive");
  require(cfg.iterations >= 0, "iterations t must be non-negative");
}

}  // namespace

BlockKrylovIteration::BlockKrylovIteration(GramOperator& op, const Matrix& start, OrthoPolicy policy,
                                           double drop_tol, Execution exec)
    : op_(&op),
      policy_(policy),
      drop_tol_(drop_tol),
      exec_(exec),
      count_at_start_(op.apply_count()),
      basis_(op.rows(), start.cols()) {
  if (start.rows() != op.rows()) throw ContractError("start block row count does not match the operator");
  require(start.cols() >= 1, "start block needs at least one column");
  require(start.allFinite(), "start block must be finite");
  for (Index j = 0; j < start.cols(); ++j) basis_.extend(start.col(j), drop_tol_);
  if (basis_.empty()) throw SolverError("degenerate start block: every column is zero or dependent");
  apply_newest_block();
}

void BlockKrylovIteration::apply_newest_block() {
  const Index m = basis_.size();
  const Index s = last_begin_;
  const Index width = m - s;
  pending_ = op_->apply_block(basis_.columns().middleCols(s, width), exec_);

  grow_columns(gz_, op_->rows(), m);
  gz_.middleCols(s, width) = pending_;

  grow_square(projected_, m);
  const Matrix c = basis_.columns().transpose() * pending_;  // m x width
  projected_.block(0, s, s, width) = c.topRows(s);
  projected_.block(s, 0, width, s) = c.topRows(s).transpose();
  projected_.block(s, s, width, width) = 0.5 * (c.bottomRows(width) + c.bottomRows(width).transpose());
}

void BlockKrylovIteration::advance() {
  ++iteration_;
  if (exhausted()) return;
  const Index new_begin = basis_.size();
  const Index window = policy_ == OrthoPolicy::full_reorth ? 0 : prev_begin_;
  for (Index j = 0; j < pending_.cols(); ++j) basis_.extend_against_window(pending_.col(j), window, drop_tol_);
  prev_begin_ = last_begin_;
  last_begin_ = new_begin;
  if (exhausted()) {
    pending_.resize(op_->rows(), 0);
    return;
  }
  apply_newest_block();
}

SolverResult BlockKrylovIteration::extract(Index k, bool measure_orthogonality, bool keep_basis) const {
  require(k >= 1, "target rank k must be positive");
  SolverResult res;
  const Index m = basis_.size();
  res.subspace_dim = m;
  res.rank_deficient = m < k;
  res.matvecs = matvecs();
  res.drop_count = drop_count();
  if (policy_ == OrthoPolicy::full_reorth) {
    const SymmetricEigen eig = eigh_top(projected_.topLeftCorner(m, m), std::min(k, m));
    res.ritz_values = eig.values;
    res.q = basis_.columns() * eig.vectors;
  } else {
    // K is only locally orthogonal: Rayleigh-Ritz on orth(K) = K P R^-1,
    // with G orth(K) taken from the cached GK
    Eigen::ColPivHouseholderQR<Matrix> qr(basis_.columns());
    qr.setThreshold(kLocalRankTol);
    const Index r = qr.rank();
    const Matrix z = qr.householderQ() * Matrix::Identity(basis_.rows(), r);
    const Matrix gk = gz_.leftCols(m) * qr.colsPermutation();
    const Matrix gz = qr.matrixR()
                          .topLeftCorner(r, r)
                          .triangularView<Eigen::Upper>()
                          .transpose()
                          .solve(gk.leftCols(r).transpose())
                          .transpose();
    const Matrix projected = z.transpose() * gz;
    const SymmetricEigen eig = eigh_top(0.5 * (projected + projected.transpose()), std::min(k, r));
    res.ritz_values = eig.values;
    res.q = z * eig.vectors;
    res.rank_deficient = r < k;
  }
  if (measure_orthogonality) res.orthogonality_loss = basis_.orthogonality_error();
  if (keep_basis) res.basis = basis_.matrix();
  return res;
}

Matrix build_simulated_block(GramOperator& op, const Vector& x, Index ell) {
  require(ell >= 1, "simulated block needs ell >= 1");
  if (x.size() != op.rows()) throw ContractError("start vector length does not match the operator");
  const double nx = x.norm();
  require(std::isfinite(nx), "start vector must be finite");
  if (nx == 0.0) throw SolverError("degenerate start vector");
  Matrix s(op.rows(), ell);
  s.col(0) = x / nx;
  for (Index j = 1; j < ell; ++j) {
    Vector w = op.apply(s.col(j - 1));
    const double nw = w.norm();
    if (nw > 0.0) w /= nw;
    s.col(j) = w;
  }
  return s;
}

Matrix gaussian_start(Index n, Index columns, std::uint64_t seed) {
  return Rng(seed).normal_matrix(n, columns);
}

SolverResult block_krylov(GramOperator& op, const SolverConfig& cfg) {
  check_rank_and_iterations(cfg);
  const Index n = op.rows();
  const std::int64_t count0 = op.apply_count();

  Matrix start;
  if (std::holds_alternative<GaussianStart>(cfg.start)) {
    start = gaussian_start(n, cfg.block_size, cfg.seed);
  } else if (const auto* e = std::get_if<ExplicitStart>(&cfg.start)) {
    if (e->block.rows() != n) throw ContractError("explicit start block row count does not match the operator");
    require(e->block.cols() >= 1, "explicit start block needs at least one column");
    start = e->block;
  } else {
    const Index ell = std::get<SimulatedStart>(cfg.start).ell;
    require(cfg.block_size == 1, "a simulated start block requires block size 1");
    require(ell >= cfg.target_rank, "a simulated start block requires ell >= k");
    start = build_simulated_block(op, gaussian_start(n, 1, cfg.seed).col(0), ell);
  }
  if ((cfg.iterations + 1) * start.cols() < cfg.target_rank)
    throw ContractError("insufficient subspace: (t + 1) * b < k");

  BlockKrylovIteration it(op, start, cfg.policy, cfg.drop_tol, cfg.execution);
  for (Index i = 0; i < cfg.iterations; ++i) it.advance();
  SolverResult res = it.extract(cfg.target_rank, true, cfg.keep_basis);
  res.matvecs = op.apply_count() - count0;
  return res;
}

SolverResult single_vector_krylov(GramOperator& op, const SolverConfig& cfg) {
  require(cfg.block_size == 1, "single-vector Krylov requires block size 1");
  require(!std::holds_alternative<SimulatedStart>(cfg.start), "single-vector Krylov takes a Gaussian or explicit start");
  if (const auto* e = std::get_if<ExplicitStart>(&cfg.start))
    require(e->block.cols() == 1, "single-vector Krylov takes a one-column start");
  return block_krylov(op, cfg);
}

SolverResult simultaneous_iteration(GramOperator& op, const SolverConfig& cfg) {
  check_rank_and_iterations(cfg);
  const Index n = op.rows();
  const std::int64_t count0 = op.apply_count();
  Matrix start;
  if (std::holds_alternative<GaussianStart>(cfg.start)) {
    start = gaussian_start(n, cfg.block_size, cfg.seed);
  } else if (const auto* e = std::get_if<ExplicitStart>(&cfg.start)) {
    if (e->block.rows() != n) throw ContractError("explicit start block row count does not match the operator");
    start = e->block;
  } else {
    throw ContractError("simultaneous iteration takes a Gaussian or explicit start");
  }
  require(start.cols() >= cfg.target_rank, "simultaneous iteration requires b >= k");
  require(start.allFinite(), "start block must be finite");

  OrthonormalBasis z = orthonormalize(start, cfg.drop_tol);
  if (z.empty()) throw SolverError("degenerate start block: every column is zero or dependent");
  Index dropped = static_cast<Index>(z.drop_log().size());
  for (Index i = 0; i < cfg.iterations; ++i) {
    z = orthonormalize(op.apply_block(z.matrix(), cfg.execution), cfg.drop_tol);
    if (z.empty()) throw SolverError("simultaneous iteration collapsed onto the null space of G");
    dropped += static_cast<Index>(z.drop_log().size());
  }
  const Matrix zm = z.matrix();
  const Matrix gz = op.apply_block(zm, cfg.execution);
  SolverResult res = ritz_from(zm, gz, cfg.target_rank);
  res.matvecs = op.apply_count() - count0;
  res.drop_count = dropped;
  res.orthogonality_loss = z.orthogonality_error();
  if (cfg.keep_basis) res.basis = zm;
  return res;
}

SolverResult single_vector_simultaneous(GramOperator& op, const SolverConfig& cfg, Index memory) {
  check_rank_and_iterations(cfg);
  require(cfg.block_size == 1, "single-vector simultaneous iteration requires block size 1");
  require(memory >= cfg.target_rank, "memory budget ell must be at least k");
  require(cfg.iterations >= memory - 1, "single-vector simultaneous iteration requires t >= ell - 1");
  const Index n = op.rows();
  const std::int64_t count0 = op.apply_count();

  Vector v;
  if (const auto* e = std::get_if<ExplicitStart>(&cfg.start)) {
    if (e->block.rows() != n || e->block.cols() != 1) throw ContractError("explicit start must be one n-vector");
    v = e->block.col(0);
  } else {
    require(std::holds_alternative<GaussianStart>(cfg.start), "simultaneous iteration takes a Gaussian or explicit start");
    v = gaussian_start(n, 1, cfg.seed).col(0);
  }
  const double nv = v.norm();
  require(std::isfinite(nv), "start vector must be finite");
  if (nv == 0.0) throw SolverError("degenerate start vector");
  v /= nv;

  std::deque<Vector> window{v};
  for (Index i = 1; i <= cfg.iterations; ++i) {
    v = op.apply(v);
    const double nw = v.norm();
    if (nw == 0.0) throw SolverError("power sequence collapsed onto the null space of G");
    v /= nw;
    window.push_back(v);
    if (static_cast<Index>(window.size()) > memory) window.pop_front();
  }
  Matrix w(n, static_cast<Index>(window.size()));
  for (Index j = 0; j < w.cols(); ++j) w.col(j) = window[static_cast<std::size_t>(j)];
  const OrthonormalBasis z = orthonormalize(w, cfg.drop_tol);
  const Matrix zm = z.matrix();
  const Matrix gz = op.apply_block(zm, cfg.execution);
  SolverResult res = ritz_from(zm, gz, cfg.target_rank);
  res.matvecs = op.apply_count() - count0;
  res.drop_count = static_cast<Index>(z.drop_log().size());
  res.orthogonality_loss = z.orthogonality_error();
  if (cfg.keep_basis) res.basis = zm;
  return res;
}

double pilot_sigma_estimate(const GramOperator& op, Index k, std::uint64_t seed) {
  require(k >= 1, "target rank k must be positive");
  GramOperator copy = op;
  SolverConfig cfg;
  cfg.target_rank = k + 1;
  cfg.iterations = k + 10;
  cfg.seed = seed;
  const SolverResult res = single_vector_krylov(copy, cfg);
  if (res.ritz_values.size() <= k) return 0.0;
  return std::sqrt(std::max(0.0, res.ritz_values[k]));
}

}  // namespace klr
