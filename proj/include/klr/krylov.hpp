#pragma once

#include <cstdint>
#include <variant>
#include <vector>

#include "klr/execution.hpp"
#include "klr/gram_operator.hpp"
#include "klr/orthonormal_basis.hpp"
#include "klr/types.hpp"

namespace klr {

/// How each new Krylov column is orthogonalized.
///  full_reorth:   against every earlier column (two MGS passes).
///  lanczos_local: only against the previous two blocks (and earlier columns
///                 of its own block), the pattern of a Lanczos recurrence.
enum class OrthoPolicy { full_reorth, lanczos_local };

const char* to_string(OrthoPolicy policy) noexcept;

struct GaussianStart {};
struct ExplicitStart {
  Matrix block;
};
/// Start from S_ell = [x, Gx, ..., G^{ell-1}x] for a Gaussian x drawn from the
/// seed (the same x single_vector_krylov would draw).
struct SimulatedStart {
  Index ell = 1;
};
using StartBlock = std::variant<GaussianStart, ExplicitStart, SimulatedStart>;

struct SolverConfig {
  Index target_rank = 1;
  Index block_size = 1;
  Index iterations = 0;
  OrthoPolicy policy = OrthoPolicy::full_reorth;
  std::uint64_t seed = 0;
  StartBlock start = GaussianStart{};
  double drop_tol = kDefaultDropTol;
  Execution execution = Execution::serial;
  /// Copy the Krylov basis Z into the result (tests and diagnostics).
  bool keep_basis = false;
};

struct SolverResult {
  /// n x min(k, subspace_dim) orthonormal output.
  Matrix q;
  /// Eigenvalues of M = ZᵀGZ paired with the columns of q, descending.
  Vector ritz_values;
  std::int64_t matvecs = 0;
  Index subspace_dim = 0;
  Index drop_count = 0;
  /// Set when the search space had fewer than k dimensions; q then carries
  /// every available Ritz vector and nothing else.
  bool rank_deficient = false;
  /// max |ZᵀZ - I| of the Krylov basis.
  double orthogonality_loss = 0.0;
  Matrix basis;  // only when SolverConfig::keep_basis
};

/// Incremental block Krylov iteration. After construction it holds
/// iteration 0 (Z = orth(B), GZ cached); each advance() extends Z with the
/// cached products of the newest block and applies G to the new columns.
/// extract() can be called at any point and costs no matvecs, which is how
/// the harness reads off errors at every matvec budget from a single run.
class BlockKrylovIteration {
 public:
  BlockKrylovIteration(GramOperator& op, const Matrix& start, OrthoPolicy policy,
                       double drop_tol = kDefaultDropTol, Execution exec = Execution::serial);

  void advance();

  [[nodiscard]] Index iteration() const noexcept { return iteration_; }
  /// True once the newest block was entirely dropped: the Krylov space is invariant.
  [[nodiscard]] bool exhausted() const noexcept { return last_begin_ == basis_.size(); }
  [[nodiscard]] std::int64_t matvecs() const noexcept { return op_->apply_count() - count_at_start_; }
  [[nodiscard]] Index subspace_dim() const noexcept { return basis_.size(); }
  [[nodiscard]] Index drop_count() const noexcept { return static_cast<Index>(basis_.drop_log().size()); }
  [[nodiscard]] const OrthonormalBasis& basis() const noexcept { return basis_; }
  [[nodiscard]] OrthoPolicy policy() const noexcept { return policy_; }

  /// Rayleigh-Ritz on the current space: top-k eigenvectors of ZᵀGZ.
  [[nodiscard]] SolverResult extract(Index k, bool measure_orthogonality = false, bool keep_basis = false) const;

 private:
  void apply_newest_block();

  GramOperator* op_;
  OrthoPolicy policy_;
  double drop_tol_;
  Execution exec_;
  std::int64_t count_at_start_;
  OrthonormalBasis basis_;
  Matrix gz_;          // G Z, column j valid for j < basis_.size()
  Matrix projected_;   // M = ZᵀGZ, leading size() x size() block valid
  Index last_begin_ = 0;
  Index prev_begin_ = 0;
  Index iteration_ = 0;
  Matrix pending_;     // G applied to the newest block, not yet folded into Z
};

/// [x, Gx, ..., G^{ell-1}x], each column normalized as it is generated.
/// Costs ell - 1 matvecs.
Matrix build_simulated_block(GramOperator& op, const Vector& x, Index ell);

/// Gaussian start vector / block for a seed. single_vector_krylov and the
/// SimulatedStart of block_krylov draw the same vector.
Matrix gaussian_start(Index n, Index columns, std::uint64_t seed);

/// Block Krylov method: Z spans [B, GB, ..., G^t B]; returns Q = Z U_k.
SolverResult block_krylov(GramOperator& op, const SolverConfig& cfg);

/// Block size 1 with a Gaussian (or explicit single-column) start.
SolverResult single_vector_krylov(GramOperator& op, const SolverConfig& cfg);

/// Simultaneous iteration: Z = orth(G^t B), one orthonormalization per power.
/// Uses (t + 1) b matvecs: t b for the powers plus b for ZᵀGZ.
SolverResult simultaneous_iteration(GramOperator& op, const SolverConfig& cfg);

/// Single-vector simultaneous iteration with memory budget ell: Ritz
/// extraction on the window [G^{t-ell+1}x, ..., G^t x]. Uses t + dim(window)
/// matvecs.
SolverResult single_vector_simultaneous(GramOperator& op, const SolverConfig& cfg, Index memory);

/// Estimate of sigma_{k+1} from a short single-vector run (t = k + 10) on a
/// copy of op. Used when a perturbation size has to be chosen blind.
double pilot_sigma_estimate(const GramOperator& op, Index k, std::uint64_t seed);

}  // namespace klr
