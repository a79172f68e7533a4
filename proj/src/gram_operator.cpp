#include "klr/gram_operator.hpp"

#include <cmath>

#include <omp.h>

#include "klr/rng.hpp"

namespace klr {

int max_threads() noexcept { return omp_get_max_threads(); }

namespace {

constexpr std::uint64_t kPerturbationStream = hash_label("diagonal-perturbation");

void scale_rows_serial(const Vector& w, const Matrix& x, Matrix& out) {
  for (Index j = 0; j < x.cols(); ++j) out.col(j) = w.cwiseProduct(x.col(j));
}

void scale_rows_parallel(const Vector& w, const Matrix& x, Matrix& out) {
  const Index cols = x.cols();
#pragma omp parallel for schedule(static) if (cols > 1)
  for (Index j = 0; j < cols; ++j) out.col(j) = w.cwiseProduct(x.col(j));
}

}  // namespace

DiagonalPerturbation DiagonalPerturbation::draw(Index n, double delta, std::uint64_t seed) {
  require(n >= 0, "perturbation dimension must be non-negative");
  require(std::isfinite(delta) && delta >= 0.0, "perturbation delta must be finite and >= 0");
  DiagonalPerturbation d{delta, seed, Vector::Zero(n)};
  if (delta == 0.0) return d;
  Rng rng(seed, kPerturbationStream);
  for (Index i = 0; i < n; ++i) d.entries[i] = rng.uniform(-delta, delta);
  return d;
}

double DiagonalPerturbation::norm() const {
  return entries.size() == 0 ? 0.0 : entries.cwiseAbs().maxCoeff();
}

GramOperator GramOperator::diagonal(Vector a) {
  require(a.size() > 0, "diagonal operator needs at least one entry");
  require(a.allFinite(), "diagonal entries must be finite");
  const Index n = a.size();
  return GramOperator(Diagonal{a.cwiseAbs2()}, n);
}

GramOperator GramOperator::from_spectrum(Vector sigma) {
  require((sigma.array() >= 0.0).all(), "singular values must be non-negative");
  return diagonal(std::move(sigma));
}

GramOperator GramOperator::dense(Matrix a) {
  require(a.rows() > 0 && a.cols() > 0, "dense operator needs a non-empty matrix");
  require(a.allFinite(), "dense operator entries must be finite");
  const Index n = a.rows();
  return GramOperator(Dense{std::move(a)}, n);
}

std::string_view GramOperator::kind() const noexcept {
  const bool diag = std::holds_alternative<Diagonal>(kernel_);
  if (has_shift()) return diag ? "diagonal+shift" : "dense+shift";
  return diag ? "diagonal" : "dense";
}

void GramOperator::check_input(const Matrix& x) const {
  if (x.rows() != rows_) throw ContractError("Gram operator applied to a block with the wrong row count");
  if (!x.allFinite()) throw ContractError("Gram operator input contains non-finite entries");
}

Vector GramOperator::apply(const Vector& x) {
  check_input(x);
  Vector y;
  if (const auto* d = std::get_if<Diagonal>(&kernel_)) {
    y = d->squared.cwiseProduct(x);
  } else {
    const auto& a = std::get<Dense>(kernel_).a;
    const Vector atx = a.transpose() * x;
    y = a * atx;
  }
  if (has_shift()) y += shift_.cwiseProduct(x);
  ++count_;
  return y;
}

Matrix GramOperator::apply_block(const Matrix& x, Execution exec) {
  check_input(x);
  Matrix y(rows_, x.cols());
  if (x.cols() == 0) return y;
  if (const auto* d = std::get_if<Diagonal>(&kernel_)) {
    if (exec == Execution::parallel)
      scale_rows_parallel(d->squared, x, y);
    else
      scale_rows_serial(d->squared, x, y);
  } else {
    const auto& a = std::get<Dense>(kernel_).a;
    const Matrix atx = a.transpose() * x;
    y.noalias() = a * atx;
  }
  if (has_shift()) {
    Matrix shifted(rows_, x.cols());
    if (exec == Execution::parallel)
      scale_rows_parallel(shift_, x, shifted);
    else
      scale_rows_serial(shift_, x, shifted);
    y += shifted;
  }
  count_ += x.cols();
  return y;
}

GramOperator GramOperator::with_shift(const Vector& d) const {
  require(d.size() == rows_, "shift length must match operator dimension");
  require(d.allFinite(), "shift entries must be finite");
  GramOperator copy = *this;
  copy.shift_ = has_shift() ? Vector(shift_ + d) : d;
  copy.count_ = 0;
  return copy;
}

Matrix GramOperator::to_dense() const {
  Matrix g;
  if (const auto* d = std::get_if<Diagonal>(&kernel_)) {
    g = d->squared.asDiagonal();
  } else {
    const auto& a = std::get<Dense>(kernel_).a;
    g = a * a.transpose();
  }
  if (has_shift()) g.diagonal() += shift_;
  return g;
}

GramOperator perturb_diagonal(const Vector& sigma, double delta, std::uint64_t seed) {
  require((sigma.array() >= 0.0).all(), "PSD route needs a non-negative diagonal");
  const auto d = DiagonalPerturbation::draw(sigma.size(), delta, seed);
  return GramOperator::diagonal(sigma + d.entries);
}

GramOperator perturb_diagonal(const Matrix& symmetric, double delta, std::uint64_t seed) {
  require(symmetric.rows() == symmetric.cols(), "PSD route needs a square matrix");
  const double scale = std::max(1.0, symmetric.cwiseAbs().maxCoeff());
  require((symmetric - symmetric.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale,
          "PSD route needs a symmetric matrix");
  const auto d = DiagonalPerturbation::draw(symmetric.rows(), delta, seed);
  Matrix perturbed = symmetric;
  perturbed.diagonal() += d.entries;
  return GramOperator::dense(std::move(perturbed));
}

GramOperator perturb_diagonal(const GramOperator& op, double delta, std::uint64_t seed) {
  const auto d = DiagonalPerturbation::draw(op.rows(), delta, seed);
  if (delta == 0.0) {
    GramOperator copy = op;
    copy.reset_count();
    return copy;
  }
  return op.with_shift(d.entries);
}

double recommended_delta(double sigma_kplus1, Index n, double eps) {
  require(sigma_kplus1 > 0.0, "sigma_{k+1} must be positive");
  require(n > 0, "dimension must be positive");
  require(eps > 0.0 && eps < 1.0, "eps must lie in (0, 1)");
  return eps * sigma_kplus1 / (3.0 * static_cast<double>(n));
}

double recommended_delta_gram(double sigma_kplus1, Index n, double eps) {
  require(sigma_kplus1 > 0.0, "sigma_{k+1} must be positive");
  require(n > 0, "dimension must be positive");
  require(eps > 0.0 && eps < 1.0, "eps must lie in (0, 1)");
  return eps * sigma_kplus1 * sigma_kplus1 / (3.0 * static_cast<double>(n));
}

}  // namespace klr
