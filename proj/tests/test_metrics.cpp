#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>

#include "klr/dense_kernels.hpp"
#include "klr/diagnostics.hpp"
#include "klr/input_matrix.hpp"
#include "klr/krylov.hpp"
#include "klr/metrics.hpp"
#include "klr/rng.hpp"
#include "klr/spectrum.hpp"

using namespace klr;

namespace {

Matrix coords(Index n, std::initializer_list<Index> idx) {
  Matrix q = Matrix::Zero(n, static_cast<Index>(idx.size()));
  Index j = 0;
  for (Index i : idx) q(i, j++) = 1.0;
  return q;
}

Matrix random_psd(Rng& rng, Index n) {
  const Matrix g = rng.normal_matrix(n, n);
  return g * g.transpose() / double(n);
}

}  // namespace

TEST_CASE("epsilon examples") {
  const InputMatrix a = InputMatrix::diagonal(Vector{{2.0, 1.0}});
  CHECK(epsilon_empirical(a, coords(2, {0}), 1) == doctest::Approx(0.0));
  CHECK(epsilon_empirical(a, coords(2, {1}), 1) == doctest::Approx(1.0));

  Rng rng(2);
  const Matrix m = rng.normal_matrix(25, 25);
  const InputMatrix d = InputMatrix::dense(m);
  GramOperator op = as_operator(m);
  SolverConfig c;
  c.target_rank = 5;
  c.iterations = 24;
  const SolverResult r = single_vector_krylov(op, c);
  CHECK(epsilon_empirical(d, r.q, 5) <= 1e-8);
  CHECK(epsilon_empirical(d, r.q, 5) >= -1e-10);
}

TEST_CASE("epsilon needs a non-zero optimum") {
  const InputMatrix a = InputMatrix::diagonal(Vector{{2.0, 0.0}});
  CHECK_THROWS_AS(epsilon_empirical(a, coords(2, {0}), 1), ContractError);
}

TEST_CASE("diagonal residual agrees with the dense oracle") {
  Rng rng(3);
  const Vector sigma = generate(SpectrumSpec{spectra::Polynomial{1.0}, 60});
  const InputMatrix a = InputMatrix::diagonal(sigma);
  const Matrix dense = sigma.asDiagonal();
  const Matrix q = orthonormalize(rng.normal_matrix(60, 7)).matrix();
  const double oracle = (dense - q * (q.transpose() * dense)).norm();
  CHECK(residual_norm(a, q) == doctest::Approx(oracle).epsilon(1e-12));
  const Eigen::JacobiSVD<Matrix> svd(dense - q * (q.transpose() * dense));
  CHECK(residual_norm(a, q, Norm::spectral()) == doctest::Approx(svd.singularValues()[0]).epsilon(1e-12));
}

TEST_CASE("floor") {
  CHECK(floor_epsilon(-1e-17) == kEpsilonFloor);
  CHECK(floor_epsilon(0.5) == 0.5);
}

TEST_CASE("schatten residual examples") {
  const InputMatrix a = InputMatrix::diagonal(Vector{{3.0, 4.0}});
  CHECK(schatten_residual(a, Matrix(2, 0), 2.0) == doctest::Approx(5.0));
  const InputMatrix b = InputMatrix::diagonal(Vector{{3.0, 2.0, 1.0}});
  CHECK(schatten_residual(b, coords(3, {0}), 1.0) == doctest::Approx(3.0));
  CHECK(schatten_residual(b, coords(3, {0}), kInfinity) == doctest::Approx(2.0));
  CHECK(schatten_residual(b, coords(3, {0}), kInfinity) == doctest::Approx(residual_norm(b, coords(3, {0}), Norm::spectral())));
}

TEST_CASE("optimal residual is the tail norm") {
  const Vector s{{4.0, 3.0, 2.0, 1.0}};
  CHECK(optimal_residual(s, 2) == doctest::Approx(std::sqrt(5.0)));
  CHECK(optimal_residual(s, 2, Norm::spectral()) == doctest::Approx(2.0));
  CHECK(optimal_residual(s, 1, Norm::schatten(1.0)) == doctest::Approx(6.0));
}

TEST_CASE("schatten pipeline on a diagonal input") {
  const Index n = 300, k = 10;
  const Vector sigma = generate(SpectrumSpec{spectra::Polynomial{1.5}, n});
  const InputMatrix a = InputMatrix::diagonal(sigma);
  SolverConfig c;
  c.target_rank = k;
  c.iterations = 120;
  const std::vector<double> ps{1.0, 2.0, 4.0, kInfinity};
  const SchattenPipelineResult r = schatten_pipeline(a, c, ps);
  for (std::size_t i = 0; i < ps.size(); ++i) {
    double tail = 0.0;
    if (std::isinf(ps[i])) {
      tail = sigma[k];
    } else {
      for (Index j = k; j < n; ++j) tail += std::pow(sigma[j], ps[i]);
      tail = std::pow(tail, 1.0 / ps[i]);
    }
    CHECK(r.two_step[i] <= (1.0 + 1e-6) * tail);
  }
}

TEST_CASE("singular value errors") {
  const Vector sigma{{2.0, 1.0, 0.5}};
  GramOperator op = as_operator(sigma);
  const SingularValueErrors exact = singular_value_errors(op, coords(3, {0}), sigma, 1);
  CHECK(exact.errors[0] == doctest::Approx(0.0));
  const SingularValueErrors wrong = singular_value_errors(op, coords(3, {1}), sigma, 1);
  CHECK(wrong.errors[0] == doctest::Approx(3.0));
  CHECK(op.apply_count() == 0);
}

TEST_CASE("gap report examples") {
  const GapReport g = gap_report(Vector{{4.0, 2.0, 1.0}}, 3, {}, {3});
  CHECK(g.g_min_over_next == doctest::Approx(1.0));
  CHECK(g.g_min_over_self == doctest::Approx(0.5));
  CHECK(g.g_min_b.at(3) == 1.0);

  const Vector rep{{1.0, 1.0, 0.5, 0.5, 0.25}};
  const GapReport r = gap_report(rep, 4, {}, {1, 2});
  CHECK(r.g_min_over_next == 0.0);
  CHECK(r.g_min_b.at(1) == 0.0);
  // brute force over all (i, j): drop each value's twin, keep the nearest remaining
  double brute = kInfinity;
  for (Index i = 0; i < 4; ++i)
    for (Index j = 0; j < 4; ++j)
      if (i != j && rep[i] != rep[j]) brute = std::min(brute, std::abs(rep[i] - rep[j]) / rep[j]);
  CHECK(r.g_min_b.at(2) == doctest::Approx(brute));

  const GapReport one = gap_report(Vector{{2.0, 1.0}}, 1, {1}, {});
  CHECK(std::isinf(one.g_min_over_next));
  CHECK(one.g_k_to_ell.at(1) == doctest::Approx(0.5));
}

TEST_CASE("g_k_to_ell is non-decreasing in ell and zero on ties") {
  const Vector s = generate(SpectrumSpec{spectra::RepeatedPairs{1.05, 10}, 40});
  const GapReport g = gap_report(s, 4, {4, 5, 8, 12, 20}, {});
  double prev = -1.0;
  for (const auto& [ell, v] : g.g_k_to_ell) {
    CHECK(v >= prev);
    prev = v;
  }
  CHECK(gap_report(s, 3, {3}, {}).g_k_to_ell.at(3) == 0.0);
}

TEST_CASE("kl goodness") {
  const Index n = 30, k = 5;
  const Matrix u = coords(n, {0, 1, 2, 3, 4});
  CHECK(kl_goodness(u, u, k).L == doctest::Approx(1.0));
  CHECK(std::isinf(kl_goodness(u, coords(n, {5, 6, 7, 8, 9}), k).L));

  Rng rng(5);
  const Matrix b = rng.normal_matrix(n, k);
  const Matrix w = rng.normal_matrix(k, k) + 3.0 * Matrix::Identity(k, k);
  CHECK(kl_goodness(u, b * w, k).L == doctest::Approx(kl_goodness(u, b, k).L).epsilon(1e-8));
}

TEST_CASE("goodness of the simulated block degrades as the gap shrinks") {
  const Index n = 60;
  {
    const Vector sigma = generate(SpectrumSpec{spectra::PairedGap{1.1, 0.1}, n});
    GramOperator op = as_operator(sigma);
    const Matrix s = build_simulated_block(op, gaussian_start(n, 1, 3).col(0), 5);
    CHECK(std::isfinite(kl_goodness(coords(n, {0, 1, 2, 3, 4}), s, 5).L));
  }
  // k = 2 keeps L below 1/eps^2 across the sweep
  std::vector<double> log_l;
  for (double gap : {0.3, 0.1, 0.03}) {
    const Vector sigma = generate(SpectrumSpec{spectra::PairedGap{1.1, gap}, n});
    GramOperator op = as_operator(sigma);
    const Matrix s = build_simulated_block(op, gaussian_start(n, 1, 3).col(0), 2);
    log_l.push_back(std::log(kl_goodness(coords(n, {0, 1}), s, 2).L));
  }
  CHECK(log_l[1] > log_l[0]);
  CHECK(log_l[2] > log_l[1]);
}

TEST_CASE("chi-square minimum frequency") {
  const ChiSquareCheck half = chi_square_min_check(1, 0.5, 100000, 1);
  CHECK(half.passes());
  CHECK(half.frequency >= 0.5 - 3.0 * std::sqrt(0.25 / 1e5));
  CHECK(chi_square_min_check(10, 0.1, 100000, 2).passes());
  CHECK(chi_square_min_check(3, 0.1, 1000, 3, 0.0).frequency == 1.0);
  CHECK(chi_square_min_check(10, 0.1, 10, 4).threshold ==
        doctest::Approx(2.0 * 0.01 / (std::numbers::pi * 100.0)));
}

TEST_CASE("min relative eigengap") {
  CHECK(min_relative_eigengap(Vector{{1.0, 3.0, 2.0}}) == doctest::Approx(0.5));
  CHECK(min_relative_eigengap(Vector{{1.0, 1.0}}) == 0.0);
}

TEST_CASE("perturbation transfer") {
  Rng rng(8);
  const Index n = 30, k = 4;
  const Matrix a = random_psd(rng, n);
  const Vector s = singular_values(a);
  const Eigen::SelfAdjointEigenSolver<Matrix> es(a);
  const Matrix top = es.eigenvectors().rightCols(k);
  const Matrix bottom = es.eigenvectors().leftCols(k);

  const TransferReport none = perturbation_transfer_check(a, Vector::Zero(n), top, k, 0.1);
  CHECK_FALSE(none.skipped);
  CHECK(none.all_hold());
  CHECK(none.spectral.hypothesis());

  const TransferReport vac = perturbation_transfer_check(a, Vector::Zero(n), bottom, k, 0.1);
  CHECK_FALSE(vac.frobenius.hypothesis());
  CHECK(vac.all_hold());

  const Vector big = Vector::Constant(n, s[k]);
  CHECK(perturbation_transfer_check(a, big, top, k, 0.1).skipped);
}

TEST_CASE("spectral square check") {
  Rng rng(9);
  const Matrix a = random_psd(rng, 20);
  const Eigen::SelfAdjointEigenSolver<Matrix> es(a);
  const Implication imp = spectral_square_check(a, es.eigenvectors().rightCols(3), 0.05);
  CHECK(imp.hypothesis());
  CHECK(imp.holds());
}
