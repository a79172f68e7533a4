#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "klr/gram_operator.hpp"
#include "klr/input_matrix.hpp"
#include "klr/rng.hpp"

using namespace klr;

TEST_CASE("diagonal apply squares the entries and counts one product") {
  GramOperator g = GramOperator::from_spectrum(Vector{{3.0, 2.0, 1.0}});
  CHECK(g.apply_count() == 0);
  const Vector y = g.apply(Vector{{1.0, 0.0, 0.0}});
  CHECK(y[0] == 9.0);
  CHECK(y[1] == 0.0);
  CHECK(y[2] == 0.0);
  CHECK(g.apply_count() == 1);
}

TEST_CASE("dense apply uses A A^T") {
  GramOperator id = GramOperator::dense(Matrix::Identity(2, 2));
  const Vector y = id.apply(Vector{{1.0, 1.0}});
  CHECK(y[0] == doctest::Approx(1.0));
  CHECK(y[1] == doctest::Approx(1.0));

  Matrix a(2, 2);
  a << 1, 2, 0, 1;
  GramOperator g = GramOperator::dense(a);
  const Vector z = g.apply(Vector{{1.0, 0.0}});
  CHECK(z[0] == doctest::Approx(5.0));
  CHECK(z[1] == doctest::Approx(2.0));
}

TEST_CASE("block apply") {
  GramOperator g = GramOperator::from_spectrum(Vector{{3.0, 2.0}});
  const Matrix y = g.apply_block(Matrix::Identity(2, 2));
  CHECK(y(0, 0) == 9.0);
  CHECK(y(1, 1) == 4.0);
  CHECK(y(0, 1) == 0.0);
  CHECK(g.apply_count() == 2);

  const Matrix empty = g.apply_block(Matrix(2, 0));
  CHECK(empty.cols() == 0);
  CHECK(g.apply_count() == 2);

  GramOperator ones = GramOperator::from_spectrum(Vector::Ones(4));
  const Matrix x = Rng(3).normal_matrix(4, 3);
  CHECK((ones.apply_block(x) - x).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("serial and parallel block apply agree bit for bit") {
  Rng rng(11);
  const Matrix a = rng.normal_matrix(60, 40);
  const Matrix x = rng.normal_matrix(60, 17);
  GramOperator dense = GramOperator::dense(a);
  CHECK(dense.apply_block(x, Execution::serial) == dense.apply_block(x, Execution::parallel));
  GramOperator diag = GramOperator::from_spectrum(rng.normal_vector(60).cwiseAbs());
  CHECK(diag.apply_block(x, Execution::serial) == diag.apply_block(x, Execution::parallel));
}

TEST_CASE("self-adjoint on random probes") {
  Rng rng(5);
  GramOperator g = GramOperator::dense(rng.normal_matrix(30, 12));
  for (int trial = 0; trial < 20; ++trial) {
    const Vector x = rng.normal_vector(30), y = rng.normal_vector(30);
    const double lhs = g.apply(x).dot(y), rhs = x.dot(g.apply(y));
    CHECK(std::abs(lhs - rhs) <= 1e-10 * x.norm() * y.norm() * 100.0);
  }
}

TEST_CASE("apply is linear") {
  Rng rng(6);
  GramOperator g = GramOperator::dense(rng.normal_matrix(20, 20));
  const Vector x = rng.normal_vector(20), y = rng.normal_vector(20);
  const Vector lhs = g.apply(2.5 * x - 0.5 * y);
  const Vector rhs = 2.5 * g.apply(x) - 0.5 * g.apply(y);
  CHECK((lhs - rhs).norm() <= 1e-12 * rhs.norm());
}

TEST_CASE("shape mismatch is a contract error") {
  GramOperator g = GramOperator::from_spectrum(Vector::Ones(3));
  CHECK_THROWS_AS(g.apply(Vector::Ones(4)), ContractError);
}

TEST_CASE("perturbation draws") {
  const Vector sigma{{3.0, 2.0, 1.0}};
  GramOperator plain = as_operator(sigma);
  GramOperator zero = perturb_diagonal(sigma, 0.0, 9);
  const Vector x{{0.3, -1.0, 2.0}};
  CHECK(plain.apply(x) == zero.apply(x));

  double largest = 0.0;
  for (std::uint64_t seed = 0; seed < 10000; ++seed) {
    const auto d = DiagonalPerturbation::draw(100, 1e-6, seed);
    CHECK(d.norm() <= 1e-6);
    largest = std::max(largest, d.norm());
  }
  CHECK(largest >= 0.9e-6);

  const auto d1 = DiagonalPerturbation::draw(50, 1e-3, 42);
  const auto d2 = DiagonalPerturbation::draw(50, 1e-3, 42);
  CHECK(d1.entries == d2.entries);

  const auto d = DiagonalPerturbation::draw(2, 0.1, 17);
  CHECK(1.0 + d.entries[0] != 1.0 + d.entries[1]);
}

TEST_CASE("recommended perturbation sizes") {
  CHECK(recommended_delta(3.0, 100, 0.1) == doctest::Approx(1e-3));
  CHECK(recommended_delta(1.0, 1, 0.3) == doctest::Approx(0.1));
  CHECK(recommended_delta_gram(2.0, 4, 0.3) == doctest::Approx(0.1));
  CHECK_THROWS_AS(recommended_delta(0.0, 10, 0.1), ContractError);
}

TEST_CASE("gram route shift adds D to A A^T") {
  Rng rng(8);
  const Matrix a = rng.normal_matrix(6, 4);
  GramOperator g = GramOperator::dense(a);
  GramOperator shifted = perturb_diagonal(g, 1e-2, 3);
  const auto d = DiagonalPerturbation::draw(6, 1e-2, 3);
  Matrix expect = a * a.transpose();
  expect.diagonal() += d.entries;
  CHECK((shifted.to_dense() - expect).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(shifted.apply_count() == 0);
}
