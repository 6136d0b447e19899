#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "menkf/error.hpp"
#include "menkf/numerics.hpp"
#include "menkf/rng.hpp"

using namespace menkf;

namespace {

Matrix random_matrix(RngStream& rng, Eigen::Index r, Eigen::Index c) {
  Matrix m(r, c);
  for (Eigen::Index j = 0; j < c; ++j)
    for (Eigen::Index i = 0; i < r; ++i) m(i, j) = rng.normal();
  return m;
}

// Triple-loop product, kept free of Eigen's operator*.
Matrix loop_mul(const Matrix& a, const Matrix& b) {
  Matrix out = Matrix::Zero(a.rows(), b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < b.cols(); ++j)
      for (Eigen::Index k = 0; k < a.cols(); ++k) out(i, j) += a(i, k) * b(k, j);
  return out;
}

}  // namespace

TEST_CASE("vec stacks columns") {
  Matrix m(2, 2);
  m << 1, 3, 2, 4;
  Vector v = vec(m);
  REQUIRE(v.size() == 4);
  CHECK(v(0) == 1);
  CHECK(v(1) == 2);
  CHECK(v(2) == 3);
  CHECK(v(3) == 4);

  Matrix one(1, 1);
  one << 7;
  CHECK(vec(one).size() == 1);
  CHECK(vec(one)(0) == 7);
}

TEST_CASE("unvec inverts vec for all shapes") {
  RngStream rng(3);
  for (Eigen::Index r = 1; r <= 4; ++r) {
    for (Eigen::Index c = 1; c <= 4; ++c) {
      Matrix m = random_matrix(rng, r, c);
      CHECK(unvec(vec(m), r, c) == m);
    }
  }
  CHECK_THROWS_AS(unvec(Vector::Zero(5), 2, 2), Error);
}

TEST_CASE("kron examples") {
  CHECK(kron(Matrix::Identity(2, 2), Matrix::Identity(3, 3)) == Matrix::Identity(6, 6));

  Matrix row(1, 2);
  row << 1, 1;
  Matrix expected(2, 4);
  expected << 1, 0, 1, 0, 0, 1, 0, 1;
  CHECK(kron(row, Matrix::Identity(2, 2)) == expected);
}

TEST_CASE("kron matches the index formula") {
  RngStream rng(11);
  Matrix a = random_matrix(rng, 2, 3);
  Matrix b = random_matrix(rng, 3, 2);
  Matrix k = kron(a, b);
  REQUIRE(k.rows() == 6);
  REQUIRE(k.cols() == 6);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 3; ++j)
      for (int p = 0; p < 3; ++p)
        for (int q = 0; q < 2; ++q) CHECK(k(i * 3 + p, j * 2 + q) == a(i, j) * b(p, q));
}

TEST_CASE("vec(AXB) equals kron(B^T, A) vec(X)") {
  RngStream rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::Index r = 1 + trial % 3, s = 1 + trial % 4, t = 2 + trial % 2, u = 1 + trial % 5;
    Matrix a = random_matrix(rng, r, s);
    Matrix x = random_matrix(rng, s, t);
    Matrix b = random_matrix(rng, t, u);
    Vector lhs = vec(loop_mul(loop_mul(a, x), b));
    Vector rhs = loop_mul(kron(b.transpose(), a), vec(x));
    CHECK((lhs - rhs).norm() <= 1e-12 * std::max(1.0, lhs.norm()));
  }
}

TEST_CASE("solve_spd examples") {
  RngStream rng(2);
  Matrix b = random_matrix(rng, 3, 2);
  CHECK(solve_spd(Matrix::Identity(3, 3), b).isApprox(b, 1e-15));

  Matrix a(2, 2);
  a << 2, 0, 0, 4;
  Matrix rhs(2, 1);
  rhs << 2, 8;
  Matrix x = solve_spd(a, rhs);
  CHECK(x(0, 0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(x(1, 0) == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("solve_spd reconstructs with a known spectrum") {
  RngStream rng(9);
  for (Eigen::Index n : {2, 10, 50, 200}) {
    Eigen::HouseholderQR<Matrix> qr(random_matrix(rng, n, n));
    Matrix q = qr.householderQ();
    Vector lambda(n);
    for (Eigen::Index i = 0; i < n; ++i) lambda(i) = 0.5 + static_cast<double>(i) / n;
    Matrix a = q * lambda.asDiagonal() * q.transpose();
    a = 0.5 * (a + a.transpose());
    Matrix x = random_matrix(rng, n, 3);
    Matrix rec = solve_spd(a, a * x);
    CHECK((rec - x).norm() <= 1e-8 * x.norm());
    Matrix b = random_matrix(rng, n, 2);
    CHECK((a * solve_spd(a, b) - b).norm() <= 1e-10 * b.norm());
  }
}

TEST_CASE("solve_spd rejects indefinite and mismatched input") {
  Matrix a(2, 2);
  a << 1, 0, 0, -1;
  CHECK_THROWS_AS(solve_spd(a, Matrix::Identity(2, 2)), Error);
  CHECK_THROWS_AS(solve_spd(Matrix::Identity(2, 2), Matrix::Identity(3, 3)), Error);
}

TEST_CASE("empirical_quantile examples") {
  const std::vector<double> v{1, 2, 3, 4};
  CHECK(empirical_quantile(v, 0.0) == 1.0);
  CHECK(empirical_quantile(v, 0.5) == 2.5);
  // h = 0.975 * 3 = 2.925: 3 + 0.925 * (4 - 3)
  CHECK(empirical_quantile(v, 0.975) == doctest::Approx(3.925).epsilon(1e-14));
  CHECK(empirical_quantile(v, 1.0) == 4.0);
  const std::vector<double> shuffled{4, 1, 3, 2};
  CHECK(empirical_quantile(shuffled, 0.5) == 2.5);
}

TEST_CASE("empirical_quantile is monotone and bounded") {
  RngStream rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> v(1 + trial * 3);
    for (double& x : v) x = rng.normal();
    const double lo = *std::min_element(v.begin(), v.end());
    const double hi = *std::max_element(v.begin(), v.end());
    double prev = -INFINITY;
    for (int k = 0; k <= 100; ++k) {
      const double q = empirical_quantile(v, k / 100.0);
      CHECK(q >= prev);
      CHECK(q >= lo);
      CHECK(q <= hi);
      prev = q;
    }
  }
}

TEST_CASE("empirical_quantile errors") {
  const std::vector<double> empty;
  CHECK_THROWS_AS(empirical_quantile(empty, 0.5), Error);
  const std::vector<double> v{1, 2};
  CHECK_THROWS_AS(empirical_quantile(v, -0.1), Error);
  CHECK_THROWS_AS(empirical_quantile(v, 1.1), Error);
}

TEST_CASE("RngStream reproducibility") {
  RngStream a(42, 7), b(42, 7), c(42, 8);
  bool differs = false;
  for (int i = 0; i < 1000; ++i) {
    const std::uint64_t x = a.next_u64();
    CHECK(x == b.next_u64());
    differs |= x != c.next_u64();
  }
  CHECK(differs);

  RngStream p(1), q(1);
  for (int i = 0; i < 100; ++i) CHECK(p.normal() == q.normal());
  CHECK(RngStream(5).child(3).next_u64() == RngStream(5).child(3).next_u64());
  CHECK(RngStream(5).child(3).next_u64() != RngStream(5).child(4).next_u64());
}

TEST_CASE("gamma draws have the right mean") {
  RngStream rng(8);
  double s = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) s += rng.gamma(100.0, 0.01);
  CHECK(s / n == doctest::Approx(1.0).epsilon(0.01));
}
