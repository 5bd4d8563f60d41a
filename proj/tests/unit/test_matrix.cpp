#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "agglom/matrix.hpp"
#include "agglom/rng.hpp"

using namespace agglom;

TEST_CASE("matmul and matrix_power basics") {
  Matrix a(2, 2);
  a(0, 0) = 1.0;
  a(0, 1) = 2.0;
  a(1, 0) = 3.0;
  a(1, 1) = 4.0;

  Matrix sq = matmul(a, a);
  CHECK(sq(0, 0) == doctest::Approx(7.0));
  CHECK(sq(0, 1) == doctest::Approx(10.0));
  CHECK(sq(1, 0) == doctest::Approx(15.0));
  CHECK(sq(1, 1) == doctest::Approx(22.0));

  CHECK(matrix_power(a, 0) == Matrix::identity(2));
  CHECK(matrix_power(a, 1) == a);  // exact copy, no multiplications

  Matrix cube = matmul(sq, a);
  Matrix p3 = matrix_power(a, 3);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j)
      CHECK(p3(i, j) == doctest::Approx(cube(i, j)).epsilon(1e-14));
}

TEST_CASE("symmetric eigendecomposition reconstructs the input") {
  Rng rng(3);
  for (std::size_t n : {std::size_t{2}, std::size_t{5}, std::size_t{17}, std::size_t{40}}) {
    Matrix a(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i; j < n; ++j) {
        double v = rng.uniform(-1.0, 1.0);
        a(i, j) = v;
        a(j, i) = v;
      }
    auto eig = symmetric_eigen(a);

    // eigenvalues ascending
    for (std::size_t i = 1; i < n; ++i) CHECK(eig.values[i] >= eig.values[i - 1]);

    // columns orthonormal
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p; q < n; ++q) {
        double dot = 0.0;
        for (std::size_t i = 0; i < n; ++i) dot += eig.vectors(i, p) * eig.vectors(i, q);
        CHECK(std::abs(dot - (p == q ? 1.0 : 0.0)) < 1e-12);
      }

    // V diag(w) V^T == a
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        double v = 0.0;
        for (std::size_t c = 0; c < n; ++c)
          v += eig.vectors(i, c) * eig.values[c] * eig.vectors(j, c);
        CHECK(std::abs(v - a(i, j)) < 1e-11);
      }
  }
}

TEST_CASE("eigendecomposition stays accurate at a few hundred rows") {
  Rng rng(8);
  const std::size_t n = 150;
  Matrix a(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      double v = rng.uniform(-1.0, 1.0);
      a(i, j) = v;
      a(j, i) = v;
    }
  auto eig = symmetric_eigen(a);
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double v = 0.0;
      for (std::size_t c = 0; c < n; ++c)
        v += eig.vectors(i, c) * eig.values[c] * eig.vectors(j, c);
      worst = std::max(worst, std::abs(v - a(i, j)));
    }
  CHECK(worst < 1e-10);
}

TEST_CASE("eigendecomposition of a known 2x2") {
  // [[2, 1], [1, 2]] has eigenvalues 1 and 3
  Matrix a(2, 2);
  a(0, 0) = 2.0;
  a(0, 1) = 1.0;
  a(1, 0) = 1.0;
  a(1, 1) = 2.0;
  auto eig = symmetric_eigen(a);
  CHECK(eig.values[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(eig.values[1] == doctest::Approx(3.0).epsilon(1e-14));
}
