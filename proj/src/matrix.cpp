#include "agglom/matrix.hpp"

#include <cmath>
#include <cstdlib>

#include "agglom/error.hpp"
#include "agglom/kernels.hpp"

namespace agglom {

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) fail_numeric("matmul: shape mismatch");
  Matrix c(a.rows(), b.cols());
  // ikj order: the inner update is an axpy over contiguous rows of b.
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double* ci = c.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      double aik = a(i, k);
      if (aik != 0.0) kernels::vaxpy(aik, b.row(k), ci, b.cols());
    }
  }
  return c;
}

Matrix transpose(const Matrix& m) {
  Matrix t(m.cols(), m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) t(j, i) = m(i, j);
  return t;
}

Matrix matrix_power(const Matrix& b, unsigned long long t) {
  if (b.rows() != b.cols()) fail_numeric("matrix_power: matrix not square");
  if (t == 0) return Matrix::identity(b.rows());
  if (t == 1) return b;
  Matrix result = Matrix::identity(b.rows());
  Matrix base = b;
  while (t > 0) {
    if (t & 1ULL) result = matmul(result, base);
    t >>= 1ULL;
    if (t > 0) base = matmul(base, base);
  }
  return result;
}

SymmetricEigen symmetric_eigen(const Matrix& input) {
  if (input.rows() != input.cols()) fail_numeric("symmetric_eigen: matrix not square");
  const std::size_t n = input.rows();
  Matrix a = input;
  Matrix v = Matrix::identity(n);

  auto offdiag_norm = [&]() {
    double s = 0.0;
    for (std::size_t p = 0; p + 1 < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) s += a(p, q) * a(p, q);
    return std::sqrt(s);
  };

  const int max_sweeps = 64;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = offdiag_norm();
    if (off < 1e-300 || off < 1e-15 * static_cast<double>(n)) break;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        double apq = a(p, q);
        if (apq == 0.0) continue;
        double app = a(p, p), aqq = a(q, q);
        // Stop rotating once the element is negligible relative to the
        // diagonal it would perturb.
        if (std::abs(apq) < 1e-18 * (std::abs(app) + std::abs(aqq) + 1e-300)) {
          continue;
        }
        double theta = (aqq - app) / (2.0 * apq);
        double t = (theta >= 0.0 ? 1.0 : -1.0) /
                   (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        double c = 1.0 / std::sqrt(t * t + 1.0);
        double s = t * c;
        double tau = s / (1.0 + c);

        a(p, p) = app - t * apq;
        a(q, q) = aqq + t * apq;
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          if (k != p && k != q) {
            double akp = a(k, p), akq = a(k, q);
            a(k, p) = akp - s * (akq + tau * akp);
            a(p, k) = a(k, p);
            a(k, q) = akq + s * (akp - tau * akq);
            a(q, k) = a(k, q);
          }
          double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = vkp - s * (vkq + tau * vkp);
          v(k, q) = vkq + s * (vkp - tau * vkq);
        }
      }
    }
  }

  SymmetricEigen out;
  out.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.values[i] = a(i, i);
  out.vectors = std::move(v);

  // Sort ascending by eigenvalue; keeps the decomposition deterministic.
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    std::size_t best = i;
    for (std::size_t j = i + 1; j < n; ++j)
      if (out.values[order[j]] < out.values[order[best]]) best = j;
    std::swap(order[i], order[best]);
  }
  SymmetricEigen sorted;
  sorted.values.resize(n);
  sorted.vectors = Matrix(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    sorted.values[k] = out.values[order[k]];
    for (std::size_t i = 0; i < n; ++i) sorted.vectors(i, k) = out.vectors(i, order[k]);
  }
  return sorted;
}

}  // namespace agglom
