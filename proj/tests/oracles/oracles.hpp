#pragma once

// Small-instance reference implementations. Deliberately naive and free of
// Eigen decompositions so they share no code path with the library.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <vector>

namespace lcrm::oracle {

using cplx = std::complex<double>;
using Dense = std::vector<std::vector<double>>;

inline Dense from_rows(int rows, int cols, const std::function<double(int, int)>& at) {
  Dense A(rows, std::vector<double>(cols));
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) A[i][j] = at(i, j);
  return A;
}

// H_ij = sum_k X_ik X_jk
inline Dense gram_rows(const Dense& X) {
  const std::size_t M = X.size(), N = X.empty() ? 0 : X[0].size();
  Dense H(M, std::vector<double>(M, 0.0));
  for (std::size_t i = 0; i < M; ++i)
    for (std::size_t j = 0; j < M; ++j)
      for (std::size_t k = 0; k < N; ++k) H[i][j] += X[i][k] * X[j][k];
  return H;
}

// T X X^* T with T = diag(sqrt(1 + d_i)) on the leading coordinates.
inline Dense spiked_gram(const Dense& X, const std::vector<double>& d) {
  Dense H = gram_rows(X);
  const std::size_t M = H.size();
  for (std::size_t i = 0; i < M; ++i)
    for (std::size_t j = 0; j < M; ++j) {
      const double ti = i < d.size() ? std::sqrt(1.0 + d[i]) : 1.0;
      const double tj = j < d.size() ? std::sqrt(1.0 + d[j]) : 1.0;
      H[i][j] *= ti * tj;
    }
  return H;
}

// Cyclic Jacobi rotations; eigenvalues in descending order.
inline std::vector<double> jacobi_eigenvalues(Dense A, int sweeps = 100) {
  const std::size_t n = A.size();
  for (int s = 0; s < sweeps; ++s) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += A[p][q] * A[p][q];
    if (off < 1e-30) break;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) {
        if (std::abs(A[p][q]) < 1e-300) continue;
        const double theta = (A[q][q] - A[p][p]) / (2.0 * A[p][q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0), sn = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = A[k][p], akq = A[k][q];
          A[k][p] = c * akp - sn * akq;
          A[k][q] = sn * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = A[p][k], aqk = A[q][k];
          A[p][k] = c * apk - sn * aqk;
          A[q][k] = sn * apk + c * aqk;
        }
      }
  }
  std::vector<double> ev(n);
  for (std::size_t i = 0; i < n; ++i) ev[i] = A[i][i];
  std::sort(ev.begin(), ev.end(), std::greater<>());
  return ev;
}

// Complex Gauss-Jordan inverse with partial pivoting.
inline std::vector<std::vector<cplx>> inverse(std::vector<std::vector<cplx>> A) {
  const std::size_t n = A.size();
  std::vector<std::vector<cplx>> I(n, std::vector<cplx>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) I[i][i] = 1.0;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(A[r][c]) > std::abs(A[piv][c])) piv = r;
    std::swap(A[c], A[piv]);
    std::swap(I[c], I[piv]);
    const cplx inv = 1.0 / A[c][c];
    for (std::size_t k = 0; k < n; ++k) A[c][k] *= inv, I[c][k] *= inv;
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c) continue;
      const cplx f = A[r][c];
      if (f == 0.0) continue;
      for (std::size_t k = 0; k < n; ++k) A[r][k] -= f * A[c][k], I[r][k] -= f * I[c][k];
    }
  }
  return I;
}

inline std::vector<std::vector<cplx>> resolvent(const Dense& H, cplx z) {
  const std::size_t n = H.size();
  std::vector<std::vector<cplx>> A(n, std::vector<cplx>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) A[i][j] = H[i][j] - (i == j ? z : cplx(0.0));
  return inverse(A);
}

// (1/n) tr (H - z)^{-1}
inline cplx trace_stieltjes(const Dense& H, cplx z) {
  const auto G = resolvent(H, z);
  cplx s = 0.0;
  for (std::size_t i = 0; i < G.size(); ++i) s += G[i][i];
  return s / static_cast<double>(G.size());
}

// sup |F_n - F| by counting, O(n^2).
inline double ks_naive(const std::vector<double>& xs, const std::function<double(double)>& F) {
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (double x : xs) {
    double le = 0.0, lt = 0.0;
    for (double u : xs) le += u <= x, lt += u < x;
    const double f = F(x);
    d = std::max({d, std::abs(le / n - f), std::abs(lt / n - f)});
  }
  return d;
}

// Roots of a z^2 + b z + c = 0 with the larger imaginary part.
inline cplx upper_root(cplx a, cplx b, cplx c) {
  const cplx disc = std::sqrt(b * b - 4.0 * a * c);
  const cplx r1 = (-b + disc) / (2.0 * a), r2 = (-b - disc) / (2.0 * a);
  return r1.imag() >= r2.imag() ? r1 : r2;
}

// y z m1^2 + (z + y - 1) m1 + 1 = 0
inline cplx mp_m1(cplx z, double y) { return upper_root(y * z, z + y - 1.0, 1.0); }
// z m2^2 + (z + 1 - y) m2 + 1 = 0
inline cplx mp_m2(cplx z, double y) { return upper_root(z, z + 1.0 - y, 1.0); }

}  // namespace lcrm::oracle
