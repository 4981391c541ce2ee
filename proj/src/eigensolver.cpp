// Hermitian eigensolvers: a self-contained Householder tridiagonalization with
// implicit-shift QL, and a LAPACK MRRR path for large matrices.

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "midspec/blas_guard.hpp"
#include "midspec/errors.hpp"
#include "midspec/linalg.hpp"

namespace midspec {
namespace {

struct Tridiagonal {
  std::vector<double> diag;
  std::vector<double> off;       // off[k] couples k and k+1; off[n-1] = 0
  std::vector<Complex> q;        // row-major unitary (Q*D), only when vectors wanted
};

// Reduces the Hermitian matrix `a` (row-major, destroyed) to a real symmetric
// tridiagonal T with A = (Q D) T (Q D)^dagger, D a diagonal phase matrix.
Tridiagonal tridiagonalize(std::vector<Complex>& a, std::size_t n, bool want_vectors) {
  Tridiagonal t;
  t.diag.assign(n, 0.0);
  t.off.assign(n, 0.0);
  std::vector<Complex> sub(n, 0.0);  // complex subdiagonal before phase removal
  if (want_vectors) {
    t.q.assign(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) t.q[i * n + i] = 1.0;
  }
  std::vector<Complex> v(n), p(n);
  auto at = [&](std::size_t i, std::size_t j) -> Complex& { return a[i * n + j]; };

  for (std::size_t k = 0; k + 1 < n; ++k) {
    const std::size_t m = n - k - 1;
    const std::size_t base = k + 1;
    double tail = 0.0;
    for (std::size_t i = 1; i < m; ++i) tail += std::norm(at(base + i, k));
    const Complex x0 = at(base, k);
    if (tail == 0.0) {
      sub[k] = x0;
      continue;
    }
    const double xnorm = std::sqrt(tail + std::norm(x0));
    const Complex phase = std::abs(x0) == 0.0 ? Complex(1.0) : x0 / std::abs(x0);
    const Complex alpha = -phase * xnorm;
    for (std::size_t i = 0; i < m; ++i) v[i] = at(base + i, k);
    v[0] -= alpha;
    double vnorm = 0.0;
    for (std::size_t i = 0; i < m; ++i) vnorm += std::norm(v[i]);
    vnorm = std::sqrt(vnorm);
    for (std::size_t i = 0; i < m; ++i) v[i] /= vnorm;

    // Trailing block B <- H B H with H = I - 2 v v^dagger, as a rank-2 update.
    for (std::size_t i = 0; i < m; ++i) {
      Complex acc = 0.0;
      const Complex* row = &a[(base + i) * n + base];
      for (std::size_t j = 0; j < m; ++j) acc += row[j] * v[j];
      p[i] = acc;
    }
    Complex c = 0.0;
    for (std::size_t i = 0; i < m; ++i) c += std::conj(v[i]) * p[i];
    const double cr = c.real();
    for (std::size_t i = 0; i < m; ++i) p[i] -= cr * v[i];
    for (std::size_t i = 0; i < m; ++i) {
      Complex* row = &a[(base + i) * n + base];
      const Complex vi = v[i];
      const Complex pi = p[i];
      for (std::size_t j = 0; j < m; ++j) {
        row[j] -= 2.0 * (vi * std::conj(p[j]) + pi * std::conj(v[j]));
      }
    }
    sub[k] = alpha;

    if (want_vectors) {
      for (std::size_t r = 0; r < n; ++r) {
        Complex* row = &t.q[r * n + base];
        Complex acc = 0.0;
        for (std::size_t i = 0; i < m; ++i) acc += row[i] * v[i];
        acc *= 2.0;
        for (std::size_t i = 0; i < m; ++i) row[i] -= acc * std::conj(v[i]);
      }
    }
  }
  for (std::size_t k = 0; k < n; ++k) t.diag[k] = at(k, k).real();

  // Phase transform making the subdiagonal real and non-negative.
  Complex phi = 1.0;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double r = std::abs(sub[k]);
    t.off[k] = r;
    phi *= r == 0.0 ? Complex(1.0) : sub[k] / r;
    if (want_vectors) {
      for (std::size_t row = 0; row < n; ++row) t.q[row * n + k + 1] *= phi;
    }
  }
  return t;
}

// Implicit-shift QL on a real symmetric tridiagonal matrix. When `z` is
// non-null it holds n columns (column-contiguous) that receive the rotations.
void tridiagonal_ql(std::vector<double>& d, std::vector<double>& e,
                    std::vector<std::vector<double>>* z) {
  const int n = static_cast<int>(d.size());
  constexpr double eps = std::numeric_limits<double>::epsilon();
  for (int l = 0; l < n; ++l) {
    int iter = 0;
    int m;
    do {
      for (m = l; m < n - 1; ++m) {
        const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= eps * dd) break;
      }
      if (m != l) {
        if (iter++ == 60) {
          throw InvariantError("tridiagonal_ql: no convergence after 60 iterations");
        }
        double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
        double r = std::hypot(g, 1.0);
        g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
        double s = 1.0, c = 1.0, p = 0.0;
        int i;
        for (i = m - 1; i >= l; --i) {
          double f = s * e[i];
          const double b = c * e[i];
          e[i + 1] = (r = std::hypot(f, g));
          if (r == 0.0) {
            d[i + 1] -= p;
            e[m] = 0.0;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - p;
          r = (d[i] - g) * s + 2.0 * c * b;
          d[i + 1] = g + (p = s * r);
          g = c * r - b;
          if (z != nullptr) {
            auto& zi = (*z)[i];
            auto& zi1 = (*z)[i + 1];
            for (std::size_t k = 0; k < zi.size(); ++k) {
              f = zi1[k];
              zi1[k] = s * zi[k] + c * f;
              zi[k] = c * zi[k] - s * f;
            }
          }
        }
        if (r == 0.0 && i >= l) continue;
        d[l] -= p;
        e[l] = g;
        e[m] = 0.0;
      }
    } while (m != l);
  }
}

EigenDecomposition householder_ql(ComplexMatrix m, bool want_vectors) {
  const std::size_t n = m.rows();
  std::vector<Complex> a(m.data().begin(), m.data().end());
  Tridiagonal t = tridiagonalize(a, n, want_vectors);

  std::vector<std::vector<double>> z;
  if (want_vectors) {
    z.assign(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) z[i][i] = 1.0;
  }
  tridiagonal_ql(t.diag, t.off, want_vectors ? &z : nullptr);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return t.diag[x] < t.diag[y]; });

  EigenDecomposition out;
  out.eigenvalues.resize(n);
  for (std::size_t k = 0; k < n; ++k) out.eigenvalues[k] = t.diag[order[k]];
  if (!want_vectors) return out;

  // V = (Q D) Z, with Z columns reordered by ascending eigenvalue.
  out.eigenvectors = ComplexMatrix(n, n);
  for (std::size_t r = 0; r < n; ++r) {
    const Complex* qrow = &t.q[r * n];
    for (std::size_t k = 0; k < n; ++k) {
      const auto& zc = z[order[k]];
      Complex acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) acc += qrow[j] * zc[j];
      out.eigenvectors(r, k) = acc;
    }
  }
  return out;
}

EigenDecomposition lapack_mrrr(ComplexMatrix m, bool want_vectors) {
  verify_blas();
  const auto n = static_cast<lapack_int>(m.rows());
  const char jobz = want_vectors ? 'V' : 'N';
  const double abstol = LAPACKE_dlamch('S');
  lapack_int found = 0;
  std::vector<lapack_int> support(2 * static_cast<std::size_t>(n));
  EigenDecomposition out;
  out.eigenvalues.resize(static_cast<std::size_t>(n));
  const std::size_t nn = static_cast<std::size_t>(n) * static_cast<std::size_t>(n);

  if (m.is_real()) {
    std::vector<double> a(nn);
    for (std::size_t k = 0; k < nn; ++k) a[k] = m.data()[k].real();
    m = ComplexMatrix();
    std::vector<double> zbuf(want_vectors ? nn : 1);
    const lapack_int info =
        LAPACKE_dsyevr(LAPACK_COL_MAJOR, jobz, 'A', 'L', n, a.data(), n, 0.0, 0.0, 0, 0, abstol,
                       &found, out.eigenvalues.data(), zbuf.data(), n, support.data());
    if (info != 0) {
      throw InvariantError("hermitian_eig: LAPACK dsyevr failed with info " +
                           std::to_string(info));
    }
    if (want_vectors) {
      a = std::vector<double>();
      out.eigenvectors = ComplexMatrix(static_cast<std::size_t>(n), static_cast<std::size_t>(n));
      for (std::size_t k = 0; k < static_cast<std::size_t>(n); ++k) {
        for (std::size_t i = 0; i < static_cast<std::size_t>(n); ++i) {
          out.eigenvectors(i, k) = zbuf[k * static_cast<std::size_t>(n) + i];
        }
      }
    }
    return out;
  }

  // A row-major Hermitian matrix read column-major is its complex conjugate,
  // so the returned vectors are conj(v_k).
  std::vector<Complex> zbuf(want_vectors ? nn : 1);
  const lapack_int info = LAPACKE_zheevr(
      LAPACK_COL_MAJOR, jobz, 'A', 'L', n, reinterpret_cast<lapack_complex_double*>(m.data().data()),
      n, 0.0, 0.0, 0, 0, abstol, &found, out.eigenvalues.data(),
      reinterpret_cast<lapack_complex_double*>(zbuf.data()), n, support.data());
  if (info != 0) {
    throw InvariantError("hermitian_eig: LAPACK zheevr failed with info " + std::to_string(info));
  }
  if (want_vectors) {
    m = ComplexMatrix();
    out.eigenvectors = ComplexMatrix(static_cast<std::size_t>(n), static_cast<std::size_t>(n));
    for (std::size_t k = 0; k < static_cast<std::size_t>(n); ++k) {
      for (std::size_t i = 0; i < static_cast<std::size_t>(n); ++i) {
        out.eigenvectors(i, k) = std::conj(zbuf[k * static_cast<std::size_t>(n) + i]);
      }
    }
  }
  return out;
}

EigenDecomposition dispatch(ComplexMatrix m, EigenBackend backend, bool want_vectors) {
  require_hermitian(m, "hermitian_eig");
  if (m.rows() == 0) return {};
  if (backend == EigenBackend::kAuto) {
    backend = m.rows() <= kAutoBackendThreshold ? EigenBackend::kHouseholderQL
                                                : EigenBackend::kLapack;
  }
  if (backend == EigenBackend::kHouseholderQL) return householder_ql(std::move(m), want_vectors);
  return lapack_mrrr(std::move(m), want_vectors);
}

}  // namespace

EigenDecomposition hermitian_eig(ComplexMatrix m, EigenBackend backend) {
  return dispatch(std::move(m), backend, true);
}

std::vector<double> hermitian_eigenvalues(ComplexMatrix m, EigenBackend backend) {
  return dispatch(std::move(m), backend, false).eigenvalues;
}

}  // namespace midspec
