#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <span>
#include <vector>

namespace midspec {

using Complex = std::complex<double>;

/// Largest Hilbert-space dimension any dense routine will allocate by default
/// (d^N <= 16384, i.e. 14 qubits).
inline constexpr std::size_t kDefaultDimensionCap = 16384;

/// Dense complex matrix, row-major.
class ComplexMatrix {
 public:
  ComplexMatrix() = default;
  ComplexMatrix(std::size_t rows, std::size_t cols);
  ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<Complex> entries);
  ComplexMatrix(std::initializer_list<std::initializer_list<Complex>> rows);

  static ComplexMatrix identity(std::size_t n);
  static ComplexMatrix zero(std::size_t n) { return ComplexMatrix(n, n); }
  static ComplexMatrix diagonal(std::span<const double> values);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool is_square() const { return rows_ == cols_; }
  bool empty() const { return entries_.empty(); }

  Complex& operator()(std::size_t i, std::size_t j) { return entries_[i * cols_ + j]; }
  const Complex& operator()(std::size_t i, std::size_t j) const { return entries_[i * cols_ + j]; }

  std::span<Complex> data() { return entries_; }
  std::span<const Complex> data() const { return entries_; }

  std::vector<Complex> column(std::size_t j) const;

  ComplexMatrix& operator+=(const ComplexMatrix& other);
  ComplexMatrix& operator-=(const ComplexMatrix& other);
  ComplexMatrix& operator*=(Complex scale);

  ComplexMatrix adjoint() const;
  Complex trace() const;
  double max_abs() const;
  /// Squared Frobenius norm, sum of |m_ij|^2.
  double frobenius_norm_squared() const;
  bool is_real() const;

  friend bool operator==(const ComplexMatrix&, const ComplexMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Complex> entries_;
};

ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b);
ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b);
ComplexMatrix operator*(ComplexMatrix a, Complex scale);

/// Matrix product a*b (BLAS zgemm).
ComplexMatrix multiply(const ComplexMatrix& a, const ComplexMatrix& b);

/// max_ij |a_ij - b_ij|; shapes must agree.
double max_abs_difference(const ComplexMatrix& a, const ComplexMatrix& b);

/// tr(a*b) without forming the product.
Complex trace_of_product(const ComplexMatrix& a, const ComplexMatrix& b);

/// Kronecker product. Rejects results whose order would exceed `dimension_cap`.
ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b,
                   std::size_t dimension_cap = kDefaultDimensionCap);

/// Worst Hermiticity violation max_ij |m_ij - conj(m_ji)|.
double hermiticity_defect(const ComplexMatrix& m);

/// Throws std::invalid_argument naming the worst-offending entry unless `m`
/// is square and Hermitian within 1e-12 * (1 + max|m_ij|).
void require_hermitian(const ComplexMatrix& m, const char* what);

struct EigenDecomposition {
  std::vector<double> eigenvalues;  // ascending
  ComplexMatrix eigenvectors;       // column k pairs with eigenvalues[k]
};

enum class EigenBackend {
  kAuto,           // Householder-QL up to kAutoBackendThreshold, LAPACK above
  kHouseholderQL,  // self-contained tridiagonalization + implicit QL
  kLapack,         // LAPACK MRRR (dsyevr / zheevr)
};

inline constexpr std::size_t kAutoBackendThreshold = 256;

EigenDecomposition hermitian_eig(ComplexMatrix m, EigenBackend backend = EigenBackend::kAuto);
std::vector<double> hermitian_eigenvalues(ComplexMatrix m,
                                          EigenBackend backend = EigenBackend::kAuto);

/// V f(diag(lambda)) V^dagger. Throws if f is non-finite at any eigenvalue.
ComplexMatrix matrix_function(const ComplexMatrix& m, const std::function<double(double)>& f);
ComplexMatrix matrix_function(const EigenDecomposition& eig,
                              const std::function<double(double)>& f);

/// Pairwise summation; keeps the error O(log n * eps) for long sums.
double pairwise_sum(std::span<const double> values);

}  // namespace midspec
