#include <cmath>
#include <random>

#include "doctest.h"
#include "midspec/errors.hpp"
#include "midspec/linalg.hpp"
#include "midspec/random.hpp"
#include "oracle.hpp"

using namespace midspec;
using oracle::Mat;

namespace {

double orthonormality_defect(const ComplexMatrix& v) {
  const Mat e = oracle::to_eigen(v);
  return (e.adjoint() * e - Mat::Identity(e.cols(), e.cols())).cwiseAbs().maxCoeff();
}

double reconstruction_defect(const EigenDecomposition& eig, const ComplexMatrix& m) {
  const Mat v = oracle::to_eigen(eig.eigenvectors);
  Eigen::VectorXd lambda(eig.eigenvalues.size());
  for (std::size_t k = 0; k < eig.eigenvalues.size(); ++k) lambda(k) = eig.eigenvalues[k];
  const Mat rebuilt = v * lambda.cast<oracle::cd>().asDiagonal() * v.adjoint();
  return (rebuilt - oracle::to_eigen(m)).cwiseAbs().maxCoeff();
}

void check_decomposition(const ComplexMatrix& m, EigenBackend backend) {
  const EigenDecomposition eig = hermitian_eig(m, backend);
  REQUIRE(eig.eigenvalues.size() == m.rows());
  CHECK(std::is_sorted(eig.eigenvalues.begin(), eig.eigenvalues.end()));
  CHECK(orthonormality_defect(eig.eigenvectors) <= 1e-10);
  CHECK(reconstruction_defect(eig, m) <= 1e-10 * (1.0 + m.max_abs()));
  const Eigen::VectorXd ref = oracle::eigenvalues(oracle::to_eigen(m));
  for (std::size_t k = 0; k < eig.eigenvalues.size(); ++k) {
    CHECK(std::abs(eig.eigenvalues[k] - ref(k)) <= 1e-10 * (1.0 + m.max_abs()));
  }
}

const EigenBackend kBackends[] = {EigenBackend::kHouseholderQL, EigenBackend::kLapack};

}  // namespace

TEST_CASE("eigendecomposition of the identity and Pauli X") {
  for (EigenBackend b : kBackends) {
    const auto id = hermitian_eig(ComplexMatrix::identity(2), b);
    CHECK(id.eigenvalues == std::vector<double>{1.0, 1.0});
    CHECK(orthonormality_defect(id.eigenvectors) <= 1e-14);
    const auto x = hermitian_eig(ComplexMatrix{{0.0, 1.0}, {1.0, 0.0}}, b);
    CHECK(x.eigenvalues[0] == doctest::Approx(-1.0).epsilon(1e-15));
    CHECK(x.eigenvalues[1] == doctest::Approx(1.0).epsilon(1e-15));
  }
}

TEST_CASE("random Hermitian matrices match a reference eigensolver") {
  std::mt19937_64 rng(11);
  for (std::size_t n : {1u, 2u, 3u, 16u, 57u}) {
    const ComplexMatrix m = oracle::from_eigen(oracle::random_hermitian(n, rng));
    for (EigenBackend b : kBackends) check_decomposition(m, b);
  }
  // Auto switches to LAPACK above the threshold; exercise both real and complex input.
  const ComplexMatrix big = oracle::from_eigen(oracle::random_hermitian(300, rng));
  check_decomposition(big, EigenBackend::kAuto);
  Mat real_sym = oracle::random_hermitian(300, rng).real().cast<oracle::cd>();
  check_decomposition(oracle::from_eigen(real_sym), EigenBackend::kAuto);
  check_decomposition(oracle::from_eigen(real_sym.topLeftCorner(40, 40)), EigenBackend::kHouseholderQL);
}

TEST_CASE("degenerate spectra still give an orthonormal eigenbasis") {
  const std::vector<double> diag{1.0, 1.0, 2.0, 2.0, 2.0, -3.0};
  const ComplexMatrix u = haar_unitary(6, 5);
  const ComplexMatrix m = multiply(multiply(u, ComplexMatrix::diagonal(diag)), u.adjoint());
  ComplexMatrix h = m;
  // Symmetrize away rounding so the input is exactly Hermitian.
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < 6; ++j) h(i, j) = 0.5 * (m(i, j) + std::conj(m(j, i)));
  for (EigenBackend b : kBackends) check_decomposition(h, b);
}

TEST_CASE("eigendecomposition is deterministic") {
  std::mt19937_64 rng(3);
  const ComplexMatrix m = oracle::from_eigen(oracle::random_hermitian(20, rng));
  const auto a = hermitian_eig(m);
  const auto b = hermitian_eig(m);
  CHECK(a.eigenvalues == b.eigenvalues);
  CHECK(a.eigenvectors == b.eigenvectors);
}

TEST_CASE("non-Hermitian and non-square input is rejected") {
  ComplexMatrix m{{1.0, 2.0}, {3.0, 1.0}};
  try {
    hermitian_eig(m);
    FAIL("expected rejection");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("(0, 1)") != std::string::npos);
  }
  CHECK_THROWS_AS(hermitian_eig(ComplexMatrix(2, 3)), std::invalid_argument);
  CHECK_THROWS_AS(hermitian_eig(ComplexMatrix{{1.0, Complex(0, 1)}, {Complex(0, 1), 1.0}}),
                  std::invalid_argument);
}

TEST_CASE("spectral sums match traces and are unitarily invariant") {
  std::mt19937_64 rng(19);
  const ComplexMatrix m = oracle::from_eigen(oracle::random_hermitian(24, rng));
  const auto ev = hermitian_eigenvalues(m);
  double sum = 0.0, sq = 0.0;
  for (double l : ev) {
    sum += l;
    sq += l * l;
  }
  const Mat e = oracle::to_eigen(m);
  CHECK(std::abs(sum - e.trace().real()) <= 1e-9 * (1.0 + std::abs(e.trace().real())));
  CHECK(std::abs(sq - (e * e).trace().real()) <= 1e-9 * (e * e).trace().real());

  const ComplexMatrix u = haar_unitary(24, 77);
  ComplexMatrix rotated = multiply(multiply(u, m), u.adjoint());
  for (std::size_t i = 0; i < 24; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      const Complex avg = 0.5 * (rotated(i, j) + std::conj(rotated(j, i)));
      rotated(i, j) = avg;
      rotated(j, i) = std::conj(avg);
    }
  const auto ev2 = hermitian_eigenvalues(rotated);
  for (std::size_t k = 0; k < ev.size(); ++k) CHECK(std::abs(ev[k] - ev2[k]) <= 1e-9);
}

TEST_CASE("Kronecker products") {
  CHECK(kron(ComplexMatrix::identity(2), ComplexMatrix::identity(2)) == ComplexMatrix::identity(4));
  const ComplexMatrix z{{1.0, 0.0}, {0.0, -1.0}};
  const std::vector<double> zz{1.0, -1.0, -1.0, 1.0};
  CHECK(kron(z, z) == ComplexMatrix::diagonal(zz));

  std::mt19937_64 rng(2);
  std::normal_distribution<double> g;
  ComplexMatrix a(2, 2), b(3, 3);
  for (auto& x : a.data()) x = Complex(g(rng), g(rng));
  for (auto& x : b.data()) x = Complex(g(rng), g(rng));
  const ComplexMatrix k = kron(a, b);
  REQUIRE(k.rows() == 6);
  REQUIRE(k.cols() == 6);
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < 6; ++j) CHECK(k(i, j) == a(i / 3, j / 3) * b(i % 3, j % 3));

  CHECK_THROWS_AS(kron(ComplexMatrix::identity(128), ComplexMatrix::identity(256)), CapExceeded);
  CHECK_NOTHROW(kron(ComplexMatrix::identity(4), ComplexMatrix::identity(4), 16));
  CHECK_THROWS_AS(kron(ComplexMatrix::identity(4), ComplexMatrix::identity(4), 15), CapExceeded);
}

TEST_CASE("matrix functions through the spectral decomposition") {
  std::mt19937_64 rng(8);
  const ComplexMatrix m = oracle::from_eigen(oracle::random_hermitian(12, rng));
  CHECK(max_abs_difference(matrix_function(m, [](double x) { return x; }), m) <= 1e-10);
  CHECK(max_abs_difference(matrix_function(ComplexMatrix::zero(3), [](double x) { return std::exp(x); }),
                           ComplexMatrix::identity(3)) <= 1e-15);
  const std::vector<double> logs{std::log(2.0), std::log(3.0)};
  const std::vector<double> expected{2.0, 3.0};
  CHECK(max_abs_difference(matrix_function(ComplexMatrix::diagonal(logs), [](double x) { return std::exp(x); }),
                           ComplexMatrix::diagonal(expected)) <= 1e-14);
  const ComplexMatrix e_plus = matrix_function(m, [](double x) { return std::exp(x); });
  const ComplexMatrix e_minus = matrix_function(m, [](double x) { return std::exp(-x); });
  CHECK(max_abs_difference(multiply(e_plus, e_minus), ComplexMatrix::identity(12)) <= 1e-8);
  CHECK(hermiticity_defect(e_plus) == 0.0);
  CHECK_THROWS_AS(matrix_function(ComplexMatrix::diagonal(std::vector<double>{1000.0}),
                                  [](double x) { return std::exp(x); }),
                  std::domain_error);
}

TEST_CASE("multiply, traces and pairwise summation") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g;
  ComplexMatrix a(5, 7), b(7, 3);
  for (auto& x : a.data()) x = Complex(g(rng), g(rng));
  for (auto& x : b.data()) x = Complex(g(rng), g(rng));
  const Mat ref = oracle::to_eigen(a) * oracle::to_eigen(b);
  CHECK((oracle::to_eigen(multiply(a, b)) - ref).cwiseAbs().maxCoeff() <= 1e-13);

  ComplexMatrix c(3, 7);
  for (auto& x : c.data()) x = Complex(g(rng), g(rng));
  const Complex tr = trace_of_product(a.adjoint(), a);
  CHECK(std::abs(tr - Complex(a.frobenius_norm_squared(), 0.0)) <= 1e-12);
  CHECK(std::abs(trace_of_product(b, c) - (oracle::to_eigen(b) * oracle::to_eigen(c)).trace()) <= 1e-12);

  std::vector<double> v(100000, 0.1);
  long double exact = 0.0L;
  for (double x : v) exact += static_cast<long double>(x);
  CHECK(std::abs(pairwise_sum(v) - static_cast<double>(exact)) <= 1e-10);
  CHECK(pairwise_sum(std::vector<double>{}) == 0.0);
}
