#include "midspec/blas_guard.hpp"

#include <cblas.h>
#include <unistd.h>

#include <cmath>
#include <complex>
#include <cstdlib>
#include <cstring>
#include <mutex>
#include <random>
#include <vector>

#include "midspec/errors.hpp"

extern "C" char* openblas_get_corename(void);

namespace midspec {

void select_reliable_blas_kernel(char** argv) {
  if (std::getenv("OPENBLAS_CORETYPE") != nullptr) return;
  const char* core = openblas_get_corename();
  if (core == nullptr || std::strcmp(core, "Cooperlake") != 0) return;
  ::setenv("OPENBLAS_CORETYPE", "SkylakeX", 1);
  ::execv("/proc/self/exe", argv);
}

namespace {

template <typename T>
double gemm_error(std::size_t n) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g;
  std::vector<T> a(n * n), b(n * n), c(n * n);
  for (auto* v : {&a, &b}) {
    for (auto& x : *v) {
      if constexpr (std::is_same_v<T, double>) {
        x = g(rng);
      } else {
        x = T(g(rng), g(rng));
      }
    }
  }
  const int ni = static_cast<int>(n);
  if constexpr (std::is_same_v<T, double>) {
    cblas_dgemm(CblasRowMajor, CblasNoTrans, CblasNoTrans, ni, ni, ni, 1.0, a.data(), ni,
                b.data(), ni, 0.0, c.data(), ni);
  } else {
    const T one(1.0), zero(0.0);
    cblas_zgemm(CblasRowMajor, CblasNoTrans, CblasNoTrans, ni, ni, ni, &one, a.data(), ni,
                b.data(), ni, &zero, c.data(), ni);
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      T s{};
      for (std::size_t k = 0; k < n; ++k) s += a[i * n + k] * b[k * n + j];
      worst = std::max(worst, std::abs(s - c[i * n + j]));
    }
  }
  return worst;
}

}  // namespace

void verify_blas() {
  static std::once_flag once;
  static double worst = 0.0;
  std::call_once(once, [] {
    worst = std::max(gemm_error<double>(300), gemm_error<std::complex<double>>(300));
  });
  if (!(worst <= 1e-9)) {
    throw InvariantError(
        "BLAS self-check failed: gemm differs from a reference product by " +
        std::to_string(worst) +
        "; set OPENBLAS_CORETYPE to a kernel set that works on this CPU (e.g. SkylakeX)");
  }
}

}  // namespace midspec
