#pragma once

namespace midspec {

/// OpenBLAS 0.3.20 picks its Cooperlake kernels on AVX512-BF16 machines, and
/// their dgemm returns wrong products for moderately sized matrices. When that
/// kernel set is active and OPENBLAS_CORETYPE is unset, re-executes the
/// current program with OPENBLAS_CORETYPE=SkylakeX. Returns normally otherwise
/// (or if the re-exec fails). Call first thing in main.
void select_reliable_blas_kernel(char** argv);

/// Compares dgemm and zgemm on a 300x300 product with a naive loop, once per
/// process. Throws InvariantError if BLAS disagrees.
void verify_blas();

}  // namespace midspec
