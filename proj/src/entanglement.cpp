#include "midspec/entanglement.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "midspec/basis.hpp"
#include "midspec/errors.hpp"
#include "midspec/random.hpp"

namespace midspec {
namespace {

constexpr double kNegativeEigenvalueTolerance = 1e-10;

void check_dimension(std::size_t dim, std::size_t n_sites, std::size_t local_dim) {
  if (dim != ipow(local_dim, n_sites)) {
    std::ostringstream msg;
    msg << "partial_trace: state dimension " << dim << " does not match " << local_dim << "^"
        << n_sites;
    throw std::invalid_argument(msg.str());
  }
}

// Amplitudes with the chain rotated so that subsystem `a` leads.
std::vector<Complex> rotated_amplitudes(std::span<const Complex> state, std::size_t n_sites,
                                        std::size_t local_dim, const SubsystemSpec& a) {
  std::vector<Complex> out(state.begin(), state.end());
  if (a.start == 0) return out;
  const std::size_t dim = state.size();
  const std::size_t tail = ipow(local_dim, n_sites - a.start);
  for (std::size_t b = 0; b < dim; ++b) out[rotate_index(b, tail, dim)] = state[b];
  return out;
}

// Sum of 1/k for k in [lo, hi], split recursively so rounding error grows
// only logarithmically with the number of terms.
double harmonic_range(std::uint64_t lo, std::uint64_t hi) {
  if (lo > hi) return 0.0;
  if (hi - lo < 64) {
    double s = 0.0;
    for (std::uint64_t k = hi; k >= lo; --k) {
      s += 1.0 / static_cast<double>(k);
      if (k == lo) break;
    }
    return s;
  }
  const std::uint64_t mid = lo + (hi - lo) / 2;
  return harmonic_range(lo, mid) + harmonic_range(mid + 1, hi);
}

}  // namespace

DensityMatrix::DensityMatrix(ComplexMatrix matrix, std::string label)
    : matrix_(std::move(matrix)), label_(std::move(label)) {
  require_hermitian(matrix_, "DensityMatrix");
  const Complex tr = matrix_.trace();
  if (std::abs(tr - 1.0) > 1e-10) {
    std::ostringstream msg;
    msg << "DensityMatrix: trace is " << tr.real() << ", expected 1";
    throw std::invalid_argument(msg.str());
  }
}

DensityMatrix DensityMatrix::maximally_mixed(std::size_t dim, std::string label) {
  if (dim == 0) throw std::invalid_argument("DensityMatrix: dimension must be positive");
  return DensityMatrix(ComplexMatrix::identity(dim) * (1.0 / static_cast<double>(dim)),
                       std::move(label));
}

PureState::PureState(std::vector<Complex> amplitudes) : amplitudes_(std::move(amplitudes)) {
  double norm2 = 0.0;
  for (const auto& z : amplitudes_) norm2 += std::norm(z);
  if (amplitudes_.empty() || std::abs(std::sqrt(norm2) - 1.0) > 1e-12) {
    throw std::invalid_argument("PureState: amplitudes must form a unit vector");
  }
}

PureState PureState::normalized(std::vector<Complex> amplitudes) {
  double norm2 = 0.0;
  for (const auto& z : amplitudes) norm2 += std::norm(z);
  if (norm2 == 0.0) throw std::invalid_argument("PureState: cannot normalize the zero vector");
  const double inv = 1.0 / std::sqrt(norm2);
  for (auto& z : amplitudes) z *= inv;
  return PureState(std::move(amplitudes));
}

DensityMatrix partial_trace(std::span<const Complex> state, std::size_t n_sites,
                            std::size_t local_dim, const SubsystemSpec& a) {
  check_dimension(state.size(), n_sites, local_dim);
  a.validate(n_sites);
  const auto psi = rotated_amplitudes(state, n_sites, local_dim, a);
  const std::size_t d_a = ipow(local_dim, a.length);
  const std::size_t d_abar = state.size() / d_a;
  ComplexMatrix rho(d_a, d_a);
  for (std::size_t i = 0; i < d_a; ++i) {
    const Complex* ri = &psi[i * d_abar];
    for (std::size_t j = 0; j <= i; ++j) {
      const Complex* rj = &psi[j * d_abar];
      Complex acc = 0.0;
      for (std::size_t b = 0; b < d_abar; ++b) acc += ri[b] * std::conj(rj[b]);
      rho(i, j) = acc;
      rho(j, i) = std::conj(acc);
    }
    rho(i, i) = rho(i, i).real();
  }
  return DensityMatrix(std::move(rho), "A");
}

DensityMatrix partial_trace(const DensityMatrix& rho, std::size_t n_sites, std::size_t local_dim,
                            const SubsystemSpec& a) {
  const std::size_t dim = rho.dim();
  check_dimension(dim, n_sites, local_dim);
  a.validate(n_sites);
  const std::size_t d_a = ipow(local_dim, a.length);
  const std::size_t d_abar = dim / d_a;
  // Block-order index -> original index (inverse rotation).
  const std::size_t inverse_tail = ipow(local_dim, a.start);
  auto original = [&](std::size_t idx) { return rotate_index(idx, inverse_tail, dim); };
  ComplexMatrix out(d_a, d_a);
  const ComplexMatrix& m = rho.matrix();
  for (std::size_t i = 0; i < d_a; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      Complex acc = 0.0;
      for (std::size_t b = 0; b < d_abar; ++b) {
        acc += m(original(i * d_abar + b), original(j * d_abar + b));
      }
      out(i, j) = acc;
      out(j, i) = std::conj(acc);
    }
    out(i, i) = out(i, i).real();
  }
  return DensityMatrix(std::move(out), "A");
}

std::vector<double> schmidt_probabilities(std::span<const Complex> state, std::size_t n_sites,
                                          std::size_t local_dim, const SubsystemSpec& a) {
  check_dimension(state.size(), n_sites, local_dim);
  a.validate(n_sites);
  const auto psi = rotated_amplitudes(state, n_sites, local_dim, a);
  const std::size_t d_a = ipow(local_dim, a.length);
  const std::size_t d_abar = state.size() / d_a;
  const bool rows = d_a <= d_abar;
  const std::size_t k = rows ? d_a : d_abar;
  ComplexMatrix gram(k, k);
  if (rows) {
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = 0; j <= i; ++j) {
        Complex acc = 0.0;
        for (std::size_t b = 0; b < d_abar; ++b) {
          acc += psi[i * d_abar + b] * std::conj(psi[j * d_abar + b]);
        }
        gram(i, j) = acc;
        gram(j, i) = std::conj(acc);
      }
      gram(i, i) = gram(i, i).real();
    }
  } else {
    for (std::size_t x = 0; x < d_a; ++x) {
      const Complex* row = &psi[x * d_abar];
      for (std::size_t i = 0; i < k; ++i) {
        const Complex ci = std::conj(row[i]);
        for (std::size_t j = 0; j <= i; ++j) gram(i, j) += ci * row[j];
      }
    }
    for (std::size_t i = 0; i < k; ++i) {
      gram(i, i) = gram(i, i).real();
      for (std::size_t j = 0; j < i; ++j) gram(j, i) = std::conj(gram(i, j));
    }
  }
  auto p = hermitian_eigenvalues(std::move(gram));
  for (double& x : p) {
    if (x < -kNegativeEigenvalueTolerance) {
      throw InvariantError("schmidt_probabilities: negative Schmidt weight " + std::to_string(x));
    }
    x = std::max(x, 0.0);
  }
  return p;
}

std::vector<double> spectrum_probabilities(const DensityMatrix& rho) {
  auto p = hermitian_eigenvalues(rho.matrix());
  for (double& x : p) {
    if (x < -kNegativeEigenvalueTolerance) {
      throw InvariantError("density matrix has eigenvalue " + std::to_string(x) +
                           " below -1e-10");
    }
    x = std::max(x, 0.0);
  }
  return p;
}

double entropy_of_distribution(std::span<const double> probabilities, double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("entropy index alpha must be positive");
  std::vector<double> terms;
  terms.reserve(probabilities.size());
  if (alpha == 1.0) {
    for (double p : probabilities) {
      if (p > 0.0) terms.push_back(-p * std::log(p));
    }
    return pairwise_sum(terms);
  }
  for (double p : probabilities) {
    if (p > 0.0) terms.push_back(std::pow(p, alpha));
  }
  return std::log(pairwise_sum(terms)) / (1.0 - alpha);
}

double von_neumann_entropy(const DensityMatrix& rho) {
  return entropy_of_distribution(spectrum_probabilities(rho), 1.0);
}

double renyi_entropy(const DensityMatrix& rho, double alpha) {
  if (!(alpha > 0.0) || alpha == 1.0) {
    throw std::invalid_argument("renyi_entropy: alpha must be positive and different from 1");
  }
  return entropy_of_distribution(spectrum_probabilities(rho), alpha);
}

double entanglement_entropy(std::span<const Complex> state, std::size_t n_sites,
                            std::size_t local_dim, const SubsystemSpec& a, double alpha) {
  return entropy_of_distribution(schmidt_probabilities(state, n_sites, local_dim, a), alpha);
}

PureState haar_state(std::size_t dim, std::uint64_t seed) {
  if (dim == 0) throw std::invalid_argument("haar_state: dimension must be positive");
  Rng rng(seed);
  return PureState::normalized(complex_gaussian_vector(dim, rng));
}

PageMean page_mean(std::uint64_t d_a, std::uint64_t d_abar) {
  if (d_a == 0 || d_abar == 0) throw std::invalid_argument("page_mean: dimensions must be positive");
  if (d_a > d_abar) std::swap(d_a, d_abar);
  PageMean out;
  out.exact = harmonic_range(d_abar + 1, d_a * d_abar) -
              static_cast<double>(d_a - 1) / (2.0 * static_cast<double>(d_abar));
  out.asymptotic = std::log(static_cast<double>(d_a)) -
                   static_cast<double>(d_a) / (2.0 * static_cast<double>(d_abar));
  return out;
}

double conjecture_gap(std::size_t subsystem_length, std::size_t n_sites, std::size_t local_dim) {
  if (local_dim != 2) {
    throw std::invalid_argument("conjecture_gap: defined for qubit chains (d = 2) only");
  }
  if (subsystem_length == 0 || n_sites == 0 || 2 * subsystem_length > n_sites) {
    std::ostringstream msg;
    msg << "conjecture_gap: f = " << subsystem_length << "/" << n_sites
        << " must lie in (0, 1/2]";
    throw std::invalid_argument(msg.str());
  }
  const double f = static_cast<double>(subsystem_length) / static_cast<double>(n_sites);
  const double delta = 2 * subsystem_length == n_sites ? 1.0 : 0.0;
  return (delta - f - std::log1p(-f)) / 2.0;
}

}  // namespace midspec
