#include "midspec/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "midspec/basis.hpp"
#include "midspec/errors.hpp"
#include "midspec/random.hpp"

namespace midspec {
namespace {

double max_entropy(std::size_t length, std::size_t local_dim) {
  return static_cast<double>(length) * std::log(static_cast<double>(local_dim));
}

void require_nonempty(const MicrocanonicalWindow& w, const char* what) {
  if (w.indices.empty()) {
    std::ostringstream msg;
    msg << what << ": window [" << w.center - w.half_width << ", " << w.center + w.half_width
        << "] holds no eigenstates";
    throw std::invalid_argument(msg.str());
  }
}

std::vector<StateEntropy> column_entropies(const ComplexMatrix& states, std::size_t n_sites,
                                           std::size_t local_dim, const SubsystemSpec& a,
                                           double alpha, std::size_t workers) {
  std::vector<StateEntropy> out(states.cols());
  parallel_for(states.cols(), workers, [&](std::size_t k) {
    const auto psi = states.column(k);
    out[k] = {k, entanglement_entropy(psi, n_sites, local_dim, a, alpha)};
  });
  return out;
}

// Rows: block-order A index; columns: block-order Abar index.
ComplexMatrix state_as_matrix(std::span<const Complex> psi, std::size_t n_sites,
                              std::size_t local_dim, const SubsystemSpec& a) {
  const std::size_t dim = psi.size();
  const std::size_t d_a = ipow(local_dim, a.length);
  const std::size_t d_abar = dim / d_a;
  const std::size_t tail = ipow(local_dim, n_sites - a.start);
  ComplexMatrix m(d_a, d_abar);
  for (std::size_t b = 0; b < dim; ++b) m.data()[rotate_index(b, tail, dim)] = psi[b];
  return m;
}

}  // namespace

SpectralData full_spectrum(const LocalHamiltonian& h, std::size_t dimension_cap,
                           EigenBackend backend) {
  SpectralData sd;
  sd.n_sites = h.n_sites();
  sd.local_dim = h.local_dim();
  sd.s2 = variance_report(h, SubsystemSpec{0, 1}, dimension_cap).s2;
  auto eig = hermitian_eig(assemble_dense(h, dimension_cap), backend);
  sd.eigenvalues = std::move(eig.eigenvalues);
  sd.eigenvectors = std::move(eig.eigenvectors);

  const double n = static_cast<double>(sd.dim());
  const double s = std::sqrt(sd.s2);
  const double mean = pairwise_sum(sd.eigenvalues) / n;
  std::vector<double> squares(sd.dim());
  for (std::size_t j = 0; j < sd.dim(); ++j) squares[j] = sd.eigenvalues[j] * sd.eigenvalues[j];
  const double variance = pairwise_sum(squares) / n;
  if (std::abs(mean) > 1e-8 * std::max(s, 1.0)) {
    throw InvariantError("full_spectrum: mean eigenvalue " + std::to_string(mean) +
                         " is not zero");
  }
  if (std::abs(variance - sd.s2) > 1e-8 * std::max(sd.s2, 1e-300)) {
    std::ostringstream msg;
    msg << "full_spectrum: eigenvalue variance " << variance << " differs from tr(H^2)/d^N "
        << sd.s2;
    throw InvariantError(msg.str());
  }
  for (std::size_t j = 1; j < sd.dim(); ++j) {
    if (sd.eigenvalues[j] - sd.eigenvalues[j - 1] < 1e-10 * s) {
      sd.degenerate = true;
      break;
    }
  }
  return sd;
}

MicrocanonicalWindow microcanonical_window(const SpectralData& sd, double center,
                                           double half_width) {
  if (!(half_width >= 0.0)) throw std::invalid_argument("microcanonical_window: half width must be >= 0");
  MicrocanonicalWindow w{center, half_width, {}};
  const auto& ev = sd.eigenvalues;
  const auto lo = std::lower_bound(ev.begin(), ev.end(), center - half_width);
  const auto hi = std::upper_bound(ev.begin(), ev.end(), center + half_width);
  for (auto it = lo; it != hi; ++it) {
    // Closed interval on |E_j - E|, matching the defining inequality exactly.
    const auto j = static_cast<std::size_t>(it - ev.begin());
    if (std::abs(ev[j] - center) <= half_width) w.indices.push_back(j);
  }
  return w;
}

MicrocanonicalWindow window_with_count(const SpectralData& sd, double center,
                                       std::size_t min_count) {
  if (min_count == 0 || min_count > sd.dim()) {
    std::ostringstream msg;
    msg << "window_with_count: requested " << min_count << " states from a spectrum of "
        << sd.dim();
    throw std::invalid_argument(msg.str());
  }
  std::vector<double> dist(sd.dim());
  for (std::size_t j = 0; j < sd.dim(); ++j) dist[j] = std::abs(sd.eigenvalues[j] - center);
  std::nth_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(min_count - 1),
                   dist.end());
  return microcanonical_window(sd, center, dist[min_count - 1]);
}

double mid_spectrum_fraction(const SpectralData& sd, double energy) {
  const double e = std::abs(energy);
  const auto& ev = sd.eigenvalues;
  const auto lo = std::lower_bound(ev.begin(), ev.end(), -e);
  const auto hi = std::upper_bound(ev.begin(), ev.end(), e);
  return static_cast<double>(hi - lo) / static_cast<double>(ev.size());
}

bool window_is_basis_dependent(const SpectralData& sd, const MicrocanonicalWindow& w) {
  const double tol = 1e-10 * std::sqrt(sd.s2);
  for (std::size_t j : w.indices) {
    if (j > 0 && sd.eigenvalues[j] - sd.eigenvalues[j - 1] < tol) return true;
    if (j + 1 < sd.dim() && sd.eigenvalues[j + 1] - sd.eigenvalues[j] < tol) return true;
  }
  return false;
}

EntropyStats summarize_entropies(std::vector<StateEntropy> per_state, double max_entropy,
                                 double alpha) {
  if (per_state.empty()) throw std::invalid_argument("summarize_entropies: no states");
  EntropyStats st;
  st.alpha = alpha;
  std::vector<double> values(per_state.size());
  for (std::size_t k = 0; k < per_state.size(); ++k) values[k] = per_state[k].entropy;
  const double n = static_cast<double>(values.size());
  st.mean = pairwise_sum(values) / n;
  auto [mn, mx] = std::minmax_element(values.begin(), values.end());
  st.min = *mn;
  st.max = *mx;
  if (values.size() > 1) {
    std::vector<double> sq(values.size());
    for (std::size_t k = 0; k < values.size(); ++k) {
      sq[k] = (values[k] - st.mean) * (values[k] - st.mean);
    }
    st.variance = pairwise_sum(sq) / (n - 1.0);
  }
  // Rounding can push the mean a few ulps outside [min, max].
  st.mean = std::clamp(st.mean, st.min, st.max);
  st.deficit = max_entropy - st.mean;
  if (st.deficit < -1e-9) {
    throw InvariantError("summarize_entropies: mean entropy exceeds the maximum L ln d");
  }
  st.per_state = std::move(per_state);
  return st;
}

ComplexMatrix window_basis(const SpectralData& sd, const MicrocanonicalWindow& w) {
  ComplexMatrix out(sd.dim(), w.indices.size());
  for (std::size_t r = 0; r < sd.dim(); ++r) {
    for (std::size_t k = 0; k < w.indices.size(); ++k) out(r, k) = sd.eigenvectors(r, w.indices[k]);
  }
  return out;
}

EntropyStats ensemble_entropy_stats(const SpectralData& sd, const MicrocanonicalWindow& w,
                                    const SubsystemSpec& a, double alpha, std::size_t workers) {
  require_nonempty(w, "ensemble_entropy_stats");
  a.validate(sd.n_sites);
  std::vector<StateEntropy> per_state(w.indices.size());
  parallel_for(w.indices.size(), workers, [&](std::size_t k) {
    const std::size_t j = w.indices[k];
    per_state[k] = {j, entanglement_entropy(sd.eigenvector(j), sd.n_sites, sd.local_dim, a, alpha)};
  });
  auto st = summarize_entropies(std::move(per_state), max_entropy(a.length, sd.local_dim), alpha);
  st.basis_dependent = window_is_basis_dependent(sd, w);
  return st;
}

EntropyStats rotated_basis_entropies(const SpectralData& sd, const MicrocanonicalWindow& w,
                                     const SubsystemSpec& a, double alpha,
                                     const ComplexMatrix& unitary, std::size_t workers) {
  require_nonempty(w, "rotated_basis_entropies");
  a.validate(sd.n_sites);
  if (unitary.rows() != w.indices.size() || !unitary.is_square()) {
    throw std::invalid_argument("rotated_basis_entropies: unitary must be |J| x |J|");
  }
  const ComplexMatrix rotated = multiply(window_basis(sd, w), unitary);
  auto per_state = column_entropies(rotated, sd.n_sites, sd.local_dim, a, alpha, workers);
  return summarize_entropies(std::move(per_state), max_entropy(a.length, sd.local_dim), alpha);
}

EntropyStats rotated_basis_entropies(const SpectralData& sd, const MicrocanonicalWindow& w,
                                     const SubsystemSpec& a, double alpha,
                                     std::uint64_t rotation_seed, std::size_t workers) {
  require_nonempty(w, "rotated_basis_entropies");
  return rotated_basis_entropies(sd, w, a, alpha, haar_unitary(w.indices.size(), rotation_seed),
                                 workers);
}

EntropyStats subspace_haar_entropy_samples(const SpectralData& sd, const MicrocanonicalWindow& w,
                                           const SubsystemSpec& a, std::size_t n_samples,
                                           std::uint64_t seed, double alpha,
                                           std::size_t workers) {
  require_nonempty(w, "subspace_haar_entropy_samples");
  if (n_samples == 0) throw std::invalid_argument("subspace_haar_entropy_samples: need at least one sample");
  a.validate(sd.n_sites);
  const ComplexMatrix basis = window_basis(sd, w);
  const std::size_t jsize = w.indices.size();
  constexpr std::size_t kChunk = 128;
  std::vector<StateEntropy> per_state(n_samples);
  for (std::size_t first = 0; first < n_samples; first += kChunk) {
    const std::size_t count = std::min(kChunk, n_samples - first);
    ComplexMatrix coeffs(jsize, count);
    for (std::size_t s = 0; s < count; ++s) {
      Rng rng(derive_seed(seed, StreamKind::kSubspaceSample, first + s));
      const auto c = complex_gaussian_vector(jsize, rng);
      for (std::size_t k = 0; k < jsize; ++k) coeffs(k, s) = c[k];
    }
    const ComplexMatrix states = multiply(basis, coeffs);
    parallel_for(count, workers, [&](std::size_t s) {
      const PureState psi = PureState::normalized(states.column(s));
      per_state[first + s] = {first + s, entanglement_entropy(psi.amplitudes(), sd.n_sites,
                                                              sd.local_dim, a, alpha)};
    });
  }
  return summarize_entropies(std::move(per_state), max_entropy(a.length, sd.local_dim), alpha);
}

DensityMatrix average_reduced_state(const ComplexMatrix& states, std::size_t n_sites,
                                    std::size_t local_dim, const SubsystemSpec& a) {
  if (states.cols() == 0) throw std::invalid_argument("average_reduced_state: no states");
  a.validate(n_sites);
  const std::size_t d_a = ipow(local_dim, a.length);
  ComplexMatrix acc(d_a, d_a);
  for (std::size_t k = 0; k < states.cols(); ++k) {
    acc += partial_trace(states.column(k), n_sites, local_dim, a).matrix();
  }
  acc *= 1.0 / static_cast<double>(states.cols());
  return DensityMatrix(std::move(acc), "A");
}

DensityMatrix window_reduced_state(const SpectralData& sd, const MicrocanonicalWindow& w,
                                   const SubsystemSpec& a) {
  require_nonempty(w, "window_reduced_state");
  return average_reduced_state(window_basis(sd, w), sd.n_sites, sd.local_dim, a);
}

BandDiagnostic band_diagnostic(const SpectralData& sd, const MicrocanonicalWindow& w,
                               const HamiltonianSplit& split, const SubsystemSpec& a) {
  require_nonempty(w, "band_diagnostic");
  if (split.subsystem.start != a.start || split.subsystem.length != a.length) {
    throw std::invalid_argument("band_diagnostic: split was made for a different subsystem");
  }
  const DensityMatrix rho_a = window_reduced_state(sd, w, a);
  const EigenDecomposition eig = hermitian_eig(split.h_a);
  const std::size_t d_a = rho_a.dim();

  BandDiagnostic out;
  out.h_a_eigenvalues = eig.eigenvalues;
  out.probabilities.resize(d_a);
  for (std::size_t k = 0; k < d_a; ++k) {
    Complex acc = 0.0;
    for (std::size_t r = 0; r < d_a; ++r) {
      Complex row = 0.0;
      for (std::size_t c = 0; c < d_a; ++c) row += rho_a.matrix()(r, c) * eig.eigenvectors(c, k);
      acc += std::conj(eig.eigenvectors(r, k)) * row;
    }
    out.probabilities[k] = std::max(acc.real(), 0.0);
  }
  const double total = pairwise_sum(out.probabilities);
  if (std::abs(total - 1.0) > 1e-10) {
    throw InvariantError("band_diagnostic: probabilities sum to " + std::to_string(total));
  }
  out.bound = entropy_of_distribution(out.probabilities, 1.0);
  out.window_entropy = von_neumann_entropy(rho_a);
  if (out.window_entropy > out.bound + 1e-9) {
    std::ostringstream msg;
    msg << "band_diagnostic: S(rho_A) = " << out.window_entropy
        << " exceeds the diagonal entropy " << out.bound;
    throw InvariantError(msg.str());
  }
  return out;
}

ProofDiagnosticReport proof_projector_diagnostic(const SpectralData& sd,
                                                 const MicrocanonicalWindow& w,
                                                 const HamiltonianSplit& split,
                                                 const SubsystemSpec& a, double c1, double c2) {
  require_nonempty(w, "proof_projector_diagnostic");
  if (!(c1 > 0.0) || !(c2 > 0.0)) {
    throw std::invalid_argument("proof_projector_diagnostic: C1 and C2 must be positive");
  }
  const BandDiagnostic band = band_diagnostic(sd, w, split, a);
  const EigenDecomposition eig_a = hermitian_eig(split.h_a);
  const EigenDecomposition eig_abar = hermitian_eig(split.h_abar);
  const std::size_t d_a = eig_a.eigenvalues.size();
  const std::size_t d_abar = eig_abar.eigenvalues.size();
  const auto& eps = eig_a.eigenvalues;
  const auto& vareps = eig_abar.eigenvalues;

  ProofDiagnosticReport rep;
  rep.center = w.center;
  rep.delta = w.half_width;
  rep.c1 = c1;
  rep.c2 = c2;
  rep.lambda = w.half_width + c2;
  // The construction assumes E <= 0; for E > 0 apply it to -H, which only
  // flips the sign convention of the band K (the Q projectors are invariant).
  rep.mirrored = w.center > 0.0;
  const double sign = rep.mirrored ? -1.0 : 1.0;
  const double root_l = std::sqrt(static_cast<double>(a.length));
  for (std::size_t k = 0; k < d_a; ++k) {
    const double e = sign * eps[k];
    if (c1 * root_l <= e && e < (c1 + 1.0) * root_l) rep.band.push_back(k);
  }
  rep.m = static_cast<double>(rep.band.size()) / static_cast<double>(d_a);
  rep.band_empty = rep.band.empty();

  // in_q[k][l]: |varepsilon_l - (E - epsilon_k)| <= Lambda.
  std::vector<std::vector<char>> in_q(d_a, std::vector<char>(d_abar, 0));
  std::vector<std::size_t> trace_q(d_a, 0);
  for (std::size_t k = 0; k < d_a; ++k) {
    const double x = w.center - eps[k];
    for (std::size_t l = 0; l < d_abar; ++l) {
      if (std::abs(vareps[l] - x) <= rep.lambda) {
        in_q[k][l] = 1;
        ++trace_q[k];
      } else {
        ++rep.trace_p;
      }
    }
    rep.trace_q_total += trace_q[k];
  }
  if (rep.trace_p + rep.trace_q_total != d_a * d_abar) {
    throw InvariantError("proof_projector_diagnostic: projector ranks do not add up to d^N");
  }
  std::vector<char> in_band(d_a, 0);
  for (std::size_t k : rep.band) {
    in_band[k] = 1;
    rep.max_band_q_ratio = std::max(rep.max_band_q_ratio, static_cast<double>(trace_q[k]) /
                                                              static_cast<double>(w.indices.size()));
  }

  // Coefficients of each window eigenstate in the product eigenbasis
  // |a_k>|abar_l>: C = U_A^dagger M conj(U_Abar).
  const ComplexMatrix ua_dag = eig_a.eigenvectors.adjoint();
  ComplexMatrix uabar_conj = eig_abar.eigenvectors;
  for (auto& z : uabar_conj.data()) z = std::conj(z);
  double p_weight = 0.0, pk_weight = 0.0, band_q = 0.0, band_total = 0.0;
  for (std::size_t j : w.indices) {
    const auto psi = sd.eigenvector(j);
    const ComplexMatrix c =
        multiply(multiply(ua_dag, state_as_matrix(psi, sd.n_sites, sd.local_dim, a)), uabar_conj);
    for (std::size_t k = 0; k < d_a; ++k) {
      for (std::size_t l = 0; l < d_abar; ++l) {
        const double weight = std::norm(c(k, l));
        if (!in_q[k][l]) p_weight += weight;
        if (in_band[k]) {
          band_total += weight;
          if (in_q[k][l]) {
            band_q += weight;
          } else {
            pk_weight += weight;
          }
        }
      }
    }
  }
  const double inv_j = 1.0 / static_cast<double>(w.indices.size());
  rep.rho_p_weight = p_weight * inv_j;
  rep.rho_pk_weight = pk_weight * inv_j;
  rep.band_q_weight = band_q * inv_j;
  rep.band_weight = band_total * inv_j;
  rep.entropy_bound = band.bound;
  rep.window_entropy = band.window_entropy;
  rep.band_bound_holds = !rep.band_empty && rep.band_weight <= rep.m / 2.0;
  return rep;
}

double gaussianity_check(std::span<const double> eigenvalues, double s2) {
  if (eigenvalues.empty() || !(s2 > 0.0)) {
    throw std::invalid_argument("gaussianity_check: need eigenvalues and positive variance");
  }
  std::vector<double> sorted(eigenvalues.begin(), eigenvalues.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  const double scale = std::sqrt(2.0 * s2);
  double dist = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double cdf = 0.5 * std::erfc(-sorted[i] / scale);
    dist = std::max({dist, cdf - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - cdf});
  }
  return dist;
}

double gaussianity_check(const SpectralData& sd) { return gaussianity_check(sd.eigenvalues, sd.s2); }

LemmaDeficit lemma_l_deficit(const SpectralData& sd, std::size_t subsystem_length,
                             std::size_t state_index) {
  if (subsystem_length <= 1 || subsystem_length > sd.n_sites) {
    throw std::invalid_argument("lemma_l_deficit: subsystem length must satisfy 1 < L <= N");
  }
  if (state_index >= sd.dim()) throw std::invalid_argument("lemma_l_deficit: no such eigenstate");
  const auto psi = sd.eigenvector(state_index);
  std::vector<double> entropies(sd.n_sites);
  for (std::size_t s = 0; s < sd.n_sites; ++s) {
    entropies[s] = entanglement_entropy(psi, sd.n_sites, sd.local_dim, {s, subsystem_length});
  }
  LemmaDeficit out;
  out.energy = sd.eigenvalues[state_index];
  out.mean_entropy = pairwise_sum(entropies) / static_cast<double>(sd.n_sites);
  out.deficit = max_entropy(subsystem_length, sd.local_dim) - out.mean_entropy;
  const double n = static_cast<double>(sd.n_sites);
  out.predictor = static_cast<double>(subsystem_length) * out.energy * out.energy / (n * n);
  return out;
}

LemmaDeficit lemma_l_deficit(const LocalHamiltonian& h, std::size_t subsystem_length,
                             const DensityMatrix& rho) {
  const std::size_t n_sites = h.n_sites();
  if (subsystem_length <= 1 || subsystem_length > n_sites) {
    throw std::invalid_argument("lemma_l_deficit: subsystem length must satisfy 1 < L <= N");
  }
  std::vector<double> entropies(n_sites);
  for (std::size_t s = 0; s < n_sites; ++s) {
    entropies[s] = von_neumann_entropy(
        partial_trace(rho, n_sites, h.local_dim(), {s, subsystem_length}));
  }
  LemmaDeficit out;
  out.energy = energy_expectation(h, rho.matrix());
  out.mean_entropy = pairwise_sum(entropies) / static_cast<double>(n_sites);
  out.deficit = max_entropy(subsystem_length, h.local_dim()) - out.mean_entropy;
  const double n = static_cast<double>(n_sites);
  out.predictor = static_cast<double>(subsystem_length) * out.energy * out.energy / (n * n);
  return out;
}

}  // namespace midspec
