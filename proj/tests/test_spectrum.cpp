#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"
#include "midspec/errors.hpp"
#include "midspec/random.hpp"
#include "midspec/spectrum.hpp"
#include "oracle.hpp"

using namespace midspec;
using oracle::Mat;

namespace {

ModelSpec mfim(std::size_t n) {
  ModelSpec s;
  s.name = "mfim";
  s.n_sites = n;
  return s;
}

ModelSpec gue(std::size_t n, std::uint64_t seed) {
  ModelSpec s;
  s.name = "gue-local";
  s.n_sites = n;
  s.seed = seed;
  return s;
}

struct Fixture {
  LocalHamiltonian h;
  SpectralData sd;
  explicit Fixture(const ModelSpec& s) : h(build_model(s)), sd(full_spectrum(h)) {}
};

const Fixture& mfim10() {
  static const Fixture f(mfim(10));
  return f;
}

double oracle_entropy(const SpectralData& sd, const std::vector<Complex>& psi, const SubsystemSpec& a,
                      double alpha = 1.0) {
  return oracle::entropy(
      oracle::reduced(oracle::to_eigen(psi), sd.n_sites, sd.local_dim,
                      oracle::block_sites(a.start, a.length, sd.n_sites)),
      alpha);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace

TEST_CASE("ZZ ring spectrum") {
  std::vector<ComplexMatrix> terms(3, oracle::from_eigen(oracle::kron(oracle::pauli_z(), oracle::pauli_z())));
  const SpectralData sd = full_spectrum(LocalHamiltonian(3, 2, Boundary::kPeriodic, terms));
  const std::vector<double> expected{-1, -1, -1, -1, -1, -1, 3, 3};
  for (std::size_t j = 0; j < 8; ++j) CHECK(sd.eigenvalues[j] == doctest::Approx(expected[j]).epsilon(1e-13));
  CHECK(sd.s2 == doctest::Approx(3.0));
  CHECK(sd.degenerate);
  const MicrocanonicalWindow w = microcanonical_window(sd, -1.0, 0.1);
  CHECK(w.indices.size() == 6);
  CHECK(window_is_basis_dependent(sd, w));
}

TEST_CASE("full spectrum matches a reference eigensolver") {
  const Fixture f(gue(7, 4));
  const Mat h = oracle::to_eigen(assemble_dense(f.h));
  const Eigen::VectorXd ref = oracle::eigenvalues(h);
  double mean = 0.0, var = 0.0;
  for (std::size_t j = 0; j < f.sd.dim(); ++j) {
    CHECK(std::abs(f.sd.eigenvalues[j] - ref(j)) <= 1e-10);
    mean += f.sd.eigenvalues[j] / 128.0;
    var += f.sd.eigenvalues[j] * f.sd.eigenvalues[j] / 128.0;
  }
  CHECK(std::abs(mean) <= 1e-8 * std::sqrt(f.sd.s2));
  CHECK(std::abs(var - (h * h).trace().real() / 128.0) <= 1e-8 * var);
  CHECK_FALSE(f.sd.degenerate);
  for (std::size_t j : {0u, 50u, 127u}) {
    const oracle::Vec v = oracle::to_eigen(f.sd.eigenvector(j));
    CHECK((h * v - f.sd.eigenvalues[j] * v).norm() <= 1e-10);
  }
}

TEST_CASE("microcanonical windows") {
  const SpectralData& sd = mfim10().sd;
  const double top = std::max(std::abs(sd.eigenvalues.front()), std::abs(sd.eigenvalues.back()));
  CHECK(microcanonical_window(sd, 0.0, top).indices.size() == sd.dim());

  const std::size_t j = 300;
  CHECK(microcanonical_window(sd, sd.eigenvalues[j], 0.0).indices == std::vector<std::size_t>{j});

  const MicrocanonicalWindow w = microcanonical_window(sd, 0.0, 1.0);
  std::vector<std::size_t> scan;
  for (std::size_t k = 0; k < sd.dim(); ++k)
    if (sd.eigenvalues[k] >= -1.0 && sd.eigenvalues[k] <= 1.0) scan.push_back(k);
  CHECK(w.indices == scan);
  CHECK(microcanonical_window(sd, 1e6, 1.0).indices.empty());
  CHECK_THROWS_AS(microcanonical_window(sd, 0.0, -1.0), std::invalid_argument);

  const MicrocanonicalWindow c = window_with_count(sd, 0.3, 57);
  CHECK(c.indices.size() >= 57);
  std::vector<double> dist;
  for (double e : sd.eigenvalues) dist.push_back(std::abs(e - 0.3));
  std::sort(dist.begin(), dist.end());
  CHECK(c.half_width == dist[56]);
}

TEST_CASE("mid-spectrum fraction") {
  const Fixture g(gue(6, 2));
  CHECK(mid_spectrum_fraction(g.sd, 0.0) == 0.0);
  CHECK(mid_spectrum_fraction(g.sd, 1e3) == 1.0);
  const SpectralData& sd = mfim10().sd;
  const double s = std::sqrt(sd.s2);
  CHECK(std::abs(mid_spectrum_fraction(sd, 0.5 * s) - (2.0 * normal_cdf(0.5) - 1.0)) <= 0.08);
  double prev = 0.0;
  for (double e = 0.0; e < 4.0 * s; e += 0.1 * s) {
    const double f = mid_spectrum_fraction(sd, e);
    CHECK(f >= prev);
    CHECK(mid_spectrum_fraction(sd, -e) == f);
    prev = f;
  }
}

TEST_CASE("window entropies match the reference partial trace") {
  const SpectralData& sd = mfim10().sd;
  const MicrocanonicalWindow w = microcanonical_window(sd, 0.0, 0.3);
  REQUIRE(w.indices.size() > 10);
  for (double alpha : {0.5, 1.0, 2.0}) {
    const EntropyStats st = ensemble_entropy_stats(sd, w, {7, 5}, alpha);
    REQUIRE(st.per_state.size() == w.indices.size());
    double mean = 0.0;
    for (std::size_t k = 0; k < w.indices.size(); k += 7) {
      CHECK(st.per_state[k].index == w.indices[k]);
      // For alpha < 1 rounding-level Schmidt weights eps contribute eps^alpha.
      const double tol = alpha < 1.0 ? 1e-7 : 1e-10;
      CHECK(std::abs(st.per_state[k].entropy - oracle_entropy(sd, sd.eigenvector(w.indices[k]), {7, 5}, alpha)) <= tol);
    }
    for (const auto& e : st.per_state) mean += e.entropy / st.per_state.size();
    CHECK(std::abs(st.mean - mean) <= 1e-12);
    CHECK(st.mean >= st.min);
    CHECK(st.mean <= st.max);
    CHECK(st.deficit == doctest::Approx(5.0 * std::log(2.0) - st.mean));
    CHECK(st.deficit >= -1e-9);
  }
  const EntropyStats two = ensemble_entropy_stats(sd, w, {0, 5}, 2.0);
  const EntropyStats one = ensemble_entropy_stats(sd, w, {0, 5}, 1.0);
  const EntropyStats half = ensemble_entropy_stats(sd, w, {0, 5}, 0.5);
  CHECK(two.mean <= one.mean);
  CHECK(one.mean <= half.mean);

  const MicrocanonicalWindow lone{0.0, 0.0, {w.indices[3]}};
  const EntropyStats single = ensemble_entropy_stats(sd, lone, {0, 5});
  CHECK(single.mean == single.per_state[0].entropy);
  CHECK(single.variance == 0.0);
  CHECK_THROWS_AS(ensemble_entropy_stats(sd, MicrocanonicalWindow{}, {0, 5}), std::invalid_argument);
}

TEST_CASE("parallel evaluation gives identical statistics") {
  const SpectralData& sd = mfim10().sd;
  const MicrocanonicalWindow w = microcanonical_window(sd, 0.0, 0.5);
  const EntropyStats a = ensemble_entropy_stats(sd, w, {0, 5}, 1.0, 1);
  const EntropyStats b = ensemble_entropy_stats(sd, w, {0, 5}, 1.0, 4);
  CHECK(a.mean == b.mean);
  CHECK(a.variance == b.variance);
}

TEST_CASE("diagonal Hamiltonians have unentangled eigenstates") {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> g;
  std::vector<RawTerm> raw;
  for (std::size_t i = 0; i < 5; ++i) {
    std::vector<double> diag{g(rng), g(rng), g(rng), g(rng)};
    raw.push_back({i, ComplexMatrix::diagonal(diag)});
  }
  const LocalHamiltonian h = canonicalize(5, 2, Boundary::kPeriodic, raw);
  const SpectralData sd = full_spectrum(h);
  REQUIRE_FALSE(sd.degenerate);
  const MicrocanonicalWindow all = microcanonical_window(sd, 0.0, 100.0);
  const EntropyStats st = ensemble_entropy_stats(sd, all, {1, 2});
  CHECK(st.max <= 1e-12);
}

TEST_CASE("rotated bases") {
  const SpectralData& sd = mfim10().sd;
  const SubsystemSpec a{0, 5};
  const MicrocanonicalWindow w = window_with_count(sd, 0.0, 40);
  const std::size_t m = w.indices.size();
  const EntropyStats base = ensemble_entropy_stats(sd, w, a);
  const EntropyStats same = rotated_basis_entropies(sd, w, a, 1.0, ComplexMatrix::identity(m));
  CHECK(std::abs(same.mean - base.mean) <= 1e-12);

  const MicrocanonicalWindow lone{0.0, 0.0, {w.indices[0]}};
  const EntropyStats single = rotated_basis_entropies(sd, lone, a, 1.0, std::uint64_t{5});
  CHECK(std::abs(single.mean - ensemble_entropy_stats(sd, lone, a).mean) <= 1e-12);

  const DensityMatrix rho = window_reduced_state(sd, w, a);
  const double s_rho = von_neumann_entropy(rho);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const ComplexMatrix u = haar_unitary(m, seed);
    const EntropyStats rot = rotated_basis_entropies(sd, w, a, 1.0, u);
    CHECK(rot.mean <= s_rho + 1e-9);
    const DensityMatrix rho_rot = average_reduced_state(multiply(window_basis(sd, w), u), 10, 2, a);
    CHECK(max_abs_difference(rho_rot.matrix(), rho.matrix()) <= 1e-10);
  }
  CHECK_THROWS_AS(rotated_basis_entropies(sd, w, a, 1.0, ComplexMatrix::identity(m + 1)), std::invalid_argument);
}

TEST_CASE("Haar states inside a window subspace") {
  const Fixture f(gue(6, 9));
  const SubsystemSpec a{0, 3};
  const MicrocanonicalWindow lone{0.0, 0.0, {17}};
  const EntropyStats one = subspace_haar_entropy_samples(f.sd, lone, a, 20, 1);
  CHECK(one.max - one.min <= 1e-12);
  CHECK(std::abs(one.mean - ensemble_entropy_stats(f.sd, lone, a).mean) <= 1e-12);

  const MicrocanonicalWindow all = microcanonical_window(f.sd, 0.0, 1e3);
  const EntropyStats st = subspace_haar_entropy_samples(f.sd, all, a, 4000, 3);
  const double se = std::sqrt(st.variance / 4000.0);
  CHECK(std::abs(st.mean - page_mean(8, 8).exact) <= 3.0 * se);

  const EntropyStats again = subspace_haar_entropy_samples(f.sd, all, a, 4000, 3, 1.0, 3);
  CHECK(again.mean == st.mean);
  CHECK_THROWS_AS(subspace_haar_entropy_samples(f.sd, all, a, 0, 3), std::invalid_argument);
}

TEST_CASE("subspace Haar entropies concentrate as the window grows") {
  const SpectralData& sd = mfim10().sd;
  double prev = 1e300;
  for (std::size_t count : {10u, 100u, 600u}) {
    const EntropyStats st = subspace_haar_entropy_samples(sd, window_with_count(sd, 0.0, count), {0, 5}, 200, 11);
    CHECK(st.variance < prev);
    prev = st.variance;
  }
}

TEST_CASE("band diagnostic") {
  const SpectralData& sd = mfim10().sd;
  const SubsystemSpec a{0, 5};
  const HamiltonianSplit split = split_subsystem(mfim10().h, a);
  const MicrocanonicalWindow w = microcanonical_window(sd, 0.0, 0.5);
  const BandDiagnostic band = band_diagnostic(sd, w, split, a);
  CHECK(std::abs(std::accumulate(band.probabilities.begin(), band.probabilities.end(), 0.0) - 1.0) <= 1e-10);
  CHECK(band.window_entropy <= band.bound + 1e-9);

  // Independent route: reduced state and H_A eigenbasis from the reference solver.
  Mat rho = Mat::Zero(32, 32);
  for (std::size_t j : w.indices) rho += oracle::reduced(oracle::to_eigen(sd.eigenvector(j)), 10, 2, {0, 1, 2, 3, 4});
  rho /= static_cast<double>(w.indices.size());
  Eigen::SelfAdjointEigenSolver<Mat> es(oracle::to_eigen(split.h_a));
  double bound = 0.0;
  for (int k = 0; k < 32; ++k) {
    const double p = (es.eigenvectors().col(k).adjoint() * rho * es.eigenvectors().col(k))(0, 0).real();
    if (p > 0.0) bound -= p * std::log(p);
  }
  CHECK(std::abs(bound - band.bound) <= 1e-10);
  CHECK(std::abs(oracle::entropy(rho) - band.window_entropy) <= 1e-10);

  const MicrocanonicalWindow all = microcanonical_window(sd, 0.0, 1e3);
  const BandDiagnostic flat = band_diagnostic(sd, all, split, a);
  for (double p : flat.probabilities) CHECK(std::abs(p - 1.0 / 32.0) <= 1e-10);
}

TEST_CASE("projector diagnostic") {
  const Fixture f(gue(6, 13));
  const SubsystemSpec a{0, 3};
  const HamiltonianSplit split = split_subsystem(f.h, a);
  for (double center : {-0.4, 0.0, 0.6}) {
    const MicrocanonicalWindow w = microcanonical_window(f.sd, center, 0.5);
    const ProofDiagnosticReport r = proof_projector_diagnostic(f.sd, w, split, a, 0.2, 0.3);
    CHECK(r.trace_p + r.trace_q_total == 64);
    CHECK(r.lambda == doctest::Approx(0.8));
    CHECK(r.mirrored == (center > 0.0));
    CHECK(r.m >= 0.0);
    CHECK(r.m <= 1.0);
    CHECK(r.band_weight >= 0.0);
    CHECK(r.band_weight <= 1.0 + 1e-12);

    // Build P and P_K explicitly (A is the leading block, so no permutation).
    Eigen::SelfAdjointEigenSolver<Mat> ea(oracle::to_eigen(split.h_a)), eb(oracle::to_eigen(split.h_abar));
    const double sign = center > 0.0 ? -1.0 : 1.0;
    Mat p = Mat::Zero(64, 64), pk = Mat::Zero(64, 64);
    std::size_t band_size = 0;
    for (int k = 0; k < 8; ++k) {
      const double eps = ea.eigenvalues()(k);
      Mat not_q = Mat::Zero(8, 8);
      for (int l = 0; l < 8; ++l)
        if (std::abs(eb.eigenvalues()(l) - (center - eps)) > r.lambda)
          not_q += eb.eigenvectors().col(l) * eb.eigenvectors().col(l).adjoint();
      const Mat term = oracle::kron(ea.eigenvectors().col(k) * ea.eigenvectors().col(k).adjoint(), not_q);
      p += term;
      const double e = sign * eps;
      if (0.2 * std::sqrt(3.0) <= e && e < 1.2 * std::sqrt(3.0)) {
        pk += term;
        ++band_size;
      }
    }
    Mat rho = Mat::Zero(64, 64);
    for (std::size_t j : w.indices) {
      const oracle::Vec v = oracle::to_eigen(f.sd.eigenvector(j));
      rho += v * v.adjoint();
    }
    rho /= static_cast<double>(w.indices.size());
    CHECK(r.band.size() == band_size);
    CHECK(std::abs((rho * p).trace().real() - r.rho_p_weight) <= 1e-10);
    CHECK(std::abs((rho * pk).trace().real() - r.rho_pk_weight) <= 1e-10);
    CHECK(static_cast<std::size_t>(std::llround(p.trace().real())) == r.trace_p);
  }

  const MicrocanonicalWindow w = microcanonical_window(f.sd, 0.0, 0.5);
  const ProofDiagnosticReport wide = proof_projector_diagnostic(f.sd, w, split, a, 1.0, 1e3);
  CHECK(wide.trace_p == 0);
  CHECK(wide.rho_p_weight == 0.0);
  CHECK_THROWS_AS(proof_projector_diagnostic(f.sd, w, split, a, 0.0, 1.0), std::invalid_argument);
}

TEST_CASE("projector diagnostic on the chaotic chain") {
  const SubsystemSpec a{0, 5};
  const HamiltonianSplit split = split_subsystem(mfim10().h, a);
  const ProofDiagnosticReport r =
      proof_projector_diagnostic(mfim10().sd, microcanonical_window(mfim10().sd, 0.0, 1.0), split, a, 1.0, 2.0);
  for (double v : {r.m, r.band_weight, r.rho_p_weight, r.rho_pk_weight, r.band_q_weight, r.max_band_q_ratio,
                   r.entropy_bound, r.window_entropy})
    CHECK(std::isfinite(v));
  CHECK(r.trace_p + r.trace_q_total == 1024);
  CHECK(r.band_empty == r.band.empty());
}

TEST_CASE("Kolmogorov distance to the Gaussian") {
  std::vector<double> q;
  const std::size_t n = 1000;
  // Quantile placement: inverse normal CDF by bisection.
  for (std::size_t i = 0; i < n; ++i) {
    const double target = (static_cast<double>(i) + 0.5) / static_cast<double>(n);
    double lo = -10.0, hi = 10.0;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (normal_cdf(mid) < target ? lo : hi) = mid;
    }
    q.push_back(2.0 * 0.5 * (lo + hi));
  }
  CHECK(gaussianity_check(q, 4.0) <= 1.0 / static_cast<double>(n));

  const std::vector<double> two_point{-1.0, -1.0, 1.0, 1.0};
  CHECK(gaussianity_check(two_point, 1.0) > 0.3);
  CHECK_THROWS_AS(gaussianity_check(two_point, 0.0), std::invalid_argument);
}

TEST_CASE("block-averaged deficit and its predictor") {
  const Fixture& f = mfim10();
  const DensityMatrix mixed = DensityMatrix::maximally_mixed(1024);
  const LemmaDeficit flat = lemma_l_deficit(f.h, 5, mixed);
  CHECK(std::abs(flat.deficit) <= 1e-9);
  CHECK(std::abs(flat.predictor) <= 1e-20);

  const LemmaDeficit top = lemma_l_deficit(f.sd, 5, 0);
  CHECK(top.deficit > 0.0);
  CHECK(top.predictor > 0.0);
  CHECK(top.predictor == doctest::Approx(5.0 * f.sd.eigenvalues[0] * f.sd.eigenvalues[0] / 100.0));
  double mean = 0.0;
  for (std::size_t s = 0; s < 10; ++s) mean += oracle_entropy(f.sd, f.sd.eigenvector(0), {s, 5}) / 10.0;
  CHECK(std::abs(top.mean_entropy - mean) <= 1e-10);

  const MicrocanonicalWindow w = window_with_count(f.sd, 0.0, 1);
  const LemmaDeficit mid = lemma_l_deficit(f.sd, 5, w.indices[0]);
  CHECK(mid.predictor < 1e-3);
  CHECK(mid.deficit > mid.predictor);
  CHECK_THROWS_AS(lemma_l_deficit(f.sd, 1, 0), std::invalid_argument);
}
