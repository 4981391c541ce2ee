// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "midspec/blas_guard.hpp"
#include "midspec/entanglement.hpp"
#include "midspec/errors.hpp"
#include "midspec/experiment.hpp"
#include "midspec/hamiltonian.hpp"
#include "midspec/random.hpp"
#include "midspec/spectrum.hpp"
#include "midspec/thermo.hpp"
#include "oracle.hpp"

using namespace midspec;
using oracle::Mat;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

ModelSpec model(const std::string& name, std::size_t n, std::uint64_t seed = 0) {
  ModelSpec s;
  s.name = name;
  s.n_sites = n;
  s.seed = seed;
  return s;
}

struct Shared {
  LocalHamiltonian h12 = build_model(model("mfim", 12));
  SpectralData sd12 = full_spectrum(h12);
  MicrocanonicalWindow w100 = window_with_count(sd12, 0.0, 100);
  SubsystemSpec half{0, 6};
};

Shared& shared() {
  static Shared s;
  return s;
}

double page_deficit(std::size_t length, std::size_t n) {
  const auto da = static_cast<std::uint64_t>(1) << length;
  const auto db = static_cast<std::uint64_t>(1) << (n - length);
  return static_cast<double>(length) * std::log(2.0) - page_mean(da, db).exact;
}

Outcome page_oracle() {
  Outcome o{true, {}};
  double worst = 0.0;
  const std::pair<std::uint64_t, std::uint64_t> exact_cases[] = {{2, 2}, {2, 4}, {1, 1}, {1, 7}, {1, 64}};
  for (auto [a, b] : exact_cases) {
    const double want = oracle::page_rational(a, b).convert_to<double>();
    worst = std::max(worst, std::abs(page_mean(a, b).exact - want));
  }
  worst = std::max(worst, std::abs(page_mean(2, 2).exact - 1.0 / 3.0));
  worst = std::max(worst, std::abs(page_mean(2, 4).exact - (1.0 / 5 + 1.0 / 6 + 1.0 / 7)));
  o.pass = worst <= 1e-12;
  o.detail = "exact max err " + fmt("%.2e", worst);

  const std::pair<std::uint64_t, std::uint64_t> mc_cases[] = {{2, 2}, {4, 8}, {8, 8}};
  std::uint64_t stream = 0;
  for (auto [a, b] : mc_cases) {
    const std::size_t samples = 10000;
    std::size_t la = 0, lb = 0;
    while ((std::size_t{1} << la) < a) ++la;
    while ((std::size_t{1} << lb) < b) ++lb;
    double sum = 0.0, sum2 = 0.0;
    for (std::size_t s = 0; s < samples; ++s) {
      const PureState psi = haar_state(a * b, derive_seed(2024 + stream, StreamKind::kHaarState, s));
      const double e = entanglement_entropy(psi.amplitudes(), la + lb, 2, {0, la});
      sum += e;
      sum2 += e * e;
    }
    ++stream;
    const double mean = sum / samples;
    const double var = (sum2 - samples * mean * mean) / (samples - 1);
    const double z = std::abs(mean - page_mean(a, b).exact) / std::sqrt(var / samples);
    o.pass = o.pass && z <= 3.0;
    o.detail += "; (" + std::to_string(a) + "," + std::to_string(b) + ") z=" + fmt("%.2f", z);
  }
  return o;
}

Outcome gap_oracle() {
  const auto scalar = [](double f, bool half) { return ((half ? 1.0 : 0.0) - f - std::log1p(-f)) / 2.0; };
  const double g_half = conjecture_gap(6, 12);
  const double g_quarter = conjecture_gap(3, 12);
  const double e1 = std::max(std::abs(g_half - scalar(0.5, true)), std::abs(g_half - 0.596574));
  const double e2 = std::max(std::abs(g_quarter - scalar(0.25, false)), std::abs(g_quarter - 0.018841));
  return {e1 <= 1e-6 && e2 <= 1e-6,
          "f=1/2 " + fmt("%.7f", g_half) + ", f=1/4 " + fmt("%.7f", g_quarter)};
}

Outcome canonical_suite() {
  double op_err = 0.0, ortho = 0.0, s2_rel = 0.0, var_rel = 0.0;
  for (std::size_t n : {4u, 6u, 8u}) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      // Raw GUE terms drawn here; canonical form must equal their sum minus its trace part.
      Rng rng(derive_seed(seed, StreamKind::kModel, n));
      std::vector<RawTerm> raw;
      std::vector<Mat> raw_eigen;
      for (std::size_t i = 0; i < n; ++i) {
        raw.push_back({i, gue_matrix(4, 1.0, rng)});
        raw_eigen.push_back(oracle::to_eigen(raw.back().matrix));
      }
      const LocalHamiltonian c = canonicalize(n, 2, Boundary::kPeriodic, raw);
      Mat want = oracle::chain(raw_eigen, n, 2);
      want -= (want.trace() / static_cast<double>(want.rows())) * Mat::Identity(want.rows(), want.cols());
      op_err = std::max(op_err, (oracle::to_eigen(assemble_dense(c)) - want).cwiseAbs().maxCoeff());

      const LocalHamiltonian h = build_model(model("gue-local", n, seed));
      std::vector<Mat> embedded;
      double sum_terms = 0.0;
      const double dim = std::pow(2.0, static_cast<double>(n));
      for (std::size_t i = 0; i < n; ++i) {
        embedded.push_back(oracle::embed(oracle::to_eigen(h.term(i)), i, (i + 1) % n, n, 2));
        sum_terms += (embedded.back() * embedded.back()).trace().real() / dim;
      }
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
          ortho = std::max(ortho, std::abs((embedded[i] * embedded[j]).trace()));
      const SpectralData sd = full_spectrum(h);
      s2_rel = std::max(s2_rel, std::abs(sd.s2 - sum_terms) / sum_terms);
      double mean = 0.0, m2 = 0.0;
      for (double e : sd.eigenvalues) mean += e / dim;
      for (double e : sd.eigenvalues) m2 += (e - mean) * (e - mean) / dim;
      var_rel = std::max(var_rel, std::abs(m2 - sd.s2) / sd.s2);
    }
  }
  return {op_err <= 1e-10 && ortho <= 1e-10 && s2_rel <= 1e-9 && var_rel <= 1e-8,
          "op " + fmt("%.1e", op_err) + ", ortho " + fmt("%.1e", ortho) + ", s2 rel " +
              fmt("%.1e", s2_rel) + ", variance rel " + fmt("%.1e", var_rel)};
}

Outcome deficit_signature() {
  Shared& s = shared();
  const EntropyStats st = ensemble_entropy_stats(s.sd12, s.w100, s.half, 1.0);
  const double pd = page_deficit(6, 12);
  const double margin = st.deficit - pd;
  return {st.deficit > 0.0 && margin >= 0.0,
          "|J|=" + std::to_string(s.w100.indices.size()) + ", delta " + fmt("%.4g", s.w100.half_width) +
              ", deficit " + fmt("%.5f", st.deficit) + ", Page deficit " + fmt("%.5f", pd) +
              ", margin " + fmt("%.5f", margin) + (s.sd12.degenerate ? ", degenerate spectrum" : "")};
}

Outcome concavity_chain() {
  Shared& s = shared();
  const HamiltonianSplit split = split_subsystem(s.h12, s.half);
  const BandDiagnostic band = band_diagnostic(s.sd12, s.w100, split, s.half);
  double worst = band.window_entropy - band.bound;
  std::vector<double> means{ensemble_entropy_stats(s.sd12, s.w100, s.half).mean};
  for (std::uint64_t r = 0; r < 5; ++r) {
    means.push_back(rotated_basis_entropies(s.sd12, s.w100, s.half, 1.0, derive_seed(0, StreamKind::kRotation, r)).mean);
  }
  for (double m : means) worst = std::max(worst, m - band.window_entropy);
  return {worst <= 1e-9, "S(rho_A) " + fmt("%.6f", band.window_entropy) + ", band bound " +
                             fmt("%.6f", band.bound) + ", worst slack " + fmt("%.2e", worst)};
}

Outcome renyi_order() {
  Shared& s = shared();
  const EntropyStats s2 = ensemble_entropy_stats(s.sd12, s.w100, s.half, 2.0);
  const EntropyStats s1 = ensemble_entropy_stats(s.sd12, s.w100, s.half, 1.0);
  const EntropyStats sh = ensemble_entropy_stats(s.sd12, s.w100, s.half, 0.5);
  double worst = -1.0;
  for (std::size_t k = 0; k < s1.per_state.size(); ++k) {
    worst = std::max(worst, s2.per_state[k].entropy - s1.per_state[k].entropy);
    worst = std::max(worst, s1.per_state[k].entropy - sh.per_state[k].entropy);
  }
  return {worst <= 1e-9, std::to_string(s1.per_state.size()) + " states, worst slack " + fmt("%.2e", worst)};
}

Outcome thermo_bound() {
  const LocalHamiltonian h = build_model(model("mfim", 10));
  const SpectralData sd = full_spectrum(h);
  const ThermoModel m(h, 5);
  std::size_t violations = 0, unsolved = 0;
  double worst = -1e300;
  for (std::size_t j = 0; j < sd.dim(); ++j) {
    try {
      const ThermoBoundReport r = thermo_bound_report(m, sd, j);
      worst = std::max(worst, r.lhs - r.rhs);
    } catch (const InvariantError&) {
      ++violations;
    } catch (const std::exception&) {
      ++unsolved;
    }
  }
  const ThermoBoundReport flat = thermo_bound_report(m, h, DensityMatrix::maximally_mixed(sd.dim()));
  const double eq = std::abs(flat.lhs - flat.rhs);
  return {violations == 0 && unsolved == 0 && eq <= 1e-8,
          std::to_string(sd.dim()) + " states, violations " + std::to_string(violations) +
              ", unsolved " + std::to_string(unsolved) + ", max lhs-rhs " + fmt("%.3e", worst) +
              ", flat-state gap " + fmt("%.1e", eq)};
}

Outcome expansions() {
  const LocalHamiltonian h = build_model(model("mfim", 10));
  const double s2 = variance_report(h, {0, 5}).s2;
  const ThermoModel m(h, 5);
  const ExpansionReport r = expansion_check(energy_entropy_curves(m, small_beta_grid(5, 5)), s2, 10, 2);

  // Two sites, one ZZ bond: E = -tanh(beta), S = ln(4 cosh beta) - beta tanh(beta).
  const ThermoModel toy({{-1.0, -1.0, 1.0, 1.0}}, 2, 2);
  double toy_err = 0.0;
  for (double b = -1.0; b <= 1.0 + 1e-12; b += 0.125) {
    toy_err = std::max(toy_err, std::abs(toy.energy(b) + std::tanh(b)));
    toy_err = std::max(toy_err, std::abs(toy.entropy(b) - (std::log(4.0 * std::cosh(b)) - b * std::tanh(b))));
  }
  const ExpansionReport t = expansion_check(energy_entropy_curves(toy, small_beta_grid(2, 5)), 1.0, 2);
  toy_err = std::max({toy_err, std::abs(t.fitted_slope + 1.0), std::abs(t.fitted_quadratic - 0.5)});
  return {r.slope_ok && r.quadratic_ok && toy_err <= 1e-4,
          "slope rel " + fmt("%.2e", r.slope_rel_error) + ", quadratic rel " +
              fmt("%.2e", r.quadratic_rel_error) + ", two-level err " + fmt("%.1e", toy_err)};
}

Outcome gaussianity() {
  const double k8 = gaussianity_check(full_spectrum(build_model(model("mfim", 8))));
  const double k12 = gaussianity_check(shared().sd12);
  return {k12 < k8, "N=8 " + fmt("%.4f", k8) + ", N=12 " + fmt("%.4f", k12)};
}

Outcome concentration() {
  Shared& s = shared();
  std::string detail;
  double prev = std::numeric_limits<double>::infinity();
  bool pass = true;
  for (std::size_t count : {10u, 100u, 1000u}) {
    const double delta = window_with_count(s.sd12, 0.0, count).half_width;
    const MicrocanonicalWindow w = microcanonical_window(s.sd12, 0.0, delta);
    const EntropyStats st = subspace_haar_entropy_samples(s.sd12, w, s.half, 200, 99);
    pass = pass && st.variance < prev;
    prev = st.variance;
    detail += (detail.empty() ? "" : ", ") + std::string("|J|=") + std::to_string(w.indices.size()) +
              " var " + fmt("%.3e", st.variance);
  }
  return {pass, detail};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism() {
  namespace fs = std::filesystem;
  const fs::path root = fs::temp_directory_path() / "midspec_acceptance";
  fs::remove_all(root);
  struct Case {
    std::string sub;
    ConfigMap values;
  };
  const ConfigMap base{{"model.name", "gue-local"}, {"model.n_sites", "8"}, {"run.seed", "17"},
                       {"window.count", "30"}, {"entropy.alpha", "0.5, 1, 2"}};
  std::vector<Case> cases{{"spectrum", base}, {"micro", base}, {"rotate", base},
                          {"haar", base},     {"proof", base}};
  ConfigMap thermo = base;
  thermo["model.name"] = "mfim";
  cases.push_back({"thermo", thermo});
  ConfigMap sweep = base;
  sweep["run.seed"] = "0..2";
  sweep["subsystem.length"] = "2..4";
  sweep["model.n_sites"] = "6, 8";
  cases.push_back({"sweep", sweep});
  cases.push_back({"page", {{"page.da", "8"}, {"page.dabar", "16"}}});

  std::size_t files = 0, mismatches = 0;
  for (const Case& c : cases) {
    std::vector<fs::path> dirs;
    for (const char* workers : {"1", "1", "3"}) {
      ConfigMap v = c.values;
      v["run.workers"] = workers;
      dirs.push_back(root / (c.sub + "_" + std::to_string(dirs.size())));
      v["run.out"] = dirs.back().string();
      std::ostringstream out, err;
      if (run_command(c.sub, v, out, err) != kExitOk) {
        return {false, c.sub + " failed: " + err.str()};
      }
    }
    for (const auto& entry : fs::directory_iterator(dirs[0])) {
      if (entry.path().extension() != ".csv") continue;
      ++files;
      const std::string first = slurp(entry.path());
      for (std::size_t k = 1; k < dirs.size(); ++k) {
        if (slurp(dirs[k] / entry.path().filename()) != first) ++mismatches;
      }
    }
  }
  fs::remove_all(root);
  return {mismatches == 0 && files >= cases.size(),
          std::to_string(files) + " CSVs x 3 runs, mismatches " + std::to_string(mismatches)};
}

}  // namespace

int main(int, char** argv) {
  select_reliable_blas_kernel(argv);
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"Page mean oracle", page_oracle},
      {"conjectured gap oracle", gap_oracle},
      {"canonical form suite", canonical_suite},
      {"eigenstate deficit vs Page deficit, mfim N=12 L=6", deficit_signature},
      {"concavity chain", concavity_chain},
      {"Renyi ordering", renyi_order},
      {"thermodynamic entropy bound, mfim N=10 L=5", thermo_bound},
      {"small-beta expansions", expansions},
      {"spectral Gaussianity trend", gaussianity},
      {"concentration of subspace Haar entropies", concentration},
      {"determinism", determinism},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failures += o.pass ? 0 : 1;
    std::printf("criterion %zu: %s  %s (%s) [%.1f s]\n", i + 1, o.pass ? "PASS" : "FAIL",
                criteria[i].first.c_str(), o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
