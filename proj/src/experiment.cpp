#include "midspec/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

#include "midspec/basis.hpp"
#include "midspec/entanglement.hpp"
#include "midspec/errors.hpp"
#include "midspec/hamiltonian.hpp"
#include "midspec/parallel.hpp"
#include "midspec/random.hpp"
#include "midspec/spectrum.hpp"
#include "midspec/thermo.hpp"

namespace midspec {

std::string format_real(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

std::string format_short(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string CsvTable::render() const {
  std::string out;
  const auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    out += '\n';
  };
  line(header);
  for (const auto& r : rows) {
    if (r.size() != header.size()) throw std::logic_error("CsvTable: row width differs from header");
    line(r);
  }
  return out;
}

void Summary::add(const std::string& key, const std::string& value) { entries_.emplace_back(key, value); }

std::string Summary::render() const {
  std::string out;
  for (const auto& [k, v] : entries_) out += k + ": " + v + "\n";
  return out;
}

void write_file_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + tmp.string());
    f << content;
    f.flush();
    if (!f) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, target);
}

namespace {

using Clock = std::chrono::steady_clock;

struct ModelRun {
  LocalHamiltonian h;
  SpectralData sd;
};

ModelRun prepare_model(const ExperimentConfig& c, std::size_t n_sites, std::uint64_t seed) {
  ModelSpec spec = c.model;
  spec.n_sites = n_sites;
  spec.seed = seed;
  LocalHamiltonian h = build_model(spec);
  SpectralData sd = full_spectrum(h, spec.dimension_cap);
  return {std::move(h), std::move(sd)};
}

std::size_t length_for(const ExperimentConfig& c, std::size_t n_sites, std::size_t index = 0) {
  return c.lengths.empty() ? n_sites / 2 : c.lengths[index];
}

MicrocanonicalWindow window_for(const ExperimentConfig& c, const SpectralData& sd,
                                std::size_t delta_index = 0) {
  if (!c.deltas.empty()) return microcanonical_window(sd, c.center, c.deltas[delta_index]);
  return window_with_count(sd, c.center, c.window_count);
}

double max_entropy(std::size_t length, std::size_t local_dim) {
  return static_cast<double>(length) * std::log(static_cast<double>(local_dim));
}

double page_deficit(std::size_t length, std::size_t n_sites, std::size_t local_dim) {
  const auto d_a = ipow(local_dim, length);
  const auto d_abar = ipow(local_dim, n_sites - length);
  return max_entropy(length, local_dim) - page_mean(d_a, d_abar).exact;
}

std::string gap_text(std::size_t length, std::size_t n_sites, std::size_t local_dim) {
  if (local_dim != 2 || 2 * length > n_sites) return "nan";
  return format_real(conjecture_gap(length, n_sites, local_dim));
}

void echo_model(Summary& s, const ExperimentConfig& c, std::size_t n_sites, std::uint64_t seed) {
  s.add("model", c.model.name);
  s.add_count("n_sites", n_sites);
  s.add_count("local_dim", c.model.local_dim);
  s.add("boundary", to_string(c.model.boundary));
  s.add("seed", std::to_string(seed));
  if (c.model.name == "mfim") {
    s.add("coupling", c.model.coupling);
    s.add("transverse_field", c.model.transverse_field);
    s.add("longitudinal_field", c.model.longitudinal_field);
  }
  if (c.model.name == "custom") s.add("file", c.model.file);
}

void echo_window(Summary& s, const SpectralData& sd, const MicrocanonicalWindow& w) {
  s.add("window_center", w.center);
  s.add("window_half_width", w.half_width);
  s.add_count("window_size", w.indices.size());
  s.add("mid_spectrum_fraction", mid_spectrum_fraction(sd, std::abs(w.center) + w.half_width));
  s.add("basis_dependent", window_is_basis_dependent(sd, w) ? "yes" : "no");
}

struct Outputs {
  std::vector<std::pair<std::string, CsvTable>> tables;
  Summary summary;
  std::vector<std::string> failed_gates;

  void gate(const std::string& key, bool pass) {
    summary.add_gate(key, pass);
    if (!pass) failed_gates.push_back(key);
  }
};

void run_page(const ExperimentConfig& c, Outputs& o) {
  const PageMean pm = page_mean(c.page_da, c.page_dabar);
  o.summary.add("d_a", std::to_string(c.page_da));
  o.summary.add("d_abar", std::to_string(c.page_dabar));
  o.summary.add("page_mean_exact", pm.exact);
  o.summary.add("page_mean_asymptotic", pm.asymptotic);
  CsvTable t{{"d_a", "d_abar", "exact", "asymptotic"}, {}};
  t.rows.push_back({std::to_string(c.page_da), std::to_string(c.page_dabar), format_real(pm.exact),
                    format_real(pm.asymptotic)});
  o.tables.emplace_back("page", std::move(t));
}

void run_spectrum(const ExperimentConfig& c, Outputs& o) {
  const std::size_t n = c.n_sites.front();
  const ModelRun run = prepare_model(c, n, c.seeds.front());
  const SubsystemSpec a{c.start, length_for(c, n)};
  const VarianceReport vr = variance_report(run.h, a, c.model.dimension_cap);
  echo_model(o.summary, c, n, c.seeds.front());
  o.summary.add_count("subsystem_start", a.start);
  o.summary.add_count("subsystem_length", a.length);
  o.summary.add("s2", vr.s2);
  o.summary.add("s2_per_site", vr.s2 / static_cast<double>(n));
  o.summary.add("s2_a", vr.s2_a);
  o.summary.add("s2_abar", vr.s2_abar);
  o.summary.add("ground_energy", run.sd.eigenvalues.front());
  o.summary.add("top_energy", run.sd.eigenvalues.back());
  o.summary.add("kolmogorov_distance", gaussianity_check(run.sd));
  o.summary.add("degenerate", run.sd.degenerate ? "yes" : "no");
  CsvTable t{{"j", "E_j"}, {}};
  for (std::size_t j = 0; j < run.sd.dim(); ++j) {
    t.rows.push_back({std::to_string(j), format_real(run.sd.eigenvalues[j])});
  }
  o.tables.emplace_back("spectrum", std::move(t));
}

/// Gates shared by micro and rotate: mean <= S(rho_A) <= -sum p ln p.
void concavity_gates(Outputs& o, const std::string& prefix, double mean, const BandDiagnostic& band) {
  o.gate(prefix + "mean_below_window_entropy", mean <= band.window_entropy + 1e-9);
  o.gate(prefix + "window_entropy_below_band_bound", band.window_entropy <= band.bound + 1e-9);
}

void run_micro(const ExperimentConfig& c, Outputs& o) {
  const std::size_t n = c.n_sites.front();
  const ModelRun run = prepare_model(c, n, c.seeds.front());
  const SubsystemSpec a{c.start, length_for(c, n)};
  const MicrocanonicalWindow w = window_for(c, run.sd);
  if (w.indices.empty()) throw std::invalid_argument("window.delta: window holds no eigenstates");
  const std::size_t d = c.model.local_dim;

  std::vector<std::vector<double>> probs(w.indices.size());
  parallel_for(w.indices.size(), c.workers, [&](std::size_t k) {
    probs[k] = schmidt_probabilities(run.sd.eigenvector(w.indices[k]), n, d, a);
  });
  const double s_max = max_entropy(a.length, d);
  const auto stats_for = [&](double alpha) {
    std::vector<StateEntropy> per(w.indices.size());
    for (std::size_t k = 0; k < per.size(); ++k) {
      per[k] = {w.indices[k], entropy_of_distribution(probs[k], alpha)};
    }
    return summarize_entropies(std::move(per), s_max, alpha);
  };

  echo_model(o.summary, c, n, c.seeds.front());
  o.summary.add_count("subsystem_start", a.start);
  o.summary.add_count("subsystem_length", a.length);
  echo_window(o.summary, run.sd, w);
  o.summary.add("s2", run.sd.s2);
  o.summary.add("max_entropy", s_max);

  CsvTable t{{"j", "E_j", "alpha", "entropy", "deficit"}, {}};
  for (double alpha : c.alphas) {
    const EntropyStats st = stats_for(alpha);
    const std::string tag = "_alpha_" + format_short(alpha);
    o.summary.add("mean_entropy" + tag, st.mean);
    o.summary.add("entropy_variance" + tag, st.variance);
    o.summary.add("min_entropy" + tag, st.min);
    o.summary.add("max_entropy_in_window" + tag, st.max);
    o.summary.add("deficit" + tag, st.deficit);
    for (const auto& e : st.per_state) {
      t.rows.push_back({std::to_string(e.index), format_real(run.sd.eigenvalues[e.index]),
                        format_short(alpha), format_real(e.entropy), format_real(s_max - e.entropy)});
    }
  }
  o.tables.emplace_back("micro", std::move(t));

  const EntropyStats vn = stats_for(1.0);
  const double pd = page_deficit(a.length, n, d);
  o.summary.add("page_deficit", pd);
  o.summary.add("deficit_minus_page", vn.deficit - pd);
  o.summary.add("deficit_exceeds_page", vn.deficit >= pd ? "yes" : "no");
  o.summary.add("conjecture_gap", gap_text(a.length, n, d));

  const HamiltonianSplit split = split_subsystem(run.h, a, c.model.dimension_cap);
  const BandDiagnostic band = band_diagnostic(run.sd, w, split, a);
  o.summary.add("window_entropy", band.window_entropy);
  o.summary.add("band_entropy_bound", band.bound);
  concavity_gates(o, "gate_", vn.mean, band);

  bool ordered = true;
  for (const auto& p : probs) {
    const double s2 = entropy_of_distribution(p, 2.0);
    const double s1 = entropy_of_distribution(p, 1.0);
    const double sh = entropy_of_distribution(p, 0.5);
    ordered = ordered && s2 <= s1 + 1e-9 && s1 <= sh + 1e-9;
  }
  o.gate("gate_renyi_order", ordered);
}

void run_rotate(const ExperimentConfig& c, Outputs& o) {
  const std::size_t n = c.n_sites.front();
  const std::uint64_t seed = c.seeds.front();
  const ModelRun run = prepare_model(c, n, seed);
  const SubsystemSpec a{c.start, length_for(c, n)};
  const MicrocanonicalWindow w = window_for(c, run.sd);
  const HamiltonianSplit split = split_subsystem(run.h, a, c.model.dimension_cap);
  const BandDiagnostic band = band_diagnostic(run.sd, w, split, a);

  echo_model(o.summary, c, n, seed);
  o.summary.add_count("subsystem_start", a.start);
  o.summary.add_count("subsystem_length", a.length);
  echo_window(o.summary, run.sd, w);
  o.summary.add_count("rotations", c.rotations);
  o.summary.add("window_entropy", band.window_entropy);
  o.summary.add("band_entropy_bound", band.bound);

  CsvTable t{{"rotation", "alpha", "mean_entropy", "variance", "min", "max", "deficit"}, {}};
  const auto add_row = [&](const std::string& label, const EntropyStats& st) {
    t.rows.push_back({label, format_short(st.alpha), format_real(st.mean), format_real(st.variance),
                      format_real(st.min), format_real(st.max), format_real(st.deficit)});
  };
  for (double alpha : c.alphas) add_row("eigenbasis", ensemble_entropy_stats(run.sd, w, a, alpha, c.workers));
  bool chain = true;
  for (std::size_t r = 0; r < c.rotations; ++r) {
    const ComplexMatrix u = haar_unitary(w.indices.size(), derive_seed(seed, StreamKind::kRotation, r));
    for (double alpha : c.alphas) {
      const EntropyStats st = rotated_basis_entropies(run.sd, w, a, alpha, u, c.workers);
      add_row(std::to_string(r), st);
      if (alpha == 1.0) chain = chain && st.mean <= band.window_entropy + 1e-9;
    }
    if (std::find(c.alphas.begin(), c.alphas.end(), 1.0) == c.alphas.end()) {
      chain = chain && rotated_basis_entropies(run.sd, w, a, 1.0, u, c.workers).mean <=
                           band.window_entropy + 1e-9;
    }
  }
  o.tables.emplace_back("rotate", std::move(t));
  o.gate("gate_rotated_mean_below_window_entropy", chain);
  o.gate("gate_window_entropy_below_band_bound", band.window_entropy <= band.bound + 1e-9);
}

void run_haar(const ExperimentConfig& c, Outputs& o) {
  const std::size_t n = c.n_sites.front();
  const std::uint64_t seed = c.seeds.front();
  const ModelRun run = prepare_model(c, n, seed);
  const SubsystemSpec a{c.start, length_for(c, n)};
  const MicrocanonicalWindow w = window_for(c, run.sd);
  const std::size_t d = c.model.local_dim;

  echo_model(o.summary, c, n, seed);
  o.summary.add_count("subsystem_start", a.start);
  o.summary.add_count("subsystem_length", a.length);
  echo_window(o.summary, run.sd, w);
  o.summary.add_count("samples", c.samples);
  o.summary.add("page_deficit", page_deficit(a.length, n, d));
  o.summary.add("conjecture_gap", gap_text(a.length, n, d));

  CsvTable t{{"sample", "alpha", "entropy", "deficit"}, {}};
  for (double alpha : c.alphas) {
    const EntropyStats st = subspace_haar_entropy_samples(run.sd, w, a, c.samples, seed, alpha, c.workers);
    const std::string tag = "_alpha_" + format_short(alpha);
    o.summary.add("mean_entropy" + tag, st.mean);
    o.summary.add("entropy_variance" + tag, st.variance);
    o.summary.add("deficit" + tag, st.deficit);
    const double s_max = max_entropy(a.length, d);
    for (const auto& e : st.per_state) {
      t.rows.push_back({std::to_string(e.index), format_short(alpha), format_real(e.entropy),
                        format_real(s_max - e.entropy)});
    }
  }
  o.tables.emplace_back("haar", std::move(t));
}

std::vector<double> thermo_grid(const ExperimentConfig& c, std::size_t length) {
  std::vector<double> grid = small_beta_grid(length, 5);
  for (std::size_t k = 0; k < c.beta_count; ++k) {
    const double t = static_cast<double>(k) / static_cast<double>(c.beta_count - 1);
    grid.push_back(c.beta_min + t * (c.beta_max - c.beta_min));
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

void run_thermo(const ExperimentConfig& c, Outputs& o) {
  const std::size_t n = c.n_sites.front();
  const std::uint64_t seed = c.seeds.front();
  const ModelRun run = prepare_model(c, n, seed);
  const std::size_t length = length_for(c, n);
  const ThermoModel model(run.h, length);
  const std::vector<double> grid = thermo_grid(c, length);
  const ThermoCurve curve = energy_entropy_curves(model, grid);
  const ExpansionReport ex = expansion_check(curve, run.sd.s2, n, c.model.local_dim);

  echo_model(o.summary, c, n, seed);
  o.summary.add_count("subsystem_length", length);
  o.summary.add_count("term_count", curve.term_count);
  o.summary.add("s2", run.sd.s2);
  o.summary.add("mean_block_variance", model.mean_block_variance());
  o.summary.add("fitted_slope", ex.fitted_slope);
  o.summary.add("expected_slope", ex.expected_slope);
  o.summary.add("slope_rel_error", ex.slope_rel_error);
  o.summary.add("fitted_quadratic", ex.fitted_quadratic);
  o.summary.add("expected_quadratic", ex.expected_quadratic);
  o.summary.add("quadratic_rel_error", ex.quadratic_rel_error);
  o.gate("gate_expansion_slope", ex.slope_ok);
  o.gate("gate_expansion_quadratic", ex.quadratic_ok);

  const MicrocanonicalWindow w = window_for(c, run.sd);
  echo_window(o.summary, run.sd, w);
  double worst_margin = -std::numeric_limits<double>::infinity();
  double lhs_sum = 0.0, rhs_sum = 0.0;
  for (std::size_t j : w.indices) {
    const ThermoBoundReport r = thermo_bound_report(model, run.sd, j);
    worst_margin = std::max(worst_margin, r.lhs - r.rhs);
    lhs_sum += r.lhs;
    rhs_sum += r.rhs;
  }
  const double count = static_cast<double>(w.indices.size());
  o.summary.add("window_mean_block_entropy", lhs_sum / count);
  o.summary.add("window_mean_thermo_bound", rhs_sum / count);
  o.summary.add("window_worst_bound_margin", worst_margin);
  o.gate("gate_thermo_bound", worst_margin <= 1e-8);

  CsvTable t{{"beta", "energy", "entropy"}, {}};
  for (std::size_t i = 0; i < curve.betas.size(); ++i) {
    t.rows.push_back({format_real(curve.betas[i]), format_real(curve.energy[i]), format_real(curve.entropy[i])});
  }
  o.tables.emplace_back("thermo", std::move(t));
}

void run_proof(const ExperimentConfig& c, Outputs& o) {
  const std::size_t n = c.n_sites.front();
  const std::uint64_t seed = c.seeds.front();
  const ModelRun run = prepare_model(c, n, seed);
  const SubsystemSpec a{c.start, length_for(c, n)};
  const MicrocanonicalWindow w = window_for(c, run.sd);
  const HamiltonianSplit split = split_subsystem(run.h, a, c.model.dimension_cap);
  const ProofDiagnosticReport r = proof_projector_diagnostic(run.sd, w, split, a, c.c1, c.c2);

  echo_model(o.summary, c, n, seed);
  o.summary.add_count("subsystem_start", a.start);
  o.summary.add_count("subsystem_length", a.length);
  echo_window(o.summary, run.sd, w);

  CsvTable t{{"center", "delta", "c1", "c2", "lambda", "mirrored", "band_size", "m", "band_weight",
              "rho_p_weight", "rho_pk_weight", "band_q_weight", "max_band_q_ratio", "entropy_bound",
              "window_entropy", "trace_p", "trace_q_total", "band_bound_holds", "band_empty"},
             {}};
  t.rows.push_back({format_real(r.center), format_real(r.delta), format_real(r.c1), format_real(r.c2),
                    format_real(r.lambda), r.mirrored ? "1" : "0", std::to_string(r.band.size()),
                    format_real(r.m), format_real(r.band_weight), format_real(r.rho_p_weight),
                    format_real(r.rho_pk_weight), format_real(r.band_q_weight),
                    format_real(r.max_band_q_ratio), format_real(r.entropy_bound),
                    format_real(r.window_entropy), std::to_string(r.trace_p),
                    std::to_string(r.trace_q_total), r.band_bound_holds ? "1" : "0",
                    r.band_empty ? "1" : "0"});
  for (std::size_t i = 0; i < t.header.size(); ++i) o.summary.add(t.header[i], t.rows[0][i]);
  o.tables.emplace_back("proof", std::move(t));
}

struct SweepCell {
  std::size_t seed_index, n_index, length_index, delta_index, alpha_index;
};

void run_sweep(const ExperimentConfig& c, Outputs& o) {
  const std::size_t n_lengths = std::max<std::size_t>(1, c.lengths.size());
  const std::size_t n_deltas = std::max<std::size_t>(1, c.deltas.size());
  std::vector<SweepCell> cells;
  for (std::size_t si = 0; si < c.seeds.size(); ++si)
    for (std::size_t ni = 0; ni < c.n_sites.size(); ++ni)
      for (std::size_t li = 0; li < n_lengths; ++li)
        for (std::size_t di = 0; di < n_deltas; ++di)
          for (std::size_t ai = 0; ai < c.alphas.size(); ++ai) cells.push_back({si, ni, li, di, ai});

  // One spectrum per (seed, N), computed before the cells that share it.
  std::map<std::pair<std::size_t, std::size_t>, ModelRun> cache;
  for (std::size_t si = 0; si < c.seeds.size(); ++si) {
    for (std::size_t ni = 0; ni < c.n_sites.size(); ++ni) {
      cache.emplace(std::make_pair(si, ni), prepare_model(c, c.n_sites[ni], c.seeds[si]));
    }
  }

  struct CellResult {
    std::size_t length;
    MicrocanonicalWindow window;
    EntropyStats stats;
  };
  std::vector<CellResult> results(cells.size());
  parallel_for(cells.size(), c.workers, [&](std::size_t i) {
    const SweepCell& cell = cells[i];
    const ModelRun& run = cache.at({cell.seed_index, cell.n_index});
    const std::size_t n = c.n_sites[cell.n_index];
    const std::size_t length = length_for(c, n, c.lengths.empty() ? 0 : cell.length_index);
    if (c.start >= n) throw std::invalid_argument("subsystem.start: must be below model.n_sites");
    MicrocanonicalWindow w = window_for(c, run.sd, cell.delta_index);
    EntropyStats st = ensemble_entropy_stats(run.sd, w, {c.start, length}, c.alphas[cell.alpha_index]);
    results[i] = {length, std::move(w), std::move(st)};
  });

  CsvTable t{{"seed", "n_sites", "L", "f", "center", "delta", "window_size", "alpha", "mean_entropy",
              "entropy_variance", "deficit", "page_deficit", "deficit_minus_page", "conjecture_gap"},
             {}};
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const SweepCell& cell = cells[i];
    const CellResult& r = results[i];
    const std::size_t n = c.n_sites[cell.n_index];
    const double pd = page_deficit(r.length, n, c.model.local_dim);
    t.rows.push_back({std::to_string(c.seeds[cell.seed_index]), std::to_string(n),
                      std::to_string(r.length),
                      format_real(static_cast<double>(r.length) / static_cast<double>(n)),
                      format_real(r.window.center), format_real(r.window.half_width),
                      std::to_string(r.window.indices.size()), format_short(r.stats.alpha),
                      format_real(r.stats.mean), format_real(r.stats.variance),
                      format_real(r.stats.deficit), format_real(pd),
                      format_real(r.stats.deficit - pd), gap_text(r.length, n, c.model.local_dim)});
  }
  o.tables.emplace_back("sweep", std::move(t));
  o.summary.add("model", c.model.name);
  o.summary.add_count("cells", cells.size());
  o.summary.add_count("seeds", c.seeds.size());

  if (c.seeds.size() < 2) return;
  // Mean and standard error over seeds for each remaining cell coordinate.
  CsvTable agg{{"n_sites", "L", "delta_index", "alpha", "seeds", "mean_deficit", "stderr_deficit",
                "mean_entropy", "stderr_entropy"},
               {}};
  const std::size_t per_seed = cells.size() / c.seeds.size();
  for (std::size_t k = 0; k < per_seed; ++k) {
    std::vector<double> deficits, means;
    for (std::size_t si = 0; si < c.seeds.size(); ++si) {
      const CellResult& r = results[si * per_seed + k];
      deficits.push_back(r.stats.deficit);
      means.push_back(r.stats.mean);
    }
    const auto mean_stderr = [](const std::vector<double>& v) {
      const double n = static_cast<double>(v.size());
      const double mean = pairwise_sum(v) / n;
      std::vector<double> sq(v.size());
      for (std::size_t i = 0; i < v.size(); ++i) sq[i] = (v[i] - mean) * (v[i] - mean);
      return std::make_pair(mean, std::sqrt(pairwise_sum(sq) / (n - 1.0) / n));
    };
    const auto [md, sd] = mean_stderr(deficits);
    const auto [me, se] = mean_stderr(means);
    const SweepCell& cell = cells[k];
    agg.rows.push_back({std::to_string(c.n_sites[cell.n_index]), std::to_string(results[k].length),
                        std::to_string(cell.delta_index), format_short(c.alphas[cell.alpha_index]),
                        std::to_string(c.seeds.size()), format_real(md), format_real(sd),
                        format_real(me), format_real(se)});
  }
  o.tables.emplace_back("sweep_aggregate", std::move(agg));
}

}  // namespace

void run_experiment(const ExperimentConfig& config, std::ostream& out) {
  namespace fs = std::filesystem;
  const auto t0 = Clock::now();
  Outputs o;
  o.summary.add("subcommand", config.subcommand);
  if (config.subcommand == "page") {
    run_page(config, o);
  } else if (config.subcommand == "spectrum") {
    run_spectrum(config, o);
  } else if (config.subcommand == "micro") {
    run_micro(config, o);
  } else if (config.subcommand == "rotate") {
    run_rotate(config, o);
  } else if (config.subcommand == "haar") {
    run_haar(config, o);
  } else if (config.subcommand == "thermo") {
    run_thermo(config, o);
  } else if (config.subcommand == "proof") {
    run_proof(config, o);
  } else if (config.subcommand == "sweep") {
    run_sweep(config, o);
  } else {
    throw ConfigError("unknown subcommand '" + config.subcommand + "'");
  }
  const std::chrono::duration<double> elapsed = Clock::now() - t0;
  o.summary.add("wall_time_s", format_short(std::round(elapsed.count() * 1000.0) / 1000.0));

  std::error_code ec;
  fs::create_directories(config.out_dir, ec);
  if (ec) throw ConfigError("run.out: cannot create " + config.out_dir + ": " + ec.message());
  for (const auto& [name, table] : o.tables) {
    write_file_atomic((fs::path(config.out_dir) / (name + ".csv")).string(), table.render());
  }
  write_file_atomic((fs::path(config.out_dir) / "summary.txt").string(), o.summary.render());
  out << o.summary.render();
  if (!o.failed_gates.empty()) {
    std::string names;
    for (const auto& g : o.failed_gates) names += (names.empty() ? "" : ", ") + g;
    throw InvariantError("failed gates: " + names);
  }
}

int run_command(const std::string& subcommand, const ConfigMap& values, std::ostream& out,
                std::ostream& err) {
  try {
    run_experiment(build_config(subcommand, values), out);
    return kExitOk;
  } catch (const std::invalid_argument& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const std::exception& e) {
    err << "numeric failure: " << e.what() << '\n';
    return kExitNumericFailure;
  }
}

}  // namespace midspec
