#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "midspec/blas_guard.hpp"
#include "midspec/config.hpp"
#include "midspec/experiment.hpp"

namespace {

struct Flag {
  const char* name;
  const char* key;
  const char* help;
};

const std::vector<Flag> kFlags{
    {"--model", "model.name", "gue-local, mfim or custom"},
    {"--n", "model.n_sites", "chain length (list in sweeps)"},
    {"--d", "model.local_dim", "local dimension"},
    {"--boundary", "model.boundary", "periodic or open"},
    {"--coupling", "model.coupling", "mfim ZZ coupling"},
    {"--hx", "model.transverse_field", "mfim transverse field"},
    {"--hz", "model.longitudinal_field", "mfim longitudinal field"},
    {"--file", "model.file", "custom model file"},
    {"--dimension-cap", "model.dimension_cap", "largest allowed d^N"},
    {"--seed", "run.seed", "global seed (list or range in sweeps)"},
    {"--out", "run.out", "output directory"},
    {"--workers", "run.workers", "worker threads"},
    {"--job-cap", "run.job_cap", "largest sweep size"},
    {"--L", "subsystem.length", "subsystem length (list or range in sweeps)"},
    {"--start", "subsystem.start", "first site of the subsystem"},
    {"--center", "window.center", "window center E"},
    {"--delta", "window.delta", "window half width (list in sweeps)"},
    {"--count", "window.count", "smallest window size when no delta is given"},
    {"--alpha", "entropy.alpha", "Renyi indices"},
    {"--samples", "sampling.samples", "Haar samples"},
    {"--rotations", "sampling.rotations", "random rotations"},
    {"--beta-min", "thermo.beta_min", "lowest beta"},
    {"--beta-max", "thermo.beta_max", "highest beta"},
    {"--beta-count", "thermo.beta_count", "number of grid points"},
    {"--c1", "proof.c1", "band offset C1"},
    {"--c2", "proof.c2", "window margin C2"},
    {"--da", "page.da", "page: dimension of A"},
    {"--dabar", "page.dabar", "page: dimension of the complement"},
};

const std::vector<std::pair<const char*, const char*>> kCommands{
    {"spectrum", "full spectrum and variance report"},
    {"micro", "eigenstate entropies in a microcanonical window"},
    {"rotate", "entropies of randomly rotated window bases"},
    {"haar", "Haar-random states inside the window subspace"},
    {"page", "mean entropy of Haar-random states"},
    {"thermo", "block energy and entropy curves"},
    {"proof", "band and projector diagnostics"},
    {"sweep", "Cartesian product of parameter lists"},
};

}  // namespace

int main(int argc, char** argv) {
  midspec::select_reliable_blas_kernel(argv);
  CLI::App app{"Eigenstate entanglement experiments on spin chains"};
  app.require_subcommand(1);
  std::map<std::string, std::string> flag_values;
  std::string config_path;
  for (const auto& [name, help] : kCommands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "key = value file; its entries override flags");
    for (const Flag& f : kFlags) sub->add_option(f.name, flag_values[f.key], f.help);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return midspec::kExitConfigError;
  }

  midspec::ConfigMap values;
  for (const Flag& f : kFlags) {
    const std::string& v = flag_values[f.key];
    if (!v.empty()) values[f.key] = v;
  }
  if (!config_path.empty()) {
    try {
      for (auto& [k, v] : midspec::read_config_file(config_path)) values[k] = v;
    } catch (const std::invalid_argument& e) {
      std::cerr << "config error: " << e.what() << '\n';
      return midspec::kExitConfigError;
    }
  }
  const std::string subcommand = app.get_subcommands().front()->get_name();
  return midspec::run_command(subcommand, values, std::cout, std::cerr);
}
