#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "midspec/hamiltonian.hpp"

namespace midspec {

/// Bad or unknown configuration input. The message names the field.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Flat `section.key` -> raw value map.
using ConfigMap = std::map<std::string, std::string>;

/// Reads `key = value` lines grouped under `[section]` headers. Blank lines
/// and lines starting with '#' or ';' are skipped.
ConfigMap parse_config_text(std::istream& in, const std::string& source = "config");
ConfigMap read_config_file(const std::string& path);

struct ExperimentConfig {
  std::string subcommand;
  ModelSpec model;                        // model.seed is the global seed
  std::vector<std::size_t> n_sites;       // empty only for `page`
  std::vector<std::uint64_t> seeds;       // global seeds; size > 1 only in sweeps
  std::vector<std::size_t> lengths;       // subsystem lengths; empty means N/2
  std::size_t start = 0;
  double center = 0.0;
  std::vector<double> deltas;             // window half widths
  std::size_t window_count = 0;           // used when no delta is given
  std::vector<double> alphas{1.0};
  std::size_t samples = 200;
  std::size_t rotations = 5;
  double beta_min = -1.0;
  double beta_max = 1.0;
  std::size_t beta_count = 41;
  double c1 = 1.0;
  double c2 = 1.0;
  std::uint64_t page_da = 0;
  std::uint64_t page_dabar = 0;
  std::string out_dir = "results";
  std::size_t workers = 1;
  std::size_t job_cap = 256;
};

/// Every accepted key, as `section.key`.
const std::vector<std::string>& known_config_keys();

/// Validates and converts. Unknown keys, unparsable values and out-of-range
/// values raise ConfigError naming the key.
ExperimentConfig build_config(const std::string& subcommand, const ConfigMap& values);

/// Lists: "8, 10, 12". Integer ranges: "2..6" (inclusive).
std::vector<std::uint64_t> parse_uint_list(const std::string& key, const std::string& text);
std::vector<double> parse_real_list(const std::string& key, const std::string& text);

}  // namespace midspec
