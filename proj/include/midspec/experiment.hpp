#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "midspec/config.hpp"

namespace midspec {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitNumericFailure = 3;

/// 17 significant digits; round-trips through parsing.
std::string format_real(double v);
/// Shortest round-trip form, for keys such as the Renyi index.
std::string format_short(double v);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::string render() const;
};

/// Ordered `key: value` lines.
class Summary {
 public:
  void add(const std::string& key, const std::string& value);
  void add(const std::string& key, double value) { add(key, format_real(value)); }
  void add_count(const std::string& key, std::size_t value) { add(key, std::to_string(value)); }
  void add_gate(const std::string& key, bool pass) { add(key, pass ? "pass" : "fail"); }
  std::string render() const;
  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

/// Writes through a temporary file in the same directory and renames it.
void write_file_atomic(const std::string& path, const std::string& content);

/// Runs one subcommand. Writes `<table>.csv` files and `summary.txt` into the
/// configured output directory and echoes the summary to `out`. Throws on
/// failure; see run_command for the exit-code mapping.
void run_experiment(const ExperimentConfig& config, std::ostream& out);

/// build_config + run_experiment with errors mapped to exit codes: 2 for
/// configuration problems, 3 for numeric failures. Messages go to `err`.
int run_command(const std::string& subcommand, const ConfigMap& values, std::ostream& out,
                std::ostream& err);

}  // namespace midspec
