#include "midspec/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>

#include "midspec/basis.hpp"
#include "midspec/linalg.hpp"

namespace midspec {
namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_commas(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) out.push_back(trim(item));
  return out;
}

std::uint64_t parse_uint(const std::string& key, const std::string& text) {
  std::uint64_t v = 0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (text.empty() || ec != std::errc() || ptr != end) {
    throw ConfigError(key + ": expected a non-negative integer, got '" + text + "'");
  }
  return v;
}

double parse_real(const std::string& key, const std::string& text) {
  double v = 0.0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (text.empty() || ec != std::errc() || ptr != end || !std::isfinite(v)) {
    throw ConfigError(key + ": expected a finite real number, got '" + text + "'");
  }
  return v;
}

std::size_t positive(const std::string& key, std::uint64_t v) {
  if (v == 0) throw ConfigError(key + ": must be positive");
  return static_cast<std::size_t>(v);
}

std::uint64_t single_uint(const std::string& key, const std::string& text) {
  return parse_uint(key, trim(text));
}

}  // namespace

ConfigMap parse_config_text(std::istream& in, const std::string& source) {
  ConfigMap out;
  std::string line;
  std::string section;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    const std::string where = source + ":" + std::to_string(line_no);
    if (t.front() == '[') {
      if (t.back() != ']') throw ConfigError(where + ": unterminated section header");
      section = trim(std::string_view(t).substr(1, t.size() - 2));
      if (section.empty()) throw ConfigError(where + ": empty section name");
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected 'key = value'");
    const std::string key = trim(std::string_view(t).substr(0, eq));
    if (key.empty()) throw ConfigError(where + ": missing key");
    const std::string full = section.empty() ? key : section + "." + key;
    if (out.count(full)) throw ConfigError(where + ": duplicate key " + full);
    out[full] = trim(std::string_view(t).substr(eq + 1));
  }
  return out;
}

ConfigMap read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  return parse_config_text(in, path);
}

std::vector<std::uint64_t> parse_uint_list(const std::string& key, const std::string& text) {
  std::vector<std::uint64_t> out;
  for (const std::string& item : split_commas(text)) {
    const auto dots = item.find("..");
    if (dots == std::string::npos) {
      out.push_back(parse_uint(key, item));
      continue;
    }
    const std::uint64_t lo = parse_uint(key, trim(item.substr(0, dots)));
    const std::uint64_t hi = parse_uint(key, trim(item.substr(dots + 2)));
    if (hi < lo) throw ConfigError(key + ": empty range '" + item + "'");
    if (hi - lo > 100000) throw ConfigError(key + ": range '" + item + "' is too long");
    for (std::uint64_t v = lo; v <= hi; ++v) out.push_back(v);
  }
  if (out.empty()) throw ConfigError(key + ": empty list");
  return out;
}

std::vector<double> parse_real_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  for (const std::string& item : split_commas(text)) out.push_back(parse_real(key, item));
  if (out.empty()) throw ConfigError(key + ": empty list");
  return out;
}

const std::vector<std::string>& known_config_keys() {
  static const std::vector<std::string> keys{
      "model.name",          "model.n_sites",        "model.local_dim",
      "model.boundary",      "model.coupling",       "model.transverse_field",
      "model.longitudinal_field", "model.file",      "model.dimension_cap",
      "model.norm_band_low", "model.norm_band_high", "run.seed",
      "run.out",             "run.workers",          "run.job_cap",
      "subsystem.length",    "subsystem.start",      "window.center",
      "window.delta",        "window.count",         "entropy.alpha",
      "sampling.samples",    "sampling.rotations",   "thermo.beta_min",
      "thermo.beta_max",     "thermo.beta_count",    "proof.c1",
      "proof.c2",            "page.da",              "page.dabar",
  };
  return keys;
}

ExperimentConfig build_config(const std::string& subcommand, const ConfigMap& values) {
  static const std::vector<std::string> commands{"spectrum", "micro", "rotate", "haar",
                                                 "page",     "thermo", "proof", "sweep"};
  if (std::find(commands.begin(), commands.end(), subcommand) == commands.end()) {
    throw ConfigError("unknown subcommand '" + subcommand + "'");
  }
  const auto& keys = known_config_keys();
  for (const auto& [k, v] : values) {
    if (std::find(keys.begin(), keys.end(), k) == keys.end()) {
      throw ConfigError("unknown key '" + k + "'");
    }
  }
  const auto get = [&](const std::string& k) -> const std::string* {
    auto it = values.find(k);
    return it == values.end() ? nullptr : &it->second;
  };
  const bool sweep = subcommand == "sweep";
  const auto scalar_guard = [&](const std::string& k, std::size_t count) {
    if (!sweep && count > 1) {
      throw ConfigError(k + ": several values are only allowed with the sweep subcommand");
    }
  };

  ExperimentConfig c;
  c.subcommand = subcommand;
  ModelSpec& m = c.model;
  if (auto v = get("model.name")) m.name = *v;
  if (auto v = get("model.local_dim")) m.local_dim = positive("model.local_dim", single_uint("model.local_dim", *v));
  if (auto v = get("model.boundary")) {
    try {
      m.boundary = parse_boundary(*v);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("model.boundary: ") + e.what());
    }
  }
  if (auto v = get("model.coupling")) m.coupling = parse_real("model.coupling", *v);
  if (auto v = get("model.transverse_field")) m.transverse_field = parse_real("model.transverse_field", *v);
  if (auto v = get("model.longitudinal_field")) m.longitudinal_field = parse_real("model.longitudinal_field", *v);
  if (auto v = get("model.file")) m.file = *v;
  if (auto v = get("model.dimension_cap")) m.dimension_cap = positive("model.dimension_cap", single_uint("model.dimension_cap", *v));
  if (auto v = get("model.norm_band_low")) m.norm_band_low = parse_real("model.norm_band_low", *v);
  if (auto v = get("model.norm_band_high")) m.norm_band_high = parse_real("model.norm_band_high", *v);
  if (!(m.norm_band_low > 0.0 && m.norm_band_low <= m.norm_band_high)) {
    throw ConfigError("model.norm_band_low: need 0 < low <= high");
  }
  if (auto v = get("model.n_sites")) {
    for (auto n : parse_uint_list("model.n_sites", *v)) c.n_sites.push_back(positive("model.n_sites", n));
    scalar_guard("model.n_sites", c.n_sites.size());
  }

  if (auto v = get("run.seed")) {
    c.seeds = parse_uint_list("run.seed", *v);
    scalar_guard("run.seed", c.seeds.size());
  } else {
    c.seeds = {0};
  }
  m.seed = c.seeds.front();
  if (auto v = get("run.out")) {
    if (v->empty()) throw ConfigError("run.out: empty path");
    c.out_dir = *v;
  }
  if (auto v = get("run.workers")) c.workers = positive("run.workers", single_uint("run.workers", *v));
  if (auto v = get("run.job_cap")) c.job_cap = positive("run.job_cap", single_uint("run.job_cap", *v));

  if (auto v = get("subsystem.length")) {
    for (auto l : parse_uint_list("subsystem.length", *v)) c.lengths.push_back(positive("subsystem.length", l));
    scalar_guard("subsystem.length", c.lengths.size());
  }
  if (auto v = get("subsystem.start")) c.start = single_uint("subsystem.start", *v);

  if (auto v = get("window.center")) c.center = parse_real("window.center", *v);
  if (auto v = get("window.delta")) {
    c.deltas = parse_real_list("window.delta", *v);
    for (double d : c.deltas) {
      if (d < 0.0) throw ConfigError("window.delta: must be >= 0, got " + std::to_string(d));
    }
    scalar_guard("window.delta", c.deltas.size());
  }
  if (auto v = get("window.count")) c.window_count = positive("window.count", single_uint("window.count", *v));
  if (!c.deltas.empty() && c.window_count > 0) {
    throw ConfigError("window.count: give either window.delta or window.count, not both");
  }
  if (c.deltas.empty() && c.window_count == 0) c.window_count = 100;

  if (auto v = get("entropy.alpha")) {
    c.alphas = parse_real_list("entropy.alpha", *v);
    for (double a : c.alphas) {
      if (!(a > 0.0)) throw ConfigError("entropy.alpha: indices must be positive");
    }
  }
  if (auto v = get("sampling.samples")) c.samples = positive("sampling.samples", single_uint("sampling.samples", *v));
  if (auto v = get("sampling.rotations")) c.rotations = positive("sampling.rotations", single_uint("sampling.rotations", *v));
  if (auto v = get("thermo.beta_min")) c.beta_min = parse_real("thermo.beta_min", *v);
  if (auto v = get("thermo.beta_max")) c.beta_max = parse_real("thermo.beta_max", *v);
  if (auto v = get("thermo.beta_count")) c.beta_count = positive("thermo.beta_count", single_uint("thermo.beta_count", *v));
  if (!(c.beta_min < 0.0 && c.beta_max > 0.0) || c.beta_count < 3) {
    throw ConfigError("thermo.beta_min: the grid must straddle 0 with at least 3 points");
  }
  if (auto v = get("proof.c1")) c.c1 = parse_real("proof.c1", *v);
  if (auto v = get("proof.c2")) c.c2 = parse_real("proof.c2", *v);
  if (!(c.c1 > 0.0)) throw ConfigError("proof.c1: must be positive");
  if (!(c.c2 > 0.0)) throw ConfigError("proof.c2: must be positive");

  if (subcommand == "page") {
    const auto* da = get("page.da");
    const auto* dabar = get("page.dabar");
    if (!da || !dabar) throw ConfigError("page.da: page needs both page.da and page.dabar");
    c.page_da = positive("page.da", single_uint("page.da", *da));
    c.page_dabar = positive("page.dabar", single_uint("page.dabar", *dabar));
    return c;
  }

  if (m.name.empty()) throw ConfigError("model.name: required");
  if (c.n_sites.empty()) throw ConfigError("model.n_sites: required");
  for (std::size_t n : c.n_sites) {
    try {
      checked_pow(m.local_dim, n, m.dimension_cap);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("model.n_sites: ") + e.what());
    }
    for (std::size_t l : c.lengths) {
      if (l > n) {
        throw ConfigError("subsystem.length: " + std::to_string(l) + " exceeds model.n_sites " +
                          std::to_string(n));
      }
    }
    if (c.start >= n) throw ConfigError("subsystem.start: must be below model.n_sites");
  }
  if (sweep) {
    std::size_t cells = c.seeds.size() * c.n_sites.size() * std::max<std::size_t>(1, c.lengths.size()) *
                        std::max<std::size_t>(1, c.deltas.size()) * c.alphas.size();
    if (cells > c.job_cap) {
      throw ConfigError("run.job_cap: sweep has " + std::to_string(cells) + " cells, cap is " +
                        std::to_string(c.job_cap));
    }
  }
  return c;
}

}  // namespace midspec
