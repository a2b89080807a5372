#pragma once

#include <map>
#include <string>
#include <variant>
#include <vector>

#include "bayescal/experiment.hpp"

namespace bayescal {

// Minimal TOML-style config reader: [section] headers, key = value lines,
// '#' comments, quoted strings, integers, floats, booleans and flat arrays.
// Enough for run configuration; not a general TOML implementation.
struct ConfigValue {
  std::variant<bool, std::int64_t, double, std::string, std::vector<std::string>> value;

  bool as_bool(const std::string& key) const;
  std::int64_t as_int(const std::string& key) const;
  double as_double(const std::string& key) const;
  std::string as_string(const std::string& key) const;
  std::vector<std::string> as_string_list(const std::string& key) const;
};

using ConfigSection = std::map<std::string, ConfigValue>;
using ConfigFile = std::map<std::string, ConfigSection>;

ConfigFile parse_config(const std::string& text);
ConfigFile load_config(const std::string& path);

// Applies a parsed config onto an ExperimentConfig; unknown keys are errors
// so typos fail loudly.
void apply_config(const ConfigFile& file, ExperimentConfig& config);

}  // namespace bayescal
