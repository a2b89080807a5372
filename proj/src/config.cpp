#include "bayescal/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "bayescal/errors.hpp"

namespace bayescal {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

ConfigValue parse_scalar(const std::string& raw, const std::string& where) {
  const std::string v = trim(raw);
  if (v.empty()) throw config_error(where + ": empty value");
  if (v.front() == '"') {
    if (v.size() < 2 || v.back() != '"') throw config_error(where + ": unterminated string");
    return {v.substr(1, v.size() - 2)};
  }
  if (v == "true") return {true};
  if (v == "false") return {false};
  // Integer first, double as the wider fallback.
  try {
    std::size_t pos = 0;
    const long long i = std::stoll(v, &pos);
    if (pos == v.size()) return {static_cast<std::int64_t>(i)};
  } catch (...) {
  }
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos == v.size()) return {d};
  } catch (...) {
  }
  throw config_error(where + ": cannot parse value \"" + v + "\"");
}

}  // namespace

bool ConfigValue::as_bool(const std::string& key) const {
  if (const bool* b = std::get_if<bool>(&value)) return *b;
  throw config_error("config key \"" + key + "\" must be a boolean");
}

std::int64_t ConfigValue::as_int(const std::string& key) const {
  if (const std::int64_t* i = std::get_if<std::int64_t>(&value)) return *i;
  throw config_error("config key \"" + key + "\" must be an integer");
}

double ConfigValue::as_double(const std::string& key) const {
  if (const double* d = std::get_if<double>(&value)) return *d;
  if (const std::int64_t* i = std::get_if<std::int64_t>(&value)) {
    return static_cast<double>(*i);
  }
  throw config_error("config key \"" + key + "\" must be a number");
}

std::string ConfigValue::as_string(const std::string& key) const {
  if (const std::string* s = std::get_if<std::string>(&value)) return *s;
  throw config_error("config key \"" + key + "\" must be a string");
}

std::vector<std::string> ConfigValue::as_string_list(const std::string& key) const {
  if (const auto* l = std::get_if<std::vector<std::string>>(&value)) return *l;
  if (const std::string* s = std::get_if<std::string>(&value)) return {*s};
  throw config_error("config key \"" + key + "\" must be a list of strings");
}

ConfigFile parse_config(const std::string& text) {
  ConfigFile file;
  std::string section;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = "config line " + std::to_string(line_no);

    if (line.front() == '[') {
      if (line.back() != ']') throw config_error(where + ": unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) throw config_error(where + ": empty section name");
      file[section];
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string::npos) throw config_error(where + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string raw = trim(line.substr(eq + 1));
    if (key.empty()) throw config_error(where + ": empty key");

    if (!raw.empty() && raw.front() == '[') {
      if (raw.back() != ']') throw config_error(where + ": unterminated array");
      std::vector<std::string> items;
      std::string body = raw.substr(1, raw.size() - 2);
      std::istringstream parts(body);
      std::string item;
      while (std::getline(parts, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        const ConfigValue v = parse_scalar(item, where);
        if (const std::string* s = std::get_if<std::string>(&v.value)) {
          items.push_back(*s);
        } else {
          // Numeric arrays are stored as their literal text.
          items.push_back(item);
        }
      }
      file[section][key] = {items};
    } else {
      file[section][key] = parse_scalar(raw, where);
    }
  }
  return file;
}

ConfigFile load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config \"" + path + "\"");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

void apply_config(const ConfigFile& file, ExperimentConfig& config) {
  for (const auto& [section, entries] : file) {
    if (section == "experiment" || section.empty()) {
      for (const auto& [key, value] : entries) {
        if (key == "samples") {
          config.samples_path = value.as_string(key);
        } else if (key == "methods") {
          config.methods.clear();
          for (const std::string& m : value.as_string_list(key)) {
            config.methods.push_back(method_from_string(m));
          }
        } else if (key == "subsets") {
          config.subsets.clear();
          for (const std::string& s : value.as_string_list(key)) {
            config.subsets.push_back(subset_from_string(s));
          }
        } else if (key == "estimator") {
          const std::string e = value.as_string(key);
          if (e == "both") {
            config.run_ml = config.run_svi = true;
          } else if (e == "ml") {
            config.run_ml = true;
            config.run_svi = false;
          } else if (e == "svi") {
            config.run_ml = false;
            config.run_svi = true;
          } else {
            throw config_error("estimator must be ml, svi or both");
          }
        } else if (key == "repeats") {
          config.repeats = static_cast<int>(value.as_int(key));
        } else if (key == "train_fraction") {
          config.train_fraction = value.as_double(key);
        } else if (key == "seed") {
          config.base_seed = static_cast<std::uint64_t>(value.as_int(key));
        } else if (key == "tau") {
          config.tau = value.as_double(key);
        } else if (key == "samples_t") {
          config.samples_t = static_cast<int>(value.as_int(key));
        } else if (key == "epsilon") {
          config.epsilon = value.as_double(key);
        } else if (key == "min_samples_per_bin") {
          config.min_samples_per_bin = static_cast<int>(value.as_int(key));
        } else if (key == "threads") {
          config.threads = static_cast<int>(value.as_int(key));
        } else if (key.rfind("bins.", 0) == 0) {
          config.bins_per_dim_override[key.substr(5)] =
              static_cast<int>(value.as_int(key));
        } else {
          throw config_error("unknown key \"" + key + "\" in [experiment]");
        }
      }
    } else if (section == "ml") {
      for (const auto& [key, value] : entries) {
        if (key == "max_steps") {
          config.ml.max_steps = static_cast<int>(value.as_int(key));
        } else if (key == "learning_rate") {
          config.ml.learning_rate = value.as_double(key);
        } else if (key == "convergence_tol") {
          config.ml.convergence_tol = value.as_double(key);
        } else {
          throw config_error("unknown key \"" + key + "\" in [ml]");
        }
      }
    } else if (section == "svi") {
      for (const auto& [key, value] : entries) {
        if (key == "max_steps") {
          config.svi.max_steps = static_cast<int>(value.as_int(key));
        } else if (key == "learning_rate") {
          config.svi.learning_rate = value.as_double(key);
        } else if (key == "mc_samples_per_step") {
          config.svi.mc_samples_per_step = static_cast<int>(value.as_int(key));
        } else if (key == "prior_mean") {
          config.svi.prior.mean = value.as_double(key);
        } else if (key == "prior_std") {
          config.svi.prior.std = value.as_double(key);
        } else if (key == "init_from_ml") {
          config.svi.init_from_ml = value.as_bool(key);
        } else {
          throw config_error("unknown key \"" + key + "\" in [svi]");
        }
      }
    } else {
      throw config_error("unknown config section [" + section + "]");
    }
  }
}

}  // namespace bayescal
