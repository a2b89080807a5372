#pragma once

#include <stdexcept>
#include <string>

namespace bayescal {

// Malformed or out-of-range input data (sample files, detection records).
class data_error : public std::runtime_error {
 public:
  explicit data_error(const std::string& what) : std::runtime_error(what) {}
};

// Invalid configuration: bad flags, bad config file, inconsistent experiment setup.
class config_error : public std::runtime_error {
 public:
  explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

// An optimization or numeric routine left the finite domain.
class numeric_error : public std::runtime_error {
 public:
  explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace bayescal
