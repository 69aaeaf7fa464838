#pragma once

#include <stdexcept>
#include <string>

namespace adagb2 {

/// Bad argument to a library call (dimension mismatch, out-of-domain value).
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Invalid experiment or component configuration. `path` names the offending
/// field, e.g. "oracle.sigma".
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string path, const std::string& what)
      : std::runtime_error(path.empty() ? what : path + ": " + what), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

/// Non-finite values met during a run.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace adagb2
