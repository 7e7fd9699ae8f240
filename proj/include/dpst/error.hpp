// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace dpst {

// Argument errors use std::invalid_argument. The types below cover the
// remaining failure classes so callers can tell them apart.

/// A physical model produced an inconsistent object (e.g. an indefinite
/// correlation matrix).
class ModelError : public std::runtime_error {
 public:
  explicit ModelError(const std::string &what) : std::runtime_error(what) {}
};

/// An iterative numerical routine failed (no convergence, singular system).
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string &what) : std::runtime_error(what) {}
};

/// Invalid or inconsistent configuration. `key()` names the offending entry
/// as `section.key` when known.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string &what)
      : std::runtime_error(key.empty() ? what : key + ": " + what), key_(std::move(key)) {}
  const std::string &key() const noexcept { return key_; }

 private:
  std::string key_;
};

}  // namespace dpst
