#pragma once

#include <functional>
#include <iostream>
#include <mutex>
#include <stdexcept>
#include <string>

namespace solwave {

/// Invalid parameters (symbol constants, exponents, grid sizes, ...).
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

/// A geometric construction (Cantor set, cutoff pair) that cannot be built.
class ConstructionError : public std::runtime_error {
 public:
  explicit ConstructionError(const std::string& what) : std::runtime_error(what) {}
};

/// Inverse transform of a spectrum that does not describe a real field.
class SymmetryError : public std::runtime_error {
 public:
  explicit SymmetryError(const std::string& what) : std::runtime_error(what) {}
};

/// Grids or fields that do not fit together.
class GeometryError : public std::runtime_error {
 public:
  explicit GeometryError(const std::string& what) : std::runtime_error(what) {}
};

using WarningHandler = std::function<void(const std::string&)>;

namespace detail {
inline std::mutex& warning_mutex() {
  static std::mutex m;
  return m;
}
inline WarningHandler& warning_handler() {
  static WarningHandler h = [](const std::string& msg) { std::cerr << "warning: " << msg << '\n'; };
  return h;
}
}  // namespace detail

/// Replaces the sink for advisory warnings; returns the previous handler.
inline WarningHandler set_warning_handler(WarningHandler handler) {
  std::lock_guard lock(detail::warning_mutex());
  auto previous = std::move(detail::warning_handler());
  detail::warning_handler() = std::move(handler);
  return previous;
}

inline void warn(const std::string& msg) {
  std::lock_guard lock(detail::warning_mutex());
  if (detail::warning_handler()) detail::warning_handler()(msg);
}

}  // namespace solwave
