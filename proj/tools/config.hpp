#pragma once

// YAML experiment configs. Every error names the dotted field path and the line it
// came from so a bad config can be fixed without guessing.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <initializer_list>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "solwave/error.hpp"

namespace solwave::cli {

class Section {
 public:
  Section(YAML::Node node, std::string path) : node_(std::move(node)), path_(std::move(path)) {}

  static Section load(const std::filesystem::path& file) {
    YAML::Node root;
    try {
      root = YAML::LoadFile(file.string());
    } catch (const YAML::BadFile&) {
      throw ConfigError("config: cannot open " + file.string());
    } catch (const YAML::ParserException& e) {
      throw ConfigError("config: parse error at line " + std::to_string(e.mark.line + 1) + ": " + e.msg);
    }
    if (!root.IsMap()) throw ConfigError("config: top level must be a mapping");
    return Section(root, "");
  }

  const std::string& path() const { return path_; }
  int line() const { return node_.Mark().line + 1; }
  bool has(const std::string& key) const { return node_[key].IsDefined() && !node_[key].IsNull(); }

  [[noreturn]] void fail(const std::string& key, const std::string& msg) const {
    std::ostringstream s;
    s << "config: field '" << qualified(key) << "'";
    YAML::Node n = node_[key];
    const int ln = n.IsDefined() ? n.Mark().line + 1 : line();
    if (ln > 0) s << " (line " << ln << ")";
    s << ": " << msg;
    throw ConfigError(s.str());
  }

  /// Rejects keys outside `allowed`; typos otherwise fall back to defaults silently.
  void expect_keys(std::initializer_list<const char*> allowed) const {
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (auto it = node_.begin(); it != node_.end(); ++it) {
      const std::string k = it->first.as<std::string>();
      if (!ok.count(k)) fail(k, "unknown field");
    }
  }

  Section child(const std::string& key) const {
    if (!has(key)) {
      std::ostringstream s;
      s << "config: missing section '" << qualified(key) << "'";
      throw ConfigError(s.str());
    }
    if (!node_[key].IsMap()) fail(key, "must be a mapping");
    return Section(node_[key], qualified(key));
  }

  std::optional<Section> optional_child(const std::string& key) const {
    if (!has(key)) return std::nullopt;
    return child(key);
  }

  template <class T>
  T get(const std::string& key) const {
    if (!has(key)) fail(key, "required");
    return convert<T>(key, node_[key]);
  }

  template <class T>
  T get(const std::string& key, const T& fallback) const {
    return has(key) ? convert<T>(key, node_[key]) : fallback;
  }

  double positive(const std::string& key) const { return check_positive(key, get<double>(key)); }
  double positive(const std::string& key, double fallback) const {
    return check_positive(key, get<double>(key, fallback));
  }
  int positive_int(const std::string& key, int fallback) const {
    const int v = get<int>(key, fallback);
    if (v <= 0) fail(key, "must be a positive integer");
    return v;
  }

  std::vector<double> list(const std::string& key, std::vector<double> fallback = {}) const {
    if (!has(key)) return fallback;
    YAML::Node n = node_[key];
    if (!n.IsSequence()) fail(key, "must be a list of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < n.size(); ++i) out.push_back(convert<double>(key, n[i]));
    return out;
  }

  /// Path values are taken relative to the directory of the config file.
  std::filesystem::path file(const std::string& key, const std::filesystem::path& base) const {
    std::filesystem::path p = get<std::string>(key);
    return p.is_absolute() ? p : base / p;
  }

 private:
  std::string qualified(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  double check_positive(const std::string& key, double v) const {
    if (!(v > 0.0) || !std::isfinite(v)) fail(key, "must be positive");
    return v;
  }

  template <class T>
  T convert(const std::string& key, const YAML::Node& n) const {
    try {
      return n.as<T>();
    } catch (const YAML::Exception&) {
      fail(key, std::string("cannot read '") + (n.IsScalar() ? n.Scalar() : std::string("<non-scalar>")) +
                    "' as " + type_name<T>());
    }
  }

  template <class T>
  static const char* type_name() {
    if constexpr (std::is_same_v<T, double>) return "a number";
    if constexpr (std::is_same_v<T, int>) return "an integer";
    if constexpr (std::is_same_v<T, bool>) return "true/false";
    return "text";
  }

  YAML::Node node_;
  std::string path_;
};

}  // namespace solwave::cli
