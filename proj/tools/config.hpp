#pragma once
// Run configuration: flat `key = value` text with dotted sections.
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nahm/field.hpp"

namespace nahm::cli {

// Configuration problems; the CLI maps these to exit status 2.
class ConfigError : public std::runtime_error {
public:
  ConfigError(int line, const std::string& field, const std::string& msg);
  int line() const { return line_; }
  const std::string& field() const { return field_; }

private:
  int line_;
  std::string field_;
};

struct RawEntry {
  std::string value;
  int line = 0;  // 0 for inline (command-line) settings
};

class RawConfig {
public:
  static RawConfig parse(const std::string& text);
  static RawConfig load(const std::string& path);
  // inline override "key=value"
  void set(const std::string& assignment);
  bool has(const std::string& key) const { return entries_.count(key) > 0; }

  std::string str(const std::string& key, const std::string& def) const;
  std::string str(const std::string& key) const;
  double num(const std::string& key, double def) const;
  double num(const std::string& key) const;
  long integer(const std::string& key, long def) const;
  Vec3 vec3(const std::string& key) const;
  Vec3 vec3(const std::string& key, const Vec3& def) const;
  std::vector<double> list(const std::string& key) const;
  std::vector<double> list(const std::string& key, const std::vector<double>& def) const;
  std::vector<Vec3> vec3_list(const std::string& key) const;
  // keys that were set but never read
  std::vector<std::string> unused() const;

private:
  const RawEntry& entry(const std::string& key) const;
  std::map<std::string, RawEntry> entries_;
  mutable std::map<std::string, bool> used_;
};

struct ModelSpec {
  std::string name = "abelian";
  std::shared_ptr<const ConnectionPath> path;
  std::string description;
};

struct RunConfig {
  ModelSpec model;
  Discretization disc;
  std::string out_dir = ".";
  std::string format = "json";
  unsigned long long seed = 0x5eed;
  int workers = 1;
  RawConfig raw;
};

// Builds the connection named by model.* and the discretization; validates
// t_max * beta >= 3 and the output directory.
RunConfig build_config(const RawConfig& raw);

}  // namespace nahm::cli
