#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "afcmem/sequencer.hpp"

namespace afcmem::scenario {

/// Typed, path-aware view of one mapping in a scenario file. Every key read
/// is remembered so finish() can reject the ones nobody asked for.
class Section {
 public:
  Section(YAML::Node node, std::string path);

  const std::string& path() const { return path_; }
  bool has(const std::string& key) const;

  double number(const std::string& key, std::optional<double> fallback = std::nullopt);
  double positive(const std::string& key, std::optional<double> fallback = std::nullopt);
  double fraction(const std::string& key, std::optional<double> fallback = std::nullopt);
  std::int64_t integer(const std::string& key, std::optional<std::int64_t> fallback = std::nullopt);
  bool flag(const std::string& key, bool fallback);
  std::string text(const std::string& key, std::optional<std::string> fallback = std::nullopt);
  Nanos duration(const std::string& key, std::optional<Nanos> fallback = std::nullopt);
  std::vector<double> numbers(const std::string& key, std::optional<std::vector<double>> fallback = std::nullopt);
  std::vector<std::string> texts(const std::string& key, std::optional<std::vector<std::string>> fallback = std::nullopt);
  std::vector<std::int64_t> integers(const std::string& key,
                                     std::optional<std::vector<std::int64_t>> fallback = std::nullopt);

  /// Nested mapping; an absent key yields an empty section.
  Section child(const std::string& key);
  std::vector<Section> list(const std::string& key);

  [[noreturn]] void fail(const std::string& key, const std::string& message) const;
  void finish() const;

 private:
  YAML::Node get(const std::string& key, bool required);
  std::string where(const YAML::Node& n) const;
  std::string key_path(const std::string& key) const;

  YAML::Node node_;
  std::string path_;
  std::set<std::string> used_;
};

}  // namespace afcmem::scenario
