#include "config.hpp"

#include <cmath>
#include <set>

#include "afcmem/errors.hpp"
#include "afcmem/scenario.hpp"

namespace afcmem::scenario {

namespace {

std::string describe(const YAML::Node& n) {
  switch (n.Type()) {
    case YAML::NodeType::Map: return "a mapping";
    case YAML::NodeType::Sequence: return "a list";
    case YAML::NodeType::Null: return "nothing";
    default: return "'" + n.Scalar() + "'";
  }
}

template <class T>
std::optional<T> scalar_as(const YAML::Node& n) {
  if (!n.IsScalar()) return std::nullopt;
  try {
    return n.as<T>();
  } catch (const YAML::Exception&) {
    return std::nullopt;
  }
}

}  // namespace

Section::Section(YAML::Node node, std::string path) : node_(std::move(node)), path_(std::move(path)) {
  if (node_ && !node_.IsNull() && !node_.IsMap()) {
    throw ConfigError((path_.empty() ? std::string("document") : path_) + where(node_) + ": expected a mapping, got " +
                      describe(node_));
  }
  // yaml-cpp keeps the first of repeated keys; a silent drop hides typos.
  if (node_ && node_.IsMap()) {
    std::set<std::string> seen;
    for (const auto& kv : node_) {
      const auto key = kv.first.Scalar();
      if (!seen.insert(key).second) throw ConfigError(key_path(key) + where(kv.first) + ": duplicate field");
    }
  }
}

std::string Section::key_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

std::string Section::where(const YAML::Node& n) const {
  const auto m = n.Mark();
  if (m.line < 0) return "";
  return " (line " + std::to_string(m.line + 1) + ", column " + std::to_string(m.column + 1) + ")";
}

void Section::fail(const std::string& key, const std::string& message) const {
  YAML::Node n = node_ && node_.IsMap() ? node_[key] : YAML::Node(YAML::NodeType::Undefined);
  throw ConfigError(key_path(key) + (n ? where(n) : where(node_)) + ": " + message);
}

bool Section::has(const std::string& key) const { return node_ && node_.IsMap() && node_[key]; }

YAML::Node Section::get(const std::string& key, bool required) {
  used_.insert(key);
  if (has(key)) {
    YAML::Node n = node_[key];
    if (!n.IsNull()) return n;
  }
  if (required) throw ConfigError(key_path(key) + where(node_) + ": required field is missing");
  return YAML::Node(YAML::NodeType::Undefined);
}

double Section::number(const std::string& key, std::optional<double> fallback) {
  const auto n = get(key, !fallback);
  if (!n) return *fallback;
  const auto v = scalar_as<double>(n);
  if (!v || !std::isfinite(*v)) fail(key, "expected a finite number, got " + describe(n));
  return *v;
}

double Section::positive(const std::string& key, std::optional<double> fallback) {
  const double v = number(key, fallback);
  if (!(v > 0.0)) fail(key, "must be positive");
  return v;
}

double Section::fraction(const std::string& key, std::optional<double> fallback) {
  const double v = number(key, fallback);
  if (!(v >= 0.0 && v <= 1.0)) fail(key, "must lie in [0, 1]");
  return v;
}

std::int64_t Section::integer(const std::string& key, std::optional<std::int64_t> fallback) {
  const auto n = get(key, !fallback);
  if (!n) return *fallback;
  const auto v = scalar_as<std::int64_t>(n);
  if (!v) fail(key, "expected an integer, got " + describe(n));
  return *v;
}

bool Section::flag(const std::string& key, bool fallback) {
  const auto n = get(key, false);
  if (!n) return fallback;
  const auto v = scalar_as<bool>(n);
  if (!v) fail(key, "expected true or false, got " + describe(n));
  return *v;
}

std::string Section::text(const std::string& key, std::optional<std::string> fallback) {
  const auto n = get(key, !fallback);
  if (!n) return *fallback;
  if (!n.IsScalar()) fail(key, "expected text, got " + describe(n));
  return n.Scalar();
}

Nanos Section::duration(const std::string& key, std::optional<Nanos> fallback) {
  const auto n = get(key, !fallback);
  if (!n) return *fallback;
  if (!n.IsScalar()) fail(key, "expected a duration such as '38 ms', got " + describe(n));
  try {
    return parse_duration(n.Scalar());
  } catch (const InvalidInput& e) {
    fail(key, e.what());
  }
}

std::vector<double> Section::numbers(const std::string& key, std::optional<std::vector<double>> fallback) {
  const auto n = get(key, !fallback);
  if (!n) return *fallback;
  if (!n.IsSequence()) fail(key, "expected a list of numbers, got " + describe(n));
  std::vector<double> out;
  for (std::size_t i = 0; i < n.size(); ++i) {
    const auto v = scalar_as<double>(n[i]);
    if (!v || !std::isfinite(*v)) fail(key, "entry " + std::to_string(i) + " is not a finite number");
    out.push_back(*v);
  }
  return out;
}

std::vector<std::int64_t> Section::integers(const std::string& key, std::optional<std::vector<std::int64_t>> fallback) {
  const auto n = get(key, !fallback);
  if (!n) return *fallback;
  if (!n.IsSequence()) fail(key, "expected a list of integers, got " + describe(n));
  std::vector<std::int64_t> out;
  for (std::size_t i = 0; i < n.size(); ++i) {
    const auto v = scalar_as<std::int64_t>(n[i]);
    if (!v) fail(key, "entry " + std::to_string(i) + " is not an integer");
    out.push_back(*v);
  }
  return out;
}

std::vector<std::string> Section::texts(const std::string& key, std::optional<std::vector<std::string>> fallback) {
  const auto n = get(key, !fallback);
  if (!n) return *fallback;
  if (!n.IsSequence()) fail(key, "expected a list, got " + describe(n));
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n.size(); ++i) {
    if (!n[i].IsScalar()) fail(key, "entry " + std::to_string(i) + " is not text");
    out.push_back(n[i].Scalar());
  }
  return out;
}

Section Section::child(const std::string& key) {
  const auto n = get(key, false);
  return Section(n ? n : YAML::Node(YAML::NodeType::Map), key_path(key));
}

std::vector<Section> Section::list(const std::string& key) {
  const auto n = get(key, false);
  std::vector<Section> out;
  if (!n) return out;
  if (!n.IsSequence()) fail(key, "expected a list, got " + describe(n));
  for (std::size_t i = 0; i < n.size(); ++i) out.emplace_back(n[i], key_path(key) + "[" + std::to_string(i) + "]");
  return out;
}

void Section::finish() const {
  if (!node_ || !node_.IsMap()) return;
  for (const auto& kv : node_) {
    const auto key = kv.first.as<std::string>();
    if (!used_.count(key)) {
      throw ConfigError(key_path(key) + where(kv.first) + ": unknown field");
    }
  }
}

}  // namespace afcmem::scenario
