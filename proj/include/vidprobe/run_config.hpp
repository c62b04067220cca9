#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "vidprobe/binary_io.hpp"
#include "vidprobe/error.hpp"

namespace vidprobe {

/// Everything a run can be configured with. Keys in the config file are the
/// long flag names; unset fields fall back to the command's defaults.
struct RunConfig {
  // paths
  std::optional<std::string> manifest;
  std::optional<std::vector<std::string>> store;
  std::optional<std::string> refs;
  std::optional<std::string> tests;
  std::optional<std::string> report;
  std::optional<std::string> out;
  // protocol
  std::optional<std::string> protocol;
  std::optional<std::string> method;
  std::optional<std::string> train_source;
  std::optional<std::vector<std::string>> train_sources;
  std::optional<std::uint64_t> seed;
  std::optional<double> train_fraction;
  std::optional<bool> fill_diagonal;
  std::optional<bool> diagnostic_leak;
  std::optional<bool> per_source;
  // training
  std::optional<std::uint32_t> epochs;
  std::optional<std::uint32_t> batch;
  std::optional<double> lr;
  std::optional<bool> no_shuffle;
  // features
  std::optional<bool> l2_normalize;
  std::optional<bool> strict;
  // output
  std::optional<std::string> format;
  std::optional<unsigned> threads;

  bool operator==(const RunConfig&) const = default;
};

namespace detail {

template <typename T>
void config_field(const nlohmann::json& obj, const char* key, std::optional<T>& dst) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return;
  try {
    if constexpr (std::is_same_v<T, std::vector<std::string>>) {
      // Accept either a JSON array or a comma-separated string.
      if (it->is_string()) {
        std::vector<std::string> parts;
        std::stringstream ss(it->template get<std::string>());
        for (std::string p; std::getline(ss, p, ',');) {
          if (!p.empty()) parts.push_back(p);
        }
        dst = std::move(parts);
        return;
      }
    } else if constexpr (std::is_same_v<T, bool>) {
      if (!it->is_boolean()) throw Error(ErrorCode::Config, std::string("field '") + key + "': expected a boolean");
    } else if constexpr (std::is_integral_v<T>) {
      if (!it->is_number_unsigned()) {
        throw Error(ErrorCode::Config, std::string("field '") + key + "': expected a non-negative integer");
      }
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!it->is_number()) throw Error(ErrorCode::Config, std::string("field '") + key + "': expected a number");
    }
    dst = it->template get<T>();
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorCode::Config, std::string("field '") + key + "': wrong type");
  }
}

template <typename T>
void config_emit(nlohmann::ordered_json& j, const char* key, const std::optional<T>& v) {
  if (v) j[key] = *v;
}

inline constexpr const char* kConfigKeys[] = {
    "manifest", "store",  "refs",   "tests",   "report",       "out",          "protocol",    "method",
    "train-source", "train-sources", "seed", "train-fraction", "fill-diagonal", "diagnostic-leak", "per-source",
    "epochs",   "batch",  "lr",     "no-shuffle", "l2-normalize", "strict",    "format",      "threads",
};

}  // namespace detail

inline nlohmann::ordered_json to_json(const RunConfig& c) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  using detail::config_emit;
  config_emit(j, "manifest", c.manifest);
  config_emit(j, "store", c.store);
  config_emit(j, "refs", c.refs);
  config_emit(j, "tests", c.tests);
  config_emit(j, "report", c.report);
  config_emit(j, "out", c.out);
  config_emit(j, "protocol", c.protocol);
  config_emit(j, "method", c.method);
  config_emit(j, "train-source", c.train_source);
  config_emit(j, "train-sources", c.train_sources);
  config_emit(j, "seed", c.seed);
  config_emit(j, "train-fraction", c.train_fraction);
  config_emit(j, "fill-diagonal", c.fill_diagonal);
  config_emit(j, "diagnostic-leak", c.diagnostic_leak);
  config_emit(j, "per-source", c.per_source);
  config_emit(j, "epochs", c.epochs);
  config_emit(j, "batch", c.batch);
  config_emit(j, "lr", c.lr);
  config_emit(j, "no-shuffle", c.no_shuffle);
  config_emit(j, "l2-normalize", c.l2_normalize);
  config_emit(j, "strict", c.strict);
  config_emit(j, "format", c.format);
  config_emit(j, "threads", c.threads);
  return j;
}

inline RunConfig config_from_json(const nlohmann::json& obj) {
  if (!obj.is_object()) throw Error(ErrorCode::Config, "top level must be an object");
  for (const auto& [key, _] : obj.items()) {
    bool known = false;
    for (const char* k : detail::kConfigKeys) known = known || key == k;
    if (!known) throw Error(ErrorCode::Config, "unknown field '" + key + "'");
  }
  RunConfig c;
  using detail::config_field;
  config_field(obj, "manifest", c.manifest);
  config_field(obj, "store", c.store);
  config_field(obj, "refs", c.refs);
  config_field(obj, "tests", c.tests);
  config_field(obj, "report", c.report);
  config_field(obj, "out", c.out);
  config_field(obj, "protocol", c.protocol);
  config_field(obj, "method", c.method);
  config_field(obj, "train-source", c.train_source);
  config_field(obj, "train-sources", c.train_sources);
  config_field(obj, "seed", c.seed);
  config_field(obj, "train-fraction", c.train_fraction);
  config_field(obj, "fill-diagonal", c.fill_diagonal);
  config_field(obj, "diagnostic-leak", c.diagnostic_leak);
  config_field(obj, "per-source", c.per_source);
  config_field(obj, "epochs", c.epochs);
  config_field(obj, "batch", c.batch);
  config_field(obj, "lr", c.lr);
  config_field(obj, "no-shuffle", c.no_shuffle);
  config_field(obj, "l2-normalize", c.l2_normalize);
  config_field(obj, "strict", c.strict);
  config_field(obj, "format", c.format);
  config_field(obj, "threads", c.threads);
  return c;
}

/// Parses one JSON document. Syntax errors report line and column.
inline RunConfig parse_config(std::string_view text) {
  nlohmann::json obj;
  try {
    obj = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw Error(ErrorCode::Config, "line " + std::to_string(line) + ", column " + std::to_string(col) + ": malformed JSON");
  }
  return config_from_json(obj);
}

inline RunConfig load_config(const std::filesystem::path& path) {
  const auto text = binary::read_file(path);
  try {
    return parse_config(text);
  } catch (const Error& e) {
    throw Error(ErrorCode::Config, path.string() + ": " + std::string(e.what()).substr(std::string("config error: ").size()));
  }
}

/// Fields set in `overrides` replace those in `base`.
inline RunConfig merge(RunConfig base, const RunConfig& overrides) {
  auto take = [](auto& dst, const auto& src) {
    if (src) dst = src;
  };
  take(base.manifest, overrides.manifest);
  take(base.store, overrides.store);
  take(base.refs, overrides.refs);
  take(base.tests, overrides.tests);
  take(base.report, overrides.report);
  take(base.out, overrides.out);
  take(base.protocol, overrides.protocol);
  take(base.method, overrides.method);
  take(base.train_source, overrides.train_source);
  take(base.train_sources, overrides.train_sources);
  take(base.seed, overrides.seed);
  take(base.train_fraction, overrides.train_fraction);
  take(base.fill_diagonal, overrides.fill_diagonal);
  take(base.diagnostic_leak, overrides.diagnostic_leak);
  take(base.per_source, overrides.per_source);
  take(base.epochs, overrides.epochs);
  take(base.batch, overrides.batch);
  take(base.lr, overrides.lr);
  take(base.no_shuffle, overrides.no_shuffle);
  take(base.l2_normalize, overrides.l2_normalize);
  take(base.strict, overrides.strict);
  take(base.format, overrides.format);
  take(base.threads, overrides.threads);
  return base;
}

}  // namespace vidprobe
