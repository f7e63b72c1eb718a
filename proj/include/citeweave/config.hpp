// Copyright 2026 The citeweave Authors
// SPDX-License-Identifier: Apache-2.0

// Application configuration. Every setting has a dotted key ("tau",
// "captioner.url", ...) used uniformly by the config file, the environment
// and the command line. Precedence, highest first:
//
//   command-line flag > CITEWEAVE_* environment variable > config file > default
//
// The config file is flat key = value text; provider endpoints live in
// [role] sections:
//
//   tau = 0.6
//   clients = http
//   [generator]
//   url = http://127.0.0.1:8080/generate
//   timeout_ms = 30000
//
// Environment variables are the key upper-cased with '.' replaced by '_' and
// prefixed with CITEWEAVE_, e.g. CITEWEAVE_GENERATOR_URL.

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace citeweave {

enum class ClientMode { kStub, kHttp };

struct Endpoint {
  std::string url;
  int timeout_ms = 30000;

  bool operator==(const Endpoint&) const = default;
};

struct AppConfig {
  double tau = 0.6;
  std::string dialogues;
  std::string embeddings;
  std::string script;
  std::string labels;
  ClientMode clients = ClientMode::kStub;
  /// Keyed by provider role: captioner, embedder, generator, t2i_plain,
  /// t2i_custom.
  std::map<std::string, Endpoint> endpoints;
  std::uint64_t seed = 0;
  unsigned parallel = 1;

  bool operator==(const AppConfig&) const = default;
};

/// Provider roles with an HTTP endpoint, in documentation order.
const std::vector<std::string>& provider_roles();

/// Every settable key, in documentation order.
std::vector<std::string> config_keys();

/// Throws UsageError for an unknown key or an unparsable value.
void set_config_value(AppConfig& cfg, std::string_view key, std::string_view value);
std::string get_config_value(const AppConfig& cfg, std::string_view key);

/// "CITEWEAVE_" + upper(key) with '.' -> '_'.
std::string environment_variable_for(std::string_view key);

/// Applies the keys present in `path`. Unknown keys are rejected so typos do
/// not silently fall back to defaults. Values may be double-quoted.
void load_config_file(AppConfig& cfg, const std::filesystem::path& path);

using EnvLookup = std::function<const char*(const char*)>;

/// Applies every CITEWEAVE_* variable that `lookup` reports as set.
void apply_environment(AppConfig& cfg, const EnvLookup& lookup);
void apply_environment(AppConfig& cfg);

/// tau in (0, 1], parallel >= 1, and every endpoint present in http mode.
void validate(const AppConfig& cfg);

}  // namespace citeweave
