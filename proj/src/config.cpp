// Copyright 2026 The citeweave Authors
// SPDX-License-Identifier: Apache-2.0

#include "citeweave/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <fstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "citeweave/error.hpp"

namespace citeweave {

namespace {

constexpr std::string_view kScalarKeys[] = {"tau",    "dialogues", "embeddings", "script",
                                            "labels", "clients",   "seed",       "parallel"};

template <typename T>
T parse_number(std::string_view key, std::string_view value) {
  T out{};
  const char* first = value.data();
  const char* last = first + value.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last || value.empty())
    throw UsageError("config " + std::string(key) + ": cannot parse '" + std::string(value) + "'");
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string_view unquote(std::string_view s) {
  s = trim(s);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

// Splits "role.field" for endpoint keys; returns false for anything else.
bool split_endpoint_key(std::string_view key, std::string& role, std::string& field) {
  const auto dot = key.find('.');
  if (dot == std::string_view::npos) return false;
  role = key.substr(0, dot);
  field = key.substr(dot + 1);
  const auto& roles = provider_roles();
  return std::find(roles.begin(), roles.end(), role) != roles.end() &&
         (field == "url" || field == "timeout_ms");
}

}  // namespace

const std::vector<std::string>& provider_roles() {
  static const std::vector<std::string> roles = {"captioner", "embedder", "generator",
                                                 "t2i_plain", "t2i_custom"};
  return roles;
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys(std::begin(kScalarKeys), std::end(kScalarKeys));
  for (const std::string& role : provider_roles()) {
    keys.push_back(role + ".url");
    keys.push_back(role + ".timeout_ms");
  }
  return keys;
}

void set_config_value(AppConfig& cfg, std::string_view key, std::string_view value) {
  value = trim(value);
  if (key == "tau") {
    cfg.tau = parse_number<double>(key, value);
  } else if (key == "dialogues") {
    cfg.dialogues = value;
  } else if (key == "embeddings") {
    cfg.embeddings = value;
  } else if (key == "script") {
    cfg.script = value;
  } else if (key == "labels") {
    cfg.labels = value;
  } else if (key == "clients") {
    if (value == "stub") cfg.clients = ClientMode::kStub;
    else if (value == "http") cfg.clients = ClientMode::kHttp;
    else throw UsageError("config clients: expected stub or http, got '" + std::string(value) + "'");
  } else if (key == "seed") {
    cfg.seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "parallel") {
    cfg.parallel = parse_number<unsigned>(key, value);
  } else {
    std::string role, field;
    if (!split_endpoint_key(key, role, field))
      throw UsageError("unknown config key '" + std::string(key) + "'");
    Endpoint& ep = cfg.endpoints[role];
    if (field == "url") ep.url = value;
    else ep.timeout_ms = parse_number<int>(key, value);
  }
}

std::string get_config_value(const AppConfig& cfg, std::string_view key) {
  if (key == "tau") {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, cfg.tau);
    return std::string(buf, ptr);
  }
  if (key == "dialogues") return cfg.dialogues;
  if (key == "embeddings") return cfg.embeddings;
  if (key == "script") return cfg.script;
  if (key == "labels") return cfg.labels;
  if (key == "clients") return cfg.clients == ClientMode::kStub ? "stub" : "http";
  if (key == "seed") return std::to_string(cfg.seed);
  if (key == "parallel") return std::to_string(cfg.parallel);
  std::string role, field;
  if (!split_endpoint_key(key, role, field))
    throw UsageError("unknown config key '" + std::string(key) + "'");
  auto it = cfg.endpoints.find(role);
  const Endpoint ep = it == cfg.endpoints.end() ? Endpoint{} : it->second;
  return field == "url" ? ep.url : std::to_string(ep.timeout_ms);
}

std::string environment_variable_for(std::string_view key) {
  std::string name = "CITEWEAVE_";
  for (char c : key) name.push_back(c == '.' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  return name;
}

void load_config_file(AppConfig& cfg, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file " + path.string());
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw UsageError("config file " + path.string() + ": " + e.message() + " (line " +
                     std::to_string(e.line()) + ")");
  }
  for (const auto& [name, node] : tree) {
    if (node.empty()) {
      set_config_value(cfg, name, unquote(node.data()));
      continue;
    }
    for (const auto& [field, leaf] : node) set_config_value(cfg, name + "." + field, unquote(leaf.data()));
  }
}

void apply_environment(AppConfig& cfg, const EnvLookup& lookup) {
  for (const std::string& key : config_keys())
    if (const char* v = lookup(environment_variable_for(key).c_str())) set_config_value(cfg, key, v);
}

void apply_environment(AppConfig& cfg) {
  apply_environment(cfg, [](const char* name) { return std::getenv(name); });
}

void validate(const AppConfig& cfg) {
  if (!(cfg.tau > 0.0 && cfg.tau <= 1.0))
    throw UsageError("tau must lie in (0, 1], got " + get_config_value(cfg, "tau"));
  if (cfg.parallel < 1) throw UsageError("parallel must be at least 1");
  if (cfg.clients != ClientMode::kHttp) return;
  for (const std::string& role : provider_roles()) {
    auto it = cfg.endpoints.find(role);
    if (it == cfg.endpoints.end() || it->second.url.empty())
      throw UsageError("clients = http requires " + role + ".url");
    if (it->second.timeout_ms <= 0) throw UsageError(role + ".timeout_ms must be positive");
  }
}

}  // namespace citeweave
