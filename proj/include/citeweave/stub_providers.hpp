// Copyright 2026 The citeweave Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "citeweave/embeddings.hpp"
#include "citeweave/providers.hpp"

namespace citeweave {

/// Unit vectors with controlled pairwise cosine. Each group g has a base
///   b_g = sqrt(rho) * c + sqrt(1 - rho) * e_g
/// with c, e_g orthonormal, so distinct bases have cosine rho. A member is
/// normalize(b_g + noise * u) with u a unit vector orthogonal to b_g, seeded
/// by (group, key). Members of one group therefore have cosine in
/// [(1 - noise^2) / (1 + noise^2), 1], which is >= 0.907 at the default noise
/// and about 0.95 on average; members of different groups stay below
/// (rho + 2 noise + noise^2) / (1 + noise^2), about 0.56.
class ConstructedGeometry {
 public:
  ConstructedGeometry(std::uint64_t seed, std::size_t dim, std::vector<std::string> groups,
                      double base_similarity = 0.1, double noise = 0.22);

  std::size_t dim() const { return dim_; }
  FeatureVector base(const std::string& group) const;
  FeatureVector member(const std::string& group, const std::string& key) const;

 private:
  std::uint64_t seed_;
  std::size_t dim_;
  double noise_;
  std::map<std::string, std::vector<double>> bases_;
};

/// Seeded unit vector for an arbitrary key (FNV-1a of the key mixed with the
/// seed), for ids the stubs know nothing about.
FeatureVector hashed_unit_vector(std::uint64_t seed, std::string_view key, std::size_t dim);

std::uint64_t fnv1a64(std::string_view s);

struct StubCall {
  std::string role;  // "t2i_plain" | "t2i_custom"
  std::string prompt;
  std::vector<std::string> conditioning;
  std::string result;
};

/// State shared by the providers of one stub suite.
struct StubWorld {
  std::uint64_t seed = 0;
  std::size_t dim = 64;
  EmbeddingTable features;                    // known image features
  std::map<std::string, std::string> captions;
  std::map<std::uint32_t, std::string> script;  // turn index -> raw output
  std::vector<StubCall> calls;
  std::uint32_t minted = 0;
};

struct StubOptions {
  std::size_t dim = 64;
  EmbeddingTable features;
  std::map<std::string, std::string> captions;
  /// image_id -> group; such ids get ConstructedGeometry members.
  std::map<std::string, std::string> object_groups;
  std::map<std::uint32_t, std::string> script;  // turn index -> raw output
};

struct StubSuite {
  ProviderSuite suite;
  std::shared_ptr<StubWorld> world;
};

/// Deterministic providers:
///  - captioner: canned caption, else "a picture of an object";
///  - feature_provider: known feature, else constructed-geometry member for
///    grouped ids, else a seeded hashed unit vector;
///  - generator: replays the script entry for the next turn (turn = number of
///    [EOT] in the context + 1);
///  - t2i stubs mint "gen-<n>" and log the call. A custom generation inherits
///    the feature of its first reference image; a plain one gets a fresh
///    hashed vector.
StubSuite stub_providers(std::uint64_t seed, StubOptions options = {});

}  // namespace citeweave
