// Copyright 2026 The citeweave Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "citeweave/dialogue.hpp"
#include "citeweave/embeddings.hpp"
#include "citeweave/tag_codec.hpp"

namespace citeweave {

inline constexpr double kDefaultTau = 0.6;

struct CitationConfig {
  double tau = kDefaultTau;  // similarity threshold, (0, 1]
};

void validate(const CitationConfig& cfg);

/// dot(a, b) / sqrt(|a|^2 |b|^2), accumulated in double and clamped to
/// [-1, 1]. cos(v, v) is exactly 1.
double cosine_similarity(const FeatureVector& a, const FeatureVector& b);

/// Dense symmetric n x n cosine matrix, row-major.
class SimilarityMatrix {
 public:
  SimilarityMatrix() = default;
  explicit SimilarityMatrix(std::size_t n) : n_(n), values_(n * n, 0.0) {}

  std::size_t size() const { return n_; }
  double at(std::size_t i, std::size_t j) const { return values_[i * n_ + j]; }
  void set(std::size_t i, std::size_t j, double v) { values_[i * n_ + j] = v; }
  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(values_).subspan(i * n_, n_);
  }

 private:
  std::size_t n_ = 0;
  std::vector<double> values_;
};

SimilarityMatrix build_similarity_matrix(std::span<const FeatureVector> features);

struct ClusterAssignment {
  std::vector<std::uint32_t> ids;  // one per observation, in input order
  std::uint32_t next_id = 0;
};

/// Greedy first-link clustering in index order. An unassigned index i opens a
/// fresh cluster; then every i, assigned or not, claims each later unassigned
/// j with sim(i, j) >= tau. Links only run forward, so this is not a full
/// transitive closure: once j is claimed, a better match found later is
/// ignored.
ClusterAssignment cluster_similarity(const SimilarityMatrix& sim, const CitationConfig& cfg);

ClusterAssignment cluster_features(std::span<const FeatureVector> features,
                                   const CitationConfig& cfg);

/// Looks up the feature for an image-bearing turn: the observation's inline
/// feature, else `embedding_id`, else `image_id` in the table. Returns nullptr
/// if none resolves.
const FeatureVector* resolve_feature(const ImageRecord& img, const EmbeddingTable& table);

/// Features of all image-bearing turns, in turn order. Throws ValidationError
/// naming the turn when an observation or feature is missing.
std::vector<FeatureVector> dialogue_features(const Dialogue& d, const EmbeddingTable& table);

std::vector<AugmentedDescription> augment_dialogue(const Dialogue& d, const EmbeddingTable& table,
                                                   const CitationConfig& cfg);

struct CitationPrediction {
  std::uint32_t citation = 0;
  bool is_new = false;
};

/// The citation a new observation would receive if appended to `history` and
/// clustered: the citation of the earliest entry with sim >= tau, otherwise
/// max(history) + 1.
CitationPrediction predict_citation(
    std::span<const std::pair<AugmentedDescription, FeatureVector>> history,
    const FeatureVector& new_feature, const CitationConfig& cfg);

struct ObjectWord {
  std::string word;
  Span span;
  bool operator==(const ObjectWord&) const = default;
};

/// Fallback principal-object heuristic: the first non-stopword token after
/// the first article (a/an/the), or the first non-stopword token when there
/// is no article. Trailing punctuation is trimmed from the token.
/// Prefer dataset-supplied observations; see principal_object().
ObjectWord extract_principal_object(std::string_view description);

/// The image's annotated observation if present, else the heuristic.
ObjectWord principal_object(const ImageRecord& img);

/// Image ids from `history` whose citation equals `citation`, in turn order.
std::vector<std::string> select_conditioning_images(
    std::span<const std::pair<std::string, std::uint32_t>> history, std::uint32_t citation);

}  // namespace citeweave
