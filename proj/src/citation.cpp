// Copyright 2026 The citeweave Authors
// SPDX-License-Identifier: Apache-2.0

#include "citeweave/citation.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace citeweave {

void validate(const CitationConfig& cfg) {
  if (!(cfg.tau > 0.0 && cfg.tau <= 1.0))
    throw UsageError("tau must lie in (0, 1], got " + std::to_string(cfg.tau));
}

double cosine_similarity(const FeatureVector& a, const FeatureVector& b) {
  if (a.dim() != b.dim())
    throw ValidationError("cosine similarity: dimension mismatch (" + std::to_string(a.dim()) +
                          " vs " + std::to_string(b.dim()) + ")");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) {
    const double x = a.values[i], y = b.values[i];
    dot += x * y;
    na += x * x;
    nb += y * y;
  }
  if (na == 0.0 || nb == 0.0) throw ValidationError("cosine similarity: zero-norm input");
  // sqrt(na * nb) rather than sqrt(na) * sqrt(nb): for a == b this yields
  // exactly dot, so self-similarity is exactly 1.
  return std::clamp(dot / std::sqrt(na * nb), -1.0, 1.0);
}

SimilarityMatrix build_similarity_matrix(std::span<const FeatureVector> features) {
  if (features.empty()) throw ValidationError("similarity matrix needs at least one feature");
  const std::size_t n = features.size();
  SimilarityMatrix m(n);
  for (std::size_t i = 0; i < n; ++i) {
    m.set(i, i, cosine_similarity(features[i], features[i]));
    for (std::size_t j = i + 1; j < n; ++j) {
      const double s = cosine_similarity(features[i], features[j]);
      m.set(i, j, s);
      m.set(j, i, s);
    }
  }
  return m;
}

ClusterAssignment cluster_similarity(const SimilarityMatrix& sim, const CitationConfig& cfg) {
  validate(cfg);
  const std::size_t n = sim.size();
  std::vector<bool> assigned(n, false);
  ClusterAssignment out;
  out.ids.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (!assigned[i]) {
      out.ids[i] = out.next_id++;
      assigned[i] = true;
    }
    for (std::size_t j = i + 1; j < n; ++j) {
      if (!assigned[j] && sim.at(i, j) >= cfg.tau) {
        out.ids[j] = out.ids[i];
        assigned[j] = true;
      }
    }
  }
  return out;
}

ClusterAssignment cluster_features(std::span<const FeatureVector> features,
                                   const CitationConfig& cfg) {
  validate(cfg);
  if (features.empty()) return {};
  return cluster_similarity(build_similarity_matrix(features), cfg);
}

const FeatureVector* resolve_feature(const ImageRecord& img, const EmbeddingTable& table) {
  if (img.object && img.object->feature) return &*img.object->feature;
  if (img.embedding_id) {
    auto it = table.find(*img.embedding_id);
    return it == table.end() ? nullptr : &it->second;
  }
  auto it = table.find(img.image_id);
  return it == table.end() ? nullptr : &it->second;
}

std::vector<FeatureVector> dialogue_features(const Dialogue& d, const EmbeddingTable& table) {
  std::vector<FeatureVector> out;
  for (const Turn& t : d.turns) {
    if (!t.image) continue;
    const std::string where = "dialogue " + d.id + ": turn " + std::to_string(t.index);
    if (!t.image->object) throw ValidationError(where + ": image has no object observation");
    const FeatureVector* f = resolve_feature(*t.image, table);
    if (!f) throw ValidationError(where + ": no feature for image '" + t.image->image_id + "'");
    out.push_back(*f);
  }
  return out;
}

std::vector<AugmentedDescription> augment_dialogue(const Dialogue& d, const EmbeddingTable& table,
                                                   const CitationConfig& cfg) {
  const std::vector<FeatureVector> features = dialogue_features(d, table);
  const ClusterAssignment clusters = cluster_features(features, cfg);
  std::vector<AugmentedDescription> out;
  out.reserve(features.size());
  std::size_t k = 0;
  for (const Turn& t : d.turns) {
    if (!t.image) continue;
    AugmentedDescription ad{t.image->description, t.image->object->span, clusters.ids[k++]};
    validate(ad);
    out.push_back(std::move(ad));
  }
  return out;
}

CitationPrediction predict_citation(
    std::span<const std::pair<AugmentedDescription, FeatureVector>> history,
    const FeatureVector& new_feature, const CitationConfig& cfg) {
  validate(cfg);
  std::uint32_t max_id = 0;
  for (const auto& [desc, feature] : history) {
    if (cosine_similarity(feature, new_feature) >= cfg.tau) return {desc.citation, false};
    max_id = std::max(max_id, desc.citation);
  }
  return {history.empty() ? 0u : max_id + 1, true};
}

namespace {

constexpr std::string_view kArticles[] = {"a", "an", "the"};

// Function words plus the framing nouns common in generated captions
// ("a close up of", "a picture of").
constexpr std::string_view kStopwords[] = {
    "a",       "an",      "the",   "this",  "that",  "these", "those", "there", "here",
    "is",      "are",     "was",   "were",  "be",    "been",  "being", "of",    "in",
    "on",      "at",      "to",    "with",  "and",   "or",    "for",   "from",  "by",
    "into",    "onto",    "over",  "under", "near",  "next",  "some",  "any",   "two",
    "three",   "several", "many",  "his",   "her",   "its",   "their", "my",    "your",
    "our",     "it",      "he",    "she",   "they",  "i",     "you",   "we",    "image",
    "picture", "photo",   "close", "up",    "view",  "shot",  "very",  "has"};

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

template <std::size_t N>
bool contains(const std::string_view (&set)[N], std::string_view w) {
  return std::find(std::begin(set), std::end(set), w) != std::end(set);
}

std::vector<ObjectWord> tokens(std::string_view s) {
  std::vector<ObjectWord> out;
  auto is_trim = [](char c) {
    return !std::isalnum(static_cast<unsigned char>(c)) && static_cast<unsigned char>(c) < 0x80;
  };
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
    // Only trailing punctuation is trimmed so spans keep starting at a token
    // boundary, which the citation encoder requires.
    std::size_t b = i, e = j;
    while (e > b && is_trim(s[e - 1])) --e;
    if (b < e) out.push_back({std::string(s.substr(b, e - b)), {b, e}});
    i = j;
  }
  return out;
}

}  // namespace

ObjectWord extract_principal_object(std::string_view description) {
  const std::vector<ObjectWord> toks = tokens(description);
  std::size_t from = 0;
  for (std::size_t i = 0; i < toks.size(); ++i) {
    if (contains(kArticles, lower(toks[i].word))) {
      from = i + 1;
      break;
    }
  }
  for (std::size_t i = from; i < toks.size(); ++i)
    if (!contains(kStopwords, lower(toks[i].word))) return toks[i];
  throw ValidationError("no principal object candidate in description '" +
                        std::string(description) + "'");
}

ObjectWord principal_object(const ImageRecord& img) {
  if (img.object) return {img.object->word, img.object->span};
  return extract_principal_object(img.description);
}

std::vector<std::string> select_conditioning_images(
    std::span<const std::pair<std::string, std::uint32_t>> history, std::uint32_t citation) {
  std::vector<std::string> out;
  for (const auto& [image_id, c] : history)
    if (c == citation) out.push_back(image_id);
  return out;
}

}  // namespace citeweave
