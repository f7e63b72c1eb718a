// Copyright 2026 The citeweave Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace citeweave {

enum class SegmentKind { kTextResponse, kImageDescription };

struct Segment {
  SegmentKind kind = SegmentKind::kTextResponse;
  std::uint32_t turn_index = 1;
  std::size_t length = 1;

  bool operator==(const Segment&) const = default;
};

struct SegmentLayout {
  std::vector<Segment> segments;

  std::size_t total_length() const;
  bool operator==(const SegmentLayout&) const = default;
};

/// Non-empty, positive lengths, non-decreasing turn indices.
void validate(const SegmentLayout& layout);

/// Parses "T:3,D:4,T:2". A T segment opens the next turn; a D segment joins
/// the turn of an immediately preceding T, otherwise it opens a new turn (a
/// turn holds at most one description).
SegmentLayout parse_layout(std::string_view spec);

/// Boolean query x key permission matrix; row q lists the keys query q may
/// attend to.
class AttentionMask {
 public:
  AttentionMask() = default;
  explicit AttentionMask(std::size_t n) : n_(n), allowed_(n * n, 0) {}

  std::size_t size() const { return n_; }
  bool allowed(std::size_t q, std::size_t k) const { return allowed_[q * n_ + k] != 0; }
  void set(std::size_t q, std::size_t k, bool v) { allowed_[q * n_ + k] = v ? 1 : 0; }
  std::size_t count_allowed() const;

  bool operator==(const AttentionMask&) const = default;

 private:
  std::size_t n_ = 0;
  std::vector<std::uint8_t> allowed_;
};

AttentionMask build_causal_mask(std::size_t n);

/// Causal mask minus every (text query of turn i, description key of turn
/// < i) permission. Description queries keep full causal access.
AttentionMask build_modulated_mask(const SegmentLayout& layout);

/// JSON array of row bitstrings, e.g. ["100","110","111"].
std::string mask_to_json(const AttentionMask& mask);

/// Plain PBM (P1); allowed cells are white (0), blocked cells black (1).
std::string mask_to_pbm(const AttentionMask& mask);

/// Desk-scale weights: self-attention query/key/value projections and a
/// cross-attention block over image features with its own output projection.
/// All dim x dim, entries N(0, sigma^2) from a seeded mt19937_64.
struct ToyAttentionParams {
  std::size_t dim = 0;
  std::uint64_t seed = 0;
  Eigen::MatrixXd query, key, value;
  Eigen::MatrixXd cross_query, cross_key, cross_value, cross_output;
};

inline constexpr double kMaskedLogit = -1e9;

ToyAttentionParams make_toy_params(std::size_t dim, std::uint64_t seed, double sigma = 0.02);

/// Row-stochastic N x N weights of scaled dot-product self-attention with
/// disallowed logits replaced by kMaskedLogit before the softmax.
Eigen::MatrixXd attention_weights(const Eigen::MatrixXd& x, const AttentionMask& mask,
                                  const ToyAttentionParams& params);

/// weights * (x * value): every output row is a convex combination of the
/// value rows at allowed keys.
Eigen::MatrixXd masked_attention_forward(const Eigen::MatrixXd& x, const AttentionMask& mask,
                                         const ToyAttentionParams& params);

/// N x M weights of text positions over image feature rows.
Eigen::MatrixXd cross_attention_weights(const Eigen::MatrixXd& x,
                                        const Eigen::MatrixXd& image_features,
                                        const ToyAttentionParams& params);

/// x + softmax(q k^T / sqrt(dim)) v * output, with q from x and k, v from the
/// image features. With zero image rows the result is x itself.
Eigen::MatrixXd cross_attention_forward(const Eigen::MatrixXd& x,
                                        const Eigen::MatrixXd& image_features,
                                        const ToyAttentionParams& params);

struct TokenSequence {
  std::vector<std::uint32_t> tokens;
  std::uint32_t vocab_size = 0;
};

struct NllResult {
  double total = 0.0;  // -sum_j ln P(w_j | w_<j)
  double mean = 0.0;   // total / N
};

/// Teacher-forced negative log-likelihood. probs[j] is the model's
/// distribution for position j.
NllResult sequence_nll(const std::vector<std::vector<double>>& probs, const TokenSequence& w);

}  // namespace citeweave
