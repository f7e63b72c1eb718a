// Copyright 2026 The citeweave Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "citeweave/citation.hpp"

namespace citeweave {

/// 2tp / (2tp + fp + fn). Throws ValidationError when all counts are zero.
double binary_f1(std::size_t tp, std::size_t fp, std::size_t fn);

/// Labels over unordered pairs (i < j), enumerated row-major:
/// (0,1), (0,2), ..., (0,n-1), (1,2), ...
struct PairPrediction {
  std::size_t n = 0;
  std::vector<bool> predicted_similar;
  std::vector<bool> gold_same_cluster;
};

std::size_t pair_count(std::size_t n);

/// Pair (i, j) is predicted similar iff sim(i, j) >= tau; gold positive iff
/// the labels agree.
PairPrediction make_pair_prediction(const SimilarityMatrix& sim, double tau,
                                    std::span<const std::uint32_t> gold_labels);

struct PairCounts {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;

  PairCounts& operator+=(const PairCounts& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    tn += o.tn;
    return *this;
  }
};

PairCounts count_pairs(const PairPrediction& p);

struct PairF1 {
  double f1 = 0.0;
  bool degenerate = false;  // no positive gold pair and no positive prediction
  PairCounts counts;
};

/// Degenerate inputs score 1.0 with `degenerate` set.
PairF1 pair_f1(const PairCounts& counts);
PairF1 pair_f1(const PairPrediction& p);

/// Fraction of (gold, predicted) cases that agree.
double citation_accuracy(std::span<const std::pair<std::uint32_t, std::uint32_t>> cases);

struct ConsistencyCase {
  std::string dialogue_id;
  std::uint32_t turn = 0;
  std::uint32_t gold = 0;
  std::uint32_t predicted = 0;
  bool gold_in_history = false;
  bool pred_in_history = false;
  std::optional<double> alignment;  // generated image vs gold reference object
};

/// Success with a history reference, or a miss where either tag refers to
/// history.
bool is_included(const ConsistencyCase& c);

/// Mean alignment over included cases. Included cases must carry an
/// alignment; throws ValidationError when nothing is included.
double consistency_score(std::span<const ConsistencyCase> cases);

/// Lowercases ASCII, splits on Unicode whitespace and strips trailing
/// punctuation from each token; empty tokens are dropped.
std::vector<std::string> tokenize(std::string_view text);

using Tokens = std::vector<std::string>;

/// Sufficient statistics of BLEU for one segment or a whole corpus.
struct BleuStats {
  std::vector<std::size_t> matches;  // clipped n-gram matches, n = 1..max_n
  std::vector<std::size_t> totals;   // candidate n-grams, n = 1..max_n
  std::size_t candidate_length = 0;
  std::size_t reference_length = 0;  // closest reference length (ties: shorter)

  /// Corpus accumulation. A default-constructed accumulator adopts the order
  /// of `o`; otherwise mismatched orders throw ValidationError.
  BleuStats& operator+=(const BleuStats& o);
};

BleuStats bleu_stats(const Tokens& candidate, std::span<const Tokens> references, int max_n);

/// Uniform weights, no smoothing: any zero precision gives 0.
double bleu_from_stats(const BleuStats& stats);

/// Sentence BLEU-n for n in {1, 2}.
double bleu(const Tokens& candidate, std::span<const Tokens> references, int max_n);

enum class RougeVariant { kR1, kRL };

/// ROUGE F-measure (beta = 1): unigram overlap for R1, LCS for RL.
double rouge(const Tokens& candidate, const Tokens& reference, RougeVariant variant);

std::size_t lcs_length(const Tokens& a, const Tokens& b);

}  // namespace citeweave
