// Copyright 2026 The citeweave Authors
// SPDX-License-Identifier: Apache-2.0

#include "citeweave/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace citeweave {

double binary_f1(std::size_t tp, std::size_t fp, std::size_t fn) {
  if (tp + fp + fn == 0) throw ValidationError("F1 undefined: tp, fp and fn are all zero");
  return 2.0 * static_cast<double>(tp) / static_cast<double>(2 * tp + fp + fn);
}

std::size_t pair_count(std::size_t n) { return n < 2 ? 0 : n * (n - 1) / 2; }

PairPrediction make_pair_prediction(const SimilarityMatrix& sim, double tau,
                                    std::span<const std::uint32_t> gold_labels) {
  if (gold_labels.size() != sim.size())
    throw ValidationError("gold labels (" + std::to_string(gold_labels.size()) +
                          ") do not match observations (" + std::to_string(sim.size()) + ")");
  PairPrediction p;
  p.n = sim.size();
  for (std::size_t i = 0; i < p.n; ++i) {
    for (std::size_t j = i + 1; j < p.n; ++j) {
      p.predicted_similar.push_back(sim.at(i, j) >= tau);
      p.gold_same_cluster.push_back(gold_labels[i] == gold_labels[j]);
    }
  }
  return p;
}

PairCounts count_pairs(const PairPrediction& p) {
  if (p.predicted_similar.size() != p.gold_same_cluster.size() ||
      p.predicted_similar.size() != pair_count(p.n))
    throw ValidationError("pair prediction and gold labels cover different pair sets");
  PairCounts c;
  for (std::size_t k = 0; k < p.predicted_similar.size(); ++k) {
    const bool pred = p.predicted_similar[k], gold = p.gold_same_cluster[k];
    if (pred && gold) ++c.tp;
    else if (pred) ++c.fp;
    else if (gold) ++c.fn;
    else ++c.tn;
  }
  return c;
}

PairF1 pair_f1(const PairCounts& counts) {
  PairF1 r;
  r.counts = counts;
  if (counts.tp + counts.fp + counts.fn == 0) {
    if (counts.tn == 0) throw ValidationError("pair F1 needs at least one pair");
    r.f1 = 1.0;
    r.degenerate = true;
    return r;
  }
  r.f1 = binary_f1(counts.tp, counts.fp, counts.fn);
  return r;
}

PairF1 pair_f1(const PairPrediction& p) { return pair_f1(count_pairs(p)); }

double citation_accuracy(std::span<const std::pair<std::uint32_t, std::uint32_t>> cases) {
  if (cases.empty()) throw ValidationError("citation accuracy needs at least one case");
  std::size_t hits = 0;
  for (const auto& [gold, pred] : cases) hits += gold == pred ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(cases.size());
}

bool is_included(const ConsistencyCase& c) {
  if (c.gold == c.predicted) return c.gold_in_history;
  return c.gold_in_history || c.pred_in_history;
}

double consistency_score(std::span<const ConsistencyCase> cases) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const ConsistencyCase& c : cases) {
    if (!is_included(c)) continue;
    if (!c.alignment)
      throw ValidationError("consistency case " + c.dialogue_id + "/" + std::to_string(c.turn) +
                            " is included but has no alignment");
    sum += *c.alignment;
    ++n;
  }
  if (n == 0) throw ValidationError("consistency score: no included cases");
  return sum / static_cast<double>(n);
}

namespace {

// Length of the UTF-8 whitespace sequence at `s[i]`, 0 if none.
std::size_t whitespace_at(std::string_view s, std::size_t i) {
  const auto b = [&](std::size_t k) {
    return k < s.size() ? static_cast<unsigned char>(s[k]) : 0u;
  };
  const unsigned c0 = b(i);
  if (c0 == ' ' || (c0 >= 0x09 && c0 <= 0x0D)) return 1;
  if (c0 == 0xC2 && (b(i + 1) == 0x85 || b(i + 1) == 0xA0)) return 2;  // NEL, NBSP
  if (c0 == 0xE1 && b(i + 1) == 0x9A && b(i + 2) == 0x80) return 3;     // U+1680
  if (c0 == 0xE2 && b(i + 1) == 0x80) {
    const unsigned c2 = b(i + 2);
    // U+2000..U+200A, U+2028, U+2029, U+202F
    if ((c2 >= 0x80 && c2 <= 0x8A) || c2 == 0xA8 || c2 == 0xA9 || c2 == 0xAF) return 3;
  }
  if (c0 == 0xE2 && b(i + 1) == 0x81 && b(i + 2) == 0x9F) return 3;  // U+205F
  if (c0 == 0xE3 && b(i + 1) == 0x80 && b(i + 2) == 0x80) return 3;  // U+3000
  return 0;
}

bool is_terminal_punct(char c) {
  switch (c) {
    case '.': case ',': case '!': case '?': case ';': case ':':
    case '"': case '\'': case ')': case ']': case '}':
      return true;
    default:
      return false;
  }
}

using Ngram = std::vector<std::string>;

std::map<Ngram, std::size_t> ngram_counts(const Tokens& toks, std::size_t n) {
  std::map<Ngram, std::size_t> out;
  if (toks.size() < n) return out;
  for (std::size_t i = 0; i + n <= toks.size(); ++i)
    ++out[Ngram(toks.begin() + static_cast<std::ptrdiff_t>(i),
                toks.begin() + static_cast<std::ptrdiff_t>(i + n))];
  return out;
}

double f_measure(double overlap, std::size_t cand_len, std::size_t ref_len) {
  if (overlap == 0.0) return 0.0;
  const double p = overlap / static_cast<double>(cand_len);
  const double r = overlap / static_cast<double>(ref_len);
  return 2.0 * p * r / (p + r);
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    while (!cur.empty() && is_terminal_punct(cur.back())) cur.pop_back();
    if (!cur.empty()) out.push_back(std::move(cur));
    cur.clear();
  };
  std::size_t i = 0;
  while (i < text.size()) {
    if (std::size_t ws = whitespace_at(text, i)) {
      flush();
      i += ws;
      continue;
    }
    char c = text[i++];
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    cur.push_back(c);
  }
  flush();
  return out;
}

BleuStats& BleuStats::operator+=(const BleuStats& o) {
  if (matches.empty() && candidate_length == 0) {  // default-constructed accumulator
    matches.assign(o.matches.size(), 0);
    totals.assign(o.totals.size(), 0);
  }
  if (matches.size() != o.matches.size()) throw ValidationError("BLEU orders differ");
  for (std::size_t k = 0; k < matches.size(); ++k) {
    matches[k] += o.matches[k];
    totals[k] += o.totals[k];
  }
  candidate_length += o.candidate_length;
  reference_length += o.reference_length;
  return *this;
}

BleuStats bleu_stats(const Tokens& candidate, std::span<const Tokens> references, int max_n) {
  if (max_n < 1 || max_n > 4) throw ValidationError("BLEU order must be 1..4");
  if (candidate.empty()) throw ValidationError("BLEU: empty candidate");
  if (references.empty()) throw ValidationError("BLEU: no references");
  BleuStats s;
  s.candidate_length = candidate.size();
  std::size_t best = references.front().size();
  for (const Tokens& ref : references) {
    if (ref.empty()) throw ValidationError("BLEU: empty reference");
    const auto d = [&](std::size_t len) {
      return len > candidate.size() ? len - candidate.size() : candidate.size() - len;
    };
    if (d(ref.size()) < d(best) || (d(ref.size()) == d(best) && ref.size() < best))
      best = ref.size();
  }
  s.reference_length = best;
  for (int n = 1; n <= max_n; ++n) {
    const auto cand = ngram_counts(candidate, static_cast<std::size_t>(n));
    std::map<Ngram, std::size_t> max_ref;
    for (const Tokens& ref : references)
      for (const auto& [g, c] : ngram_counts(ref, static_cast<std::size_t>(n)))
        max_ref[g] = std::max(max_ref[g], c);
    std::size_t matched = 0, total = 0;
    for (const auto& [g, c] : cand) {
      total += c;
      auto it = max_ref.find(g);
      if (it != max_ref.end()) matched += std::min(c, it->second);
    }
    s.matches.push_back(matched);
    s.totals.push_back(total);
  }
  return s;
}

double bleu_from_stats(const BleuStats& stats) {
  if (stats.candidate_length == 0) return 0.0;
  double log_sum = 0.0;
  const double weight = 1.0 / static_cast<double>(stats.matches.size());
  for (std::size_t k = 0; k < stats.matches.size(); ++k) {
    if (stats.matches[k] == 0 || stats.totals[k] == 0) return 0.0;
    log_sum += weight * std::log(static_cast<double>(stats.matches[k]) /
                                 static_cast<double>(stats.totals[k]));
  }
  double bp = 1.0;
  if (stats.candidate_length < stats.reference_length)
    bp = std::exp(1.0 - static_cast<double>(stats.reference_length) /
                            static_cast<double>(stats.candidate_length));
  return bp * std::exp(log_sum);
}

double bleu(const Tokens& candidate, std::span<const Tokens> references, int max_n) {
  return bleu_from_stats(bleu_stats(candidate, references, max_n));
}

std::size_t lcs_length(const Tokens& a, const Tokens& b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j)
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double rouge(const Tokens& candidate, const Tokens& reference, RougeVariant variant) {
  if (candidate.empty() || reference.empty()) throw ValidationError("ROUGE: empty input");
  if (variant == RougeVariant::kRL)
    return f_measure(static_cast<double>(lcs_length(candidate, reference)), candidate.size(),
                     reference.size());
  const auto c = ngram_counts(candidate, 1);
  const auto r = ngram_counts(reference, 1);
  std::size_t overlap = 0;
  for (const auto& [g, n] : c) {
    auto it = r.find(g);
    if (it != r.end()) overlap += std::min(n, it->second);
  }
  return f_measure(static_cast<double>(overlap), candidate.size(), reference.size());
}

}  // namespace citeweave
