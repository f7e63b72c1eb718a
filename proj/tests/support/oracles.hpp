// Copyright 2026 The citeweave Authors
// SPDX-License-Identifier: Apache-2.0

// Independent reference implementations and random generators shared by the
// unit and acceptance tests. Nothing here calls into the library's
// algorithms; only its plain data types are reused.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "citeweave/attention.hpp"
#include "citeweave/dialogue.hpp"
#include "tempdir.hpp"

namespace cwtest {

using citeweave::FeatureVector;

// ---- numerics ----------------------------------------------------------------

inline long double cosine_ld(const FeatureVector& a, const FeatureVector& b) {
  long double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    const long double x = a.values[i], y = b.values[i];
    dot += x * y;
    na += x * x;
    nb += y * y;
  }
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

inline std::vector<std::vector<long double>> similarity_ld(const std::vector<FeatureVector>& f) {
  std::vector<std::vector<long double>> s(f.size(), std::vector<long double>(f.size()));
  for (std::size_t i = 0; i < f.size(); ++i)
    for (std::size_t j = 0; j < f.size(); ++j) s[i][j] = i == j ? 1.0L : cosine_ld(f[i], f[j]);
  return s;
}

// ---- clustering --------------------------------------------------------------

// Line-by-line replay of the printed clustering pseudocode, with K keyed by
// occurrence index:
//
//   cluster_id <- 0
//   for i in 1..n:
//     if not K.has_key(o_i): K[o_i] <- cluster_id; cluster_id++
//     for j in i+1..n:
//       if Sim(f_i, f_j) >= tau and not K.has_key(o_j): K[o_j] <- K[o_i]
template <typename Real>
std::vector<std::uint32_t> algorithm1(const std::vector<std::vector<Real>>& sim, double tau) {
  const std::size_t n = sim.size();
  std::map<std::size_t, std::uint32_t> K;
  std::uint32_t cluster_id = 0;
  for (std::size_t i = 1; i <= n; ++i) {
    if (!K.contains(i)) {
      K[i] = cluster_id;
      cluster_id++;
    }
    for (std::size_t j = i + 1; j <= n; ++j)
      if (sim[i - 1][j - 1] >= tau && !K.contains(j)) K[j] = K[i];
  }
  std::vector<std::uint32_t> out;
  for (std::size_t i = 1; i <= n; ++i) out.push_back(K.at(i));
  return out;
}

// First occurrences of labels appear as 0, 1, 2, ... in order.
inline bool first_occurrence_ok(const std::vector<std::uint32_t>& labels) {
  std::set<std::uint32_t> seen;
  for (std::uint32_t l : labels) {
    if (!seen.contains(l) && l != seen.size()) return false;
    seen.insert(l);
  }
  return true;
}

// ---- masks -------------------------------------------------------------------

struct TokenInfo {
  citeweave::SegmentKind kind;
  std::uint32_t turn;
};

inline std::vector<TokenInfo> expand_layout(const citeweave::SegmentLayout& layout) {
  std::vector<TokenInfo> out;
  for (const auto& s : layout.segments)
    for (std::size_t k = 0; k < s.length; ++k) out.push_back({s.kind, s.turn_index});
  return out;
}

// Enumerates the permission rules directly: causal, except that a text
// token of turn i may not see description tokens of turns before i.
inline std::vector<std::vector<bool>> mask_rules(const citeweave::SegmentLayout& layout) {
  const auto tok = expand_layout(layout);
  std::vector<std::vector<bool>> m(tok.size(), std::vector<bool>(tok.size(), false));
  for (std::size_t q = 0; q < tok.size(); ++q)
    for (std::size_t k = 0; k <= q; ++k) {
      const bool blocked = tok[q].kind == citeweave::SegmentKind::kTextResponse &&
                           tok[k].kind == citeweave::SegmentKind::kImageDescription &&
                           tok[k].turn < tok[q].turn;
      m[q][k] = !blocked;
    }
  return m;
}

// ---- pairs -------------------------------------------------------------------

struct Counts {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
};

// Flattened pair labelling: sets of (i, j) pairs compared element-wise.
inline Counts pair_counts(const std::vector<std::vector<long double>>& sim, double tau,
                          const std::vector<std::uint32_t>& gold) {
  std::set<std::pair<std::size_t, std::size_t>> predicted, same;
  std::vector<std::pair<std::size_t, std::size_t>> all;
  for (std::size_t i = 0; i < gold.size(); ++i)
    for (std::size_t j = i + 1; j < gold.size(); ++j) {
      all.emplace_back(i, j);
      if (sim[i][j] >= tau) predicted.insert({i, j});
      if (gold[i] == gold[j]) same.insert({i, j});
    }
  Counts c;
  for (const auto& p : all) {
    const bool pr = predicted.contains(p), g = same.contains(p);
    if (pr && g) ++c.tp;
    else if (pr) ++c.fp;
    else if (g) ++c.fn;
    else ++c.tn;
  }
  return c;
}

// ---- generators ----------------------------------------------------------------

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  std::mt19937_64& rng() { return rng_; }

  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  double real(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  bool coin(double p = 0.5) { return std::bernoulli_distribution(p)(rng_); }

  template <typename T>
  const T& pick(const std::vector<T>& v) {
    return v[static_cast<std::size_t>(integer(0, static_cast<int>(v.size()) - 1))];
  }

  // Gaussian entries; never all-zero.
  FeatureVector vector(std::size_t dim) {
    std::normal_distribution<float> n(0.0f, 1.0f);
    FeatureVector f;
    for (std::size_t i = 0; i < dim; ++i) f.values.push_back(n(rng_));
    if (std::all_of(f.values.begin(), f.values.end(), [](float v) { return v == 0.0f; }))
      f.values[0] = 1.0f;
    return f;
  }

  // Lowercase word over a small alphabet, optionally with bracket noise.
  std::string word(int min_len = 1, int max_len = 8, bool brackets = false) {
    static const std::string plain = "abcdefghijklmnopqrstuvwxyz0123456789-_.,'";
    static const std::string noisy = plain + "[]/";
    const std::string& alphabet = brackets ? noisy : plain;
    std::string w;
    const int len = integer(min_len, max_len);
    for (int i = 0; i < len; ++i)
      w.push_back(alphabet[static_cast<std::size_t>(integer(0, static_cast<int>(alphabet.size()) - 1))]);
    return w;
  }

  // A valid labelling of length n (first occurrences in order).
  std::vector<std::uint32_t> labelling(std::size_t n) {
    std::vector<std::uint32_t> out;
    std::uint32_t next = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (next == 0 || coin(0.4)) out.push_back(next++);
      else out.push_back(static_cast<std::uint32_t>(integer(0, static_cast<int>(next) - 1)));
    }
    return out;
  }

 private:
  std::mt19937_64 rng_;
};

}  // namespace cwtest
