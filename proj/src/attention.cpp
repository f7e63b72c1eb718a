// Copyright 2026 The citeweave Authors
// SPDX-License-Identifier: Apache-2.0

#include "citeweave/attention.hpp"

#include <charconv>
#include <cmath>
#include <random>

#include "citeweave/error.hpp"

namespace citeweave {

std::size_t SegmentLayout::total_length() const {
  std::size_t n = 0;
  for (const Segment& s : segments) n += s.length;
  return n;
}

void validate(const SegmentLayout& layout) {
  if (layout.segments.empty()) throw ValidationError("layout has no segments");
  std::uint32_t prev_turn = 0;
  for (const Segment& s : layout.segments) {
    if (s.length == 0) throw ValidationError("layout segment with zero length");
    if (s.turn_index < prev_turn) throw ValidationError("layout turn indices decrease");
    prev_turn = s.turn_index;
  }
}

SegmentLayout parse_layout(std::string_view spec) {
  SegmentLayout layout;
  std::uint32_t turn = 0;
  bool open_text_turn = false;
  std::size_t pos = 0;
  while (pos <= spec.size()) {
    std::size_t comma = spec.find(',', pos);
    if (comma == std::string_view::npos) comma = spec.size();
    std::string_view item = spec.substr(pos, comma - pos);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    if (item.size() < 3 || item[1] != ':')
      throw UsageError("bad layout item '" + std::string(item) + "' (expected T:n or D:n)");
    std::size_t len = 0;
    std::string_view num = item.substr(2);
    auto [end, ec] = std::from_chars(num.data(), num.data() + num.size(), len);
    if (ec != std::errc() || end != num.data() + num.size() || len == 0)
      throw UsageError("bad segment length in '" + std::string(item) + "'");
    Segment seg;
    seg.length = len;
    if (item[0] == 'T' || item[0] == 't') {
      seg.kind = SegmentKind::kTextResponse;
      seg.turn_index = ++turn;
      open_text_turn = true;
    } else if (item[0] == 'D' || item[0] == 'd') {
      seg.kind = SegmentKind::kImageDescription;
      seg.turn_index = open_text_turn ? turn : ++turn;
      open_text_turn = false;
    } else {
      throw UsageError("bad segment kind in '" + std::string(item) + "'");
    }
    layout.segments.push_back(seg);
    pos = comma + 1;
  }
  return layout;
}

std::size_t AttentionMask::count_allowed() const {
  std::size_t n = 0;
  for (auto a : allowed_) n += a;
  return n;
}

AttentionMask build_causal_mask(std::size_t n) {
  if (n == 0) throw ValidationError("mask size must be >= 1");
  AttentionMask m(n);
  for (std::size_t q = 0; q < n; ++q)
    for (std::size_t k = 0; k <= q; ++k) m.set(q, k, true);
  return m;
}

AttentionMask build_modulated_mask(const SegmentLayout& layout) {
  validate(layout);
  const std::size_t n = layout.total_length();
  AttentionMask m = build_causal_mask(n);

  struct Range {
    std::size_t begin, end;
    const Segment* seg;
  };
  std::vector<Range> ranges;
  std::size_t offset = 0;
  for (const Segment& s : layout.segments) {
    ranges.push_back({offset, offset + s.length, &s});
    offset += s.length;
  }
  for (const Range& qr : ranges) {
    if (qr.seg->kind != SegmentKind::kTextResponse) continue;
    for (const Range& kr : ranges) {
      if (kr.seg->kind != SegmentKind::kImageDescription ||
          kr.seg->turn_index >= qr.seg->turn_index)
        continue;
      for (std::size_t q = qr.begin; q < qr.end; ++q)
        for (std::size_t k = kr.begin; k < kr.end; ++k) m.set(q, k, false);
    }
  }
  return m;
}

std::string mask_to_json(const AttentionMask& mask) {
  std::string out = "[";
  for (std::size_t q = 0; q < mask.size(); ++q) {
    if (q) out += ',';
    out += '"';
    for (std::size_t k = 0; k < mask.size(); ++k) out += mask.allowed(q, k) ? '1' : '0';
    out += '"';
  }
  out += "]";
  return out;
}

std::string mask_to_pbm(const AttentionMask& mask) {
  std::string out = "P1\n" + std::to_string(mask.size()) + " " + std::to_string(mask.size()) + "\n";
  for (std::size_t q = 0; q < mask.size(); ++q) {
    for (std::size_t k = 0; k < mask.size(); ++k) {
      if (k) out += ' ';
      out += mask.allowed(q, k) ? '0' : '1';
    }
    out += '\n';
  }
  return out;
}

ToyAttentionParams make_toy_params(std::size_t dim, std::uint64_t seed, double sigma) {
  if (dim == 0) throw ValidationError("toy attention dim must be >= 1");
  ToyAttentionParams p;
  p.dim = dim;
  p.seed = seed;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, sigma);
  auto draw = [&] {
    Eigen::MatrixXd m(dim, dim);
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = normal(rng);
    return m;
  };
  p.query = draw();
  p.key = draw();
  p.value = draw();
  p.cross_query = draw();
  p.cross_key = draw();
  p.cross_value = draw();
  p.cross_output = draw();
  return p;
}

namespace {

void softmax_rows(Eigen::MatrixXd& logits) {
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const double mx = logits.row(r).maxCoeff();
    logits.row(r) = (logits.row(r).array() - mx).exp();
    logits.row(r) /= logits.row(r).sum();
  }
}

void check_width(const Eigen::MatrixXd& m, const ToyAttentionParams& p, const char* what) {
  if (static_cast<std::size_t>(m.cols()) != p.dim)
    throw ValidationError(std::string(what) + " has " + std::to_string(m.cols()) +
                          " columns, params expect " + std::to_string(p.dim));
}

}  // namespace

Eigen::MatrixXd attention_weights(const Eigen::MatrixXd& x, const AttentionMask& mask,
                                  const ToyAttentionParams& params) {
  check_width(x, params, "input");
  if (static_cast<std::size_t>(x.rows()) != mask.size())
    throw ValidationError("input has " + std::to_string(x.rows()) + " rows, mask is " +
                          std::to_string(mask.size()));
  const Eigen::MatrixXd q = x * params.query;
  const Eigen::MatrixXd k = x * params.key;
  Eigen::MatrixXd logits = (q * k.transpose()) / std::sqrt(static_cast<double>(params.dim));
  for (Eigen::Index r = 0; r < logits.rows(); ++r)
    for (Eigen::Index c = 0; c < logits.cols(); ++c)
      if (!mask.allowed(static_cast<std::size_t>(r), static_cast<std::size_t>(c)))
        logits(r, c) = kMaskedLogit;
  softmax_rows(logits);
  return logits;
}

Eigen::MatrixXd masked_attention_forward(const Eigen::MatrixXd& x, const AttentionMask& mask,
                                         const ToyAttentionParams& params) {
  return attention_weights(x, mask, params) * (x * params.value);
}

Eigen::MatrixXd cross_attention_weights(const Eigen::MatrixXd& x,
                                        const Eigen::MatrixXd& image_features,
                                        const ToyAttentionParams& params) {
  check_width(x, params, "input");
  if (image_features.rows() > 0) check_width(image_features, params, "image features");
  const Eigen::MatrixXd q = x * params.cross_query;
  const Eigen::MatrixXd k = image_features * params.cross_key;
  Eigen::MatrixXd logits = (q * k.transpose()) / std::sqrt(static_cast<double>(params.dim));
  if (logits.cols() > 0) softmax_rows(logits);
  return logits;
}

Eigen::MatrixXd cross_attention_forward(const Eigen::MatrixXd& x,
                                        const Eigen::MatrixXd& image_features,
                                        const ToyAttentionParams& params) {
  check_width(x, params, "input");
  if (image_features.rows() == 0) return x;
  const Eigen::MatrixXd w = cross_attention_weights(x, image_features, params);
  return x + w * (image_features * params.cross_value) * params.cross_output;
}

NllResult sequence_nll(const std::vector<std::vector<double>>& probs, const TokenSequence& w) {
  if (w.tokens.empty()) throw ValidationError("token sequence is empty");
  if (w.vocab_size == 0) throw ValidationError("vocabulary size must be >= 1");
  if (probs.size() != w.tokens.size())
    throw ValidationError("expected " + std::to_string(w.tokens.size()) + " distributions, got " +
                          std::to_string(probs.size()));
  NllResult r;
  for (std::size_t j = 0; j < w.tokens.size(); ++j) {
    const auto& dist = probs[j];
    const std::string where = "position " + std::to_string(j);
    if (dist.size() != w.vocab_size)
      throw ValidationError(where + ": distribution size " + std::to_string(dist.size()) +
                            " != vocabulary size " + std::to_string(w.vocab_size));
    double sum = 0.0;
    for (double p : dist) {
      if (!std::isfinite(p) || p < 0.0) throw ValidationError(where + ": invalid probability");
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-6) throw ValidationError(where + ": distribution does not sum to 1");
    const std::uint32_t tok = w.tokens[j];
    if (tok >= w.vocab_size) throw ValidationError(where + ": token id out of range");
    if (dist[tok] <= 0.0)
      throw ValidationError(where + ": zero probability on realized token (infinite loss)");
    r.total -= std::log(dist[tok]);
  }
  r.mean = r.total / static_cast<double>(w.tokens.size());
  return r;
}

}  // namespace citeweave
