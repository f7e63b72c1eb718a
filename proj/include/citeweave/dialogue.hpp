// Copyright 2026 The citeweave Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "citeweave/error.hpp"

namespace citeweave {

/// Half-open character range [start, end) into a description string.
struct Span {
  std::size_t start = 0;
  std::size_t end = 0;

  std::size_t length() const { return end - start; }
  bool operator==(const Span&) const = default;
};

/// Object feature vector. Non-empty, finite and not all-zero once it has
/// passed validate().
struct FeatureVector {
  std::vector<float> values;

  std::size_t dim() const { return values.size(); }
  bool operator==(const FeatureVector&) const = default;
};

/// Throws ValidationError naming `what` if the vector is empty, non-finite or
/// all-zero.
void validate(const FeatureVector& f, std::string_view what = "feature");

struct ObjectObservation {
  std::string word;
  Span span;
  std::optional<FeatureVector> feature;
  std::optional<std::array<float, 4>> box;  // x0, y0, x1, y1 in [0, 1]
  std::optional<std::string> mask_ref;

  bool operator==(const ObjectObservation&) const = default;
};

struct ImageRecord {
  std::string image_id;
  std::string description;
  std::optional<ObjectObservation> object;
  std::optional<std::string> embedding_id;

  bool operator==(const ImageRecord&) const = default;
};

enum class Speaker { kA, kB };

struct Turn {
  std::uint32_t index = 1;  // 1-based
  Speaker speaker = Speaker::kA;
  std::string text;
  std::optional<ImageRecord> image;

  bool operator==(const Turn&) const = default;
};

struct Dialogue {
  std::string id;
  std::vector<Turn> turns;

  std::size_t image_count() const;
  bool operator==(const Dialogue&) const = default;
};

/// Ground-truth annotation for one dialogue.
struct EvalRecord {
  std::string dialogue_id;
  std::vector<std::uint32_t> gold_citations;  // one per image-bearing turn
  std::vector<bool> image_intent;             // one per turn

  bool operator==(const EvalRecord&) const = default;
};

/// Enforces every Dialogue/Turn/ImageRecord/ObjectObservation invariant.
/// Errors name the dialogue id and the offending field.
void validate(const Dialogue& d);

/// Parses one JSONL record. `line` is only used for error messages.
Dialogue parse_dialogue(std::string_view json_text, std::size_t line = 0);

/// Canonical single-line JSON, keys in schema order; absent optionals are
/// omitted.
std::string serialize_dialogue(const Dialogue& d);

std::vector<Dialogue> load_dialogues(const std::filesystem::path& path);
std::vector<Dialogue> parse_dialogues(std::string_view jsonl);

/// True iff first occurrences of labels appear as 0, 1, 2, ... in order.
bool is_valid_labeling(std::span<const std::uint32_t> labels);

/// Parses the annotator form "0, 1, 0, 2". The empty string is the empty
/// labeling (a dialogue without images).
std::vector<std::uint32_t> parse_mdic_labels(std::string_view raw);

/// Inverse of parse_mdic_labels: "0,1,0,2".
std::string format_mdic_labels(std::span<const std::uint32_t> labels);

EvalRecord parse_eval_record(std::string_view json_text, std::size_t line = 0);
std::string serialize_eval_record(const EvalRecord& r);
std::vector<EvalRecord> load_eval_records(const std::filesystem::path& path);

/// Reads a whole file; throws ParseError when it cannot be opened.
std::string read_file(const std::filesystem::path& path);

/// Writes via a temporary sibling file and rename, so readers never observe a
/// partially written output.
void write_file_atomic(const std::filesystem::path& path,
                       std::string_view contents);

}  // namespace citeweave
