// Copyright 2026 The citeweave Authors
// SPDX-License-Identifier: Apache-2.0

// File-level drivers behind the cite, run and eval commands. Every function
// here is deterministic: outputs are ordered by input order (cite, run) or by
// dialogue id (eval reports) regardless of the worker count.

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "citeweave/citation.hpp"
#include "citeweave/config.hpp"
#include "citeweave/metrics.hpp"
#include "citeweave/orchestrator.hpp"

namespace citeweave {

/// dialogue id -> turn index -> raw generator output.
/// JSONL: {"dialogue_id": string, "turn": int, "output": string}
using ScriptTable = std::map<std::string, std::map<std::uint32_t, std::string>>;

ScriptTable parse_script(std::string_view jsonl);
ScriptTable load_script(const std::filesystem::path& path);
std::string serialize_script(const ScriptTable& script);

// ---- cite -------------------------------------------------------------------

struct CitedImage {
  std::uint32_t turn = 0;
  std::string image_id;
  AugmentedDescription description;
};

struct CiteResult {
  std::string dialogue_id;
  double tau = kDefaultTau;
  std::vector<CitedImage> images;  // image-bearing turns, in order
  SimilarityMatrix similarity;

  std::vector<std::uint32_t> citations() const;
};

CiteResult cite_dialogue(const Dialogue& d, const EmbeddingTable& features,
                         const CitationConfig& cfg);
std::vector<CiteResult> cite_dialogues(std::span<const Dialogue> dialogues,
                                       const EmbeddingTable& features, const CitationConfig& cfg,
                                       unsigned workers = 1);

/// {"dialogue_id", "tau", "citations": [...], "descriptions": [{"turn",
/// "image_id", "augmented", "citation"}], "similarity": [[...], ...]}
std::string serialize_cite_result(const CiteResult& r);
CiteResult parse_cite_result(std::string_view json_text, std::size_t line = 0);
std::vector<CiteResult> load_cite_results(const std::filesystem::path& path);

// ---- run --------------------------------------------------------------------

struct TranscriptEntry {
  std::string dialogue_id;
  TurnResult result;
};

/// Runs every scripted turn of every dialogue (all turns 2..n when no script
/// is given, http mode only). One provider suite per dialogue.
std::vector<TranscriptEntry> run_dialogues(std::span<const Dialogue> dialogues,
                                           const ScriptTable& script,
                                           const EmbeddingTable& features, const AppConfig& cfg);

/// Fixed key set; absent values are null. Floats round-trip exactly.
std::string serialize_transcript_entry(const TranscriptEntry& e);
TranscriptEntry parse_transcript_entry(std::string_view json_text, std::size_t line = 0);
std::vector<TranscriptEntry> load_transcript(const std::filesystem::path& path);

// ---- eval -------------------------------------------------------------------

enum class EvalKind { kPairF1, kCiteAcc, kConsistency, kText, kIntent };

EvalKind parse_eval_kind(std::string_view name);
std::string_view eval_kind_name(EvalKind kind);

enum class TextMetric { kBleu1, kBleu2, kRouge1, kRougeL };

TextMetric parse_text_metric(std::string_view name);
std::string_view text_metric_name(TextMetric m);

struct EvalReport {
  std::string metric;
  /// nullopt when no dialogue contributed anything scorable.
  std::optional<double> aggregate;
  std::string json;     // pretty-printed report, trailing newline
  std::string summary;  // one human-readable line
};

EvalReport eval_pair_f1(std::span<const EvalRecord> gold, std::span<const CiteResult> pred);
EvalReport eval_citation_accuracy(std::span<const EvalRecord> gold,
                                  std::span<const TranscriptEntry> transcript);
EvalReport eval_consistency(std::span<const EvalRecord> gold,
                            std::span<const TranscriptEntry> transcript,
                            std::span<const Dialogue> dialogues, const EmbeddingTable& features);
EvalReport eval_text(std::span<const Dialogue> gold, std::span<const TranscriptEntry> transcript,
                     TextMetric metric, bool description_field);
EvalReport eval_intent(std::span<const EvalRecord> gold,
                       std::span<const TranscriptEntry> transcript);

}  // namespace citeweave
