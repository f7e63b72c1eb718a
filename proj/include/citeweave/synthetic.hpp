// Copyright 2026 The citeweave Authors
// SPDX-License-Identifier: Apache-2.0

// Seeded synthetic dialogues whose gold citations are recoverable from the
// features: images of one labeled object are ConstructedGeometry members of
// one group (pairwise cosine at least 0.9), images of different objects come from
// different groups (near 0.1). Object words repeat across distinct objects on
// purpose, so a word-keyed clustering would get them wrong.

#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "citeweave/dialogue.hpp"
#include "citeweave/embeddings.hpp"
#include "citeweave/pipeline.hpp"

namespace citeweave {

struct SyntheticDataset {
  std::vector<Dialogue> dialogues;
  EmbeddingTable embeddings;
  std::vector<EvalRecord> labels;
  /// Oracle generator outputs: every turn t >= 2 reproduces the gold turn,
  /// including its gold citation.
  ScriptTable script;
};

/// `count` dialogues of 4 to 7 turns, each with at least three images, at
/// least one repeated object and at least two distinct objects.
SyntheticDataset make_synthetic(std::uint64_t seed, std::size_t count = 10, std::size_t dim = 64);

/// Writes dialogues.jsonl, embeddings.jsonl, labels.jsonl and script.jsonl
/// into `dir`, creating it if needed.
void write_synthetic(const std::filesystem::path& dir, const SyntheticDataset& data);

}  // namespace citeweave
