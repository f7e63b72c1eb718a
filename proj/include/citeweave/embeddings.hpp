// Copyright 2026 The citeweave Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include "citeweave/dialogue.hpp"

namespace citeweave {

// Ordered by id so iteration (and anything serialized from it) is stable.
using EmbeddingTable = std::map<std::string, FeatureVector>;

enum class EmbeddingFormat { kJsonl, kFvec };

/// Binary layout:
///   "FVEC" | u32 count | u32 dim | count x (u16 id_len | id bytes | dim x f32)
/// All integers and floats little-endian. An empty table is count=0, dim=0.
inline constexpr std::string_view kFvecMagic = "FVEC";

/// Sniffs the magic bytes; anything else is treated as JSONL.
EmbeddingFormat detect_embedding_format(std::string_view bytes);

EmbeddingTable parse_embeddings_jsonl(std::string_view text);
EmbeddingTable parse_embeddings_fvec(std::string_view bytes);
EmbeddingTable load_embeddings(const std::filesystem::path& path);

std::string encode_embeddings_jsonl(const EmbeddingTable& table);
std::string encode_embeddings_fvec(const EmbeddingTable& table);

/// Lossless JSONL <-> FVEC conversion; the output format follows the output
/// extension (".fvec" is binary, anything else JSONL). Returns the count.
std::size_t convert_embeddings(const std::filesystem::path& in,
                               const std::filesystem::path& out);

}  // namespace citeweave
