// Copyright 2026 The citeweave Authors
// SPDX-License-Identifier: Apache-2.0

#include "citeweave/embeddings.hpp"

#include <bit>
#include <cstring>
#include <limits>

#include "json_types.hpp"

namespace citeweave {

using detail::FloatJson;

namespace {

class ByteReader {
 public:
  explicit ByteReader(std::string_view bytes) : bytes_(bytes) {}

  std::string_view take(std::size_t n, const char* what) {
    if (bytes_.size() - pos_ < n)
      throw ParseError(std::string("FVEC truncated while reading ") + what);
    std::string_view out = bytes_.substr(pos_, n);
    pos_ += n;
    return out;
  }

  template <typename UInt>
  UInt uint_le(const char* what) {
    std::string_view b = take(sizeof(UInt), what);
    UInt v = 0;
    for (std::size_t i = 0; i < sizeof(UInt); ++i)
      v |= static_cast<UInt>(static_cast<unsigned char>(b[i])) << (8 * i);
    return v;
  }

  float f32_le(const char* what) { return std::bit_cast<float>(uint_le<std::uint32_t>(what)); }

  bool done() const { return pos_ == bytes_.size(); }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

template <typename UInt>
void put_uint_le(std::string& out, UInt v) {
  for (std::size_t i = 0; i < sizeof(UInt); ++i)
    out.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
}

void insert_checked(EmbeddingTable& table, std::string id, FeatureVector f,
                    std::size_t& dim, const std::string& where) {
  if (table.empty() && dim == 0) dim = f.dim();
  if (f.dim() != dim)
    throw ValidationError(where + ": dimension mismatch for '" + id + "' (got " +
                          std::to_string(f.dim()) + ", expected " + std::to_string(dim) + ")");
  validate(f, where + " '" + id + "'");
  if (!table.emplace(id, std::move(f)).second)
    throw ValidationError(where + ": duplicate id '" + id + "'");
}

}  // namespace

EmbeddingFormat detect_embedding_format(std::string_view bytes) {
  return bytes.substr(0, kFvecMagic.size()) == kFvecMagic ? EmbeddingFormat::kFvec
                                                          : EmbeddingFormat::kJsonl;
}

EmbeddingTable parse_embeddings_jsonl(std::string_view text) {
  EmbeddingTable table;
  std::size_t dim = 0;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    FloatJson j;
    try {
      j = FloatJson::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(std::string("malformed JSON: ") + e.what(), line_no);
    }
    auto id = j.find("id");
    auto vec = j.find("vector");
    if (!j.is_object() || id == j.end() || !id->is_string() || vec == j.end() ||
        !vec->is_array())
      throw ParseError("expected {\"id\": string, \"vector\": [number, ...]}", line_no);
    FeatureVector f;
    for (const auto& x : *vec) {
      if (!x.is_number()) throw ParseError("vector entries must be numbers", line_no);
      f.values.push_back(x.get<float>());
    }
    try {
      insert_checked(table, id->get<std::string>(), std::move(f), dim, "embeddings");
    } catch (const ValidationError& e) {
      throw ParseError(e.what(), line_no);
    }
  }
  return table;
}

EmbeddingTable parse_embeddings_fvec(std::string_view bytes) {
  ByteReader in(bytes);
  if (in.take(kFvecMagic.size(), "magic") != kFvecMagic) throw ParseError("not an FVEC file");
  const auto count = in.uint_le<std::uint32_t>("count");
  const auto dim = in.uint_le<std::uint32_t>("dim");
  if (count > 0 && dim == 0) throw ParseError("FVEC with vectors must have dim >= 1");
  EmbeddingTable table;
  std::size_t seen_dim = dim;
  for (std::uint32_t r = 0; r < count; ++r) {
    const auto id_len = in.uint_le<std::uint16_t>("id length");
    std::string id(in.take(id_len, "id"));
    FeatureVector f;
    f.values.resize(dim);
    for (auto& v : f.values) v = in.f32_le("vector");
    insert_checked(table, std::move(id), std::move(f), seen_dim,
                   "FVEC record " + std::to_string(r));
  }
  if (!in.done()) throw ParseError("FVEC has trailing bytes after declared records");
  return table;
}

EmbeddingTable load_embeddings(const std::filesystem::path& path) {
  std::string bytes = read_file(path);
  return detect_embedding_format(bytes) == EmbeddingFormat::kFvec ? parse_embeddings_fvec(bytes)
                                                                  : parse_embeddings_jsonl(bytes);
}

std::string encode_embeddings_jsonl(const EmbeddingTable& table) {
  std::string out;
  for (const auto& [id, f] : table) {
    FloatJson j = FloatJson::object();
    j["id"] = id;
    j["vector"] = f.values;
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::string encode_embeddings_fvec(const EmbeddingTable& table) {
  const std::size_t dim = table.empty() ? 0 : table.begin()->second.dim();
  if (table.size() > std::numeric_limits<std::uint32_t>::max() ||
      dim > std::numeric_limits<std::uint32_t>::max())
    throw ValidationError("embedding table too large for FVEC");
  std::string out(kFvecMagic);
  put_uint_le<std::uint32_t>(out, static_cast<std::uint32_t>(table.size()));
  put_uint_le<std::uint32_t>(out, static_cast<std::uint32_t>(dim));
  for (const auto& [id, f] : table) {
    if (f.dim() != dim) throw ValidationError("dimension mismatch for '" + id + "'");
    if (id.size() > std::numeric_limits<std::uint16_t>::max())
      throw ValidationError("embedding id too long for FVEC: '" + id.substr(0, 32) + "...'");
    put_uint_le<std::uint16_t>(out, static_cast<std::uint16_t>(id.size()));
    out += id;
    for (float v : f.values) put_uint_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(v));
  }
  return out;
}

std::size_t convert_embeddings(const std::filesystem::path& in,
                               const std::filesystem::path& out) {
  std::string bytes = read_file(in);
  EmbeddingTable table;
  if (detect_embedding_format(bytes) == EmbeddingFormat::kFvec) {
    table = parse_embeddings_fvec(bytes);
  } else {
    // A JSONL file must be empty or start with a JSON object.
    auto first = bytes.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && bytes[first] != '{')
      throw ParseError("cannot detect embedding format of " + in.string());
    table = parse_embeddings_jsonl(bytes);
  }
  const bool to_fvec = out.extension() == ".fvec";
  write_file_atomic(out, to_fvec ? encode_embeddings_fvec(table) : encode_embeddings_jsonl(table));
  return table.size();
}

}  // namespace citeweave
