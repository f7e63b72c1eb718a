// Copyright 2026 The citeweave Authors
// SPDX-License-Identifier: Apache-2.0

#include "citeweave/dialogue.hpp"

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json_types.hpp"

namespace citeweave {

using detail::FloatJson;
using detail::parse_json_line;
using detail::parse_lines;

namespace {

[[noreturn]] void fail(const std::string& dialogue_id, const std::string& field,
                       const std::string& why) {
  throw ValidationError("dialogue " + dialogue_id + ": " + field + ": " + why);
}

const FloatJson* find(const FloatJson& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return nullptr;
  return &*it;
}

// Typed field accessors. Schema violations become ParseErrors so the caller
// sees the line number rather than a bare nlohmann exception.
std::string get_string(const FloatJson& obj, const char* key, std::size_t line,
                       const std::string& ctx) {
  const FloatJson* v = find(obj, key);
  if (!v || !v->is_string())
    throw ParseError(ctx + "." + key + ": expected string", line);
  return v->get<std::string>();
}

std::optional<std::string> get_opt_string(const FloatJson& obj, const char* key,
                                          std::size_t line,
                                          const std::string& ctx) {
  if (!find(obj, key)) return std::nullopt;
  return get_string(obj, key, line, ctx);
}

std::uint64_t get_uint(const FloatJson& v, std::size_t line,
                       const std::string& ctx) {
  if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() &&
                                 v.get<std::int64_t>() < 0))
    throw ParseError(ctx + ": expected non-negative integer", line);
  return v.get<std::uint64_t>();
}

std::vector<float> get_floats(const FloatJson& v, std::size_t line,
                              const std::string& ctx) {
  if (!v.is_array()) throw ParseError(ctx + ": expected array of numbers", line);
  std::vector<float> out;
  out.reserve(v.size());
  for (const auto& x : v) {
    if (!x.is_number()) throw ParseError(ctx + ": expected number", line);
    out.push_back(x.get<float>());
  }
  return out;
}

ObjectObservation parse_object(const FloatJson& j, std::size_t line,
                               const std::string& ctx) {
  if (!j.is_object()) throw ParseError(ctx + ": expected object", line);
  ObjectObservation o;
  o.word = get_string(j, "word", line, ctx);
  const FloatJson* span = find(j, "span");
  if (!span || !span->is_array() || span->size() != 2)
    throw ParseError(ctx + ".span: expected [start, end]", line);
  o.span.start = get_uint((*span)[0], line, ctx + ".span");
  o.span.end = get_uint((*span)[1], line, ctx + ".span");
  if (const FloatJson* f = find(j, "feature"))
    o.feature = FeatureVector{get_floats(*f, line, ctx + ".feature")};
  if (const FloatJson* b = find(j, "box")) {
    auto vals = get_floats(*b, line, ctx + ".box");
    if (vals.size() != 4) throw ParseError(ctx + ".box: expected 4 numbers", line);
    o.box = std::array<float, 4>{vals[0], vals[1], vals[2], vals[3]};
  }
  o.mask_ref = get_opt_string(j, "mask_ref", line, ctx);
  return o;
}

ImageRecord parse_image(const FloatJson& j, std::size_t line,
                        const std::string& ctx) {
  if (!j.is_object()) throw ParseError(ctx + ": expected object", line);
  ImageRecord img;
  img.image_id = get_string(j, "image_id", line, ctx);
  img.description = get_string(j, "description", line, ctx);
  if (const FloatJson* o = find(j, "object"))
    img.object = parse_object(*o, line, ctx + ".object");
  img.embedding_id = get_opt_string(j, "embedding_id", line, ctx);
  return img;
}

FloatJson to_json(const ObjectObservation& o) {
  FloatJson j = FloatJson::object();
  j["word"] = o.word;
  j["span"] = {o.span.start, o.span.end};
  if (o.feature) j["feature"] = o.feature->values;
  if (o.box) j["box"] = *o.box;
  if (o.mask_ref) j["mask_ref"] = *o.mask_ref;
  return j;
}

FloatJson to_json(const ImageRecord& img) {
  FloatJson j = FloatJson::object();
  j["image_id"] = img.image_id;
  j["description"] = img.description;
  if (img.object) j["object"] = to_json(*img.object);
  if (img.embedding_id) j["embedding_id"] = *img.embedding_id;
  return j;
}

}  // namespace

void validate(const FeatureVector& f, std::string_view what) {
  if (f.values.empty())
    throw ValidationError(std::string(what) + ": empty vector");
  bool nonzero = false;
  for (float v : f.values) {
    if (!std::isfinite(v))
      throw ValidationError(std::string(what) + ": non-finite value");
    nonzero = nonzero || v != 0.0f;
  }
  if (!nonzero) throw ValidationError(std::string(what) + ": zero vector");
}

std::size_t Dialogue::image_count() const {
  return static_cast<std::size_t>(std::count_if(
      turns.begin(), turns.end(), [](const Turn& t) { return t.image.has_value(); }));
}

void validate(const Dialogue& d) {
  if (d.id.empty()) throw ValidationError("dialogue with empty id");
  if (d.turns.empty()) fail(d.id, "turns", "must be non-empty");
  for (std::size_t i = 0; i < d.turns.size(); ++i) {
    const Turn& t = d.turns[i];
    const std::string field = "turns[" + std::to_string(i) + "]";
    if (t.index != i + 1)
      fail(d.id, field + ".index",
           "expected " + std::to_string(i + 1) + ", got " + std::to_string(t.index));
    if (t.text.empty() && !t.image) fail(d.id, field + ".text", "empty text without image");
    if (!t.image) continue;
    const ImageRecord& img = *t.image;
    if (img.image_id.empty()) fail(d.id, field + ".image.image_id", "empty");
    if (!img.object) continue;
    const ObjectObservation& o = *img.object;
    const std::string of = field + ".image.object";
    if (o.span.start >= o.span.end) fail(d.id, of + ".span", "start must be < end");
    if (o.span.end > img.description.size())
      fail(d.id, of + ".span", "outside description bounds");
    if (img.description.compare(o.span.start, o.span.length(), o.word) != 0)
      fail(d.id, of + ".word", "span text '" +
                                   img.description.substr(o.span.start, o.span.length()) +
                                   "' does not equal '" + o.word + "'");
    if (o.box) {
      const auto& b = *o.box;
      for (float c : b)
        if (!(c >= 0.0f && c <= 1.0f)) fail(d.id, of + ".box", "coordinate outside [0,1]");
      if (b[0] > b[2] || b[1] > b[3]) fail(d.id, of + ".box", "coordinates not ordered");
    }
    if (o.feature) {
      try {
        validate(*o.feature, "feature");
      } catch (const ValidationError& e) {
        fail(d.id, of + ".feature", e.what());
      }
    }
  }
}

Dialogue parse_dialogue(std::string_view json_text, std::size_t line) {
  FloatJson j = parse_json_line(json_text, line);
  if (!j.is_object()) throw ParseError("expected a JSON object", line);
  Dialogue d;
  d.id = get_string(j, "id", line, "dialogue");
  const FloatJson* turns = find(j, "turns");
  if (!turns || !turns->is_array())
    throw ParseError("dialogue " + d.id + ".turns: expected array", line);
  for (std::size_t i = 0; i < turns->size(); ++i) {
    const FloatJson& tj = (*turns)[i];
    const std::string ctx = "dialogue " + d.id + ".turns[" + std::to_string(i) + "]";
    if (!tj.is_object()) throw ParseError(ctx + ": expected object", line);
    Turn t;
    const FloatJson* idx = find(tj, "index");
    if (!idx) throw ParseError(ctx + ".index: missing", line);
    t.index = static_cast<std::uint32_t>(get_uint(*idx, line, ctx + ".index"));
    std::string speaker = get_string(tj, "speaker", line, ctx);
    if (speaker == "A") {
      t.speaker = Speaker::kA;
    } else if (speaker == "B") {
      t.speaker = Speaker::kB;
    } else {
      throw ParseError(ctx + ".speaker: expected \"A\" or \"B\"", line);
    }
    t.text = get_string(tj, "text", line, ctx);
    if (const FloatJson* img = find(tj, "image")) t.image = parse_image(*img, line, ctx + ".image");
    d.turns.push_back(std::move(t));
  }
  validate(d);
  return d;
}

std::string serialize_dialogue(const Dialogue& d) {
  FloatJson j = FloatJson::object();
  j["id"] = d.id;
  FloatJson turns = FloatJson::array();
  for (const Turn& t : d.turns) {
    FloatJson tj = FloatJson::object();
    tj["index"] = t.index;
    tj["speaker"] = t.speaker == Speaker::kA ? "A" : "B";
    tj["text"] = t.text;
    if (t.image) tj["image"] = to_json(*t.image);
    turns.push_back(std::move(tj));
  }
  j["turns"] = std::move(turns);
  return j.dump();
}

std::vector<Dialogue> parse_dialogues(std::string_view jsonl) {
  return parse_lines<Dialogue>(jsonl, parse_dialogue);
}

std::vector<Dialogue> load_dialogues(const std::filesystem::path& path) {
  return parse_dialogues(read_file(path));
}

bool is_valid_labeling(std::span<const std::uint32_t> labels) {
  std::uint32_t next = 0;
  for (std::uint32_t c : labels) {
    if (c > next) return false;
    if (c == next) ++next;
  }
  return true;
}

std::vector<std::uint32_t> parse_mdic_labels(std::string_view raw) {
  std::vector<std::uint32_t> out;
  auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
  auto trim = [&](std::string_view s) {
    while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
    return s;
  };
  if (trim(raw).empty()) return out;
  std::size_t pos = 0;
  while (true) {
    std::size_t comma = raw.find(',', pos);
    std::string_view tok = trim(raw.substr(pos, comma == std::string_view::npos
                                                    ? std::string_view::npos
                                                    : comma - pos));
    std::uint32_t v = 0;
    auto [end, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (tok.empty() || ec != std::errc() || end != tok.data() + tok.size())
      throw ParseError("citation label '" + std::string(tok) + "' is not a non-negative integer");
    out.push_back(v);
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  if (!is_valid_labeling(out))
    throw ValidationError("citation labels '" + std::string(raw) +
                          "' violate first-occurrence order (new labels must appear as 0,1,2,...)");
  return out;
}

std::string format_mdic_labels(std::span<const std::uint32_t> labels) {
  std::string out;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(labels[i]);
  }
  return out;
}

EvalRecord parse_eval_record(std::string_view json_text, std::size_t line) {
  FloatJson j = parse_json_line(json_text, line);
  if (!j.is_object()) throw ParseError("expected a JSON object", line);
  EvalRecord r;
  r.dialogue_id = get_string(j, "dialogue_id", line, "label");
  const std::string ctx = "label " + r.dialogue_id;
  try {
    r.gold_citations = parse_mdic_labels(get_string(j, "citations", line, ctx));
  } catch (const Error& e) {
    throw ParseError(ctx + ".citations: " + e.what(), line);
  }
  if (const FloatJson* intent = find(j, "image_intent")) {
    if (!intent->is_array()) throw ParseError(ctx + ".image_intent: expected array", line);
    for (const auto& b : *intent) {
      if (!b.is_boolean()) throw ParseError(ctx + ".image_intent: expected booleans", line);
      r.image_intent.push_back(b.get<bool>());
    }
  }
  return r;
}

std::string serialize_eval_record(const EvalRecord& r) {
  FloatJson j = FloatJson::object();
  j["dialogue_id"] = r.dialogue_id;
  j["citations"] = format_mdic_labels(r.gold_citations);
  FloatJson intent = FloatJson::array();
  for (bool b : r.image_intent) intent.push_back(b);
  j["image_intent"] = std::move(intent);
  return j.dump();
}

std::vector<EvalRecord> load_eval_records(const std::filesystem::path& path) {
  return parse_lines<EvalRecord>(read_file(path), parse_eval_record);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  static std::atomic<unsigned> counter{0};
  std::filesystem::path tmp = path;
  tmp += ".tmp-" + std::to_string(::getpid()) + "-" + std::to_string(counter++);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw UsageError("cannot write " + path.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw UsageError("write failed for " + path.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw UsageError("cannot rename into " + path.string());
  }
}

}  // namespace citeweave
