// Copyright 2026 The citeweave Authors
// SPDX-License-Identifier: Apache-2.0

#include "citeweave/tag_codec.hpp"

#include <array>
#include <charconv>

namespace citeweave {

namespace {

enum class Tag { kCiteOpen, kCiteClose, kImgOpen, kImgClose, kTurnEnd };

constexpr std::array<std::pair<Tag, std::string_view>, 5> kTags{{
    {Tag::kCiteOpen, kCiteOpen},
    {Tag::kCiteClose, kCiteClose},
    {Tag::kImgOpen, kImgOpen},
    {Tag::kImgClose, kImgClose},
    {Tag::kTurnEnd, kTurnEnd},
}};

char ascii_lower(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }

bool iequals_at(std::string_view s, std::size_t pos, std::string_view lit) {
  if (s.size() - pos < lit.size()) return false;
  for (std::size_t i = 0; i < lit.size(); ++i)
    if (ascii_lower(s[pos + i]) != ascii_lower(lit[i])) return false;
  return true;
}

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

struct TagHit {
  std::size_t pos = std::string_view::npos;
  Tag tag = Tag::kTurnEnd;
  std::size_t len = 0;

  bool found() const { return pos != std::string_view::npos; }
  std::size_t end() const { return pos + len; }
};

TagHit next_tag(std::string_view s, std::size_t from) {
  for (std::size_t p = s.find('[', from); p != std::string_view::npos; p = s.find('[', p + 1)) {
    for (const auto& [tag, lit] : kTags)
      if (iequals_at(s, p, lit)) return {p, tag, lit.size()};
  }
  return {};
}

std::string_view tag_name(Tag t) {
  for (const auto& [tag, lit] : kTags)
    if (tag == t) return lit;
  return "?";
}

std::uint32_t parse_citation(std::string_view payload) {
  if (payload.empty()) throw CodecError("empty citation payload");
  if (payload.size() > 1 && payload[0] == '0')
    throw CodecError("citation '" + std::string(payload) + "' has leading zeros");
  std::uint64_t v = 0;
  auto [end, ec] = std::from_chars(payload.data(), payload.data() + payload.size(), v);
  if (ec == std::errc::result_out_of_range || (ec == std::errc() && v > kMaxCitation))
    throw CodecError("citation '" + std::string(payload) + "' exceeds 2^31-1");
  if (ec != std::errc() || end != payload.data() + payload.size())
    throw CodecError("citation payload '" + std::string(payload) + "' is not decimal");
  return static_cast<std::uint32_t>(v);
}

void check_plain(std::string_view s, const char* what) {
  if (TagHit hit = next_tag(s, 0); hit.found())
    throw CodecError(std::string(what) + " contains reserved tag " +
                     std::string(s.substr(hit.pos, hit.len)));
}

}  // namespace

bool contains_reserved_tag(std::string_view s) { return next_tag(s, 0).found(); }

void validate(const AugmentedDescription& d) {
  const Span sp = d.object_span;
  if (sp.start >= sp.end || sp.end > d.base.size())
    throw CodecError("object span [" + std::to_string(sp.start) + "," + std::to_string(sp.end) +
                     ") invalid for description of length " + std::to_string(d.base.size()));
  for (std::size_t i = sp.start; i < sp.end; ++i)
    if (is_space(d.base[i])) throw CodecError("object span contains whitespace");
  if (sp.start > 0 && !is_space(d.base[sp.start - 1]))
    throw CodecError("object span does not start at a token boundary");
  if (d.citation > kMaxCitation) throw CodecError("citation exceeds 2^31-1");
  check_plain(d.base, "description");
}

std::string encode_augmented(const AugmentedDescription& d) {
  validate(d);
  std::string out;
  out.reserve(d.base.size() + kCiteOpen.size() + kCiteClose.size() + 10);
  out.append(d.base, 0, d.object_span.end);
  out += kCiteOpen;
  out += std::to_string(d.citation);
  out += kCiteClose;
  out.append(d.base, d.object_span.end);
  return out;
}

AugmentedDescription decode_augmented(std::string_view s) {
  TagHit open, close;
  for (TagHit hit = next_tag(s, 0); hit.found(); hit = next_tag(s, hit.end())) {
    switch (hit.tag) {
      case Tag::kCiteOpen:
        if (open.found()) throw CodecError("multiple [cite] tags in '" + std::string(s) + "'");
        open = hit;
        break;
      case Tag::kCiteClose:
        if (close.found()) throw CodecError("multiple [/cite] tags in '" + std::string(s) + "'");
        close = hit;
        break;
      default:
        throw CodecError("unexpected " + std::string(tag_name(hit.tag)) +
                         " inside description '" + std::string(s) + "'");
    }
  }
  if (!open.found() && !close.found())
    throw CodecError("no citation tag in '" + std::string(s) + "'");
  if (!open.found() || !close.found() || close.pos < open.end())
    throw CodecError("unbalanced citation tags in '" + std::string(s) + "'");

  AugmentedDescription d;
  d.citation = parse_citation(s.substr(open.end(), close.pos - open.end()));
  std::size_t start = open.pos;
  while (start > 0 && !is_space(s[start - 1])) --start;
  if (start == open.pos)
    throw CodecError("citation tag has no preceding object word in '" + std::string(s) + "'");
  d.object_span = {start, open.pos};
  d.base.assign(s.substr(0, open.pos));
  d.base.append(s.substr(close.end()));
  return d;
}

std::size_t FramedSequence::turn_count() const {
  std::size_t n = 0;
  for (const Element& e : elements) n += std::holds_alternative<TurnEnd>(e) ? 1 : 0;
  return n;
}

FramedSequence frame_dialogue(const Dialogue& d, std::span<const std::uint32_t> citations) {
  if (citations.size() != d.image_count())
    throw ValidationError("dialogue " + d.id + ": " + std::to_string(citations.size()) +
                          " citations for " + std::to_string(d.image_count()) + " images");
  FramedSequence seq;
  std::size_t k = 0;
  for (const Turn& t : d.turns) {
    seq.elements.emplace_back(TextSegment{t.text});
    if (t.image) {
      if (!t.image->object)
        throw ValidationError("dialogue " + d.id + ": turn " + std::to_string(t.index) +
                              " image has no principal object");
      AugmentedDescription ad{t.image->description, t.image->object->span, citations[k++]};
      validate(ad);
      seq.elements.emplace_back(DescriptionSegment{std::move(ad)});
    }
    seq.elements.emplace_back(TurnEnd{});
  }
  return seq;
}

std::string render(const FramedSequence& seq) {
  std::string out;
  for (const Element& e : seq.elements) {
    if (const auto* text = std::get_if<TextSegment>(&e)) {
      check_plain(text->text, "text segment");
      out += text->text;
    } else if (const auto* desc = std::get_if<DescriptionSegment>(&e)) {
      out += kImgOpen;
      out += encode_augmented(desc->description);
      out += kImgClose;
    } else {
      out += kTurnEnd;
    }
  }
  return out;
}

FramedSequence parse_framed(std::string_view s) {
  FramedSequence seq;
  std::size_t pos = 0;
  while (pos < s.size()) {
    TagHit hit = next_tag(s, pos);
    if (!hit.found()) throw CodecError("trailing text without [EOT]");
    seq.elements.emplace_back(TextSegment{std::string(s.substr(pos, hit.pos - pos))});
    if (hit.tag == Tag::kImgOpen) {
      TagHit close = next_tag(s, hit.end());
      while (close.found() && (close.tag == Tag::kCiteOpen || close.tag == Tag::kCiteClose))
        close = next_tag(s, close.end());
      if (!close.found() || close.tag != Tag::kImgClose)
        throw CodecError("[IMG] block not closed by [/IMG]");
      seq.elements.emplace_back(
          DescriptionSegment{decode_augmented(s.substr(hit.end(), close.pos - hit.end()))});
      hit = next_tag(s, close.end());
      if (!hit.found() || hit.pos != close.end() || hit.tag != Tag::kTurnEnd)
        throw CodecError("[/IMG] must be followed directly by [EOT]");
    } else if (hit.tag != Tag::kTurnEnd) {
      throw CodecError("unexpected " + std::string(tag_name(hit.tag)) + " in text segment");
    }
    seq.elements.emplace_back(TurnEnd{});
    pos = hit.end();
  }
  return seq;
}

TurnOutput parse_turn_output(std::string_view raw) {
  TurnOutput out;
  TagHit hit = next_tag(raw, 0);
  out.text.assign(raw.substr(0, hit.found() ? hit.pos : raw.size()));
  if (!hit.found()) return out;

  if (hit.tag == Tag::kImgOpen) {
    TagHit close = next_tag(raw, hit.end());
    while (close.found() && (close.tag == Tag::kCiteOpen || close.tag == Tag::kCiteClose))
      close = next_tag(raw, close.end());
    if (!close.found() || close.tag != Tag::kImgClose)
      throw CodecError("[IMG] block not closed by [/IMG]");
    out.description.emplace(raw.substr(hit.end(), close.pos - hit.end()));
    hit = next_tag(raw, close.end());
    if (!hit.found()) {
      if (raw.substr(close.end()).find_first_not_of(" \t\r\n") != std::string_view::npos)
        throw CodecError("unexpected text after [/IMG]");
      return out;
    }
    if (hit.tag != Tag::kTurnEnd ||
        raw.substr(close.end(), hit.pos - close.end()).find_first_not_of(" \t\r\n") !=
            std::string_view::npos)
      throw CodecError("[/IMG] must be followed by [EOT]");
  } else if (hit.tag != Tag::kTurnEnd) {
    throw CodecError("unexpected " + std::string(tag_name(hit.tag)) + " in generator output");
  }
  out.terminated = true;
  if (raw.substr(hit.end()).find_first_not_of(" \t\r\n") != std::string_view::npos)
    throw CodecError("unexpected content after [EOT]");
  return out;
}

}  // namespace citeweave
