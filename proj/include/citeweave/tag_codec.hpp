// Copyright 2026 The citeweave Authors
// SPDX-License-Identifier: Apache-2.0

// Citation tags and dialogue framing.
//
// Wire format, byte-exact:
//
//   augmented description   base[0:end] "[cite]" <decimal> "[/cite]" base[end:]
//   framed turn             <text> [ "[IMG]" <augmented description> "[/IMG]" ] "[EOT]"
//   framed dialogue         concatenation of framed turns
//
// Emission is canonical: lowercase cite tags, uppercase IMG/EOT tags, citation
// in decimal without leading zeros. Parsing is case-insensitive for every tag.

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "citeweave/dialogue.hpp"

namespace citeweave {

inline constexpr std::string_view kCiteOpen = "[cite]";
inline constexpr std::string_view kCiteClose = "[/cite]";
inline constexpr std::string_view kImgOpen = "[IMG]";
inline constexpr std::string_view kImgClose = "[/IMG]";
inline constexpr std::string_view kTurnEnd = "[EOT]";

inline constexpr std::uint32_t kMaxCitation = 2147483647u;

/// A description u with citation c bound to the object word at object_span.
///
/// Invariants (checked by validate()):
///  - object_span is a whole whitespace-delimited token prefix: it starts at 0
///    or right after whitespace, is non-empty and contains no whitespace;
///  - base contains no reserved tag, in any letter case;
///  - citation <= kMaxCitation.
struct AugmentedDescription {
  std::string base;
  Span object_span;
  std::uint32_t citation = 0;

  std::string_view object() const {
    return std::string_view(base).substr(object_span.start, object_span.length());
  }
  bool operator==(const AugmentedDescription&) const = default;
};

void validate(const AugmentedDescription& d);

std::string encode_augmented(const AugmentedDescription& d);

/// Inverse of encode_augmented. The object span is the maximal run of
/// non-whitespace characters immediately before the opening cite tag.
AugmentedDescription decode_augmented(std::string_view s);

/// True if `s` contains any reserved tag (case-insensitive).
bool contains_reserved_tag(std::string_view s);

struct TextSegment {
  std::string text;
  bool operator==(const TextSegment&) const = default;
};
struct DescriptionSegment {
  AugmentedDescription description;
  bool operator==(const DescriptionSegment&) const = default;
};
struct TurnEnd {
  bool operator==(const TurnEnd&) const = default;
};

using Element = std::variant<TextSegment, DescriptionSegment, TurnEnd>;

/// Canonical shape: per turn, TextSegment, optional DescriptionSegment,
/// TurnEnd. The text segment is always present, possibly empty.
struct FramedSequence {
  std::vector<Element> elements;

  std::size_t turn_count() const;
  bool operator==(const FramedSequence&) const = default;
};

/// One canonical turn group per dialogue turn. `citations` has one entry per
/// image-bearing turn; each such turn must carry an ObjectObservation.
FramedSequence frame_dialogue(const Dialogue& d, std::span<const std::uint32_t> citations);

std::string render(const FramedSequence& seq);

/// Inverse of render for canonical sequences.
FramedSequence parse_framed(std::string_view s);

/// A single generator completion: text, optionally one [IMG] block holding an
/// augmented description (still encoded), optionally a trailing [EOT].
struct TurnOutput {
  std::string text;
  std::optional<std::string> description;
  bool terminated = false;
};

TurnOutput parse_turn_output(std::string_view raw);

}  // namespace citeweave
