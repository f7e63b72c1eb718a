// Copyright 2026 The citeweave Authors
// SPDX-License-Identifier: Apache-2.0

// LLMCite baseline: citation prediction posed to a text model as a
// multiple-choice question over letter-tagged history objects.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "citeweave/dialogue.hpp"
#include "citeweave/providers.hpp"

namespace citeweave {

struct LlmCiteTurn {
  std::uint32_t turn_index = 0;
  std::string text;
  /// Description and its principal-object span, for image-bearing turns.
  std::optional<std::string> description;
  std::optional<Span> object_span;
};

struct LlmCitePrompt {
  std::string prompt;
  /// Option tag -> history turn it stands for, in tag order.
  std::vector<std::pair<std::string, std::uint32_t>> label_map;
  /// Tag of the trailing "none of the above" option.
  std::string none_tag;
};

/// "(a)", ..., "(z)", "(aa)", "(ab)", ... for k = 0, 1, ...
std::string classification_tag(std::size_t k);

/// description[0:object_span.end], the description cut right after its
/// principal object.
std::string truncate_to_object(std::string_view description, Span object_span);

/// Template with {dialogue}, {object} and {options} placeholders. The same
/// text ships as data/llmcite_template.txt.
std::string_view default_llmcite_template();
std::string load_llmcite_template(const std::filesystem::path& path);

/// Tags each history object in order and renders the template. The current
/// turn contributes its text and the truncated description, whose last token
/// is taken as the object to match.
LlmCitePrompt build_llmcite_prompt(std::span<const LlmCiteTurn> history,
                                   std::string_view current_text,
                                   std::string_view current_truncated,
                                   std::string_view tmpl = default_llmcite_template());

/// Maps a model answer to the chosen history turn; nullopt means "none of
/// the above". Throws CodecError when no option tag is recognized.
std::optional<std::uint32_t> decode_llmcite_answer(std::string_view answer,
                                                   const LlmCitePrompt& prompt);

}  // namespace citeweave
