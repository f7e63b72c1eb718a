// Copyright 2026 The citeweave Authors
// SPDX-License-Identifier: Apache-2.0

#include "citeweave/llmcite.hpp"

#include <algorithm>
#include <cctype>

namespace citeweave {

namespace {

constexpr std::string_view kDefaultTemplate =
    R"(Below is a conversation between two speakers. Every image in the conversation has been replaced by a textual description. In the earlier descriptions, the main object is followed by a letter tag such as (a), (b) or (c).

Conversation:
{dialogue}

The last description ends with the object "{object}". Decide which tagged object in the earlier descriptions is exactly the same object as "{object}" (the same individual, not merely the same kind of thing). If none of them is, choose "none of the above".

Options:
{options}

Answer with the tag of exactly one option.
)";

void replace_all(std::string& s, std::string_view from, std::string_view to) {
  for (std::size_t pos = s.find(from); pos != std::string::npos;
       pos = s.find(from, pos + to.size()))
    s.replace(pos, from.size(), to);
}

std::string_view last_token(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  std::size_t start = s.size();
  while (start > 0 && !std::isspace(static_cast<unsigned char>(s[start - 1]))) --start;
  return s.substr(start);
}

}  // namespace

std::string classification_tag(std::size_t k) {
  std::string letters;
  std::size_t n = k + 1;  // bijective base-26
  while (n > 0) {
    --n;
    letters.insert(letters.begin(), static_cast<char>('a' + n % 26));
    n /= 26;
  }
  return "(" + letters + ")";
}

std::string truncate_to_object(std::string_view description, Span object_span) {
  if (object_span.end > description.size() || object_span.start >= object_span.end)
    throw ValidationError("object span outside description");
  return std::string(description.substr(0, object_span.end));
}

std::string_view default_llmcite_template() { return kDefaultTemplate; }

std::string load_llmcite_template(const std::filesystem::path& path) {
  std::string t = read_file(path);
  for (std::string_view key : {"{dialogue}", "{object}", "{options}"})
    if (t.find(key) == std::string::npos)
      throw ValidationError("LLMCite template " + path.string() + " lacks placeholder " +
                            std::string(key));
  return t;
}

LlmCitePrompt build_llmcite_prompt(std::span<const LlmCiteTurn> history,
                                   std::string_view current_text,
                                   std::string_view current_truncated, std::string_view tmpl) {
  LlmCitePrompt out;
  std::string dialogue;
  std::string options;
  std::uint32_t last_turn = 0;
  for (const LlmCiteTurn& t : history) {
    last_turn = std::max(last_turn, t.turn_index);
    const std::string label = "Turn " + std::to_string(t.turn_index);
    dialogue += label + ": " + t.text + "\n";
    if (!t.description) continue;
    if (!t.object_span) throw ValidationError(label + ": description without principal object");
    const Span sp = *t.object_span;
    if (sp.end > t.description->size() || sp.start >= sp.end)
      throw ValidationError(label + ": object span outside description");
    const std::string tag = classification_tag(out.label_map.size());
    std::string tagged = *t.description;
    tagged.insert(sp.end, " " + tag);
    dialogue += label + " image: " + tagged + "\n";
    options += tag + " " + t.description->substr(sp.start, sp.length()) + " (turn " +
               std::to_string(t.turn_index) + ")\n";
    out.label_map.emplace_back(tag, t.turn_index);
  }
  const std::string current = "Turn " + std::to_string(last_turn + 1);
  dialogue += current + ": " + std::string(current_text) + "\n";
  dialogue += current + " image: " + std::string(current_truncated);

  out.none_tag = classification_tag(out.label_map.size());
  options += out.none_tag + " none of the above";

  out.prompt.assign(tmpl);
  replace_all(out.prompt, "{dialogue}", dialogue);
  replace_all(out.prompt, "{object}", last_token(current_truncated));
  replace_all(out.prompt, "{options}", options);
  return out;
}

std::optional<std::uint32_t> decode_llmcite_answer(std::string_view answer,
                                                   const LlmCitePrompt& prompt) {
  auto lookup = [&](const std::string& tag) -> std::optional<std::optional<std::uint32_t>> {
    if (tag == prompt.none_tag) return std::optional<std::uint32_t>{};
    for (const auto& [t, turn] : prompt.label_map)
      if (t == tag) return std::optional<std::uint32_t>{turn};
    return std::nullopt;
  };
  for (std::size_t p = answer.find('('); p != std::string_view::npos; p = answer.find('(', p + 1)) {
    std::size_t q = p + 1;
    std::string tag = "(";
    while (q < answer.size() && std::isalpha(static_cast<unsigned char>(answer[q])))
      tag.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(answer[q++]))));
    if (q >= answer.size() || answer[q] != ')' || tag.size() == 1) continue;
    tag.push_back(')');
    if (auto hit = lookup(tag)) return *hit;
  }
  std::string bare;
  for (char c : answer)
    if (!std::isspace(static_cast<unsigned char>(c)))
      bare.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (auto hit = lookup("(" + bare + ")")) return *hit;
  throw CodecError("no option tag recognized in answer '" + std::string(answer) + "'");
}

}  // namespace citeweave
