// Copyright 2026 The citeweave Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "citeweave/citation.hpp"
#include "citeweave/providers.hpp"

namespace citeweave {

enum class Route { kCustom, kPlain, kNoImage };

std::string_view route_name(Route r);
Route parse_route(std::string_view name);

/// Outcome of one inference turn, with enough provenance to audit routing.
/// route == kCustom iff conditioning is non-empty; route == kNoImage iff no
/// description was generated.
struct TurnResult {
  std::uint32_t turn = 0;
  std::string text;
  std::optional<AugmentedDescription> description;
  std::optional<std::uint32_t> predicted_citation;
  std::vector<std::string> conditioning;
  std::optional<std::string> image_id;
  Route route = Route::kNoImage;
  std::string raw_output;
  /// (image_id, citation) of every history image, in turn order.
  std::vector<std::pair<std::string, std::uint32_t>> history;
  /// Feature of the generated image, as reported by the feature provider.
  std::optional<FeatureVector> image_feature;
  /// Set when the predicted citation is neither in history nor the next
  /// fresh id.
  std::optional<std::string> anomaly;
};

/// Fills in what the providers must supply before citation: captions for
/// images without a description, a principal object where none is
/// annotated, and features for images that resolve neither inline nor in
/// `known`. Returns the completed dialogue and the features keyed the way
/// resolve_feature() looks them up.
std::pair<Dialogue, EmbeddingTable> prepare_history(const Dialogue& context, ProviderSuite& suite,
                                                    const EmbeddingTable& known = {});

/// Runs inference for the turn following `context`: cite the history, frame
/// it, ask the generator, decode any description and route image generation.
TurnResult run_turn(const Dialogue& context, ProviderSuite& suite, const CitationConfig& cfg,
                    const EmbeddingTable& known = {});

/// t2i_custom when `conditioning` is non-empty, else t2i_plain.
std::string route_image_generation(const std::string& description,
                                   std::span<const std::string> conditioning,
                                   ProviderSuite& suite);

/// Teacher-forced inference: for every requested turn t (2 <= t <=
/// turns + 1) runs run_turn on the first t - 1 turns of `d`.
std::vector<TurnResult> run_dialogue(const Dialogue& d, std::span<const std::uint32_t> turns,
                                     ProviderSuite& suite, const CitationConfig& cfg,
                                     const EmbeddingTable& known = {});

}  // namespace citeweave
