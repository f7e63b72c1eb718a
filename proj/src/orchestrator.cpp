// Copyright 2026 The citeweave Authors
// SPDX-License-Identifier: Apache-2.0

#include "citeweave/orchestrator.hpp"

#include <algorithm>

namespace citeweave {

namespace {

// Runs a provider call, converting foreign exceptions into a ProviderError
// naming the role. citeweave errors pass through unchanged.
template <typename F>
auto call_provider(const char* role, Provider* p, F&& f) -> decltype(f()) {
  if (!p) throw ProviderError(role, "not configured");
  try {
    return f();
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw ProviderError(role, e.what());
  }
}

}  // namespace

std::string_view route_name(Route r) {
  switch (r) {
    case Route::kCustom: return "custom";
    case Route::kPlain: return "plain";
    case Route::kNoImage: return "none";
  }
  return "none";
}

Route parse_route(std::string_view name) {
  if (name == "custom") return Route::kCustom;
  if (name == "plain") return Route::kPlain;
  if (name == "none") return Route::kNoImage;
  throw ParseError("unknown route '" + std::string(name) + "'");
}

std::pair<Dialogue, EmbeddingTable> prepare_history(const Dialogue& context, ProviderSuite& suite,
                                                    const EmbeddingTable& known) {
  Dialogue d = context;
  EmbeddingTable features;
  for (Turn& t : d.turns) {
    if (!t.image) continue;
    ImageRecord& img = *t.image;
    if (img.description.empty())
      img.description = call_provider("captioner", suite.captioner.get(),
                                      [&] { return suite.captioner->caption(img.image_id); });
    if (!img.object) {
      ObjectWord ow = extract_principal_object(img.description);
      img.object = ObjectObservation{ow.word, ow.span, std::nullopt, std::nullopt, std::nullopt};
    }
    if (img.object->feature) continue;
    const std::string key = img.embedding_id.value_or(img.image_id);
    if (features.count(key)) continue;
    if (const FeatureVector* f = resolve_feature(img, known)) {
      features.emplace(key, *f);
      continue;
    }
    FeatureVector f = call_provider("feature_provider", suite.feature_provider.get(), [&] {
      return suite.feature_provider->feature(img.image_id, img.object->word);
    });
    validate(f, "feature for image '" + img.image_id + "'");
    features.emplace(key, std::move(f));
  }
  validate(d);
  return {std::move(d), std::move(features)};
}

std::string route_image_generation(const std::string& description,
                                   std::span<const std::string> conditioning,
                                   ProviderSuite& suite) {
  if (description.empty()) throw ValidationError("image description is empty");
  if (!conditioning.empty())
    return call_provider("t2i_custom", suite.t2i_custom.get(), [&] {
      return suite.t2i_custom->generate(description, conditioning);
    });
  return call_provider("t2i_plain", suite.t2i_plain.get(),
                       [&] { return suite.t2i_plain->generate(description); });
}

TurnResult run_turn(const Dialogue& context, ProviderSuite& suite, const CitationConfig& cfg,
                    const EmbeddingTable& known) {
  if (context.turns.empty()) throw ValidationError("run_turn needs a non-empty context");
  auto [history, features] = prepare_history(context, suite, known);
  const std::vector<AugmentedDescription> cited = augment_dialogue(history, features, cfg);

  TurnResult r;
  r.turn = static_cast<std::uint32_t>(history.turns.size() + 1);
  std::vector<std::uint32_t> citations;
  std::size_t k = 0;
  for (const Turn& t : history.turns) {
    if (!t.image) continue;
    citations.push_back(cited[k].citation);
    r.history.emplace_back(t.image->image_id, cited[k].citation);
    ++k;
  }

  const FramedSequence framed = frame_dialogue(history, citations);
  r.raw_output = call_provider("generator", suite.generator.get(),
                               [&] { return suite.generator->complete(framed); });

  TurnOutput out;
  try {
    out = parse_turn_output(r.raw_output);
    r.text = out.text;
    if (out.description) r.description = decode_augmented(*out.description);
  } catch (const CodecError& e) {
    throw CodecError(std::string(e.what()) + " [raw generator output: " + r.raw_output + "]");
  }
  if (!r.description) return r;

  const std::uint32_t c = r.description->citation;
  r.predicted_citation = c;
  r.conditioning = select_conditioning_images(r.history, c);
  r.route = r.conditioning.empty() ? Route::kPlain : Route::kCustom;

  const std::uint32_t fresh =
      citations.empty() ? 0u : *std::max_element(citations.begin(), citations.end()) + 1;
  if (r.conditioning.empty() && c != fresh)
    r.anomaly = "citation " + std::to_string(c) + " is neither in history nor the next fresh id " +
                std::to_string(fresh);

  r.image_id = route_image_generation(r.description->base, r.conditioning, suite);
  const std::string word(r.description->object());
  r.image_feature = call_provider("feature_provider", suite.feature_provider.get(), [&] {
    return suite.feature_provider->feature(*r.image_id, word);
  });
  return r;
}

std::vector<TurnResult> run_dialogue(const Dialogue& d, std::span<const std::uint32_t> turns,
                                     ProviderSuite& suite, const CitationConfig& cfg,
                                     const EmbeddingTable& known) {
  std::vector<std::uint32_t> order(turns.begin(), turns.end());
  std::sort(order.begin(), order.end());
  std::vector<TurnResult> out;
  for (std::uint32_t t : order) {
    if (t < 2 || t > d.turns.size() + 1)
      throw ValidationError("dialogue " + d.id + ": cannot run turn " + std::to_string(t) +
                            " (context needs turns 1.." + std::to_string(t - 1) + ")");
    Dialogue context{d.id, {d.turns.begin(), d.turns.begin() + (t - 1)}};
    out.push_back(run_turn(context, suite, cfg, known));
  }
  return out;
}

}  // namespace citeweave
