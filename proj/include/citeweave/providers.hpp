// Copyright 2026 The citeweave Authors
// SPDX-License-Identifier: Apache-2.0

// Model roles behind the dialogue pipeline. Each role is an interface so the
// orchestrator never depends on a concrete captioner, feature extractor,
// response generator or image generator.

#pragma once

#include <memory>
#include <span>
#include <string>

#include "citeweave/dialogue.hpp"
#include "citeweave/tag_codec.hpp"

namespace citeweave {

class Provider {
 public:
  virtual ~Provider() = default;
  /// Repeating a call with identical arguments yields the same result and no
  /// additional side effects.
  virtual bool idempotent() const = 0;
};

/// image_id -> textual description.
class Captioner : public Provider {
 public:
  virtual std::string caption(const std::string& image_id) = 0;
};

/// (image_id, object word) -> object feature.
class FeatureProvider : public Provider {
 public:
  virtual FeatureVector feature(const std::string& image_id, const std::string& word) = 0;
};

/// Framed dialogue context -> next turn, in the framed-turn wire format.
class ResponseGenerator : public Provider {
 public:
  virtual std::string complete(const FramedSequence& context) = 0;
};

/// prompt -> new image id.
class PlainTextToImage : public Provider {
 public:
  virtual std::string generate(const std::string& prompt) = 0;
};

/// (prompt, reference images) -> new image id.
class CustomTextToImage : public Provider {
 public:
  virtual std::string generate(const std::string& prompt,
                               std::span<const std::string> conditioning) = 0;
};

/// Free-form completion, used by the LLMCite baseline.
class TextModel : public Provider {
 public:
  virtual std::string complete(const std::string& prompt) = 0;
};

/// One instance per dialogue: implementations may keep per-dialogue state
/// (call logs, minted ids, script cursors) and are not required to be
/// thread-safe.
struct ProviderSuite {
  std::unique_ptr<Captioner> captioner;
  std::unique_ptr<FeatureProvider> feature_provider;
  std::unique_ptr<ResponseGenerator> generator;
  std::unique_ptr<PlainTextToImage> t2i_plain;
  std::unique_ptr<CustomTextToImage> t2i_custom;
};

}  // namespace citeweave
