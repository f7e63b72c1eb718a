// Copyright 2026 The citeweave Authors
// SPDX-License-Identifier: Apache-2.0

// Provider clients speaking JSON over HTTP POST, one endpoint per role:
//
//   captioner   {"image_id"}                      -> {"description"}
//   embedder    {"image_id", "word"}              -> {"vector": [...]}
//   generator   {"framed_text"}                   -> {"completion"}
//   t2i_plain   {"prompt", "conditioning_ids":[]} -> {"image_id"}
//   t2i_custom  {"prompt", "conditioning_ids"}    -> {"image_id"}
//   text model  {"prompt"}                        -> {"completion"}
//
// Only plain http:// URLs are supported. Idempotent roles (captioner,
// embedder) are retried once after a transport failure; the others never
// are, since a repeated call could mint a second image.

#pragma once

#include <map>
#include <memory>
#include <string>

#include "citeweave/config.hpp"
#include "citeweave/providers.hpp"

namespace citeweave {

/// Builds a suite from the endpoints of every role. Throws UsageError for a
/// missing or malformed URL.
ProviderSuite http_providers(const std::map<std::string, Endpoint>& endpoints);

std::unique_ptr<TextModel> http_text_model(const Endpoint& endpoint);

}  // namespace citeweave
