// Copyright 2026 The citeweave Authors
// SPDX-License-Identifier: Apache-2.0

#include "citeweave/http_providers.hpp"

#include <httplib.h>

#include "json_types.hpp"

namespace citeweave {

namespace {

using detail::FloatJson;

struct Target {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

Target split_url(const std::string& role, const std::string& url) {
  constexpr std::string_view kScheme = "http://";
  if (url.rfind(kScheme, 0) != 0)
    throw UsageError(role + ".url must start with http://, got '" + url + "'");
  const auto slash = url.find('/', kScheme.size());
  Target t;
  t.origin = url.substr(0, slash);
  t.path = slash == std::string::npos ? "/" : url.substr(slash);
  if (t.origin.size() == kScheme.size()) throw UsageError(role + ".url has no host");
  return t;
}

class JsonEndpoint {
 public:
  JsonEndpoint(std::string role, const Endpoint& ep, bool idempotent)
      : role_(std::move(role)), target_(split_url(role_, ep.url)), idempotent_(idempotent),
        client_(target_.origin) {
    const auto ms = std::chrono::milliseconds(ep.timeout_ms);
    client_.set_connection_timeout(ms);
    client_.set_read_timeout(ms);
    client_.set_write_timeout(ms);
  }

  bool idempotent() const { return idempotent_; }

  FloatJson post(const FloatJson& body) {
    const std::string payload = body.dump();
    const int attempts = idempotent_ ? 2 : 1;
    httplib::Result res;
    for (int i = 0; i < attempts; ++i) {
      res = client_.Post(target_.path, payload, "application/json");
      if (res) break;
    }
    if (!res) throw ProviderError(role_, "POST " + target_.path + ": " + httplib::to_string(res.error()));
    if (res->status != 200)
      throw ProviderError(role_, "POST " + target_.path + ": HTTP " + std::to_string(res->status));
    try {
      return FloatJson::parse(res->body);
    } catch (const FloatJson::exception& e) {
      throw ProviderError(role_, std::string("malformed JSON response: ") + e.what());
    }
  }

  std::string string_field(const FloatJson& j, const char* key) const {
    if (!j.is_object() || !j.contains(key) || !j[key].is_string())
      throw ProviderError(role_, std::string("response lacks string field '") + key + "'");
    return j[key].get<std::string>();
  }

 private:
  std::string role_;
  Target target_;
  bool idempotent_;
  httplib::Client client_;
};

class HttpCaptioner : public Captioner {
 public:
  explicit HttpCaptioner(const Endpoint& ep) : http_("captioner", ep, true) {}
  bool idempotent() const override { return http_.idempotent(); }
  std::string caption(const std::string& image_id) override {
    return http_.string_field(http_.post({{"image_id", image_id}}), "description");
  }

 private:
  JsonEndpoint http_;
};

class HttpFeatureProvider : public FeatureProvider {
 public:
  explicit HttpFeatureProvider(const Endpoint& ep) : http_("embedder", ep, true) {}
  bool idempotent() const override { return http_.idempotent(); }
  FeatureVector feature(const std::string& image_id, const std::string& word) override {
    const FloatJson r = http_.post({{"image_id", image_id}, {"word", word}});
    if (!r.is_object() || !r.contains("vector") || !r["vector"].is_array())
      throw ProviderError("embedder", "response lacks array field 'vector'");
    FeatureVector f;
    for (const FloatJson& x : r["vector"]) {
      if (!x.is_number()) throw ProviderError("embedder", "non-numeric vector entry");
      f.values.push_back(x.get<float>());
    }
    return f;
  }

 private:
  JsonEndpoint http_;
};

class HttpGenerator : public ResponseGenerator {
 public:
  explicit HttpGenerator(const Endpoint& ep) : http_("generator", ep, false) {}
  bool idempotent() const override { return http_.idempotent(); }
  std::string complete(const FramedSequence& context) override {
    return http_.string_field(http_.post({{"framed_text", render(context)}}), "completion");
  }

 private:
  JsonEndpoint http_;
};

class HttpPlainT2I : public PlainTextToImage {
 public:
  explicit HttpPlainT2I(const Endpoint& ep) : http_("t2i_plain", ep, false) {}
  bool idempotent() const override { return http_.idempotent(); }
  std::string generate(const std::string& prompt) override {
    FloatJson body = {{"prompt", prompt}, {"conditioning_ids", FloatJson::array()}};
    return http_.string_field(http_.post(body), "image_id");
  }

 private:
  JsonEndpoint http_;
};

class HttpCustomT2I : public CustomTextToImage {
 public:
  explicit HttpCustomT2I(const Endpoint& ep) : http_("t2i_custom", ep, false) {}
  bool idempotent() const override { return http_.idempotent(); }
  std::string generate(const std::string& prompt,
                       std::span<const std::string> conditioning) override {
    FloatJson ids = FloatJson::array();
    for (const std::string& id : conditioning) ids.push_back(id);
    return http_.string_field(http_.post({{"prompt", prompt}, {"conditioning_ids", ids}}),
                              "image_id");
  }

 private:
  JsonEndpoint http_;
};

class HttpTextModel : public TextModel {
 public:
  explicit HttpTextModel(const Endpoint& ep) : http_("text_model", ep, false) {}
  bool idempotent() const override { return http_.idempotent(); }
  std::string complete(const std::string& prompt) override {
    return http_.string_field(http_.post({{"prompt", prompt}}), "completion");
  }

 private:
  JsonEndpoint http_;
};

const Endpoint& endpoint_for(const std::map<std::string, Endpoint>& endpoints,
                             const std::string& role) {
  auto it = endpoints.find(role);
  if (it == endpoints.end() || it->second.url.empty())
    throw UsageError("no endpoint configured for " + role);
  return it->second;
}

}  // namespace

ProviderSuite http_providers(const std::map<std::string, Endpoint>& endpoints) {
  ProviderSuite s;
  s.captioner = std::make_unique<HttpCaptioner>(endpoint_for(endpoints, "captioner"));
  s.feature_provider = std::make_unique<HttpFeatureProvider>(endpoint_for(endpoints, "embedder"));
  s.generator = std::make_unique<HttpGenerator>(endpoint_for(endpoints, "generator"));
  s.t2i_plain = std::make_unique<HttpPlainT2I>(endpoint_for(endpoints, "t2i_plain"));
  s.t2i_custom = std::make_unique<HttpCustomT2I>(endpoint_for(endpoints, "t2i_custom"));
  return s;
}

std::unique_ptr<TextModel> http_text_model(const Endpoint& endpoint) {
  return std::make_unique<HttpTextModel>(endpoint);
}

}  // namespace citeweave
