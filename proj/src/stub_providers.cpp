// Copyright 2026 The citeweave Authors
// SPDX-License-Identifier: Apache-2.0

#include "citeweave/stub_providers.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>

namespace citeweave {

namespace {

std::vector<double> gaussian(std::mt19937_64& rng, std::size_t dim, double sigma) {
  std::normal_distribution<double> normal(0.0, sigma);
  std::vector<double> v(dim);
  for (double& x : v) x = normal(rng);
  return v;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

FeatureVector to_unit_feature(const std::vector<double>& v) {
  const double norm = std::sqrt(dot(v, v));
  FeatureVector f;
  f.values.reserve(v.size());
  for (double x : v) f.values.push_back(static_cast<float>(x / norm));
  return f;
}

class StubCaptioner : public Captioner {
 public:
  explicit StubCaptioner(std::shared_ptr<StubWorld> w) : world_(std::move(w)) {}
  bool idempotent() const override { return true; }
  std::string caption(const std::string& image_id) override {
    auto it = world_->captions.find(image_id);
    return it != world_->captions.end() ? it->second : "a picture of an object";
  }

 private:
  std::shared_ptr<StubWorld> world_;
};

class StubFeatureProvider : public FeatureProvider {
 public:
  StubFeatureProvider(std::shared_ptr<StubWorld> w, std::map<std::string, std::string> groups)
      : world_(std::move(w)), groups_(std::move(groups)) {
    std::vector<std::string> names;
    for (const auto& [id, g] : groups_) names.push_back(g);
    if (!names.empty()) geometry_.emplace(world_->seed, world_->dim, std::move(names));
  }
  bool idempotent() const override { return true; }
  FeatureVector feature(const std::string& image_id, const std::string&) override {
    if (auto it = world_->features.find(image_id); it != world_->features.end()) return it->second;
    if (auto it = groups_.find(image_id); it != groups_.end() && geometry_)
      return geometry_->member(it->second, image_id);
    return hashed_unit_vector(world_->seed, image_id, world_->dim);
  }

 private:
  std::shared_ptr<StubWorld> world_;
  std::map<std::string, std::string> groups_;
  std::optional<ConstructedGeometry> geometry_;
};

class ScriptedGenerator : public ResponseGenerator {
 public:
  explicit ScriptedGenerator(std::shared_ptr<StubWorld> w) : world_(std::move(w)) {}
  bool idempotent() const override { return true; }
  std::string complete(const FramedSequence& context) override {
    const auto turn = static_cast<std::uint32_t>(context.turn_count() + 1);
    auto it = world_->script.find(turn);
    if (it == world_->script.end())
      throw ProviderError("generator", "script has no output for turn " + std::to_string(turn));
    return it->second;
  }

 private:
  std::shared_ptr<StubWorld> world_;
};

std::string mint(StubWorld& w) { return "gen-" + std::to_string(++w.minted); }

class StubPlainT2I : public PlainTextToImage {
 public:
  explicit StubPlainT2I(std::shared_ptr<StubWorld> w) : world_(std::move(w)) {}
  bool idempotent() const override { return false; }
  std::string generate(const std::string& prompt) override {
    std::string id = mint(*world_);
    world_->features[id] = hashed_unit_vector(world_->seed, "plain:" + id, world_->dim);
    world_->calls.push_back({"t2i_plain", prompt, {}, id});
    return id;
  }

 private:
  std::shared_ptr<StubWorld> world_;
};

class StubCustomT2I : public CustomTextToImage {
 public:
  StubCustomT2I(std::shared_ptr<StubWorld> w, FeatureProvider& features)
      : world_(std::move(w)), features_(features) {}
  bool idempotent() const override { return false; }
  std::string generate(const std::string& prompt,
                       std::span<const std::string> conditioning) override {
    if (conditioning.empty())
      throw ProviderError("t2i_custom", "customized generation needs a reference image");
    FeatureVector inherited = features_.feature(conditioning.front(), "");
    std::string id = mint(*world_);
    world_->features[id] = std::move(inherited);
    world_->calls.push_back(
        {"t2i_custom", prompt, {conditioning.begin(), conditioning.end()}, id});
    return id;
  }

 private:
  std::shared_ptr<StubWorld> world_;
  FeatureProvider& features_;
};

}  // namespace

std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

FeatureVector hashed_unit_vector(std::uint64_t seed, std::string_view key, std::size_t dim) {
  std::mt19937_64 rng(seed ^ fnv1a64(key));
  return to_unit_feature(gaussian(rng, dim, 1.0));
}

ConstructedGeometry::ConstructedGeometry(std::uint64_t seed, std::size_t dim,
                                         std::vector<std::string> groups, double base_similarity,
                                         double noise)
    : seed_(seed), dim_(dim), noise_(noise) {
  std::sort(groups.begin(), groups.end());
  groups.erase(std::unique(groups.begin(), groups.end()), groups.end());
  if (groups.size() + 1 > dim)
    throw ValidationError("constructed geometry: " + std::to_string(groups.size()) +
                          " groups need dim > groups");
  if (!(base_similarity >= 0.0 && base_similarity < 1.0))
    throw ValidationError("constructed geometry: base similarity must lie in [0, 1)");
  if (!(noise >= 0.0 && noise < 1.0))
    throw ValidationError("constructed geometry: noise must lie in [0, 1)");

  // Gram-Schmidt over seeded Gaussian draws: basis[0] is the shared
  // direction c, basis[1 + g] is e_g.
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
  std::vector<std::vector<double>> basis;
  while (basis.size() < groups.size() + 1) {
    std::vector<double> v = gaussian(rng, dim, 1.0);
    for (const auto& b : basis) {
      const double p = dot(v, b);
      for (std::size_t i = 0; i < dim; ++i) v[i] -= p * b[i];
    }
    const double norm = std::sqrt(dot(v, v));
    if (norm < 1e-6) continue;
    for (double& x : v) x /= norm;
    basis.push_back(std::move(v));
  }
  const double a = std::sqrt(base_similarity), b = std::sqrt(1.0 - base_similarity);
  for (std::size_t g = 0; g < groups.size(); ++g) {
    std::vector<double> v(dim);
    for (std::size_t i = 0; i < dim; ++i) v[i] = a * basis[0][i] + b * basis[g + 1][i];
    bases_.emplace(groups[g], std::move(v));
  }
}

FeatureVector ConstructedGeometry::base(const std::string& group) const {
  auto it = bases_.find(group);
  if (it == bases_.end()) throw ValidationError("constructed geometry: unknown group '" + group + "'");
  return to_unit_feature(it->second);
}

FeatureVector ConstructedGeometry::member(const std::string& group, const std::string& key) const {
  auto it = bases_.find(group);
  if (it == bases_.end()) throw ValidationError("constructed geometry: unknown group '" + group + "'");
  std::string k = group;
  k.push_back('\0');
  k += key;
  std::mt19937_64 rng(seed_ ^ fnv1a64(k));
  const std::vector<double>& b = it->second;
  // Seeded unit direction orthogonal to the (unit) base.
  std::vector<double> u;
  double norm = 0.0;
  while (norm < 1e-6) {
    u = gaussian(rng, dim_, 1.0);
    const double p = dot(u, b);
    for (std::size_t i = 0; i < dim_; ++i) u[i] -= p * b[i];
    norm = std::sqrt(dot(u, u));
  }
  std::vector<double> v(dim_);
  for (std::size_t i = 0; i < dim_; ++i) v[i] = b[i] + noise_ * u[i] / norm;
  return to_unit_feature(v);
}

StubSuite stub_providers(std::uint64_t seed, StubOptions options) {
  auto world = std::make_shared<StubWorld>();
  world->seed = seed;
  world->dim = options.features.empty() ? options.dim : options.features.begin()->second.dim();
  world->features = std::move(options.features);
  world->captions = std::move(options.captions);
  world->script = std::move(options.script);

  StubSuite out;
  out.world = world;
  out.suite.captioner = std::make_unique<StubCaptioner>(world);
  auto features = std::make_unique<StubFeatureProvider>(world, std::move(options.object_groups));
  out.suite.t2i_custom = std::make_unique<StubCustomT2I>(world, *features);
  out.suite.feature_provider = std::move(features);
  out.suite.generator = std::make_unique<ScriptedGenerator>(world);
  out.suite.t2i_plain = std::make_unique<StubPlainT2I>(world);
  return out;
}

}  // namespace citeweave
