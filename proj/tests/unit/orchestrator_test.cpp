// Copyright 2026 The citeweave Authors
// SPDX-License-Identifier: Apache-2.0

#include <fstream>

#include <gtest/gtest.h>

#include "citeweave/citation.hpp"
#include "citeweave/llmcite.hpp"
#include "citeweave/orchestrator.hpp"
#include "citeweave/stub_providers.hpp"
#include "citeweave/synthetic.hpp"
#include "citeweave/tag_codec.hpp"
#include "oracles.hpp"

namespace cw = citeweave;
using cwtest::Gen;

namespace {

cw::FeatureVector fv(std::vector<float> v) { return {std::move(v)}; }

cw::Turn image_turn(std::uint32_t index, const std::string& id, const std::string& desc,
                    const std::string& word) {
  const std::size_t at = desc.find(word);
  cw::ImageRecord img{id, desc, cw::ObjectObservation{word, {at, at + word.size()}, {}, {}, {}}, {}};
  return {index, index % 2 ? cw::Speaker::kA : cw::Speaker::kB, "", img};
}

cw::Turn text_turn(std::uint32_t index, const std::string& text) {
  return {index, index % 2 ? cw::Speaker::kA : cw::Speaker::kB, text, std::nullopt};
}

std::size_t count_calls(const cw::StubWorld& w, const std::string& role) {
  std::size_t n = 0;
  for (const auto& c : w.calls) n += c.role == role ? 1 : 0;
  return n;
}

// Brute-force conditioning set: every earlier image whose citation equals c.
std::vector<std::string> set_builder(const std::vector<std::pair<std::string, std::uint32_t>>& h,
                                     std::uint32_t c) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < h.size(); ++i)
    if (h[i].second == c) out.push_back(h[i].first);
  return out;
}

cw::StubOptions scripted(std::map<std::uint32_t, std::string> script) {
  cw::StubOptions o;
  o.script = std::move(script);
  return o;
}

class ThrowingGenerator : public cw::ResponseGenerator {
 public:
  bool idempotent() const override { return false; }
  std::string complete(const cw::FramedSequence&) override { throw std::runtime_error("boom"); }
};

}  // namespace

TEST(RunTurn, TextOnlyReply) {
  cw::Dialogue ctx{"d", {text_turn(1, "hello")}};
  auto stub = cw::stub_providers(1, scripted({{2, "sure![EOT]"}}));
  const auto r = cw::run_turn(ctx, stub.suite, {});
  EXPECT_EQ(r.route, cw::Route::kNoImage);
  EXPECT_EQ(r.text, "sure!");
  EXPECT_FALSE(r.description);
  EXPECT_FALSE(r.image_id);
  EXPECT_TRUE(stub.world->calls.empty());
}

TEST(RunTurn, CitedDogIsCustomized) {
  cw::Dialogue ctx{"d", {image_turn(1, "img1", "a dog is in front of a fireplace", "dog")}};
  cw::StubOptions opt;
  opt.features = {{"img1", fv({1, 0, 0})}};
  opt.script = {{2, "he loves snow[IMG]a dog[cite]0[/cite] running in the snow[/IMG][EOT]"}};
  auto stub = cw::stub_providers(2, opt);
  const auto r = cw::run_turn(ctx, stub.suite, {});
  EXPECT_EQ(r.route, cw::Route::kCustom);
  EXPECT_EQ(r.conditioning, (std::vector<std::string>{"img1"}));
  EXPECT_EQ(r.predicted_citation, 0u);
  ASSERT_TRUE(r.description);
  EXPECT_EQ(r.description->base, "a dog running in the snow");
  EXPECT_EQ(r.image_id, "gen-1");
  EXPECT_EQ(count_calls(*stub.world, "t2i_custom"), 1u);
  EXPECT_EQ(count_calls(*stub.world, "t2i_plain"), 0u);
  // The customized image inherits the reference feature.
  EXPECT_EQ(r.image_feature, fv({1, 0, 0}));
  EXPECT_FALSE(r.anomaly);
}

TEST(RunTurn, FreshCitationIsPlain) {
  cw::Dialogue ctx{"d", {image_turn(1, "i1", "a cat on a mat", "cat"),
                         image_turn(2, "i2", "a lamp by the bed", "lamp")}};
  cw::StubOptions opt;
  opt.features = {{"i1", fv({1, 0})}, {"i2", fv({0, 1})}};
  opt.script = {{3, "[IMG]a kayak[cite]2[/cite] on a lake[/IMG][EOT]"}};
  auto stub = cw::stub_providers(3, opt);
  const auto r = cw::run_turn(ctx, stub.suite, {});
  EXPECT_EQ(r.route, cw::Route::kPlain);
  EXPECT_TRUE(r.conditioning.empty());
  EXPECT_EQ(r.conditioning, set_builder(r.history, 2));
  EXPECT_FALSE(r.anomaly);
  EXPECT_EQ(count_calls(*stub.world, "t2i_plain"), 1u);
}

TEST(RunTurn, OutOfRangeCitationIsFlagged) {
  cw::Dialogue ctx{"d", {image_turn(1, "i1", "a cat on a mat", "cat")}};
  cw::StubOptions opt;
  opt.features = {{"i1", fv({1, 0})}};
  opt.script = {{2, "[IMG]a cat[cite]5[/cite] asleep[/IMG][EOT]"}};
  auto stub = cw::stub_providers(4, opt);
  const auto r = cw::run_turn(ctx, stub.suite, {});
  EXPECT_EQ(r.route, cw::Route::kPlain);
  ASSERT_TRUE(r.anomaly);
  EXPECT_NE(r.anomaly->find("5"), std::string::npos);
}

TEST(RunTurn, MalformedOutputCarriesRawText) {
  cw::Dialogue ctx{"d", {text_turn(1, "hi")}};
  auto stub = cw::stub_providers(5, scripted({{2, "x[IMG]a dog[/IMG][EOT]"}}));
  try {
    cw::run_turn(ctx, stub.suite, {});
    FAIL() << "expected CodecError";
  } catch (const cw::CodecError& e) {
    EXPECT_NE(std::string(e.what()).find("x[IMG]a dog[/IMG][EOT]"), std::string::npos);
  }
}

TEST(RunTurn, ProviderFailureNamesRole) {
  cw::Dialogue ctx{"d", {text_turn(1, "hi")}};
  auto stub = cw::stub_providers(6);
  stub.suite.generator = std::make_unique<ThrowingGenerator>();
  try {
    cw::run_turn(ctx, stub.suite, {});
    FAIL() << "expected ProviderError";
  } catch (const cw::ProviderError& e) {
    EXPECT_EQ(e.role(), "generator");
  }
  auto missing = cw::stub_providers(6);
  EXPECT_THROW(cw::run_turn(ctx, missing.suite, {}), cw::ProviderError);
}

TEST(RunTurn, FillsCaptionsAndFeatures) {
  cw::Dialogue ctx{"d", {{1, cw::Speaker::kA, "look", cw::ImageRecord{"raw", "", {}, {}}}}};
  cw::StubOptions opt;
  opt.captions = {{"raw", "a parrot on a branch"}};
  opt.script = {{2, "[IMG]a parrot[cite]0[/cite] flying[/IMG][EOT]"}};
  auto stub = cw::stub_providers(7, opt);
  const auto [history, features] = cw::prepare_history(ctx, stub.suite);
  ASSERT_TRUE(history.turns[0].image->object);
  EXPECT_EQ(history.turns[0].image->object->word, "parrot");
  EXPECT_EQ(features.size(), 1u);
  const auto r = cw::run_turn(ctx, stub.suite, {});
  EXPECT_EQ(r.route, cw::Route::kCustom);
}

TEST(RunTurn, HistoryMatchesAugmentDialogue) {
  const auto data = cw::make_synthetic(99, 3);
  for (const auto& d : data.dialogues) {
    const auto expected = cw::augment_dialogue(d, data.embeddings, {});
    cw::StubOptions opt;
    opt.script = {{static_cast<std::uint32_t>(d.turns.size() + 1), "ok[EOT]"}};
    auto stub = cw::stub_providers(1, opt);
    const auto r = cw::run_turn(d, stub.suite, {}, data.embeddings);
    ASSERT_EQ(r.history.size(), expected.size());
    for (std::size_t i = 0; i < expected.size(); ++i)
      EXPECT_EQ(r.history[i].second, expected[i].citation);
  }
}

TEST(RouteImageGeneration, CallRecording) {
  auto stub = cw::stub_providers(8);
  EXPECT_EQ(cw::route_image_generation("a dog", {}, stub.suite), "gen-1");
  ASSERT_EQ(stub.world->calls.size(), 1u);
  EXPECT_EQ(stub.world->calls[0].role, "t2i_plain");

  const std::vector<std::string> one{"img1"};
  cw::route_image_generation("a dog", one, stub.suite);
  EXPECT_EQ(stub.world->calls[1].role, "t2i_custom");
  EXPECT_EQ(stub.world->calls[1].conditioning, one);

  const std::vector<std::string> two{"img1", "img3"};
  cw::route_image_generation("a dog", two, stub.suite);
  EXPECT_EQ(stub.world->calls[2].conditioning, two);
  EXPECT_EQ(stub.world->calls[2].prompt, "a dog");

  EXPECT_THROW(cw::route_image_generation("", {}, stub.suite), cw::ValidationError);
}

TEST(StubProviders, Deterministic) {
  auto a = cw::stub_providers(42), b = cw::stub_providers(42), c = cw::stub_providers(43);
  EXPECT_EQ(a.suite.feature_provider->feature("x", "dog"), b.suite.feature_provider->feature("x", "dog"));
  EXPECT_NE(a.suite.feature_provider->feature("x", "dog"), c.suite.feature_provider->feature("x", "dog"));
  EXPECT_EQ(a.suite.captioner->caption("x"), b.suite.captioner->caption("x"));
  EXPECT_EQ(a.suite.t2i_plain->generate("p"), b.suite.t2i_plain->generate("p"));
  const auto f = a.suite.feature_provider->feature("y", "cat");
  EXPECT_EQ(f.dim(), 64u);
  double norm = 0;
  for (float v : f.values) norm += double(v) * v;
  EXPECT_NEAR(norm, 1.0, 1e-6);
}

TEST(StubProviders, SameObjectGeometry) {
  std::map<std::string, std::string> groups;
  for (int i = 0; i < 6; ++i) groups["dog" + std::to_string(i)] = "dog";
  for (int i = 0; i < 6; ++i) groups["cat" + std::to_string(i)] = "cat";
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    cw::StubOptions opt;
    opt.object_groups = groups;
    auto stub = cw::stub_providers(seed, opt);
    auto& fp = *stub.suite.feature_provider;
    for (int i = 0; i < 6; ++i)
      for (int j = i + 1; j < 6; ++j) {
        const auto si = std::to_string(i), sj = std::to_string(j);
        ASSERT_GE(cw::cosine_similarity(fp.feature("dog" + si, ""), fp.feature("dog" + sj, "")), 0.9);
        ASSERT_GE(cw::cosine_similarity(fp.feature("cat" + si, ""), fp.feature("cat" + sj, "")), 0.9);
        ASSERT_LT(cw::cosine_similarity(fp.feature("dog" + si, ""), fp.feature("cat" + sj, "")), 0.6);
      }
  }
}

TEST(StubProviders, GeometryBounds) {
  // Closed-form bounds of the construction, checked over many seeds.
  const double noise = 0.22, rho = 0.1;
  const double same_min = (1 - noise * noise) / (1 + noise * noise);
  const double other_max = (rho + 2 * noise + noise * noise) / (1 + noise * noise);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const cw::ConstructedGeometry g(seed, 32, {"a", "b", "c"});
    EXPECT_NEAR(cw::cosine_similarity(g.base("a"), g.base("b")), rho, 1e-6);
    for (int k = 0; k < 5; ++k) {
      const auto a1 = g.member("a", "x" + std::to_string(k)), a2 = g.member("a", "y" + std::to_string(k));
      const auto b1 = g.member("b", "x" + std::to_string(k));
      ASSERT_GE(cw::cosine_similarity(a1, a2), same_min - 1e-6);
      ASSERT_LE(cw::cosine_similarity(a1, b1), other_max + 1e-6);
      ASSERT_EQ(a1, g.member("a", "x" + std::to_string(k)));
    }
  }
  EXPECT_THROW(cw::ConstructedGeometry(1, 3, {"a", "b", "c"}), cw::ValidationError);
}

TEST(RunDialogue, OneCustomCallInThreeTurnRun) {
  cw::Dialogue d{"d", {image_turn(1, "img1", "a dog in the park", "dog"),
                       text_turn(2, "cute!"),
                       text_turn(3, "want to see him again?")}};
  cw::StubOptions opt;
  opt.features = {{"img1", fv({0.6f, 0.8f})}};
  opt.script = {{2, "cute![EOT]"},
                {3, "want to see him again?[EOT]"},
                {4, "here[IMG]the dog[cite]0[/cite] at the beach[/IMG][EOT]"}};
  auto stub = cw::stub_providers(11, opt);
  const std::vector<std::uint32_t> turns{2, 3, 4};
  const auto results = cw::run_dialogue(d, turns, stub.suite, {});
  ASSERT_EQ(results.size(), 3u);
  EXPECT_EQ(count_calls(*stub.world, "t2i_custom"), 1u);
  EXPECT_EQ(count_calls(*stub.world, "t2i_plain"), 0u);
  EXPECT_EQ(results[2].conditioning, (std::vector<std::string>{"img1"}));

  const std::vector<std::uint32_t> bad{1};
  EXPECT_THROW(cw::run_dialogue(d, bad, stub.suite, {}), cw::ValidationError);
}

TEST(RunDialogue, EqTwoFidelityOnSyntheticData) {
  const auto data = cw::make_synthetic(5, 10);
  for (const auto& d : data.dialogues) {
    cw::StubOptions opt;
    opt.features = data.embeddings;
    for (const auto& t : d.turns)
      if (t.image) opt.features[t.image->image_id] = data.embeddings.at(*t.image->embedding_id);
    opt.script = data.script.at(d.id);
    auto stub = cw::stub_providers(1, opt);
    std::vector<std::uint32_t> turns;
    for (const auto& [t, raw] : data.script.at(d.id)) turns.push_back(t);
    const auto results = cw::run_dialogue(d, turns, stub.suite, {}, data.embeddings);
    std::size_t custom = 0, plain = 0;
    for (const auto& r : results) {
      if (!r.predicted_citation) {
        ASSERT_EQ(r.route, cw::Route::kNoImage);
        continue;
      }
      const auto expected = set_builder(r.history, *r.predicted_citation);
      ASSERT_EQ(r.conditioning, expected);
      ASSERT_EQ(r.route, expected.empty() ? cw::Route::kPlain : cw::Route::kCustom);
      custom += r.route == cw::Route::kCustom;
      plain += r.route == cw::Route::kPlain;
    }
    EXPECT_EQ(count_calls(*stub.world, "t2i_custom"), custom);
    EXPECT_EQ(count_calls(*stub.world, "t2i_plain"), plain);
  }
}

TEST(LlmCite, Tags) {
  EXPECT_EQ(cw::classification_tag(0), "(a)");
  EXPECT_EQ(cw::classification_tag(25), "(z)");
  EXPECT_EQ(cw::classification_tag(26), "(aa)");
  EXPECT_EQ(cw::classification_tag(27), "(ab)");
  EXPECT_EQ(cw::classification_tag(26 + 26 * 26), "(aaa)");
  EXPECT_EQ(cw::truncate_to_object("a dog running in the snow", {2, 5}), "a dog");
}

TEST(LlmCite, TwoObjectsTaggedInOrder) {
  const std::vector<cw::LlmCiteTurn> h{
      {1, "look", std::string("a dog in the park"), cw::Span{2, 5}},
      {2, "nice", std::nullopt, std::nullopt},
      {3, "mine", std::string("the cat on a sofa"), cw::Span{4, 7}}};
  const auto p = cw::build_llmcite_prompt(h, "again!", "a dog");
  ASSERT_EQ(p.label_map.size(), 2u);
  EXPECT_EQ(p.label_map[0], (std::pair<std::string, std::uint32_t>{"(a)", 1}));
  EXPECT_EQ(p.label_map[1], (std::pair<std::string, std::uint32_t>{"(b)", 3}));
  EXPECT_EQ(p.none_tag, "(c)");
  EXPECT_NE(p.prompt.find("Turn 1 image: a dog (a) in the park"), std::string::npos) << p.prompt;
  EXPECT_NE(p.prompt.find("Turn 3 image: the cat (b) on a sofa"), std::string::npos);
  EXPECT_NE(p.prompt.find("(a) dog (turn 1)\n(b) cat (turn 3)\n(c) none of the above"),
            std::string::npos);
  EXPECT_NE(p.prompt.find("Turn 4 image: a dog\n"), std::string::npos);
  EXPECT_NE(p.prompt.find("\"dog\""), std::string::npos);
  EXPECT_EQ(p.prompt.find('{'), std::string::npos);
}

TEST(LlmCite, EmptyHistoryOffersOnlyNone) {
  const auto p = cw::build_llmcite_prompt({}, "hi", "a kayak");
  EXPECT_TRUE(p.label_map.empty());
  EXPECT_EQ(p.none_tag, "(a)");
  EXPECT_NE(p.prompt.find("Options:\n(a) none of the above\n"), std::string::npos) << p.prompt;
  EXPECT_EQ(cw::decode_llmcite_answer("(a)", p), std::nullopt);
}

TEST(LlmCite, DecodeAnswer) {
  const std::vector<cw::LlmCiteTurn> h{{1, "", std::string("a dog"), cw::Span{2, 5}},
                                       {2, "", std::string("a cat"), cw::Span{2, 5}},
                                       {4, "", std::string("a mug"), cw::Span{2, 5}}};
  const auto p = cw::build_llmcite_prompt(h, "", "the cat");
  EXPECT_EQ(cw::decode_llmcite_answer("(b)", p), 2u);
  EXPECT_EQ(cw::decode_llmcite_answer("The answer is (c) mug.", p), 4u);
  EXPECT_EQ(cw::decode_llmcite_answer("b", p), 2u);
  EXPECT_EQ(cw::decode_llmcite_answer("(d) none of the above", p), std::nullopt);
  EXPECT_THROW(cw::decode_llmcite_answer("I am not sure", p), cw::CodecError);
  // Inverting the label map recovers every tag.
  for (const auto& [tag, turn] : p.label_map) EXPECT_EQ(cw::decode_llmcite_answer(tag, p), turn);
}

TEST(LlmCite, BundledTemplateMatchesBuiltIn) {
  std::ifstream in(std::string(CITEWEAVE_DATA_DIR) + "/llmcite_template.txt", std::ios::binary);
  ASSERT_TRUE(in);
  const std::string file((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  EXPECT_EQ(file, cw::default_llmcite_template());
  EXPECT_EQ(cw::load_llmcite_template(std::string(CITEWEAVE_DATA_DIR) + "/llmcite_template.txt"),
            file);
}
