// Copyright 2026 The citeweave Authors
// SPDX-License-Identifier: Apache-2.0

#include <bit>
#include <cstring>
#include <fstream>
#include <limits>

#include <gtest/gtest.h>

#include "citeweave/dialogue.hpp"
#include "citeweave/embeddings.hpp"
#include "oracles.hpp"

namespace cw = citeweave;
using cwtest::Gen;
using cwtest::TempDir;

namespace {

void write(const std::filesystem::path& p, const std::string& s) {
  std::ofstream(p, std::ios::binary) << s;
}

// Little-endian FVEC bytes assembled by hand.
std::string fvec_bytes(const std::vector<std::pair<std::string, std::vector<float>>>& rows,
                       std::uint32_t dim) {
  std::string out = "FVEC";
  auto u32 = [&](std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  };
  u32(static_cast<std::uint32_t>(rows.size()));
  u32(dim);
  for (const auto& [id, v] : rows) {
    out.push_back(static_cast<char>(id.size() & 0xFF));  // u16 id length
    out.push_back(static_cast<char>(id.size() >> 8));
    out += id;
    for (float f : v) u32(std::bit_cast<std::uint32_t>(f));
  }
  return out;
}

cw::Dialogue random_dialogue(Gen& g, const std::string& id) {
  cw::Dialogue d{id, {}};
  const int n = g.integer(1, 6);
  for (int t = 1; t <= n; ++t) {
    cw::Turn turn;
    turn.index = static_cast<std::uint32_t>(t);
    turn.speaker = g.coin() ? cw::Speaker::kA : cw::Speaker::kB;
    turn.text = g.word(0, 6) + " " + g.word();
    if (g.coin()) {
      cw::ImageRecord img;
      img.image_id = "img-" + g.word();
      const std::string det = g.coin() ? "a" : "the";
      const std::string obj = g.word(2, 6);
      img.description = det + " " + obj + " " + g.word();
      cw::ObjectObservation o;
      o.word = obj;
      o.span = {det.size() + 1, det.size() + 1 + obj.size()};
      if (g.coin()) o.feature = g.vector(4);
      if (g.coin()) o.box = std::array<float, 4>{0.1f, 0.2f, 0.5f, 0.75f};
      if (g.coin()) o.mask_ref = "m/" + g.word();
      img.object = o;
      if (g.coin()) img.embedding_id = "e-" + g.word();
      turn.image = img;
    }
    d.turns.push_back(turn);
  }
  return d;
}

}  // namespace

TEST(LoadDialogues, MinimalRecord) {
  TempDir dir;
  write(dir / "d.jsonl",
        R"({"id":"d1","turns":[{"index":1,"speaker":"A","text":"hi","image":null}]})" "\n");
  const auto ds = cw::load_dialogues(dir / "d.jsonl");
  ASSERT_EQ(ds.size(), 1u);
  EXPECT_EQ(ds[0].id, "d1");
  ASSERT_EQ(ds[0].turns.size(), 1u);
  EXPECT_EQ(ds[0].turns[0].text, "hi");
  EXPECT_FALSE(ds[0].turns[0].image);
}

TEST(LoadDialogues, SpanMustMatchWord) {
  const std::string line =
      R"({"id":"d1","turns":[{"index":1,"speaker":"A","text":"","image":{"image_id":"x",)"
      R"("description":"a dog","object":{"word":"cat","span":[2,5]}}}]})";
  EXPECT_THROW(cw::parse_dialogues(line), cw::ValidationError);
}

TEST(LoadDialogues, ThreeHundredDialogues) {
  Gen g(300);
  std::string text;
  for (int i = 0; i < 300; ++i)
    text += cw::serialize_dialogue(random_dialogue(g, "d" + std::to_string(i))) + "\n";
  TempDir dir;
  write(dir / "mdic.jsonl", text);
  EXPECT_EQ(cw::load_dialogues(dir / "mdic.jsonl").size(), 300u);
}

TEST(LoadDialogues, MalformedJsonReportsLine) {
  const std::string text =
      R"({"id":"d1","turns":[{"index":1,"speaker":"A","text":"hi"}]})" "\n{not json\n";
  try {
    cw::parse_dialogues(text);
    FAIL() << "expected ParseError";
  } catch (const cw::ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(LoadDialogues, ValidationNamesDialogueAndField) {
  const std::string line = R"({"id":"odd","turns":[{"index":1,"speaker":"B","text":""}]})";
  try {
    cw::parse_dialogues(line);
    FAIL() << "expected ValidationError";
  } catch (const cw::ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("odd"), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("text"), std::string::npos) << e.what();
  }
}

TEST(LoadDialogues, RejectsZeroFeature) {
  const std::string line =
      R"({"id":"z","turns":[{"index":1,"speaker":"A","text":"","image":{"image_id":"x",)"
      R"("description":"a dog","object":{"word":"dog","span":[2,5],"feature":[0,0]}}}]})";
  EXPECT_THROW(cw::parse_dialogues(line), cw::ValidationError);
}

TEST(LoadDialogues, RejectsUnorderedBox) {
  const std::string line =
      R"({"id":"b","turns":[{"index":1,"speaker":"A","text":"","image":{"image_id":"x",)"
      R"("description":"a dog","object":{"word":"dog","span":[2,5],"box":[0.5,0,0.1,1]}}}]})";
  EXPECT_THROW(cw::parse_dialogues(line), cw::ValidationError);
}

TEST(DialogueProperty, SerializeRoundTrip) {
  Gen g(11);
  for (int i = 0; i < 500; ++i) {
    const cw::Dialogue d = random_dialogue(g, "r" + std::to_string(i));
    const std::string once = cw::serialize_dialogue(d);
    const cw::Dialogue back = cw::parse_dialogue(once);
    ASSERT_EQ(back, d) << once;
    ASSERT_EQ(cw::serialize_dialogue(back), once);
  }
}

TEST(LoadEmbeddings, FvecHeaderEcho) {
  const std::string bytes = fvec_bytes({{"a", {1, 2, 3}}, {"b", {0, 0, 1}}}, 3);
  const auto t = cw::parse_embeddings_fvec(bytes);
  ASSERT_EQ(t.size(), 2u);
  EXPECT_EQ(t.at("a").dim(), 3u);
  EXPECT_EQ(t.at("b").values, (std::vector<float>{0, 0, 1}));
  EXPECT_EQ(cw::encode_embeddings_fvec(t), bytes);
}

TEST(LoadEmbeddings, JsonlUnitVector) {
  const auto t = cw::parse_embeddings_jsonl(R"({"id":"e1","vector":[1,0,0]})" "\n");
  ASSERT_EQ(t.size(), 1u);
  EXPECT_EQ(t.at("e1").values, (std::vector<float>{1, 0, 0}));
}

TEST(LoadEmbeddings, Errors) {
  EXPECT_THROW(cw::parse_embeddings_jsonl(R"({"id":"a","vector":[1,0,0]})" "\n"
                                          R"({"id":"b","vector":[1,0,0,0]})" "\n"),
               cw::Error);
  EXPECT_THROW(cw::parse_embeddings_jsonl(R"({"id":"a","vector":[1]})" "\n"
                                          R"({"id":"a","vector":[2]})" "\n"),
               cw::Error);
  EXPECT_THROW(cw::parse_embeddings_jsonl(R"({"id":"a","vector":[0,0]})" "\n"), cw::Error);
  const float inf = std::numeric_limits<float>::infinity();
  EXPECT_THROW(cw::parse_embeddings_fvec(fvec_bytes({{"a", {1, inf}}}, 2)), cw::Error);
  EXPECT_THROW(cw::parse_embeddings_fvec(fvec_bytes({{"a", {1, 2}}}, 2) + "x"), cw::Error);
  EXPECT_THROW(cw::parse_embeddings_fvec("FVEC\x01"), cw::Error);
}

TEST(LoadEmbeddings, OrderIndependent) {
  Gen g(5);
  std::vector<std::string> lines;
  for (int i = 0; i < 50; ++i) {
    cw::EmbeddingTable one{{"id" + std::to_string(i), g.vector(6)}};
    lines.push_back(cw::encode_embeddings_jsonl(one));
  }
  std::string fwd, rev;
  for (const auto& l : lines) fwd += l;
  for (auto it = lines.rbegin(); it != lines.rend(); ++it) rev += *it;
  EXPECT_EQ(cw::parse_embeddings_jsonl(fwd), cw::parse_embeddings_jsonl(rev));
}

TEST(ConvertEmbeddings, JsonlFvecJsonlRoundTrip) {
  Gen g(1000);
  cw::EmbeddingTable table;
  for (int i = 0; i < 1000; ++i) table.emplace("v" + std::to_string(i), g.vector(16));
  TempDir dir;
  write(dir / "in.jsonl", cw::encode_embeddings_jsonl(table));
  EXPECT_EQ(cw::convert_embeddings(dir / "in.jsonl", dir / "mid.fvec"), 1000u);
  EXPECT_EQ(cw::convert_embeddings(dir / "mid.fvec", dir / "out.jsonl"), 1000u);
  EXPECT_EQ(cw::read_file(dir / "out.jsonl"), cw::read_file(dir / "in.jsonl"));

  const auto fvec = cw::load_embeddings(dir / "mid.fvec");
  for (int k = 0; k < 10; ++k) {
    const std::string id = "v" + std::to_string(g.integer(0, 999));
    const auto& a = table.at(id).values;
    const auto& b = fvec.at(id).values;
    ASSERT_EQ(a.size(), b.size());
    EXPECT_EQ(std::memcmp(a.data(), b.data(), a.size() * sizeof(float)), 0) << id;
  }
}

TEST(ConvertEmbeddings, EmptyInput) {
  TempDir dir;
  write(dir / "empty.jsonl", "");
  EXPECT_EQ(cw::convert_embeddings(dir / "empty.jsonl", dir / "empty.fvec"), 0u);
  EXPECT_EQ(cw::read_file(dir / "empty.fvec"), std::string("FVEC\0\0\0\0\0\0\0\0", 12));
  EXPECT_TRUE(cw::load_embeddings(dir / "empty.fvec").empty());
}

TEST(ConvertEmbeddings, UndetectableFormat) {
  TempDir dir;
  write(dir / "junk.bin", "\x7f" "ELF");
  EXPECT_THROW(cw::convert_embeddings(dir / "junk.bin", dir / "o.fvec"), cw::Error);
}

TEST(MdicLabels, Examples) {
  EXPECT_EQ(cw::parse_mdic_labels("0,0"), (std::vector<std::uint32_t>{0, 0}));
  EXPECT_EQ(cw::parse_mdic_labels("0,1"), (std::vector<std::uint32_t>{0, 1}));
  EXPECT_EQ(cw::parse_mdic_labels("0, 1, 0, 2"), (std::vector<std::uint32_t>{0, 1, 0, 2}));
  EXPECT_THROW(cw::parse_mdic_labels("1,0"), cw::Error);
  EXPECT_THROW(cw::parse_mdic_labels("0,x"), cw::Error);
  EXPECT_THROW(cw::parse_mdic_labels("0,-1"), cw::Error);
  EXPECT_THROW(cw::parse_mdic_labels("0,2"), cw::Error);
}

TEST(MdicLabels, ValidityMatchesOracle) {
  Gen g(77);
  for (int i = 0; i < 2000; ++i) {
    std::vector<std::uint32_t> labels;
    const int n = g.integer(0, 7);
    for (int k = 0; k < n; ++k) labels.push_back(static_cast<std::uint32_t>(g.integer(0, 4)));
    ASSERT_EQ(cw::is_valid_labeling(labels), cwtest::first_occurrence_ok(labels));
  }
}

TEST(MdicLabels, PrefixTruncationStaysValid) {
  Gen g(78);
  for (int i = 0; i < 500; ++i) {
    const auto labels = g.labelling(static_cast<std::size_t>(g.integer(1, 10)));
    const std::string raw = cw::format_mdic_labels(labels);
    ASSERT_EQ(cw::parse_mdic_labels(raw), labels);
    for (std::size_t k = 1; k <= labels.size(); ++k) {
      std::vector<std::uint32_t> prefix(labels.begin(), labels.begin() + static_cast<long>(k));
      ASSERT_EQ(cw::parse_mdic_labels(cw::format_mdic_labels(prefix)), prefix);
    }
  }
}

TEST(EvalRecord, RoundTrip) {
  cw::EvalRecord r{"d9", {0, 1, 0}, {false, true, true, false, true}};
  const std::string s = cw::serialize_eval_record(r);
  EXPECT_EQ(cw::parse_eval_record(s), r);
}

TEST(WriteFileAtomic, ReplacesContents) {
  TempDir dir;
  cw::write_file_atomic(dir / "f.txt", "one");
  cw::write_file_atomic(dir / "f.txt", "two");
  EXPECT_EQ(cw::read_file(dir / "f.txt"), "two");
  std::size_t entries = 0;
  for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(dir.path())) ++entries;
  EXPECT_EQ(entries, 1u);
}
