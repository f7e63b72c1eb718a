// Copyright 2026 The citeweave Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "citeweave/pipeline.hpp"
#include "citeweave/synthetic.hpp"
#include "oracles.hpp"

namespace cw = citeweave;
using cwtest::TempDir;

namespace {

std::string transcript_text(const std::vector<cw::TranscriptEntry>& t) {
  std::string out;
  for (const auto& e : t) out += cw::serialize_transcript_entry(e) + "\n";
  return out;
}

std::vector<cw::TranscriptEntry> run_synthetic(const cw::SyntheticDataset& data, unsigned parallel) {
  cw::AppConfig cfg;
  cfg.parallel = parallel;
  return cw::run_dialogues(data.dialogues, data.script, data.embeddings, cfg);
}

}  // namespace

TEST(Synthetic, ShapeAndGoldRecoverable) {
  const auto data = cw::make_synthetic(7, 10);
  ASSERT_EQ(data.dialogues.size(), 10u);
  ASSERT_EQ(data.labels.size(), 10u);
  for (std::size_t i = 0; i < data.dialogues.size(); ++i) {
    const auto& d = data.dialogues[i];
    const auto& gold = data.labels[i].gold_citations;
    EXPECT_GE(d.turns.size(), 4u);
    EXPECT_LE(d.turns.size(), 7u);
    EXPECT_GE(d.image_count(), 3u);
    EXPECT_EQ(gold.size(), d.image_count());
    EXPECT_TRUE(cwtest::first_occurrence_ok(gold));
    const std::set<std::uint32_t> distinct(gold.begin(), gold.end());
    EXPECT_GE(distinct.size(), 2u);
    EXPECT_LT(distinct.size(), gold.size());
    EXPECT_EQ(cw::cite_dialogue(d, data.embeddings, {}).citations(), gold) << d.id;
  }
}

TEST(Synthetic, Deterministic) {
  TempDir a, b;
  cw::write_synthetic(a.path(), cw::make_synthetic(3, 4));
  cw::write_synthetic(b.path(), cw::make_synthetic(3, 4));
  for (const char* f : {"dialogues.jsonl", "embeddings.jsonl", "labels.jsonl", "script.jsonl"})
    EXPECT_EQ(cw::read_file(a / f), cw::read_file(b / f)) << f;
  EXPECT_NE(cw::read_file(a / "embeddings.jsonl"),
            cw::encode_embeddings_jsonl(cw::make_synthetic(4, 4).embeddings));
}

TEST(Script, ParseAndSerialize) {
  const std::string text = R"({"dialogue_id":"a","turn":2,"output":"hi[EOT]"})" "\n"
                           R"({"dialogue_id":"a","turn":3,"output":"yo[EOT]"})" "\n";
  const auto s = cw::parse_script(text);
  EXPECT_EQ(s.at("a").at(3), "yo[EOT]");
  EXPECT_EQ(cw::parse_script(cw::serialize_script(s)), s);
  EXPECT_THROW(cw::parse_script(text + R"({"dialogue_id":"a","turn":2,"output":"x"})" "\n"),
               cw::ParseError);
  EXPECT_THROW(cw::parse_script(R"({"dialogue_id":"a","turn":"2","output":"x"})"), cw::ParseError);
}

TEST(CiteResult, RoundTrip) {
  const auto data = cw::make_synthetic(8, 3);
  for (const auto& d : data.dialogues) {
    const auto r = cw::cite_dialogue(d, data.embeddings, {0.6});
    const std::string line = cw::serialize_cite_result(r);
    const auto back = cw::parse_cite_result(line);
    EXPECT_EQ(back.dialogue_id, r.dialogue_id);
    EXPECT_EQ(back.tau, r.tau);
    EXPECT_EQ(back.citations(), r.citations());
    ASSERT_EQ(back.similarity.size(), r.similarity.size());
    for (std::size_t i = 0; i < r.similarity.size(); ++i)
      for (std::size_t j = 0; j < r.similarity.size(); ++j)
        EXPECT_EQ(back.similarity.at(i, j), r.similarity.at(i, j));
    EXPECT_EQ(cw::serialize_cite_result(back), line);
  }
}

TEST(CiteDialogues, ParallelEqualsSequential) {
  const auto data = cw::make_synthetic(9, 10);
  const auto seq = cw::cite_dialogues(data.dialogues, data.embeddings, {}, 1);
  const auto par = cw::cite_dialogues(data.dialogues, data.embeddings, {}, 4);
  ASSERT_EQ(seq.size(), par.size());
  for (std::size_t i = 0; i < seq.size(); ++i)
    EXPECT_EQ(cw::serialize_cite_result(seq[i]), cw::serialize_cite_result(par[i]));
}

TEST(RunDialogues, TranscriptRoundTripAndParallelism) {
  const auto data = cw::make_synthetic(10, 6);
  const auto seq = run_synthetic(data, 1);
  const auto par = run_synthetic(data, 3);
  const std::string text = transcript_text(seq);
  EXPECT_EQ(text, transcript_text(par));
  EXPECT_EQ(text, transcript_text(run_synthetic(data, 1)));
  for (const auto& e : seq) {
    const auto back = cw::parse_transcript_entry(cw::serialize_transcript_entry(e));
    EXPECT_EQ(cw::serialize_transcript_entry(back), cw::serialize_transcript_entry(e));
    EXPECT_EQ(back.result.image_feature, e.result.image_feature);
  }
}

TEST(RunDialogues, StubModeNeedsScript) {
  const auto data = cw::make_synthetic(10, 2);
  EXPECT_THROW(cw::run_dialogues(data.dialogues, {}, data.embeddings, cw::AppConfig{}),
               cw::Error);
}

TEST(RunDialogues, ReportsLowestFailingDialogue) {
  auto data = cw::make_synthetic(12, 6);
  data.script.at("syn-02").begin()->second = "broken[IMG]no cite[/IMG][EOT]";
  data.script.at("syn-05").begin()->second = "broken[IMG]no cite either[/IMG][EOT]";
  cw::AppConfig cfg;
  cfg.parallel = 4;
  try {
    cw::run_dialogues(data.dialogues, data.script, data.embeddings, cfg);
    FAIL() << "expected CodecError";
  } catch (const cw::CodecError& e) {
    EXPECT_NE(std::string(e.what()).find("no cite["), std::string::npos) << e.what();
  }
}

TEST(Eval, OraclePipelineScoresPerfectly) {
  const auto data = cw::make_synthetic(13, 10);
  const auto cites = cw::cite_dialogues(data.dialogues, data.embeddings, {});
  const auto transcript = run_synthetic(data, 1);

  const auto f1 = cw::eval_pair_f1(data.labels, cites);
  EXPECT_EQ(f1.aggregate, 1.0);
  const auto acc = cw::eval_citation_accuracy(data.labels, transcript);
  EXPECT_EQ(acc.aggregate, 1.0);
  const auto cons = cw::eval_consistency(data.labels, transcript, data.dialogues, data.embeddings);
  EXPECT_EQ(cons.aggregate, 1.0);
  const auto intent = cw::eval_intent(data.labels, transcript);
  EXPECT_EQ(intent.aggregate, 1.0);
  for (auto m : {cw::TextMetric::kBleu1, cw::TextMetric::kBleu2, cw::TextMetric::kRouge1,
                 cw::TextMetric::kRougeL}) {
    EXPECT_EQ(cw::eval_text(data.dialogues, transcript, m, false).aggregate, 1.0);
    EXPECT_EQ(cw::eval_text(data.dialogues, transcript, m, true).aggregate, 1.0);
  }
  EXPECT_EQ(f1.json.back(), '\n');
  EXPECT_EQ(cw::parse_eval_kind(cw::eval_kind_name(cw::EvalKind::kConsistency)),
            cw::EvalKind::kConsistency);
  EXPECT_THROW(cw::parse_eval_kind("bogus"), cw::UsageError);
}

TEST(Eval, MisCitingLowersScores) {
  const auto data = cw::make_synthetic(14, 10);
  auto transcript = run_synthetic(data, 1);
  // Shift every predicted citation that points into history to a different
  // history tag, when one exists.
  std::size_t changed = 0;
  for (auto& e : transcript) {
    auto& r = e.result;
    if (!r.predicted_citation || r.history.empty()) continue;
    std::set<std::uint32_t> tags;
    for (const auto& [id, c] : r.history) tags.insert(c);
    if (!tags.contains(*r.predicted_citation) || tags.size() < 2) continue;
    for (std::uint32_t t : tags)
      if (t != *r.predicted_citation) {
        r.predicted_citation = t;
        ++changed;
        break;
      }
  }
  ASSERT_GT(changed, 0u);
  EXPECT_LT(*cw::eval_citation_accuracy(data.labels, transcript).aggregate, 1.0);
}

TEST(Eval, PairF1RejectsUnknownDialogue) {
  const auto data = cw::make_synthetic(15, 2);
  auto cites = cw::cite_dialogues(data.dialogues, data.embeddings, {});
  cites[0].dialogue_id = "elsewhere";
  EXPECT_THROW(cw::eval_pair_f1(data.labels, cites), cw::Error);
}

// The bundled dataset is `citeweave synth --seed 0`; regenerate it when the
// generator changes.
TEST(Synthetic, BundledDatasetIsCurrent) {
  TempDir fresh;
  cw::write_synthetic(fresh.path(), cw::make_synthetic(0, 10));
  const std::filesystem::path bundled = std::filesystem::path(CITEWEAVE_DATA_DIR) / "synthetic";
  for (const char* f : {"dialogues.jsonl", "embeddings.jsonl", "labels.jsonl", "script.jsonl"})
    EXPECT_EQ(cw::read_file(bundled / f), cw::read_file(fresh / f)) << f;
}
