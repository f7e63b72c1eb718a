// Copyright 2026 The citeweave Authors
// SPDX-License-Identifier: Apache-2.0

#include "citeweave/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <mutex>
#include <thread>

#include "citeweave/http_providers.hpp"
#include "citeweave/stub_providers.hpp"
#include "json_types.hpp"

namespace citeweave {

namespace {

using detail::FloatJson;
using detail::Json;
using detail::parse_json_line;
using detail::parse_lines;

// Calls fn(i) for i in [0, n) on up to `workers` threads. Rethrows the
// exception of the lowest failing index so errors do not depend on
// scheduling.
template <typename Fn>
void parallel_for(std::size_t n, unsigned workers, Fn fn) {
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(n)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::size_t failed_at = n;
  std::exception_ptr failure;
  auto loop = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (i < failed_at) {
          failed_at = i;
          failure = std::current_exception();
        }
      }
    }
  };
  std::vector<std::jthread> pool;
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(loop);
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

// Wraps nlohmann's type and key errors as ParseErrors carrying the line.
template <typename Fn>
auto parse_record(std::string_view what, std::size_t line, Fn fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string(what) + ": " + e.what(), line);
  }
}

std::string format_score(std::optional<double> v) {
  if (!v) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", *v);
  return buf;
}

Json optional_number(const std::optional<double>& v) {
  Json j = nullptr;
  if (v) j = *v;
  return j;
}

std::map<std::string, const EvalRecord*> index_labels(std::span<const EvalRecord> gold) {
  std::map<std::string, const EvalRecord*> out;
  for (const EvalRecord& r : gold)
    if (!out.emplace(r.dialogue_id, &r).second)
      throw ValidationError("labels: duplicate dialogue id '" + r.dialogue_id + "'");
  return out;
}

std::map<std::string, const Dialogue*> index_dialogues(std::span<const Dialogue> dialogues) {
  std::map<std::string, const Dialogue*> out;
  for (const Dialogue& d : dialogues)
    if (!out.emplace(d.id, &d).second)
      throw ValidationError("dialogues: duplicate dialogue id '" + d.id + "'");
  return out;
}

template <typename Index>
const auto& lookup(const Index& index, const std::string& id, const char* what) {
  auto it = index.find(id);
  if (it == index.end()) throw ValidationError(std::string(what) + ": no entry for dialogue '" + id + "'");
  return *it->second;
}

// Transcript entries grouped by dialogue id, each group in turn order.
std::map<std::string, std::vector<const TranscriptEntry*>> group_transcript(
    std::span<const TranscriptEntry> transcript) {
  std::map<std::string, std::vector<const TranscriptEntry*>> out;
  for (const TranscriptEntry& e : transcript) out[e.dialogue_id].push_back(&e);
  for (auto& [id, v] : out)
    std::stable_sort(v.begin(), v.end(), [](const TranscriptEntry* a, const TranscriptEntry* b) {
      return a->result.turn < b->result.turn;
    });
  return out;
}

// Gold citation of turn t: the label of the t-th turn's image, found by
// counting image-bearing turns before it. nullopt when turn t has no gold
// image.
std::optional<std::uint32_t> gold_citation_at(const EvalRecord& rec, std::uint32_t turn) {
  if (turn == 0 || turn > rec.image_intent.size())
    throw ValidationError("labels for '" + rec.dialogue_id + "' do not cover turn " +
                          std::to_string(turn));
  if (!rec.image_intent[turn - 1]) return std::nullopt;
  const auto k = static_cast<std::size_t>(
      std::count(rec.image_intent.begin(), rec.image_intent.begin() + (turn - 1), true));
  if (k >= rec.gold_citations.size())
    throw ValidationError("labels for '" + rec.dialogue_id +
                          "': image_intent has more images than citations");
  return rec.gold_citations[k];
}

EvalReport finish_report(std::string metric, std::optional<double> aggregate, Json aggregate_json,
                         Json per_dialogue, std::string detail) {
  Json j = Json::object();
  j["metric"] = metric;
  j["aggregate"] = std::move(aggregate_json);
  j["per_dialogue"] = std::move(per_dialogue);
  EvalReport r;
  r.metric = metric;
  r.aggregate = aggregate;
  r.json = j.dump(2) + "\n";
  r.summary = metric + " = " + format_score(aggregate) + " (" + detail + ")";
  return r;
}

Json pair_counts_json(const PairCounts& c) {
  return Json{{"tp", c.tp}, {"fp", c.fp}, {"fn", c.fn}, {"tn", c.tn}};
}

}  // namespace

// ---- script -----------------------------------------------------------------

ScriptTable parse_script(std::string_view jsonl) {
  struct Line {
    std::string dialogue_id;
    std::uint32_t turn;
    std::string output;
    std::size_t line;
  };
  const auto lines = parse_lines<Line>(jsonl, [](std::string_view text, std::size_t line) {
    const FloatJson j = parse_json_line(text, line);
    return parse_record("script", line, [&] {
      const FloatJson& turn = j.at("turn");
      if (!turn.is_number_unsigned() || turn.get<std::uint64_t>() < 1 ||
          turn.get<std::uint64_t>() > kMaxCitation)
        throw ParseError("script: turn must be a positive integer", line);
      return Line{j.at("dialogue_id").get<std::string>(),
                  static_cast<std::uint32_t>(turn.get<std::uint64_t>()),
                  j.at("output").get<std::string>(), line};
    });
  });
  ScriptTable out;
  for (const Line& l : lines)
    if (!out[l.dialogue_id].emplace(l.turn, l.output).second)
      throw ParseError("script: duplicate entry for " + l.dialogue_id + " turn " +
                           std::to_string(l.turn),
                       l.line);
  return out;
}

ScriptTable load_script(const std::filesystem::path& path) { return parse_script(read_file(path)); }

std::string serialize_script(const ScriptTable& script) {
  std::string out;
  for (const auto& [id, turns] : script)
    for (const auto& [t, raw] : turns) {
      FloatJson j = FloatJson::object();
      j["dialogue_id"] = id;
      j["turn"] = t;
      j["output"] = raw;
      out += j.dump() + "\n";
    }
  return out;
}

// ---- cite -------------------------------------------------------------------

std::vector<std::uint32_t> CiteResult::citations() const {
  std::vector<std::uint32_t> out;
  for (const CitedImage& img : images) out.push_back(img.description.citation);
  return out;
}

CiteResult cite_dialogue(const Dialogue& d, const EmbeddingTable& features,
                         const CitationConfig& cfg) {
  validate(cfg);
  const std::vector<FeatureVector> feats = dialogue_features(d, features);
  const std::vector<AugmentedDescription> aug = augment_dialogue(d, features, cfg);
  CiteResult r;
  r.dialogue_id = d.id;
  r.tau = cfg.tau;
  std::size_t k = 0;
  for (const Turn& t : d.turns)
    if (t.image) r.images.push_back({t.index, t.image->image_id, aug[k++]});
  r.similarity = feats.empty() ? SimilarityMatrix() : build_similarity_matrix(feats);
  return r;
}

std::vector<CiteResult> cite_dialogues(std::span<const Dialogue> dialogues,
                                       const EmbeddingTable& features, const CitationConfig& cfg,
                                       unsigned workers) {
  std::vector<CiteResult> out(dialogues.size());
  parallel_for(dialogues.size(), workers,
               [&](std::size_t i) { out[i] = cite_dialogue(dialogues[i], features, cfg); });
  return out;
}

std::string serialize_cite_result(const CiteResult& r) {
  Json j = Json::object();
  j["dialogue_id"] = r.dialogue_id;
  j["tau"] = r.tau;
  j["citations"] = r.citations();
  Json descs = Json::array();
  for (const CitedImage& img : r.images)
    descs.push_back({{"turn", img.turn},
                     {"image_id", img.image_id},
                     {"augmented", encode_augmented(img.description)},
                     {"citation", img.description.citation}});
  j["descriptions"] = std::move(descs);
  Json sim = Json::array();
  for (std::size_t i = 0; i < r.similarity.size(); ++i) {
    auto row = r.similarity.row(i);
    sim.push_back(std::vector<double>(row.begin(), row.end()));
  }
  j["similarity"] = std::move(sim);
  return j.dump();
}

CiteResult parse_cite_result(std::string_view json_text, std::size_t line) {
  Json j;
  try {
    j = Json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what(), line);
  }
  return parse_record("citation record", line, [&] {
    CiteResult r;
    r.dialogue_id = j.at("dialogue_id").get<std::string>();
    r.tau = j.at("tau").get<double>();
    for (const Json& dj : j.at("descriptions")) {
      CitedImage img;
      img.turn = dj.at("turn").get<std::uint32_t>();
      img.image_id = dj.at("image_id").get<std::string>();
      img.description = decode_augmented(dj.at("augmented").get<std::string>());
      r.images.push_back(std::move(img));
    }
    if (j.at("citations").get<std::vector<std::uint32_t>>() != r.citations())
      throw ParseError("citations disagree with the augmented descriptions", line);
    const Json& sim = j.at("similarity");
    const std::size_t n = sim.size();
    if (n != r.images.size())
      throw ParseError("similarity matrix size does not match the image count", line);
    r.similarity = SimilarityMatrix(n);
    for (std::size_t a = 0; a < n; ++a) {
      if (sim[a].size() != n) throw ParseError("similarity matrix is not square", line);
      for (std::size_t b = 0; b < n; ++b) r.similarity.set(a, b, sim[a][b].get<double>());
    }
    return r;
  });
}

std::vector<CiteResult> load_cite_results(const std::filesystem::path& path) {
  return parse_lines<CiteResult>(read_file(path), parse_cite_result);
}

// ---- run --------------------------------------------------------------------

std::vector<TranscriptEntry> run_dialogues(std::span<const Dialogue> dialogues,
                                           const ScriptTable& script,
                                           const EmbeddingTable& features, const AppConfig& cfg) {
  validate(cfg);
  const CitationConfig cite_cfg{cfg.tau};
  const bool stub = cfg.clients == ClientMode::kStub;
  if (stub && script.empty()) throw UsageError("stub clients need a generator script");
  for (const auto& [id, turns] : script)
    if (std::none_of(dialogues.begin(), dialogues.end(),
                     [&](const Dialogue& d) { return d.id == id; }))
      throw ValidationError("script refers to unknown dialogue '" + id + "'");

  std::vector<std::vector<TurnResult>> per_dialogue(dialogues.size());
  parallel_for(dialogues.size(), cfg.parallel, [&](std::size_t i) {
    const Dialogue& d = dialogues[i];
    std::vector<std::uint32_t> turns;
    auto sit = script.find(d.id);
    if (sit != script.end()) {
      for (const auto& [t, raw] : sit->second) turns.push_back(t);
    } else if (stub || !script.empty()) {
      return;
    } else {
      for (std::uint32_t t = 2; t <= d.turns.size(); ++t) turns.push_back(t);
    }
    if (!stub) {
      ProviderSuite suite = http_providers(cfg.endpoints);
      per_dialogue[i] = run_dialogue(d, turns, suite, cite_cfg, features);
      return;
    }
    StubOptions opts;
    for (const Turn& t : d.turns) {
      if (!t.image) continue;
      if (const FeatureVector* f = resolve_feature(*t.image, features))
        opts.features.emplace(t.image->image_id, *f);
      if (!t.image->description.empty())
        opts.captions.emplace(t.image->image_id, t.image->description);
    }
    if (opts.features.empty() && !features.empty()) opts.dim = features.begin()->second.dim();
    opts.script = sit->second;
    StubSuite s = stub_providers(cfg.seed, std::move(opts));
    per_dialogue[i] = run_dialogue(d, turns, s.suite, cite_cfg, features);
  });

  std::vector<TranscriptEntry> out;
  for (std::size_t i = 0; i < dialogues.size(); ++i)
    for (TurnResult& r : per_dialogue[i]) out.push_back({dialogues[i].id, std::move(r)});
  return out;
}

std::string serialize_transcript_entry(const TranscriptEntry& e) {
  const TurnResult& r = e.result;
  FloatJson j = FloatJson::object();
  j["dialogue_id"] = e.dialogue_id;
  j["turn"] = r.turn;
  j["text"] = r.text;
  j["route"] = std::string(route_name(r.route));
  j["augmented"] = r.description ? FloatJson(encode_augmented(*r.description)) : FloatJson();
  j["description"] = r.description ? FloatJson(r.description->base) : FloatJson();
  j["object"] = r.description ? FloatJson(std::string(r.description->object())) : FloatJson();
  j["predicted_citation"] = r.predicted_citation ? FloatJson(*r.predicted_citation) : FloatJson();
  j["conditioning"] = r.conditioning;
  j["image_id"] = r.image_id ? FloatJson(*r.image_id) : FloatJson();
  FloatJson hist = FloatJson::array();
  for (const auto& [id, c] : r.history) hist.push_back({{"image_id", id}, {"citation", c}});
  j["history"] = std::move(hist);
  j["image_feature"] = r.image_feature ? FloatJson(r.image_feature->values) : FloatJson();
  j["anomaly"] = r.anomaly ? FloatJson(*r.anomaly) : FloatJson();
  j["raw_output"] = r.raw_output;
  return j.dump();
}

TranscriptEntry parse_transcript_entry(std::string_view json_text, std::size_t line) {
  const FloatJson j = parse_json_line(json_text, line);
  return parse_record("transcript", line, [&] {
    TranscriptEntry e;
    TurnResult& r = e.result;
    e.dialogue_id = j.at("dialogue_id").get<std::string>();
    r.turn = j.at("turn").get<std::uint32_t>();
    r.text = j.at("text").get<std::string>();
    r.route = parse_route(j.at("route").get<std::string>());
    if (!j.at("augmented").is_null())
      r.description = decode_augmented(j.at("augmented").get<std::string>());
    if (!j.at("predicted_citation").is_null())
      r.predicted_citation = j.at("predicted_citation").get<std::uint32_t>();
    r.conditioning = j.at("conditioning").get<std::vector<std::string>>();
    if (!j.at("image_id").is_null()) r.image_id = j.at("image_id").get<std::string>();
    for (const FloatJson& h : j.at("history"))
      r.history.emplace_back(h.at("image_id").get<std::string>(), h.at("citation").get<std::uint32_t>());
    if (!j.at("image_feature").is_null())
      r.image_feature = FeatureVector{j.at("image_feature").get<std::vector<float>>()};
    if (!j.at("anomaly").is_null()) r.anomaly = j.at("anomaly").get<std::string>();
    r.raw_output = j.at("raw_output").get<std::string>();
    if ((r.route == Route::kCustom) != !r.conditioning.empty() ||
        (r.route == Route::kNoImage) != !r.description)
      throw ParseError("route disagrees with conditioning or description", line);
    return e;
  });
}

std::vector<TranscriptEntry> load_transcript(const std::filesystem::path& path) {
  return parse_lines<TranscriptEntry>(read_file(path), parse_transcript_entry);
}

// ---- eval -------------------------------------------------------------------

EvalKind parse_eval_kind(std::string_view name) {
  if (name == "pair-f1") return EvalKind::kPairF1;
  if (name == "cite-acc") return EvalKind::kCiteAcc;
  if (name == "consistency") return EvalKind::kConsistency;
  if (name == "text") return EvalKind::kText;
  if (name == "intent") return EvalKind::kIntent;
  throw UsageError("unknown eval kind '" + std::string(name) + "'");
}

std::string_view eval_kind_name(EvalKind kind) {
  switch (kind) {
    case EvalKind::kPairF1: return "pair-f1";
    case EvalKind::kCiteAcc: return "cite-acc";
    case EvalKind::kConsistency: return "consistency";
    case EvalKind::kText: return "text";
    case EvalKind::kIntent: return "intent";
  }
  return "";
}

TextMetric parse_text_metric(std::string_view name) {
  if (name == "bleu1") return TextMetric::kBleu1;
  if (name == "bleu2") return TextMetric::kBleu2;
  if (name == "rouge1") return TextMetric::kRouge1;
  if (name == "rougeL") return TextMetric::kRougeL;
  throw UsageError("unknown text metric '" + std::string(name) + "'");
}

std::string_view text_metric_name(TextMetric m) {
  switch (m) {
    case TextMetric::kBleu1: return "bleu1";
    case TextMetric::kBleu2: return "bleu2";
    case TextMetric::kRouge1: return "rouge1";
    case TextMetric::kRougeL: return "rougeL";
  }
  return "";
}

EvalReport eval_pair_f1(std::span<const EvalRecord> gold, std::span<const CiteResult> pred) {
  const auto labels = index_labels(gold);
  std::vector<const CiteResult*> sorted;
  for (const CiteResult& r : pred) sorted.push_back(&r);
  std::sort(sorted.begin(), sorted.end(),
            [](const CiteResult* a, const CiteResult* b) { return a->dialogue_id < b->dialogue_id; });

  PairCounts total;
  std::size_t degenerate = 0;
  Json per = Json::array();
  for (const CiteResult* r : sorted) {
    const EvalRecord& rec = lookup(labels, r->dialogue_id, "labels");
    if (rec.gold_citations.size() != r->images.size())
      throw ValidationError("dialogue " + r->dialogue_id + ": " +
                            std::to_string(rec.gold_citations.size()) + " gold citations for " +
                            std::to_string(r->images.size()) + " images");
    const PairF1 f = pair_f1(make_pair_prediction(r->similarity, r->tau, rec.gold_citations));
    total += f.counts;
    degenerate += f.degenerate;
    per.push_back({{"dialogue_id", r->dialogue_id},
                   {"pairs", pair_count(r->images.size())},
                   {"f1", f.f1},
                   {"degenerate", f.degenerate},
                   {"counts", pair_counts_json(f.counts)}});
  }
  const PairF1 agg = pair_f1(total);
  Json aj = {{"f1", agg.f1},
             {"degenerate", agg.degenerate},
             {"dialogues", sorted.size()},
             {"degenerate_dialogues", degenerate},
             {"counts", pair_counts_json(total)}};
  return finish_report("pair_f1", agg.f1, std::move(aj), std::move(per),
                       std::to_string(sorted.size()) + " dialogues, " +
                           std::to_string(total.tp + total.fp + total.fn + total.tn) + " pairs");
}

EvalReport eval_citation_accuracy(std::span<const EvalRecord> gold,
                                  std::span<const TranscriptEntry> transcript) {
  // A turn with a gold image but no predicted citation counts as wrong; the
  // sentinel can never equal a valid citation.
  constexpr std::uint32_t kMissing = kMaxCitation + 1u;
  const auto labels = index_labels(gold);
  std::vector<std::pair<std::uint32_t, std::uint32_t>> all;
  std::size_t missing = 0, spurious = 0;
  Json per = Json::array();
  for (const auto& [id, entries] : group_transcript(transcript)) {
    const EvalRecord& rec = lookup(labels, id, "labels");
    std::vector<std::pair<std::uint32_t, std::uint32_t>> cases;
    std::size_t d_missing = 0, d_spurious = 0;
    for (const TranscriptEntry* e : entries) {
      const auto g = gold_citation_at(rec, e->result.turn);
      const auto& p = e->result.predicted_citation;
      if (!g) {
        d_spurious += p.has_value();
        continue;
      }
      if (!p) ++d_missing;
      cases.emplace_back(*g, p.value_or(kMissing));
    }
    std::optional<double> acc;
    if (!cases.empty()) acc = citation_accuracy(cases);
    per.push_back({{"dialogue_id", id},
                   {"accuracy", optional_number(acc)},
                   {"cases", cases.size()},
                   {"missing_predictions", d_missing},
                   {"spurious_predictions", d_spurious}});
    all.insert(all.end(), cases.begin(), cases.end());
    missing += d_missing;
    spurious += d_spurious;
  }
  if (all.empty()) throw ValidationError("cite-acc: no transcript turn has a gold image");
  const double acc = citation_accuracy(all);
  Json aj = {{"accuracy", acc},
             {"cases", all.size()},
             {"missing_predictions", missing},
             {"spurious_predictions", spurious}};
  return finish_report("citation_accuracy", acc, std::move(aj), std::move(per),
                       std::to_string(all.size()) + " cases");
}

EvalReport eval_consistency(std::span<const EvalRecord> gold,
                            std::span<const TranscriptEntry> transcript,
                            std::span<const Dialogue> dialogues, const EmbeddingTable& features) {
  const auto labels = index_labels(gold);
  const auto dialogue_index = index_dialogues(dialogues);
  std::vector<ConsistencyCase> all;
  std::size_t no_image = 0;
  Json per = Json::array();
  for (const auto& [id, entries] : group_transcript(transcript)) {
    const EvalRecord& rec = lookup(labels, id, "labels");
    const Dialogue& d = lookup(dialogue_index, id, "dialogues");
    std::vector<ConsistencyCase> cases;
    std::size_t d_no_image = 0;
    for (const TranscriptEntry* e : entries) {
      const TurnResult& r = e->result;
      const auto g = gold_citation_at(rec, r.turn);
      if (!g) continue;
      if (!r.predicted_citation || !r.image_feature) {
        ++d_no_image;
        continue;
      }
      ConsistencyCase c;
      c.dialogue_id = id;
      c.turn = r.turn;
      c.gold = *g;
      c.predicted = *r.predicted_citation;
      // Reference object: the earliest history image carrying the gold
      // citation, else the gold image of this turn.
      const Turn* reference = nullptr;
      for (std::uint32_t t = 1; t < r.turn && t <= d.turns.size(); ++t) {
        const auto gt = gold_citation_at(rec, t);
        if (gt && *gt == c.gold) {
          c.gold_in_history = true;
          reference = &d.turns[t - 1];
          break;
        }
      }
      c.pred_in_history = std::any_of(r.history.begin(), r.history.end(),
                                      [&](const auto& h) { return h.second == c.predicted; });
      if (!is_included(c)) {
        cases.push_back(std::move(c));
        continue;
      }
      if (!reference) {
        if (r.turn > d.turns.size() || !d.turns[r.turn - 1].image)
          throw ValidationError("dialogue " + id + ": gold turn " + std::to_string(r.turn) +
                                " has no image to compare against");
        reference = &d.turns[r.turn - 1];
      }
      if (!reference->image)
        throw ValidationError("dialogue " + id + ": labels and dialogue disagree on turn " +
                              std::to_string(reference->index));
      const FeatureVector* ref = resolve_feature(*reference->image, features);
      if (!ref)
        throw ValidationError("dialogue " + id + ": no feature for reference image '" +
                              reference->image->image_id + "'");
      c.alignment = cosine_similarity(*r.image_feature, *ref);
      cases.push_back(std::move(c));
    }
    const auto included = std::count_if(cases.begin(), cases.end(), is_included);
    std::optional<double> score;
    if (included) score = consistency_score(cases);
    Json cj = Json::array();
    for (const ConsistencyCase& c : cases)
      cj.push_back({{"turn", c.turn},
                    {"gold", c.gold},
                    {"predicted", c.predicted},
                    {"gold_in_history", c.gold_in_history},
                    {"pred_in_history", c.pred_in_history},
                    {"included", is_included(c)},
                    {"alignment", optional_number(c.alignment)}});
    per.push_back({{"dialogue_id", id},
                   {"score", optional_number(score)},
                   {"included", included},
                   {"turns_without_image", d_no_image},
                   {"cases", std::move(cj)}});
    all.insert(all.end(), cases.begin(), cases.end());
    no_image += d_no_image;
  }
  const auto included = std::count_if(all.begin(), all.end(), is_included);
  if (included == 0) throw ValidationError("consistency: no case is included");
  const double score = consistency_score(all);
  Json aj = {{"score", score},
             {"included", included},
             {"cases", all.size()},
             {"turns_without_image", no_image}};
  return finish_report("consistency", score, std::move(aj), std::move(per),
                       std::to_string(included) + " included cases");
}

EvalReport eval_text(std::span<const Dialogue> gold, std::span<const TranscriptEntry> transcript,
                     TextMetric metric, bool description_field) {
  const auto dialogue_index = index_dialogues(gold);
  const bool is_bleu = metric == TextMetric::kBleu1 || metric == TextMetric::kBleu2;
  const int max_n = metric == TextMetric::kBleu2 ? 2 : 1;
  const RougeVariant variant = metric == TextMetric::kRougeL ? RougeVariant::kRL : RougeVariant::kR1;

  BleuStats corpus;
  double rouge_sum = 0.0;
  std::size_t scored = 0, skipped = 0;
  Json per = Json::array();
  for (const auto& [id, entries] : group_transcript(transcript)) {
    const Dialogue& d = lookup(dialogue_index, id, "dialogues");
    BleuStats stats;
    double d_rouge = 0.0;
    std::size_t d_scored = 0, d_skipped = 0;
    for (const TranscriptEntry* e : entries) {
      const TurnResult& r = e->result;
      if (r.turn > d.turns.size())
        throw ValidationError("dialogue " + id + " has no gold turn " + std::to_string(r.turn));
      const Turn& ref_turn = d.turns[r.turn - 1];
      std::optional<std::string> cand, ref;
      if (description_field) {
        if (r.description) cand = r.description->base;
        if (ref_turn.image) ref = ref_turn.image->description;
      } else {
        cand = r.text;
        ref = ref_turn.text;
      }
      const Tokens c = cand ? tokenize(*cand) : Tokens{};
      const Tokens g = ref ? tokenize(*ref) : Tokens{};
      if (c.empty() || g.empty()) {
        ++d_skipped;
        continue;
      }
      ++d_scored;
      if (is_bleu) stats += bleu_stats(c, std::span<const Tokens>(&g, 1), max_n);
      else d_rouge += rouge(c, g, variant);
    }
    std::optional<double> score;
    if (d_scored) score = is_bleu ? bleu_from_stats(stats) : d_rouge / d_scored;
    per.push_back({{"dialogue_id", id},
                   {"score", optional_number(score)},
                   {"scored", d_scored},
                   {"skipped", d_skipped}});
    if (is_bleu && d_scored) corpus += stats;
    rouge_sum += d_rouge;
    scored += d_scored;
    skipped += d_skipped;
  }
  std::optional<double> agg;
  if (scored) agg = is_bleu ? bleu_from_stats(corpus) : rouge_sum / scored;
  const std::string field = description_field ? "description" : "text";
  Json aj = {{"score", optional_number(agg)},
             {"field", field},
             {"aggregation", is_bleu ? "corpus" : "mean"},
             {"scored", scored},
             {"skipped", skipped}};
  return finish_report(std::string(text_metric_name(metric)), agg, std::move(aj), std::move(per),
                       std::to_string(scored) + " " + field + " pairs");
}

EvalReport eval_intent(std::span<const EvalRecord> gold,
                       std::span<const TranscriptEntry> transcript) {
  const auto labels = index_labels(gold);
  PairCounts total;  // reused as a plain confusion table
  Json per = Json::array();
  for (const auto& [id, entries] : group_transcript(transcript)) {
    const EvalRecord& rec = lookup(labels, id, "labels");
    PairCounts c;
    for (const TranscriptEntry* e : entries) {
      const bool g = gold_citation_at(rec, e->result.turn).has_value();
      const bool p = e->result.route != Route::kNoImage;
      if (g && p) ++c.tp;
      else if (p) ++c.fp;
      else if (g) ++c.fn;
      else ++c.tn;
    }
    std::optional<double> f1;
    if (c.tp + c.fp + c.fn) f1 = binary_f1(c.tp, c.fp, c.fn);
    per.push_back({{"dialogue_id", id}, {"f1", optional_number(f1)}, {"counts", pair_counts_json(c)}});
    total += c;
  }
  std::optional<double> f1;
  if (total.tp + total.fp + total.fn) f1 = binary_f1(total.tp, total.fp, total.fn);
  Json aj = {{"f1", optional_number(f1)}, {"counts", pair_counts_json(total)}};
  return finish_report("intent_f1", f1, std::move(aj), std::move(per),
                       std::to_string(total.tp + total.fp + total.fn + total.tn) + " turns");
}

}  // namespace citeweave
