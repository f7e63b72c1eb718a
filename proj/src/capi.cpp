// Copyright 2026 The citeweave Authors
// SPDX-License-Identifier: Apache-2.0

#include "citeweave/citeweave.h"

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <memory>
#include <string>
#include <vector>

#include "citeweave/attention.hpp"
#include "citeweave/citation.hpp"
#include "citeweave/config.hpp"
#include "citeweave/pipeline.hpp"
#include "citeweave/synthetic.hpp"

struct cw_config {
  citeweave::AppConfig value;
};

struct cw_dialogues {
  std::vector<citeweave::Dialogue> value;
};

struct cw_embeddings {
  citeweave::EmbeddingTable value;
};

namespace {

thread_local std::string g_last_error;

cw_status fail(cw_status s, std::string msg) {
  g_last_error = std::move(msg);
  return s;
}

// Runs fn, mapping exceptions onto status codes.
template <typename Fn>
cw_status guard(Fn&& fn) noexcept {
  try {
    g_last_error.clear();
    fn();
    return CW_OK;
  } catch (const citeweave::Error& e) {
    return fail(static_cast<cw_status>(e.kind()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(CW_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(CW_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(CW_ERR_INTERNAL, "unknown error");
  }
}

char* dup_string(std::string_view s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size());
  out[s.size()] = '\0';
  return out;
}

void require(const void* p, const char* what) {
  if (!p) throw citeweave::UsageError(std::string(what) + " must not be NULL");
}

const std::string& require_path(const std::string& path, const char* key) {
  if (path.empty()) throw citeweave::UsageError(std::string("missing required setting '") + key + "'");
  return path;
}

citeweave::EmbeddingTable optional_embeddings(const citeweave::AppConfig& cfg) {
  return cfg.embeddings.empty() ? citeweave::EmbeddingTable{}
                                : citeweave::load_embeddings(cfg.embeddings);
}

std::vector<citeweave::FeatureVector> rows_to_features(const float* rows, std::size_t n,
                                                       std::size_t dim) {
  std::vector<citeweave::FeatureVector> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i].values.assign(rows + i * dim, rows + (i + 1) * dim);
    citeweave::validate(out[i], "row " + std::to_string(i));
  }
  return out;
}

}  // namespace

extern "C" {

const char* cw_version(void) { return CITEWEAVE_VERSION; }

const char* cw_last_error(void) { return g_last_error.c_str(); }

void cw_string_free(char* s) { std::free(s); }

cw_status cw_config_create(cw_config** out) {
  return guard([&] {
    require(out, "out");
    *out = new cw_config();
  });
}

void cw_config_destroy(cw_config* cfg) { delete cfg; }

cw_status cw_config_load_file(cw_config* cfg, const char* path) {
  return guard([&] {
    require(cfg, "config");
    require(path, "path");
    citeweave::load_config_file(cfg->value, path);
  });
}

cw_status cw_config_apply_env(cw_config* cfg) {
  return guard([&] {
    require(cfg, "config");
    citeweave::apply_environment(cfg->value);
  });
}

cw_status cw_config_set(cw_config* cfg, const char* key, const char* value) {
  return guard([&] {
    require(cfg, "config");
    require(key, "key");
    require(value, "value");
    citeweave::set_config_value(cfg->value, key, value);
  });
}

cw_status cw_config_get(const cw_config* cfg, const char* key, char** value) {
  return guard([&] {
    require(cfg, "config");
    require(key, "key");
    require(value, "value");
    *value = dup_string(citeweave::get_config_value(cfg->value, key));
  });
}

cw_status cw_config_validate(const cw_config* cfg) {
  return guard([&] {
    require(cfg, "config");
    citeweave::validate(cfg->value);
  });
}

cw_status cw_dialogues_load(const char* path, cw_dialogues** out) {
  return guard([&] {
    require(path, "path");
    require(out, "out");
    auto h = std::make_unique<cw_dialogues>();
    h->value = citeweave::load_dialogues(path);
    *out = h.release();
  });
}

void cw_dialogues_destroy(cw_dialogues* d) { delete d; }

size_t cw_dialogues_count(const cw_dialogues* d) { return d ? d->value.size() : 0; }

cw_status cw_dialogues_get_json(const cw_dialogues* d, size_t i, char** json) {
  return guard([&] {
    require(d, "dialogues");
    require(json, "json");
    if (i >= d->value.size()) throw citeweave::UsageError("dialogue index out of range");
    *json = dup_string(citeweave::serialize_dialogue(d->value[i]));
  });
}

cw_status cw_embeddings_load(const char* path, cw_embeddings** out) {
  return guard([&] {
    require(path, "path");
    require(out, "out");
    auto h = std::make_unique<cw_embeddings>();
    h->value = citeweave::load_embeddings(path);
    *out = h.release();
  });
}

void cw_embeddings_destroy(cw_embeddings* e) { delete e; }

size_t cw_embeddings_count(const cw_embeddings* e) { return e ? e->value.size() : 0; }

size_t cw_embeddings_dim(const cw_embeddings* e) {
  return e && !e->value.empty() ? e->value.begin()->second.dim() : 0;
}

cw_status cw_embeddings_get(const cw_embeddings* e, const char* id, float* out, size_t capacity) {
  return guard([&] {
    require(e, "embeddings");
    require(id, "id");
    require(out, "out");
    auto it = e->value.find(id);
    if (it == e->value.end()) throw citeweave::ValidationError(std::string("no embedding '") + id + "'");
    if (capacity < it->second.dim()) throw citeweave::UsageError("output buffer too small");
    std::copy(it->second.values.begin(), it->second.values.end(), out);
  });
}

cw_status cw_convert_embeddings(const char* in_path, const char* out_path, size_t* count) {
  return guard([&] {
    require(in_path, "in_path");
    require(out_path, "out_path");
    const std::size_t n = citeweave::convert_embeddings(in_path, out_path);
    if (count) *count = n;
  });
}

cw_status cw_cosine_similarity(const float* a, const float* b, size_t dim, double* out) {
  return guard([&] {
    require(a, "a");
    require(b, "b");
    require(out, "out");
    const citeweave::FeatureVector fa{{a, a + dim}}, fb{{b, b + dim}};
    *out = citeweave::cosine_similarity(fa, fb);
  });
}

cw_status cw_cluster_features(const float* rows, size_t n, size_t dim, double tau, uint32_t* ids) {
  return guard([&] {
    if (n == 0) return;
    require(rows, "rows");
    require(ids, "ids");
    const auto feats = rows_to_features(rows, n, dim);
    const auto assignment = citeweave::cluster_features(feats, citeweave::CitationConfig{tau});
    std::copy(assignment.ids.begin(), assignment.ids.end(), ids);
  });
}

cw_status cw_encode_augmented(const char* base, size_t span_start, size_t span_end,
                              uint32_t citation, char** out) {
  return guard([&] {
    require(base, "base");
    require(out, "out");
    const citeweave::AugmentedDescription d{base, {span_start, span_end}, citation};
    citeweave::validate(d);
    *out = dup_string(citeweave::encode_augmented(d));
  });
}

cw_status cw_decode_augmented(const char* augmented, char** base, size_t* span_start,
                              size_t* span_end, uint32_t* citation) {
  return guard([&] {
    require(augmented, "augmented");
    require(base, "base");
    const citeweave::AugmentedDescription d = citeweave::decode_augmented(augmented);
    if (span_start) *span_start = d.object_span.start;
    if (span_end) *span_end = d.object_span.end;
    if (citation) *citation = d.citation;
    *base = dup_string(d.base);
  });
}

cw_status cw_mask_render(const char* layout, cw_mask_kind kind, cw_mask_format format, char** out) {
  return guard([&] {
    require(layout, "layout");
    require(out, "out");
    const citeweave::SegmentLayout l = citeweave::parse_layout(layout);
    const citeweave::AttentionMask m = kind == CW_MASK_CAUSAL
                                           ? citeweave::build_causal_mask(l.total_length())
                                           : citeweave::build_modulated_mask(l);
    std::string text = format == CW_FORMAT_PBM ? citeweave::mask_to_pbm(m) : citeweave::mask_to_json(m);
    if (text.empty() || text.back() != '\n') text.push_back('\n');
    *out = dup_string(text);
  });
}

cw_status cw_cite(const cw_config* cfg, const char* out_path, size_t* dialogues) {
  return guard([&] {
    require(cfg, "config");
    require(out_path, "out_path");
    const citeweave::AppConfig& c = cfg->value;
    citeweave::validate(c);
    const auto ds = citeweave::load_dialogues(require_path(c.dialogues, "dialogues"));
    const auto results =
        citeweave::cite_dialogues(ds, optional_embeddings(c), citeweave::CitationConfig{c.tau}, c.parallel);
    std::string text;
    for (const auto& r : results) text += citeweave::serialize_cite_result(r) + "\n";
    citeweave::write_file_atomic(out_path, text);
    if (dialogues) *dialogues = results.size();
  });
}

cw_status cw_run(const cw_config* cfg, const char* out_path, size_t* turns) {
  return guard([&] {
    require(cfg, "config");
    require(out_path, "out_path");
    const citeweave::AppConfig& c = cfg->value;
    citeweave::validate(c);
    const auto ds = citeweave::load_dialogues(require_path(c.dialogues, "dialogues"));
    const citeweave::ScriptTable script =
        c.script.empty() ? citeweave::ScriptTable{} : citeweave::load_script(c.script);
    const auto entries = citeweave::run_dialogues(ds, script, optional_embeddings(c), c);
    std::string text;
    for (const auto& e : entries) text += citeweave::serialize_transcript_entry(e) + "\n";
    citeweave::write_file_atomic(out_path, text);
    if (turns) *turns = entries.size();
  });
}

cw_status cw_eval(const cw_config* cfg, const char* kind, const char* gold_path,
                  const char* pred_path, const char* metric, const char* field,
                  const char* report_path, char** summary) {
  return guard([&] {
    require(cfg, "config");
    require(kind, "kind");
    require(gold_path, "gold_path");
    require(pred_path, "pred_path");
    const citeweave::AppConfig& c = cfg->value;
    const citeweave::EvalKind k = citeweave::parse_eval_kind(kind);
    if (k != citeweave::EvalKind::kText && (metric || field))
      throw citeweave::UsageError("--metric and --field only apply to eval text");
    citeweave::EvalReport report;
    switch (k) {
      case citeweave::EvalKind::kPairF1:
        report = citeweave::eval_pair_f1(citeweave::load_eval_records(gold_path),
                                         citeweave::load_cite_results(pred_path));
        break;
      case citeweave::EvalKind::kCiteAcc:
        report = citeweave::eval_citation_accuracy(citeweave::load_eval_records(gold_path),
                                                   citeweave::load_transcript(pred_path));
        break;
      case citeweave::EvalKind::kConsistency:
        report = citeweave::eval_consistency(
            citeweave::load_eval_records(gold_path), citeweave::load_transcript(pred_path),
            citeweave::load_dialogues(require_path(c.dialogues, "dialogues")),
            citeweave::load_embeddings(require_path(c.embeddings, "embeddings")));
        break;
      case citeweave::EvalKind::kText: {
        const std::string f = field ? field : "text";
        if (f != "text" && f != "description")
          throw citeweave::UsageError("--field must be text or description");
        report = citeweave::eval_text(citeweave::load_dialogues(gold_path),
                                      citeweave::load_transcript(pred_path),
                                      citeweave::parse_text_metric(metric ? metric : "bleu1"),
                                      f == "description");
        break;
      }
      case citeweave::EvalKind::kIntent:
        report = citeweave::eval_intent(citeweave::load_eval_records(gold_path),
                                        citeweave::load_transcript(pred_path));
        break;
    }
    if (report_path) citeweave::write_file_atomic(report_path, report.json);
    if (summary) *summary = dup_string(report.summary);
  });
}

cw_status cw_write_file(const char* path, const char* data, size_t size) {
  return guard([&] {
    require(path, "path");
    if (size) require(data, "data");
    citeweave::write_file_atomic(path, std::string_view(data ? data : "", size));
  });
}

cw_status cw_synth(const char* out_dir, uint64_t seed, size_t count) {
  return guard([&] {
    require(out_dir, "out_dir");
    if (count == 0) throw citeweave::UsageError("count must be positive");
    citeweave::write_synthetic(out_dir, citeweave::make_synthetic(seed, count));
  });
}

}  // extern "C"
