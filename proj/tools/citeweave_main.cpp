// Copyright 2026 The citeweave Authors
// SPDX-License-Identifier: Apache-2.0

// citeweave command-line tool. Talks to the library only through citeweave.h.

#include <cstdint>
#include <iostream>
#include <map>
#include <memory>
#include <string>

#include <CLI11.hpp>

#include "citeweave/citeweave.h"

namespace {

struct ConfigDeleter {
  void operator()(cw_config* c) const { cw_config_destroy(c); }
};
using ConfigPtr = std::unique_ptr<cw_config, ConfigDeleter>;

struct StringDeleter {
  void operator()(char* s) const { cw_string_free(s); }
};
using CwString = std::unique_ptr<char, StringDeleter>;

// Thrown once an error has been reported; carries the exit code.
struct Exit {
  int code;
};

void check(cw_status s) {
  if (s == CW_OK) return;
  std::cerr << "citeweave: error: " << cw_last_error() << "\n";
  if (s == CW_ERR_USAGE) std::cerr << "Run with --help for usage.\n";
  throw Exit{s == CW_ERR_INTERNAL ? 1 : static_cast<int>(s)};
}

// Flags named after config keys (--tau sets "tau"). Only flags actually
// given are applied, so unset flags never mask the environment or the
// config file.
struct Overrides {
  std::map<std::string, std::string> values;

  void add(CLI::App* app, const std::string& key, const std::string& help) {
    app->add_option("--" + key, values[key], help);
  }

  void apply(cw_config* cfg, const CLI::App* app) const {
    for (const auto& [key, value] : values)
      if (app->count("--" + key) > 0) check(cw_config_set(cfg, key.c_str(), value.c_str()));
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Citation-consistent multimodal dialogue tooling", "citeweave"};
  app.set_version_flag("--version", std::string("citeweave ") + cw_version());
  app.require_subcommand(1);

  std::string config_path;
  app.add_option("--config", config_path, "Config file (key = value, [role] sections)")
      ->check(CLI::ExistingFile);

  // cite
  Overrides cite_flags;
  std::string cite_out;
  CLI::App* cite = app.add_subcommand("cite", "Assign citation tags to every image of every dialogue");
  cite_flags.add(cite, "dialogues", "Dialogue JSONL");
  cite_flags.add(cite, "embeddings", "Embeddings (JSONL or FVEC)");
  cite_flags.add(cite, "tau", "Similarity threshold in (0, 1]");
  cite_flags.add(cite, "parallel", "Worker threads");
  cite->add_option("--out", cite_out, "Output citation JSONL")->required();

  // mask
  std::string layout, mask_format = "json", mask_out;
  bool causal = false;
  CLI::App* mask = app.add_subcommand("mask", "Print the attention permission matrix of a layout");
  mask->add_option("--layout", layout, "Segments, e.g. T:3,D:4,T:2")->required();
  mask->add_flag("--causal", causal, "Plain causal mask instead of the modulated one");
  mask->add_option("--format", mask_format, "json or pbm")
      ->check(CLI::IsMember({"json", "pbm"}));
  mask->add_option("--out", mask_out, "Output file (default: stdout)");

  // run
  Overrides run_flags;
  std::string run_out;
  CLI::App* run = app.add_subcommand("run", "Run scripted or remote inference over dialogues");
  run_flags.add(run, "dialogues", "Dialogue JSONL");
  run_flags.add(run, "script", "Generator script JSONL (stub clients)");
  run_flags.add(run, "embeddings", "Embeddings (JSONL or FVEC)");
  run_flags.add(run, "clients", "stub or http");
  run_flags.add(run, "seed", "Seed for stub providers");
  run_flags.add(run, "tau", "Similarity threshold in (0, 1]");
  run_flags.add(run, "parallel", "Dialogues processed concurrently");
  run->add_option("--out", run_out, "Output transcript JSONL")->required();

  // eval
  Overrides eval_flags;
  std::string eval_kind, gold, pred, metric, field, report;
  CLI::App* eval = app.add_subcommand("eval", "Score predictions against gold data");
  eval->add_option("kind", eval_kind, "pair-f1 | cite-acc | consistency | text | intent")
      ->required()
      ->check(CLI::IsMember({"pair-f1", "cite-acc", "consistency", "text", "intent"}));
  eval->add_option("--gold", gold, "Gold labels JSONL (dialogue JSONL for text)")->required();
  eval->add_option("--pred", pred, "Citation JSONL (pair-f1) or transcript JSONL")->required();
  eval->add_option("--metric", metric, "Text metric: bleu1 | bleu2 | rouge1 | rougeL")
      ->check(CLI::IsMember({"bleu1", "bleu2", "rouge1", "rougeL"}));
  eval->add_option("--field", field, "Text field: text | description")
      ->check(CLI::IsMember({"text", "description"}));
  eval->add_option("--report", report, "Report JSON output");
  eval_flags.add(eval, "dialogues", "Dialogue JSONL (consistency)");
  eval_flags.add(eval, "embeddings", "Embeddings (consistency)");

  // convert
  std::string conv_in, conv_out;
  CLI::App* convert = app.add_subcommand("convert", "Convert embeddings between JSONL and FVEC");
  convert->add_option("--in", conv_in, "Input embeddings")->required();
  convert->add_option("--out", conv_out, "Output path; .fvec selects the binary format")->required();

  // synth
  std::string synth_dir;
  std::uint64_t synth_seed = 0;
  std::size_t synth_count = 10;
  CLI::App* synth = app.add_subcommand("synth", "Write the synthetic demo dataset");
  synth->add_option("--out-dir", synth_dir, "Output directory")->required();
  synth->add_option("--seed", synth_seed, "Dataset seed");
  synth->add_option("--count", synth_count, "Number of dialogues")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    cw_config* raw = nullptr;
    check(cw_config_create(&raw));
    ConfigPtr cfg(raw);
    if (!config_path.empty()) check(cw_config_load_file(cfg.get(), config_path.c_str()));
    check(cw_config_apply_env(cfg.get()));

    if (cite->parsed()) {
      cite_flags.apply(cfg.get(), cite);
      std::size_t n = 0;
      check(cw_cite(cfg.get(), cite_out.c_str(), &n));
      std::cerr << "cited " << n << " dialogues -> " << cite_out << "\n";
    } else if (mask->parsed()) {
      char* text = nullptr;
      check(cw_mask_render(layout.c_str(), causal ? CW_MASK_CAUSAL : CW_MASK_MODULATED,
                           mask_format == "pbm" ? CW_FORMAT_PBM : CW_FORMAT_JSON, &text));
      CwString owned(text);
      const std::string out(text);
      if (mask_out.empty()) std::cout << out;
      else check(cw_write_file(mask_out.c_str(), out.data(), out.size()));
    } else if (run->parsed()) {
      run_flags.apply(cfg.get(), run);
      std::size_t n = 0;
      check(cw_run(cfg.get(), run_out.c_str(), &n));
      std::cerr << "ran " << n << " turns -> " << run_out << "\n";
    } else if (eval->parsed()) {
      eval_flags.apply(cfg.get(), eval);
      char* summary = nullptr;
      check(cw_eval(cfg.get(), eval_kind.c_str(), gold.c_str(), pred.c_str(),
                    metric.empty() ? nullptr : metric.c_str(),
                    field.empty() ? nullptr : field.c_str(),
                    report.empty() ? nullptr : report.c_str(), &summary));
      CwString owned(summary);
      std::cout << summary << "\n";
    } else if (convert->parsed()) {
      std::size_t n = 0;
      check(cw_convert_embeddings(conv_in.c_str(), conv_out.c_str(), &n));
      std::cout << n << "\n";
    } else if (synth->parsed()) {
      check(cw_synth(synth_dir.c_str(), synth_seed, synth_count));
      std::cerr << "wrote " << synth_count << " dialogues to " << synth_dir << "\n";
    }
  } catch (const Exit& e) {
    return e.code;
  }
  return 0;
}
