// Copyright 2026 The citeweave Authors
// SPDX-License-Identifier: Apache-2.0

#include "citeweave/synthetic.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <random>

#include "citeweave/stub_providers.hpp"
#include "citeweave/tag_codec.hpp"

namespace citeweave {

namespace {

constexpr const char* kObjects[] = {"dog",  "cat",    "bicycle", "mug",   "guitar",
                                    "lamp", "teapot", "parrot",  "scarf", "kayak"};
constexpr const char* kDeterminers[] = {"a", "the", "my"};
constexpr const char* kScenes[] = {
    "sitting on a wooden bench", "next to a window", "in the snow",
    "on a sunny beach",          "under a tree",     "in front of a fireplace",
    "on a kitchen table",        "beside a red door"};
constexpr const char* kSmallTalk[] = {
    "how was your weekend?", "that sounds like fun.", "i spent the day outside.",
    "what are you up to today?", "not much, just relaxing.", "we should meet up soon."};

template <typename T, std::size_t N>
const T& pick(std::mt19937_64& rng, const T (&arr)[N]) {
  return arr[rng() % N];
}

// A valid labeling of n >= 3 items with at least one repeat and at least
// two distinct labels.
std::vector<std::uint32_t> draw_labels(std::mt19937_64& rng, std::size_t n) {
  for (;;) {
    std::vector<std::uint32_t> labels{0};
    std::uint32_t next = 1;
    while (labels.size() < n) {
      if (rng() % 2 == 0) labels.push_back(next++);
      else labels.push_back(static_cast<std::uint32_t>(rng() % next));
    }
    if (next >= 2 && next < n) return labels;
  }
}

std::string dialogue_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "syn-%02zu", i + 1);
  return buf;
}

}  // namespace

SyntheticDataset make_synthetic(std::uint64_t seed, std::size_t count, std::size_t dim) {
  SyntheticDataset out;
  for (std::size_t di = 0; di < count; ++di) {
    const std::string id = dialogue_name(di);
    std::mt19937_64 rng(seed ^ fnv1a64(id));

    const std::size_t n_turns = 4 + rng() % 4;
    const std::size_t n_images = 3 + rng() % (n_turns - 2);
    std::vector<std::size_t> turn_order(n_turns);
    std::iota(turn_order.begin(), turn_order.end(), 0);
    std::shuffle(turn_order.begin(), turn_order.end(), rng);
    std::vector<bool> has_image(n_turns, false);
    for (std::size_t k = 0; k < n_images; ++k) has_image[turn_order[k]] = true;

    const std::vector<std::uint32_t> labels = draw_labels(rng, n_images);
    const std::uint32_t n_objects = *std::max_element(labels.begin(), labels.end()) + 1;
    std::vector<std::string> words;
    std::vector<std::string> groups;
    for (std::uint32_t c = 0; c < n_objects; ++c) {
      // Every third object reuses an earlier word: a second, different dog.
      if (c > 0 && rng() % 3 == 0) words.push_back(words[rng() % c]);
      else words.push_back(pick(rng, kObjects));
      groups.push_back(id + "#" + std::to_string(c));
    }
    const ConstructedGeometry geometry(seed ^ fnv1a64(id + "/geometry"), dim, groups);

    Dialogue d{id, {}};
    EvalRecord rec{id, labels, {}};
    std::vector<bool> seen(n_objects, false);
    std::size_t k = 0;
    for (std::size_t t = 0; t < n_turns; ++t) {
      Turn turn;
      turn.index = static_cast<std::uint32_t>(t + 1);
      turn.speaker = t % 2 == 0 ? Speaker::kA : Speaker::kB;
      rec.image_intent.push_back(has_image[t]);
      if (!has_image[t]) {
        turn.text = pick(rng, kSmallTalk);
        d.turns.push_back(std::move(turn));
        continue;
      }
      const std::uint32_t c = labels[k];
      const std::string& word = words[c];
      turn.text = seen[c] ? "here is the same " + word + " again." : "let me show you this " + word + ".";
      seen[c] = true;

      const std::string det = pick(rng, kDeterminers);
      const std::string key = id + "/img" + std::to_string(k + 1);
      ImageRecord img;
      img.image_id = key + ".jpg";
      img.description = det + " " + word + " " + pick(rng, kScenes);
      img.embedding_id = key;
      ObjectObservation obs;
      obs.word = word;
      obs.span = {det.size() + 1, det.size() + 1 + word.size()};
      img.object = obs;
      turn.image = std::move(img);
      out.embeddings.emplace(key, geometry.member(groups[c], key));
      d.turns.push_back(std::move(turn));
      ++k;
    }
    validate(d);

    k = 0;
    for (const Turn& turn : d.turns) {
      std::string raw = turn.text;
      if (turn.image) {
        const AugmentedDescription aug{turn.image->description, turn.image->object->span,
                                       labels[k++]};
        raw += std::string(kImgOpen) + encode_augmented(aug) + std::string(kImgClose);
      }
      raw += kTurnEnd;
      if (turn.index >= 2) out.script[id][turn.index] = std::move(raw);
    }
    out.dialogues.push_back(std::move(d));
    out.labels.push_back(std::move(rec));
  }
  return out;
}

void write_synthetic(const std::filesystem::path& dir, const SyntheticDataset& data) {
  std::filesystem::create_directories(dir);
  std::string dialogues, labels;
  for (const Dialogue& d : data.dialogues) dialogues += serialize_dialogue(d) + "\n";
  for (const EvalRecord& r : data.labels) labels += serialize_eval_record(r) + "\n";
  write_file_atomic(dir / "dialogues.jsonl", dialogues);
  write_file_atomic(dir / "embeddings.jsonl", encode_embeddings_jsonl(data.embeddings));
  write_file_atomic(dir / "labels.jsonl", labels);
  write_file_atomic(dir / "script.jsonl", serialize_script(data.script));
}

}  // namespace citeweave
