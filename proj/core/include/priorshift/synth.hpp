#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "priorshift/corpus.hpp"
#include "priorshift/embeddings.hpp"

namespace priorshift {

struct SynthQType {
  std::string prefix;           // question-type string, e.g. "what color is the"
  std::string question_suffix;  // appended after the prefix; {object}/{attr} substituted
  std::vector<std::string> answers;
  std::string prior_answer;     // planted with probability prior_strength
  bool yes_no = false;          // verification questions answered yes/no
  bool object_answers = false;  // answers name the pictured object
};

struct SynthConfig {
  std::vector<SynthQType> qtypes;
  std::vector<std::string> objects;
  double prior_strength = 0.8;
  std::size_t record_count = 0;
  int answers_per_record = 1;
  double disagreement = 0.0;  // chance an extra annotator answers off-script
};

SynthConfig default_synth_config(std::size_t record_count, double prior_strength);
SynthConfig synth_config_from_json(const std::filesystem::path& path);

// Deterministic per (config, seed). Every record carries the latent concept
// set of its image: the pictured object plus one attribute per category.
Corpus generate_synthetic_corpus(const SynthConfig& config, std::uint64_t seed);

// Crafted table covering every object and answer word: one axis per attribute
// category plus a shared object axis, centers far apart, per-word jitter.
EmbeddingTable synthetic_embeddings(const SynthConfig& config);

// ground-truth metadata: planted priors and the category of every concept
void save_synth_metadata(const SynthConfig& config, std::uint64_t seed,
                         const std::filesystem::path& path);

}  // namespace priorshift
