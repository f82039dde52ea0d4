#include "priorshift/synth.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>

#include <json.hpp>

#include "priorshift/errors.hpp"
#include "priorshift/rng.hpp"

namespace priorshift {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

void validate(const SynthConfig& config) {
  if (config.prior_strength < 0.0 || config.prior_strength > 1.0)
    throw ConfigError("synth: prior strength must lie in [0, 1]");
  if (config.disagreement < 0.0 || config.disagreement > 1.0)
    throw ConfigError("synth: disagreement must lie in [0, 1]");
  if (config.answers_per_record < 1)
    throw ConfigError("synth: answers_per_record must be at least 1");
  if (config.record_count > 0) {
    if (config.qtypes.empty()) throw ConfigError("synth: no question types configured");
    if (config.objects.empty()) throw ConfigError("synth: no objects configured");
    for (const auto& qt : config.qtypes) {
      if (qt.answers.empty())
        throw ConfigError("synth: question type \"" + qt.prefix + "\" has no answers");
      if (!qt.yes_no &&
          std::find(qt.answers.begin(), qt.answers.end(), qt.prior_answer) ==
              qt.answers.end())
        throw ConfigError("synth: prior answer of \"" + qt.prefix +
                          "\" is not in its answer vocabulary");
    }
  }
}

std::string substitute(std::string text, const std::string& key,
                       const std::string& value) {
  if (auto pos = text.find(key); pos != std::string::npos)
    text.replace(pos, key.size(), value);
  return text;
}

// attribute categories = non-yes/no non-object question types
std::vector<std::size_t> attribute_qtype_indices(const SynthConfig& config) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < config.qtypes.size(); ++i)
    if (!config.qtypes[i].yes_no && !config.qtypes[i].object_answers) idx.push_back(i);
  return idx;
}

std::string pick_answer(const SynthQType& qt, double p, std::mt19937_64& gen) {
  if (rng::u01(gen) < p || qt.answers.size() == 1) return qt.prior_answer;
  std::vector<std::string> rest;
  for (const auto& a : qt.answers)
    if (a != qt.prior_answer) rest.push_back(a);
  return rest[rng::below(gen, rest.size())];
}

}  // namespace

SynthConfig default_synth_config(std::size_t record_count, double prior_strength) {
  SynthConfig config;
  config.record_count = record_count;
  config.prior_strength = prior_strength;
  config.objects = {"truck", "plate", "kite",  "chair", "boat",
                    "phone", "shirt", "ball",  "tree",  "bench"};
  config.qtypes = {
      {"what color is the", "{object}?",
       {"white", "black", "red", "blue", "green", "yellow", "brown", "orange"},
       "white"},
      {"what sport is", "the {object} playing?",
       {"tennis", "skiing", "baseball", "soccer", "surfing", "snowboarding"},
       "tennis"},
      {"how many", "{object}s are in the photo?", {"1", "2", "3", "4"}, "2"},
      {"what animal is", "this?",
       {"dog", "cat", "horse", "elephant", "giraffe", "zebra"}, "dog",
       /*yes_no=*/false, /*object_answers=*/true},
      {"is the", "{object} {attr}?", {"yes", "no"}, "no", /*yes_no=*/true},
  };
  return config;
}

SynthConfig synth_config_from_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("synth config not readable: " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw DataError(path.string() + ": JSON parse error: " + e.what());
  }
  SynthConfig config;
  config.record_count = j.value("record_count", std::size_t{0});
  config.prior_strength = j.value("prior_strength", 0.8);
  config.answers_per_record = j.value("answers_per_record", 1);
  config.disagreement = j.value("disagreement", 0.0);
  if (j.contains("objects"))
    config.objects = j["objects"].get<std::vector<std::string>>();
  if (j.contains("qtypes")) {
    for (const auto& q : j["qtypes"]) {
      SynthQType qt;
      qt.prefix = q.at("prefix").get<std::string>();
      qt.question_suffix = q.value("suffix", std::string("{object}?"));
      qt.answers = q.at("answers").get<std::vector<std::string>>();
      qt.prior_answer = q.value("prior", qt.answers.front());
      qt.yes_no = q.value("yes_no", false);
      qt.object_answers = q.value("object_answers", false);
      config.qtypes.push_back(std::move(qt));
    }
  }
  return config;
}

Corpus generate_synthetic_corpus(const SynthConfig& config, std::uint64_t seed) {
  validate(config);
  Corpus corpus;
  std::vector<std::string> prefixes;
  for (const auto& qt : config.qtypes) prefixes.push_back(qt.prefix);
  corpus.qtypes = QuestionTypeList(prefixes);
  corpus.stopwords = StopWordList::default_list();
  if (config.record_count == 0) return corpus;

  const auto attr_idx = attribute_qtype_indices(config);
  // pool feeding {attr} in yes/no questions: first attribute category
  const SynthQType* attr_pool = attr_idx.empty() ? nullptr : &config.qtypes[attr_idx[0]];

  std::mt19937_64 gen(seed);
  corpus.records.reserve(config.record_count);
  char idbuf[32];
  for (std::size_t i = 0; i < config.record_count; ++i) {
    const SynthQType& qt = config.qtypes[rng::below(gen, config.qtypes.size())];
    std::string object = config.objects[rng::below(gen, config.objects.size())];

    // one latent attribute per category; overwritten below where the
    // question pins a value
    std::map<std::size_t, std::string> latent_attr;
    for (std::size_t ai : attr_idx) {
      const auto& answers = config.qtypes[ai].answers;
      latent_attr[ai] = answers[rng::below(gen, answers.size())];
    }

    QaRecord rec;
    std::string answer;
    std::string suffix = qt.question_suffix;
    if (qt.yes_no) {
      if (!attr_pool)
        throw ConfigError("synth: yes/no questions need an attribute category");
      const std::size_t pool_idx = attr_idx[0];
      const std::string attr =
          attr_pool->answers[rng::below(gen, attr_pool->answers.size())];
      answer = pick_answer(qt, config.prior_strength, gen);
      if (answer == "yes") {
        latent_attr[pool_idx] = attr;
      } else if (latent_attr[pool_idx] == attr) {
        // force the latent value away from the asked attribute
        for (const auto& a : attr_pool->answers)
          if (a != attr) {
            latent_attr[pool_idx] = a;
            break;
          }
      }
      suffix = substitute(suffix, "{attr}", attr);
    } else if (qt.object_answers) {
      answer = pick_answer(qt, config.prior_strength, gen);
      object = answer;  // the pictured object is the answer itself
    } else {
      answer = pick_answer(qt, config.prior_strength, gen);
      // the asked category shows the answered value
      for (std::size_t k = 0; k < attr_idx.size(); ++k)
        if (&config.qtypes[attr_idx[k]] == &qt) latent_attr[attr_idx[k]] = answer;
    }
    suffix = substitute(suffix, "{object}", object);

    std::string question = qt.prefix + " " + suffix;
    question[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(question[0])));

    std::snprintf(idbuf, sizeof idbuf, "s%06zu", i);
    rec.record_id = idbuf;
    std::snprintf(idbuf, sizeof idbuf, "i%06zu", i);
    rec.image_id = idbuf;
    rec.question_text = question;
    rec.ground_truth = normalize_answer(answer);
    rec.question_type = qt.prefix;

    rec.human_answers.push_back(answer);
    for (int extra = 1; extra < config.answers_per_record; ++extra) {
      if (rng::u01(gen) < config.disagreement)
        rec.human_answers.push_back(qt.answers[rng::below(gen, qt.answers.size())]);
      else
        rec.human_answers.push_back(answer);
    }

    std::set<std::string> latent;
    latent.insert(object);
    for (const auto& [ai, value] : latent_attr) latent.insert(value);
    rec.latent_concepts.assign(latent.begin(), latent.end());

    corpus.records.push_back(std::move(rec));
  }
  return corpus;
}

EmbeddingTable synthetic_embeddings(const SynthConfig& config) {
  const auto attr_idx = attribute_qtype_indices(config);
  const std::size_t dim = attr_idx.size() + 1;  // one axis each + object axis
  EmbeddingTable table(dim);

  auto place = [&](const std::string& word, std::size_t axis) {
    std::vector<float> vec(dim, 0.0f);
    vec[axis] = 100.0f;
    for (std::size_t d = 0; d < dim; ++d) {
      std::uint64_t h = rng::fnv1a(word + "#" + std::to_string(d));
      vec[d] += static_cast<float>((h % 1000) / 1000.0 - 0.5);
    }
    table.insert(word, std::move(vec));
  };

  for (std::size_t k = 0; k < attr_idx.size(); ++k)
    for (const auto& a : config.qtypes[attr_idx[k]].answers)
      place(normalize_answer(a), k);
  const std::size_t object_axis = attr_idx.size();
  for (const auto& o : config.objects) place(normalize_answer(o), object_axis);
  for (const auto& qt : config.qtypes)
    if (qt.object_answers)
      for (const auto& a : qt.answers) place(normalize_answer(a), object_axis);
  return table;
}

void save_synth_metadata(const SynthConfig& config, std::uint64_t seed,
                         const std::filesystem::path& path) {
  ordered_json j;
  j["seed"] = seed;
  j["prior_strength"] = config.prior_strength;
  j["record_count"] = config.record_count;
  j["answers_per_record"] = config.answers_per_record;
  j["disagreement"] = config.disagreement;
  j["qtypes"] = ordered_json::array();
  for (const auto& qt : config.qtypes) {
    ordered_json q;
    q["prefix"] = qt.prefix;
    q["answers"] = qt.answers;
    q["prior"] = qt.prior_answer;
    q["yes_no"] = qt.yes_no;
    q["object_answers"] = qt.object_answers;
    j["qtypes"].push_back(std::move(q));
  }
  j["objects"] = config.objects;
  // planted category of every concept: answers by their question type,
  // scene objects under "object"
  ordered_json categories = ordered_json::object();
  std::map<std::string, std::string> cat;
  for (const auto& qt : config.qtypes) {
    if (qt.yes_no) continue;
    const std::string label = qt.object_answers ? "object" : qt.prefix;
    for (const auto& a : qt.answers) cat[normalize_answer(a)] = label;
  }
  for (const auto& o : config.objects) cat[normalize_answer(o)] = "object";
  for (const auto& [word, label] : cat) categories[word] = label;
  j["concept_categories"] = std::move(categories);

  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("output file not writable: " + path.string());
  out << j.dump(2) << '\n';
}

}  // namespace priorshift
