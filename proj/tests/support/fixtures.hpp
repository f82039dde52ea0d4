#pragma once

// hand-built corpora shared across the test binaries

#include <string>
#include <vector>

#include "priorshift/corpus.hpp"

namespace testsupport {

inline priorshift::QaRecord record(std::string id, std::string image,
                                   std::string question, std::string qtype,
                                   std::string answer,
                                   std::vector<std::string> humans = {},
                                   std::vector<std::string> latent = {}) {
  priorshift::QaRecord rec;
  rec.record_id = std::move(id);
  rec.image_id = std::move(image);
  rec.question_text = std::move(question);
  rec.question_type = std::move(qtype);
  rec.ground_truth = priorshift::normalize_answer(answer);
  rec.human_answers = humans.empty() ? std::vector<std::string>{answer} : std::move(humans);
  rec.latent_concepts = std::move(latent);
  return rec;
}

// three groups with one question each: (alpha, x), (beta, x), (gamma, y).
// Greedy walk: (alpha, x) to test, (beta, x) picked for train because it
// shares "x", stop at one third, (gamma, y) left to train.
inline priorshift::Corpus three_group_corpus() {
  priorshift::Corpus corpus;
  corpus.qtypes = priorshift::QuestionTypeList({"alpha", "beta", "gamma"});
  corpus.stopwords = priorshift::StopWordList::default_list();
  corpus.records = {
      record("r1", "i1", "Alpha one?", "alpha", "x"),
      record("r2", "i2", "Beta two?", "beta", "x"),
      record("r3", "i3", "Gamma three?", "gamma", "y"),
  };
  return corpus;
}

inline std::vector<std::size_t> indices(std::size_t n) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  return idx;
}

}  // namespace testsupport
