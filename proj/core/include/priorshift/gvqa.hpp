#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "priorshift/corpus.hpp"
#include "priorshift/embeddings.hpp"

namespace priorshift {

// ---- question understanding ------------------------------------------------

enum class Route { YesNo, NonYesNo };

// yes/no iff the first token is an auxiliary verb (is/are/do/did/can/...)
Route classify_question(std::string_view question_text);

// question with its matched qtype prefix removed; "__other__" removes nothing
std::string extract_qmain(const std::string& question_text, const std::string& qtype);

// last content word after stripping the leading auxiliary, determiners,
// pronouns and glue words; absent when nothing remains
std::optional<std::string> extract_verification_concept(const std::string& question_text);

// ---- concept vocabulary ----------------------------------------------------

enum class ConceptKind { Object, Attribute };

struct VocabEntry {
  std::string word;
  ConceptKind kind = ConceptKind::Attribute;
  std::size_t frequency = 0;
};

class ConceptVocabulary {
 public:
  ConceptVocabulary() = default;
  ConceptVocabulary(std::vector<VocabEntry> entries, double coverage);

  const std::vector<VocabEntry>& entries() const { return entries_; }
  std::optional<std::size_t> index_of(const std::string& word) const;
  std::size_t size() const { return entries_.size(); }
  double coverage() const { return coverage_; }  // kept / total occurrences

 private:
  std::vector<VocabEntry> entries_;  // frequency desc, then lexicographic
  std::unordered_map<std::string, std::size_t> index_;
  double coverage_ = 0.0;
};

std::vector<std::string> default_object_qtypes();

// most frequent tokens from train answers and Q_main strings; kind is OBJECT
// for tokens answering object-style question types
ConceptVocabulary build_concept_vocabulary(
    const Corpus& corpus, const std::vector<std::size_t>& train_idx,
    std::size_t size = 2000,
    const std::vector<std::string>& object_qtypes = default_object_qtypes());

// ---- answer clusters -------------------------------------------------------

struct ClusterModel {
  int cluster_count = 0;
  std::uint64_t seed = 0;
  std::vector<std::vector<double>> centroids;
  std::map<std::string, int> answer_to_cluster;   // total over the answer classes
  std::map<std::string, int> concept_to_cluster;  // total over the vocabulary
  int object_cluster_id = 0;
  int fallback_cluster_id = 0;  // cluster of the most common clustered answer
  std::vector<std::vector<std::string>> cluster_concepts;  // derived, lex order
};

// top train answers minus yes/no (callers pass ranked classes), clustered by
// embedding; OBJECT concepts collapse into the object cluster, ATTRIBUTE
// concepts map to the nearest centroid
ClusterModel build_cluster_model(const std::vector<std::string>& answer_classes,
                                 const ConceptVocabulary& vocab,
                                 const EmbeddingTable& embeddings, int cluster_count,
                                 std::uint64_t seed);

std::vector<std::string> answer_classes(const Corpus& corpus,
                                        const std::vector<std::size_t>& train_idx,
                                        std::size_t k = 1000);

void save_vocab_json(const ConceptVocabulary& vocab, const std::filesystem::path& path);
void save_cluster_model_json(const ClusterModel& model, const std::filesystem::path& path);

// ---- recognizers -----------------------------------------------------------

using ConceptScores = std::vector<double>;  // parallel to vocab entries, [0,1]

class ConceptRecognizer {
 public:
  virtual ~ConceptRecognizer() = default;
  virtual ConceptScores recognize(const std::string& image_id,
                                  const std::string& qmain) const = 0;
};

// indicator scores over the latent concept sets carried by a corpus
class OracleRecognizer : public ConceptRecognizer {
 public:
  OracleRecognizer(const Corpus& corpus, const ConceptVocabulary& vocab);
  ConceptScores recognize(const std::string& image_id,
                          const std::string& qmain) const override;

 private:
  const ConceptVocabulary* vocab_;
  std::unordered_map<std::string, WordSet> image_concepts_;
};

// flips each score toward a uniform draw with probability epsilon, seeded
class NoisyRecognizer : public ConceptRecognizer {
 public:
  NoisyRecognizer(const ConceptRecognizer& base, double epsilon, std::uint64_t seed);
  ConceptScores recognize(const std::string& image_id,
                          const std::string& qmain) const override;

 private:
  const ConceptRecognizer* base_;
  double epsilon_;
  std::uint64_t seed_;
};

// ---- answer cluster prediction --------------------------------------------

class ClusterPredictor {
 public:
  virtual ~ClusterPredictor() = default;
  virtual int predict(const QaRecord& record) const = 0;
};

// cluster of the record's own ground truth: direct lookup for clustered train
// answers, nearest centroid by embedding otherwise
class OracleClusterPredictor : public ClusterPredictor {
 public:
  OracleClusterPredictor(const ClusterModel& model, const EmbeddingTable* embeddings)
      : model_(&model), embeddings_(embeddings) {}
  int predict(const QaRecord& record) const override;

 private:
  const ClusterModel* model_;
  const EmbeddingTable* embeddings_;
};

// most common answer cluster per train question type, global fallback
class PriorClusterPredictor : public ClusterPredictor {
 public:
  PriorClusterPredictor(const Corpus& corpus, const std::vector<std::size_t>& train_idx,
                        const ClusterModel& model);
  int predict(const QaRecord& record) const override;

 private:
  std::map<std::string, int> per_qtype_;
  int global_ = 0;
};

// ---- training labels and answer selection ---------------------------------

struct VccLabelSet {
  WordSet positives;
  WordSet negatives;  // co-cluster concepts of the positives
  std::set<int> active_clusters;
};

VccLabelSet vcc_training_labels(const QaRecord& record, const ConceptVocabulary& vocab,
                                const ClusterModel& model, const StopWordList& stopwords);

// argmax score among the cluster's vocabulary concepts, ties lexicographic;
// throws DataError("EMPTY_CLUSTER...") when the cluster holds no concepts
std::string predict_answer(const ConceptScores& scores, int cluster_id,
                           const ClusterModel& model, const ConceptVocabulary& vocab);

struct VerifyOutcome {
  std::string answer;  // "yes" | "no"
  bool oov = false;    // concept missing from the vocabulary
};

VerifyOutcome verify_concept(const ConceptScores& scores, const std::string& word,
                             const ConceptVocabulary& vocab, double threshold = 0.5);

// ---- full pipeline ---------------------------------------------------------

struct GvqaTrace {
  std::string record_id;
  Route route = Route::NonYesNo;
  std::string qtype, qmain;
  int cluster_id = -1;  // -1 on the yes/no route
  std::vector<std::pair<std::string, double>> top_scores;
  std::optional<std::string> extracted_concept;  // yes/no route only
  bool concept_oov = false;
  std::string answer;
  std::string error;  // empty when the record was answered
};

GvqaTrace gvqa_answer(const QaRecord& record, const ConceptRecognizer& recognizer,
                      const ClusterPredictor& cluster_predictor,
                      const ClusterModel& model, const ConceptVocabulary& vocab,
                      double verify_threshold = 0.5, std::size_t top_k = 5);

}  // namespace priorshift
