#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "priorshift/corpus.hpp"

namespace priorshift {

struct GroupKey {
  std::string qtype;
  std::string answer;
  auto operator<=>(const GroupKey&) const = default;
};

struct Group {
  GroupKey key;
  std::vector<std::size_t> records;  // corpus indices, ascending
  WordSet concepts;                  // tokenize_concepts(qtype + " " + answer)
  std::size_t question_count = 0;
  std::size_t first_pos = 0;  // first appearance of the key in the corpus
};

struct GroupSet {
  std::vector<Group> groups;  // lexicographic key order
  std::size_t total_questions = 0;
  std::vector<std::size_t> quarantined;  // records with an empty ground truth
};

GroupSet build_groups(const Corpus& corpus);
WordSet group_concepts(const std::string& qtype, const std::string& answer,
                       const StopWordList& stopwords);

enum class Split { Train, Test };
enum class IterOrder { Lex, Input };

struct TraceEntry {
  std::size_t step = 0;
  GroupKey key;
  std::string action;  // "test" | "train_pick" | "train_rest"
  std::size_t covered = 0;
  std::size_t uncovered_after = 0;
};

struct CoverageStats {
  double question_concept_coverage = 1.0;
  double answer_topk_coverage = 1.0;
  double test_fraction = 0.0;
  std::size_t train_questions = 0, test_questions = 0;
  std::size_t train_images = 0, test_images = 0;
  std::size_t train_answer_instances = 0, test_answer_instances = 0;
  std::size_t image_overlap = 0;
};

struct SplitAssignment {
  std::map<GroupKey, Split> assignment;
  std::vector<TraceEntry> trace;
  CoverageStats stats;
};

struct SplitRecords {
  std::vector<std::size_t> train, test;  // corpus indices, ascending
};

struct ResplitOptions {
  double target_test_fraction = 1.0 / 3.0;
  IterOrder order = IterOrder::Lex;
  std::size_t top_k = 1000;  // answer coverage horizon
};

// smallest integer t with t >= target * total
std::size_t test_question_threshold(double target, std::size_t total);

// Greedy changing-priors re-split. Walks groups in iteration order; each step
// sends the current unassigned group to TEST, then moves the unassigned group
// covering the most still-uncovered concepts to TRAIN (ties: smallest key).
// Stops once TEST holds at least ceil(target * total) questions; leftovers go
// to TRAIN. Deterministic, no randomness anywhere.
SplitAssignment greedy_resplit(const GroupSet& groups, const Corpus& corpus,
                               const ResplitOptions& options = {});

SplitRecords derive_records(const GroupSet& groups, const SplitAssignment& assignment);

// record-level shuffle split that preserves answer priors
SplitRecords iid_split(const Corpus& corpus, double target_test_fraction,
                       std::uint64_t seed);

// keys whose (qtype, ground_truth) appear on both sides; empty means disjoint
std::vector<GroupKey> verify_disjointness(const Corpus& corpus,
                                          const std::vector<std::size_t>& train_idx,
                                          const std::vector<std::size_t>& test_idx);

// |unique test question words also seen in train| / |unique test question
// words|, stop words removed; 1.0 when the test side has no concept words
double question_concept_coverage(const Corpus& corpus,
                                 const std::vector<std::size_t>& train_idx,
                                 const std::vector<std::size_t>& test_idx);

// fraction of test records whose ground truth is among the k most frequent
// train ground truths (ties at the k boundary: lexicographic)
double answer_topk_coverage(const Corpus& corpus,
                            const std::vector<std::size_t>& train_idx,
                            const std::vector<std::size_t>& test_idx, std::size_t k);

CoverageStats compute_coverage_stats(const Corpus& corpus,
                                     const std::vector<std::size_t>& train_idx,
                                     const std::vector<std::size_t>& test_idx,
                                     std::size_t top_k);

// everything export_split needs to write a split directory
struct SplitOutcome {
  std::string mode;  // "cp" | "iid"
  SplitRecords records;
  CoverageStats stats;
  std::optional<SplitAssignment> assignment;  // cp only
  std::vector<std::size_t> quarantined;
  double target_test_fraction = 1.0 / 3.0;
  std::size_t top_k = 1000;
  std::string order = "lex";
  std::uint64_t seed = 0;
  std::uint64_t stopword_hash = 0;
};

// writes train.jsonl, test.jsonl, assignment.json, stats.json
void export_split(const Corpus& corpus, const SplitOutcome& outcome,
                  const std::filesystem::path& out_dir);

struct LoadedSplit {
  Corpus corpus;  // train records first, then test records
  std::vector<std::size_t> train_idx, test_idx;
};

LoadedSplit load_split_dir(const std::filesystem::path& dir,
                           const QuestionTypeList& qtypes = QuestionTypeList(),
                           const StopWordList& stopwords = StopWordList::default_list());

}  // namespace priorshift
