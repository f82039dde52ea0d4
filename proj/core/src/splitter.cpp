#include "priorshift/splitter.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <queue>
#include <random>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "priorshift/errors.hpp"
#include "priorshift/rng.hpp"

namespace priorshift {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

}  // namespace

WordSet group_concepts(const std::string& qtype, const std::string& answer,
                       const StopWordList& stopwords) {
  return tokenize_concepts(qtype + " " + answer, stopwords);
}

GroupSet build_groups(const Corpus& corpus) {
  GroupSet set;
  std::map<GroupKey, Group> by_key;
  for (std::size_t i = 0; i < corpus.records.size(); ++i) {
    const QaRecord& rec = corpus.records[i];
    if (rec.ground_truth.empty()) {
      set.quarantined.push_back(i);
      continue;
    }
    GroupKey key{rec.question_type, rec.ground_truth};
    auto [it, inserted] = by_key.try_emplace(key);
    if (inserted) {
      it->second.key = key;
      it->second.concepts = group_concepts(key.qtype, key.answer, corpus.stopwords);
      it->second.first_pos = i;
    }
    it->second.records.push_back(i);
    ++it->second.question_count;
  }
  set.groups.reserve(by_key.size());
  for (auto& [key, group] : by_key) {
    set.total_questions += group.question_count;
    set.groups.push_back(std::move(group));
  }
  return set;
}

std::size_t test_question_threshold(double target, std::size_t total) {
  const double product = target * static_cast<double>(total);
  auto t = static_cast<std::size_t>(std::ceil(product));
  while (t > 0 && static_cast<double>(t - 1) >= product) --t;
  while (static_cast<double>(t) < product) ++t;
  return t;
}

SplitAssignment greedy_resplit(const GroupSet& groups, const Corpus& corpus,
                               const ResplitOptions& options) {
  if (groups.groups.empty())
    throw ConfigError("greedy_resplit: no groups (empty corpus?)");
  if (!(options.target_test_fraction > 0.0 && options.target_test_fraction < 1.0))
    throw ConfigError("greedy_resplit: target test fraction must lie in (0, 1)");
  if (options.top_k == 0)
    throw ConfigError("greedy_resplit: top-k must be positive");

  const std::size_t n = groups.groups.size();

  // iteration order; groups are already in lexicographic key order
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  if (options.order == IterOrder::Input)
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return groups.groups[a].first_pos < groups.groups[b].first_pos;
    });

  // intern concepts and build the concept -> groups index
  std::unordered_map<std::string, std::uint32_t> concept_ids;
  std::vector<std::vector<std::uint32_t>> group_concept_ids(n);
  std::vector<std::vector<std::uint32_t>> postings;
  for (std::size_t g = 0; g < n; ++g) {
    for (const auto& word : groups.groups[g].concepts) {
      auto [it, inserted] =
          concept_ids.try_emplace(word, static_cast<std::uint32_t>(concept_ids.size()));
      if (inserted) postings.emplace_back();
      group_concept_ids[g].push_back(it->second);
      postings[it->second].push_back(static_cast<std::uint32_t>(g));
    }
  }

  enum : int { kUnassigned = 0, kTest = 1, kTrain = 2 };
  std::vector<int> state(n, kUnassigned);
  std::vector<std::size_t> covered_count(n, 0);  // |concepts ∩ uncovered|
  std::vector<bool> uncovered(concept_ids.size(), false);
  std::vector<bool> train_covered(concept_ids.size(), false);
  std::size_t uncovered_size = 0;

  // lazy max-heap over (covered count, lexicographic rank); stale entries are
  // skipped on pop. Group index doubles as the lexicographic rank.
  using HeapEntry = std::pair<std::size_t, std::size_t>;  // (count, n-1-g)
  std::priority_queue<HeapEntry> heap;
  auto push_group = [&](std::size_t g) { heap.emplace(covered_count[g], n - 1 - g); };
  for (std::size_t g = 0; g < n; ++g) push_group(g);

  const std::size_t threshold =
      test_question_threshold(options.target_test_fraction, groups.total_questions);
  std::size_t test_questions = 0;
  std::size_t assigned = 0;
  SplitAssignment result;
  std::size_t step = 0;

  for (std::size_t pos = 0; pos < n && assigned < n; ++pos) {
    const std::size_t current = order[pos];
    if (state[current] != kUnassigned) continue;
    state[current] = kTest;
    ++assigned;
    test_questions += groups.groups[current].question_count;
    std::size_t added = 0;
    for (std::uint32_t cid : group_concept_ids[current]) {
      if (train_covered[cid] || uncovered[cid]) continue;
      uncovered[cid] = true;
      ++uncovered_size;
      ++added;
      for (std::uint32_t h : postings[cid])
        if (state[h] == kUnassigned) {
          ++covered_count[h];
          push_group(h);
        }
    }
    result.trace.push_back({step++, groups.groups[current].key, "test", added,
                            uncovered_size});

    if (assigned < n) {
      std::size_t best;
      while (true) {
        auto [count, rank] = heap.top();
        best = n - 1 - rank;
        if (state[best] == kUnassigned && covered_count[best] == count) break;
        heap.pop();
      }
      state[best] = kTrain;
      ++assigned;
      const std::size_t covered = covered_count[best];
      for (std::uint32_t cid : group_concept_ids[best]) {
        if (train_covered[cid]) continue;
        train_covered[cid] = true;
        if (uncovered[cid]) {
          uncovered[cid] = false;
          --uncovered_size;
          for (std::uint32_t h : postings[cid])
            if (state[h] == kUnassigned) {
              --covered_count[h];
              push_group(h);
            }
        }
      }
      result.trace.push_back({step++, groups.groups[best].key, "train_pick", covered,
                              uncovered_size});
    }

    if (test_questions >= threshold) break;
  }

  // leftovers belong to train
  for (std::size_t g = 0; g < n; ++g) {
    if (state[g] != kUnassigned) continue;
    state[g] = kTrain;
    for (std::uint32_t cid : group_concept_ids[g]) {
      train_covered[cid] = true;
      if (uncovered[cid]) {
        uncovered[cid] = false;
        --uncovered_size;
      }
    }
    result.trace.push_back({step++, groups.groups[g].key, "train_rest", 0,
                            uncovered_size});
  }

  for (std::size_t g = 0; g < n; ++g)
    result.assignment[groups.groups[g].key] = state[g] == kTest ? Split::Test : Split::Train;

  const SplitRecords records = derive_records(groups, result);
  result.stats = compute_coverage_stats(corpus, records.train, records.test, options.top_k);
  return result;
}

SplitRecords derive_records(const GroupSet& groups, const SplitAssignment& assignment) {
  SplitRecords records;
  for (const auto& group : groups.groups) {
    auto it = assignment.assignment.find(group.key);
    if (it == assignment.assignment.end())
      throw DataError("derive_records: group without an assignment: " + group.key.qtype +
                      " | " + group.key.answer);
    auto& side = it->second == Split::Test ? records.test : records.train;
    side.insert(side.end(), group.records.begin(), group.records.end());
  }
  std::sort(records.train.begin(), records.train.end());
  std::sort(records.test.begin(), records.test.end());
  return records;
}

SplitRecords iid_split(const Corpus& corpus, double target_test_fraction,
                       std::uint64_t seed) {
  if (!(target_test_fraction > 0.0 && target_test_fraction < 1.0))
    throw ConfigError("iid_split: target test fraction must lie in (0, 1)");
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < corpus.records.size(); ++i)
    if (!corpus.records[i].ground_truth.empty()) idx.push_back(i);
  std::mt19937_64 gen(seed);
  rng::shuffle(idx, gen);
  const std::size_t test_count = test_question_threshold(target_test_fraction, idx.size());
  SplitRecords records;
  records.test.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(test_count));
  records.train.assign(idx.begin() + static_cast<std::ptrdiff_t>(test_count), idx.end());
  std::sort(records.train.begin(), records.train.end());
  std::sort(records.test.begin(), records.test.end());
  return records;
}

std::vector<GroupKey> verify_disjointness(const Corpus& corpus,
                                          const std::vector<std::size_t>& train_idx,
                                          const std::vector<std::size_t>& test_idx) {
  std::set<GroupKey> train_keys;
  for (std::size_t i : train_idx) {
    const QaRecord& rec = corpus.records.at(i);
    if (!rec.ground_truth.empty())
      train_keys.insert({rec.question_type, rec.ground_truth});
  }
  std::set<GroupKey> violations;
  for (std::size_t i : test_idx) {
    const QaRecord& rec = corpus.records.at(i);
    if (rec.ground_truth.empty()) continue;
    GroupKey key{rec.question_type, rec.ground_truth};
    if (train_keys.count(key)) violations.insert(key);
  }
  return {violations.begin(), violations.end()};
}

namespace {

std::unordered_set<std::string> side_question_words(const Corpus& corpus,
                                                    const std::vector<std::size_t>& idx) {
  std::unordered_set<std::string> words;
  for (std::size_t i : idx)
    for (auto& w : split_words(corpus.records.at(i).question_text))
      if (!corpus.stopwords.contains(w)) words.insert(std::move(w));
  return words;
}

}  // namespace

double question_concept_coverage(const Corpus& corpus,
                                 const std::vector<std::size_t>& train_idx,
                                 const std::vector<std::size_t>& test_idx) {
  const auto test_words = side_question_words(corpus, test_idx);
  if (test_words.empty()) return 1.0;
  const auto train_words = side_question_words(corpus, train_idx);
  std::size_t shared = 0;
  for (const auto& w : test_words)
    if (train_words.count(w)) ++shared;
  return static_cast<double>(shared) / static_cast<double>(test_words.size());
}

double answer_topk_coverage(const Corpus& corpus,
                            const std::vector<std::size_t>& train_idx,
                            const std::vector<std::size_t>& test_idx, std::size_t k) {
  if (k == 0) throw ConfigError("answer_topk_coverage: k must be positive");
  if (test_idx.empty()) return 1.0;
  const auto ranked = ranked_answers(corpus, train_idx);
  std::unordered_set<std::string> top;
  for (std::size_t i = 0; i < ranked.size() && i < k; ++i) top.insert(ranked[i].first);
  std::size_t covered = 0;
  for (std::size_t i : test_idx)
    if (top.count(corpus.records.at(i).ground_truth)) ++covered;
  return static_cast<double>(covered) / static_cast<double>(test_idx.size());
}

CoverageStats compute_coverage_stats(const Corpus& corpus,
                                     const std::vector<std::size_t>& train_idx,
                                     const std::vector<std::size_t>& test_idx,
                                     std::size_t top_k) {
  CoverageStats stats;
  stats.question_concept_coverage = question_concept_coverage(corpus, train_idx, test_idx);
  stats.answer_topk_coverage = answer_topk_coverage(corpus, train_idx, test_idx, top_k);
  stats.train_questions = train_idx.size();
  stats.test_questions = test_idx.size();
  const std::size_t total = train_idx.size() + test_idx.size();
  stats.test_fraction =
      total == 0 ? 0.0 : static_cast<double>(test_idx.size()) / static_cast<double>(total);

  std::unordered_set<std::string> train_images, test_images;
  for (std::size_t i : train_idx) {
    const QaRecord& rec = corpus.records.at(i);
    train_images.insert(rec.image_id);
    stats.train_answer_instances +=
        rec.human_answers.empty() ? 1 : rec.human_answers.size();
  }
  for (std::size_t i : test_idx) {
    const QaRecord& rec = corpus.records.at(i);
    test_images.insert(rec.image_id);
    stats.test_answer_instances +=
        rec.human_answers.empty() ? 1 : rec.human_answers.size();
  }
  stats.train_images = train_images.size();
  stats.test_images = test_images.size();
  for (const auto& img : test_images)
    if (train_images.count(img)) ++stats.image_overlap;
  return stats;
}

namespace {

ordered_json stats_json(const CoverageStats& stats, std::size_t quarantined) {
  ordered_json j;
  j["question_concept_coverage"] = stats.question_concept_coverage;
  j["answer_topk_coverage"] = stats.answer_topk_coverage;
  j["test_fraction"] = stats.test_fraction;
  j["train"] = {{"questions", stats.train_questions},
                {"images", stats.train_images},
                {"answer_instances", stats.train_answer_instances}};
  j["test"] = {{"questions", stats.test_questions},
               {"images", stats.test_images},
               {"answer_instances", stats.test_answer_instances}};
  j["image_overlap"] = stats.image_overlap;
  j["quarantined_count"] = quarantined;
  return j;
}

}  // namespace

void export_split(const Corpus& corpus, const SplitOutcome& outcome,
                  const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  save_jsonl_corpus(corpus, outcome.records.train, out_dir / "train.jsonl");
  save_jsonl_corpus(corpus, outcome.records.test, out_dir / "test.jsonl");
  if (!outcome.quarantined.empty())
    save_jsonl_corpus(corpus, outcome.quarantined, out_dir / "quarantined.jsonl");

  char hashbuf[32];
  std::snprintf(hashbuf, sizeof hashbuf, "%016llx",
                static_cast<unsigned long long>(outcome.stopword_hash));
  ordered_json assignment;
  assignment["version"] = 1;
  assignment["mode"] = outcome.mode;
  assignment["params"] = {{"target_test_fraction", outcome.target_test_fraction},
                          {"stopword_hash", std::string(hashbuf)},
                          {"k", outcome.top_k},
                          {"order", outcome.order},
                          {"seed", outcome.seed}};
  assignment["assignment"] = ordered_json::array();
  assignment["trace"] = ordered_json::array();
  if (outcome.assignment) {
    for (const auto& [key, split] : outcome.assignment->assignment)
      assignment["assignment"].push_back(
          {{"qtype", key.qtype},
           {"answer", key.answer},
           {"split", split == Split::Test ? "test" : "train"}});
    for (const auto& entry : outcome.assignment->trace)
      assignment["trace"].push_back({{"step", entry.step},
                                     {"qtype", entry.key.qtype},
                                     {"answer", entry.key.answer},
                                     {"action", entry.action},
                                     {"covered", entry.covered},
                                     {"uncovered", entry.uncovered_after}});
  }
  std::ofstream afile(out_dir / "assignment.json", std::ios::binary);
  if (!afile)
    throw ConfigError("output file not writable: " + (out_dir / "assignment.json").string());
  afile << assignment.dump(2) << '\n';

  std::ofstream sfile(out_dir / "stats.json", std::ios::binary);
  if (!sfile)
    throw ConfigError("output file not writable: " + (out_dir / "stats.json").string());
  sfile << stats_json(outcome.stats, outcome.quarantined.size()).dump(2) << '\n';
}

LoadedSplit load_split_dir(const std::filesystem::path& dir,
                           const QuestionTypeList& qtypes,
                           const StopWordList& stopwords) {
  const auto train_path = dir / "train.jsonl";
  const auto test_path = dir / "test.jsonl";
  if (!std::filesystem::exists(train_path))
    throw ConfigError("split dir is missing train.jsonl: " + dir.string());
  if (!std::filesystem::exists(test_path))
    throw ConfigError("split dir is missing test.jsonl: " + dir.string());

  Corpus train = load_jsonl_corpus(train_path, qtypes, stopwords);
  Corpus test = load_jsonl_corpus(test_path, qtypes, stopwords);

  LoadedSplit split;
  split.corpus.qtypes = train.qtypes;
  split.corpus.stopwords = stopwords;
  split.corpus.records = std::move(train.records);
  for (std::size_t i = 0; i < split.corpus.records.size(); ++i)
    split.train_idx.push_back(i);
  for (auto& rec : test.records) {
    split.test_idx.push_back(split.corpus.records.size());
    split.corpus.records.push_back(std::move(rec));
  }
  return split;
}

}  // namespace priorshift
