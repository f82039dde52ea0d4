#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "priorshift/corpus.hpp"

namespace priorshift {

struct AnswerDistribution {
  std::string qtype;
  std::map<std::string, double> weights;  // sums to 1
  std::size_t support_count = 0;          // records behind the distribution
};

AnswerDistribution answer_distribution(const Corpus& corpus,
                                       const std::vector<std::size_t>& record_idx,
                                       const std::string& qtype);

// 1/2 sum |p - q| over the union of supports
double total_variation(const AnswerDistribution& a, const AnswerDistribution& b);

struct QtypeShift {
  std::string qtype;
  std::optional<AnswerDistribution> train, test;
  double tv = 0.0;
  bool one_sided = false;  // qtype present on one side only; tv forced to 1
  std::size_t question_count = 0;
};

struct ShiftReport {
  std::vector<QtypeShift> per_qtype;  // descending question count, ties lex
  double mean_tv = 0.0;               // weighted by question count
  double median_tv = 0.0;
  std::size_t sampled_questions = 0;  // 0 when computed on the full corpus
};

ShiftReport shift_report(const Corpus& corpus,
                         const std::vector<std::size_t>& train_idx,
                         const std::vector<std::size_t>& test_idx,
                         std::optional<std::size_t> sample_size = std::nullopt,
                         std::uint64_t seed = 0);

// one row per (qtype, answer, split, weight); header included
std::string render_report_csv(const ShiftReport& report);

// static self-contained bar charts, top answers per side; byte-stable
std::string render_report_svg(const ShiftReport& report, std::size_t top_answers = 5);

void save_report_json(const ShiftReport& report, const std::filesystem::path& path);

}  // namespace priorshift
