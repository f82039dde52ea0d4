#include "priorshift/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <set>

#include <json.hpp>

#include "priorshift/errors.hpp"
#include "priorshift/rng.hpp"

namespace priorshift {

namespace {

using nlohmann::ordered_json;

std::string fixed(double value, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, value);
  return buf;
}

std::string xml_escape(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

// top answers of a distribution: weight desc, answer asc
std::vector<std::pair<std::string, double>> top_of(const AnswerDistribution& dist,
                                                   std::size_t n) {
  std::vector<std::pair<std::string, double>> entries(dist.weights.begin(),
                                                      dist.weights.end());
  std::stable_sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  if (entries.size() > n) entries.resize(n);
  return entries;
}

}  // namespace

AnswerDistribution answer_distribution(const Corpus& corpus,
                                       const std::vector<std::size_t>& record_idx,
                                       const std::string& qtype) {
  AnswerDistribution dist;
  dist.qtype = qtype;
  for (std::size_t i : record_idx) {
    const QaRecord& rec = corpus.records.at(i);
    if (rec.question_type != qtype || rec.ground_truth.empty()) continue;
    dist.weights[rec.ground_truth] += 1.0;
    ++dist.support_count;
  }
  if (dist.support_count == 0)
    throw DataError("answer_distribution: no records with question type \"" + qtype +
                    "\"");
  for (auto& [answer, weight] : dist.weights)
    weight /= static_cast<double>(dist.support_count);
  return dist;
}

double total_variation(const AnswerDistribution& a, const AnswerDistribution& b) {
  double sum = 0.0;
  auto ai = a.weights.begin();
  auto bi = b.weights.begin();
  while (ai != a.weights.end() || bi != b.weights.end()) {
    if (bi == b.weights.end() || (ai != a.weights.end() && ai->first < bi->first)) {
      sum += ai->second;
      ++ai;
    } else if (ai == a.weights.end() || bi->first < ai->first) {
      sum += bi->second;
      ++bi;
    } else {
      sum += std::fabs(ai->second - bi->second);
      ++ai;
      ++bi;
    }
  }
  return 0.5 * sum;
}

ShiftReport shift_report(const Corpus& corpus,
                         const std::vector<std::size_t>& train_idx,
                         const std::vector<std::size_t>& test_idx,
                         std::optional<std::size_t> sample_size, std::uint64_t seed) {
  std::vector<std::size_t> train = train_idx;
  std::vector<std::size_t> test = test_idx;
  ShiftReport report;
  if (sample_size) {
    std::mt19937_64 gen(seed);
    train = rng::sample_without_replacement(std::move(train), *sample_size, gen);
    test = rng::sample_without_replacement(std::move(test), *sample_size, gen);
    std::sort(train.begin(), train.end());
    std::sort(test.begin(), test.end());
    report.sampled_questions = train.size() + test.size();
  }

  std::set<std::string> qtypes;
  for (std::size_t i : train)
    if (!corpus.records.at(i).ground_truth.empty())
      qtypes.insert(corpus.records.at(i).question_type);
  for (std::size_t i : test)
    if (!corpus.records.at(i).ground_truth.empty())
      qtypes.insert(corpus.records.at(i).question_type);

  for (const auto& qtype : qtypes) {
    QtypeShift shift;
    shift.qtype = qtype;
    try {
      shift.train = answer_distribution(corpus, train, qtype);
    } catch (const DataError&) {
    }
    try {
      shift.test = answer_distribution(corpus, test, qtype);
    } catch (const DataError&) {
    }
    const std::size_t train_n = shift.train ? shift.train->support_count : 0;
    const std::size_t test_n = shift.test ? shift.test->support_count : 0;
    shift.question_count = train_n + test_n;
    if (shift.train && shift.test) {
      shift.tv = total_variation(*shift.train, *shift.test);
    } else {
      shift.tv = 1.0;
      shift.one_sided = true;
    }
    report.per_qtype.push_back(std::move(shift));
  }

  std::stable_sort(report.per_qtype.begin(), report.per_qtype.end(),
                   [](const QtypeShift& a, const QtypeShift& b) {
                     if (a.question_count != b.question_count)
                       return a.question_count > b.question_count;
                     return a.qtype < b.qtype;
                   });

  double weight_sum = 0.0, weighted_tv = 0.0;
  for (const auto& shift : report.per_qtype) {
    weight_sum += static_cast<double>(shift.question_count);
    weighted_tv += static_cast<double>(shift.question_count) * shift.tv;
  }
  report.mean_tv = weight_sum > 0.0 ? weighted_tv / weight_sum : 0.0;

  // weighted median: smallest tv whose cumulative weight reaches half
  std::vector<std::pair<double, double>> by_tv;  // (tv, weight)
  for (const auto& shift : report.per_qtype)
    by_tv.emplace_back(shift.tv, static_cast<double>(shift.question_count));
  std::stable_sort(by_tv.begin(), by_tv.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  double cumulative = 0.0;
  for (const auto& [tv, weight] : by_tv) {
    cumulative += weight;
    if (cumulative >= weight_sum / 2.0) {
      report.median_tv = tv;
      break;
    }
  }
  return report;
}

std::string render_report_csv(const ShiftReport& report) {
  std::string out = "qtype,answer,split,weight\n";
  for (const auto& shift : report.per_qtype) {
    for (const auto* side : {&shift.train, &shift.test}) {
      if (!side->has_value()) continue;
      const char* label = side == &shift.train ? "train" : "test";
      for (const auto& [answer, weight] : (*side)->weights)
        out += shift.qtype + "," + answer + "," + label + "," + fixed(weight, 6) + "\n";
    }
  }
  return out;
}

std::string render_report_svg(const ShiftReport& report, std::size_t top_answers) {
  const int row_h = 16, header_h = 26, block_gap = 18, col_w = 420;
  const int bar_max = 230, label_w = 120, bar_x = label_w + 8;

  int height = 34;
  std::vector<int> block_tops;
  for (const auto& shift : report.per_qtype) {
    block_tops.push_back(height);
    std::size_t rows = 0;
    if (shift.train) rows = std::max(rows, std::min(top_answers, shift.train->weights.size()));
    if (shift.test) rows = std::max(rows, std::min(top_answers, shift.test->weights.size()));
    height += header_h + static_cast<int>(rows) * row_h + block_gap;
  }

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"880\" height=\"" +
         std::to_string(height) + "\" viewBox=\"0 0 880 " + std::to_string(height) +
         "\">\n";
  svg += "<style>text{font-family:sans-serif;font-size:11px;fill:#222}"
         ".h{font-size:13px;font-weight:bold}.s{fill:#666}</style>\n";
  svg += "<rect width=\"880\" height=\"" + std::to_string(height) +
         "\" fill=\"#ffffff\"/>\n";
  svg += "<text class=\"h\" x=\"12\" y=\"20\">answer distributions per question type "
         "(mean tv " + fixed(report.mean_tv, 4) + ", median tv " +
         fixed(report.median_tv, 4) + ")</text>\n";

  for (std::size_t q = 0; q < report.per_qtype.size(); ++q) {
    const auto& shift = report.per_qtype[q];
    const int top = block_tops[q];
    svg += "<text class=\"h\" x=\"12\" y=\"" + std::to_string(top + 14) + "\">" +
           xml_escape(shift.qtype) + "</text>\n";
    svg += "<text class=\"s\" x=\"560\" y=\"" + std::to_string(top + 14) + "\">tv " +
           fixed(shift.tv, 4) + (shift.one_sided ? " (one-sided)" : "") +
           ", n=" + std::to_string(shift.question_count) + "</text>\n";
    for (int side = 0; side < 2; ++side) {
      const auto& dist = side == 0 ? shift.train : shift.test;
      const int x0 = 12 + side * col_w;
      svg += "<text class=\"s\" x=\"" + std::to_string(x0) + "\" y=\"" +
             std::to_string(top + header_h - 2) + "\">" +
             (side == 0 ? "train" : "test") + "</text>\n";
      if (!dist) continue;
      const auto entries = top_of(*dist, top_answers);
      const char* color = side == 0 ? "#4878a8" : "#c2573b";
      for (std::size_t r = 0; r < entries.size(); ++r) {
        const int y = top + header_h + static_cast<int>(r) * row_h;
        const int w =
            std::max(1, static_cast<int>(entries[r].second * bar_max + 0.5));
        svg += "<text x=\"" + std::to_string(x0) + "\" y=\"" + std::to_string(y + 11) +
               "\">" + xml_escape(entries[r].first) + "</text>\n";
        svg += "<rect x=\"" + std::to_string(x0 + bar_x) + "\" y=\"" +
               std::to_string(y + 3) + "\" width=\"" + std::to_string(w) +
               "\" height=\"10\" fill=\"" + color + "\"/>\n";
        svg += "<text class=\"s\" x=\"" + std::to_string(x0 + bar_x + w + 4) +
               "\" y=\"" + std::to_string(y + 11) + "\">" +
               fixed(entries[r].second * 100.0, 1) + "%</text>\n";
      }
    }
  }
  svg += "</svg>\n";
  return svg;
}

void save_report_json(const ShiftReport& report, const std::filesystem::path& path) {
  ordered_json j;
  j["sampled_questions"] = report.sampled_questions;
  j["mean_tv"] = report.mean_tv;
  j["median_tv"] = report.median_tv;
  j["qtypes"] = ordered_json::array();
  for (const auto& shift : report.per_qtype) {
    ordered_json q;
    q["qtype"] = shift.qtype;
    q["question_count"] = shift.question_count;
    q["tv"] = shift.tv;
    q["one_sided"] = shift.one_sided;
    for (const auto* side : {&shift.train, &shift.test}) {
      const char* label = side == &shift.train ? "train" : "test";
      if (side->has_value()) {
        ordered_json d;
        d["support_count"] = (*side)->support_count;
        ordered_json weights = ordered_json::object();
        for (const auto& [answer, weight] : (*side)->weights) weights[answer] = weight;
        d["weights"] = std::move(weights);
        q[label] = std::move(d);
      } else {
        q[label] = nullptr;
      }
    }
    j["qtypes"].push_back(std::move(q));
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("output file not writable: " + path.string());
  out << j.dump(2) << '\n';
}

}  // namespace priorshift
