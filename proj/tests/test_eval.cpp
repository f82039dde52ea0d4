#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>

#include "priorshift/errors.hpp"
#include "priorshift/eval.hpp"
#include "priorshift/splitter.hpp"
#include "priorshift/synth.hpp"
#include "support/fixtures.hpp"
#include "support/process.hpp"

using namespace priorshift;
using testsupport::TempDir;

TEST_CASE("answer categories follow the hint, then the value") {
  CHECK(categorize_answer("dog", "yes/no") == AnswerCategory::YesNo);
  CHECK(categorize_answer("yes", "number") == AnswerCategory::Number);
  CHECK(categorize_answer("3", "other") == AnswerCategory::Other);
  CHECK(categorize_answer("yes") == AnswerCategory::YesNo);
  CHECK(categorize_answer("no") == AnswerCategory::YesNo);
  CHECK(categorize_answer("0") == AnswerCategory::Number);
  CHECK(categorize_answer("42") == AnswerCategory::Number);
  CHECK(categorize_answer("two") == AnswerCategory::Number);
  CHECK(categorize_answer("ten") == AnswerCategory::Number);
  CHECK(categorize_answer("zero") == AnswerCategory::Number);
  CHECK(categorize_answer("eleven") == AnswerCategory::Other);
  CHECK(categorize_answer("two dogs") == AnswerCategory::Other);
  CHECK(categorize_answer("3.5") == AnswerCategory::Other);
  CHECK(categorize_answer("dog") == AnswerCategory::Other);
  CHECK(categorize_answer("") == AnswerCategory::Other);
}

TEST_CASE("consensus accuracy caps at three matching humans") {
  for (int m = 0; m <= 5; ++m) {
    std::vector<std::string> humans;
    for (int i = 0; i < m; ++i) humans.push_back("cat");
    while (humans.size() < 10) humans.push_back("dog");
    CHECK(vqa_accuracy("cat", humans) ==
          std::min(static_cast<double>(m) / 3.0, 1.0));
  }
}

TEST_CASE("consensus accuracy normalizes human answers") {
  CHECK(vqa_accuracy("yes", {"Yes ", "no"}) == doctest::Approx(1.0 / 3.0));
  CHECK(vqa_accuracy("dogs", {"Dogs!"}) == 1.0);  // single answer: exact match
  CHECK(vqa_accuracy("dog", {"Dogs!"}) == 0.0);
  CHECK_THROWS_AS(vqa_accuracy("dog", {}), DataError);
}

namespace {

// multiset mode and ground-truth mode disagree: gt favors cat, humans favor dog
Corpus prior_fixture() {
  Corpus corpus;
  corpus.records = {
      testsupport::record("1", "i", "Q?", "pet", "cat"),
      testsupport::record("2", "i", "Q?", "pet", "cat"),
      testsupport::record("3", "i", "Q?", "pet", "dog",
                          {"dog", "dog", "dog", "dog", "dog"}),
      testsupport::record("4", "i", "Q?", "color", "white", {"white", "black"}),
      testsupport::record("5", "i", "Q?", "color", "black"),
  };
  return corpus;
}

}  // namespace

TEST_CASE("prior fitting counts multisets or ground truths") {
  const Corpus corpus = prior_fixture();
  const auto idx = testsupport::indices(corpus.records.size());

  const PriorModel on_humans = fit_prior(corpus, idx, PriorMode::PerQtype, true);
  CHECK(on_humans.per_qtype.at("pet") == "dog");  // 5 dog vs 2 cat
  const PriorModel on_gt = fit_prior(corpus, idx, PriorMode::PerQtype, false);
  CHECK(on_gt.per_qtype.at("pet") == "cat");  // 2 cat vs 1 dog

  // color multiset is {white, black, black}: black wins; on gt it ties 1-1
  // and the lexicographically first answer is kept
  CHECK(on_humans.per_qtype.at("color") == "black");
  CHECK(on_gt.per_qtype.at("color") == "black");
}

TEST_CASE("prior fitting ignores train order") {
  const Corpus corpus = prior_fixture();
  auto idx = testsupport::indices(corpus.records.size());
  const PriorModel a = fit_prior(corpus, idx, PriorMode::PerQtype);
  std::mt19937_64 gen(3);
  for (int trial = 0; trial < 5; ++trial) {
    std::shuffle(idx.begin(), idx.end(), gen);
    const PriorModel b = fit_prior(corpus, idx, PriorMode::PerQtype);
    CHECK(a.per_qtype == b.per_qtype);
    CHECK(a.global_answer == b.global_answer);
  }
}

TEST_CASE("prior prediction falls back to the global answer") {
  const Corpus corpus = prior_fixture();
  const auto idx = testsupport::indices(corpus.records.size());
  const PriorModel model = fit_prior(corpus, idx, PriorMode::PerQtype);
  CHECK(model.global_answer == "dog");  // 5 of 10 counted answers

  QaRecord seen = corpus.records[0];
  CHECK(predict_prior(model, seen) == "dog");
  QaRecord unseen = seen;
  unseen.question_type = "weather";
  CHECK(predict_prior(model, unseen) == "dog");

  const PriorModel global = fit_prior(corpus, idx, PriorMode::Global);
  CHECK(predict_prior(global, seen) == "dog");
  CHECK(predict_prior(global, unseen) == "dog");
}

TEST_CASE("prediction files load in both layouts") {
  TempDir dir("preds");
  testsupport::write_file(dir / "modelA.jsonl",
                          "{\"id\": \"r1\", \"answer\": \"Dog\"}\n"
                          "\n"
                          "{\"id\": 12, \"answer\": \"Yes \"}\n");
  const PredictionFile jsonl = load_predictions(dir / "modelA.jsonl");
  CHECK(jsonl.model_name == "modelA");
  CHECK(jsonl.answers.at("r1") == "dog");
  CHECK(jsonl.answers.at("12") == "yes");

  testsupport::write_file(dir / "modelB.json",
                          "[{\"question_id\": 7, \"answer\": \"Blue\"},\n"
                          " {\"question_id\": \"r9\", \"answer\": \"2\"}]\n");
  const PredictionFile arr = load_predictions(dir / "modelB.json");
  CHECK(arr.model_name == "modelB");
  CHECK(arr.answers.at("7") == "blue");
  CHECK(arr.answers.at("r9") == "2");
}

TEST_CASE("prediction files reject malformed input") {
  TempDir dir("badpreds");
  testsupport::write_file(dir / "a.jsonl",
                          "{\"id\": \"r1\", \"answer\": \"x\"}\n"
                          "not json\n");
  CHECK_THROWS_WITH_AS(load_predictions(dir / "a.jsonl"),
                       doctest::Contains("line 2"), DataError);
  testsupport::write_file(dir / "b.jsonl", "{\"id\": \"r1\"}\n");
  CHECK_THROWS_AS(load_predictions(dir / "b.jsonl"), DataError);
  testsupport::write_file(dir / "c.json", "[{\"question_id\": 1}]\n");
  CHECK_THROWS_AS(load_predictions(dir / "c.json"), DataError);
  CHECK_THROWS_AS(load_predictions(dir / "missing.jsonl"), ConfigError);
}

namespace {

Corpus eval_fixture() {
  Corpus corpus;
  std::vector<std::string> ten_yes(10, "yes");
  std::vector<std::string> mostly_two(9, "2");
  mostly_two.push_back("3");
  corpus.records = {
      testsupport::record("y1", "i", "Is it?", "is it", "yes", ten_yes),
      testsupport::record("n1", "i", "How many?", "how many", "2", mostly_two),
      testsupport::record("o1", "i", "What?", "what", "dog"),
      testsupport::record("o2", "i", "What?", "what", "cat"),
  };
  return corpus;
}

}  // namespace

TEST_CASE("evaluation scores per category and counts misses") {
  const Corpus corpus = eval_fixture();
  PredictionFile preds;
  preds.answers = {{"y1", "yes"}, {"n1", "3"}, {"o1", "dog"}};  // o2 missing

  const ScoreBreakdown b = evaluate(preds, corpus, testsupport::indices(4));
  CHECK(b.total == 4);
  CHECK(b.yes_no_count == 1);
  CHECK(b.number_count == 1);
  CHECK(b.other_count == 2);
  CHECK(b.missing_predictions == 1);
  CHECK(b.yes_no == doctest::Approx(100.0));
  CHECK(b.number == doctest::Approx(100.0 / 3.0));  // one of ten humans said 3
  CHECK(b.other == doctest::Approx(50.0));          // missing answer scores zero
  CHECK(b.overall == doctest::Approx(100.0 * (1.0 + 1.0 / 3.0 + 1.0) / 4.0));
}

TEST_CASE("evaluation rejects unknown ids and strict misses") {
  const Corpus corpus = eval_fixture();
  PredictionFile stray;
  stray.answers = {{"zz", "x"}, {"aa", "y"}, {"y1", "yes"}};
  CHECK_THROWS_WITH_AS(evaluate(stray, corpus, testsupport::indices(4)),
                       doctest::Contains("unknown record ids: aa zz"), DataError);

  PredictionFile partial;
  partial.answers = {{"y1", "yes"}};
  CHECK_THROWS_WITH_AS(
      evaluate(partial, corpus, testsupport::indices(4), true),
      doctest::Contains("missing prediction for record id"), DataError);
}

TEST_CASE("category means recombine into the overall score") {
  const Corpus corpus = generate_synthetic_corpus(default_synth_config(600, 0.8), 11);
  const SplitRecords split = iid_split(corpus, 1.0 / 3.0, 2);
  const PriorModel prior = fit_prior(corpus, split.train, PriorMode::PerQtype);
  PredictionFile preds;
  preds.model_name = "prior";
  for (std::size_t i : split.test)
    preds.answers[corpus.records[i].record_id] =
        predict_prior(prior, corpus.records[i]);

  const ScoreBreakdown b = evaluate(preds, corpus, split.test);
  CHECK(b.total == split.test.size());
  CHECK(b.yes_no_count + b.number_count + b.other_count == b.total);
  const double recombined = b.yes_no * static_cast<double>(b.yes_no_count) +
                            b.number * static_cast<double>(b.number_count) +
                            b.other * static_cast<double>(b.other_count);
  CHECK(b.overall * static_cast<double>(b.total) ==
        doctest::Approx(recombined).epsilon(1e-9));
}

TEST_CASE("records without humans fall back to exact ground truth match") {
  Corpus corpus;
  QaRecord bare;
  bare.record_id = "b1";
  bare.image_id = "i";
  bare.question_text = "Q?";
  bare.question_type = "what";
  bare.ground_truth = "dog";
  corpus.records = {bare};
  PredictionFile hit, miss;
  hit.answers = {{"b1", "dog"}};
  miss.answers = {{"b1", "cat"}};
  CHECK(evaluate(hit, corpus, {0}).overall == doctest::Approx(100.0));
  CHECK(evaluate(miss, corpus, {0}).overall == doctest::Approx(0.0));
}

TEST_CASE("score table layout is frozen") {
  ScoreBreakdown b;
  b.overall = 12.5;
  b.yes_no = 100.0;
  b.number = 0.0;
  b.other = 33.333333;
  const std::string table = format_score_table({{"m", b}});
  CHECK(table ==
        "Model   Overall    Yes/No    Number     Other\n"
        "m         12.50    100.00      0.00     33.33\n");

  // long names widen the first column, keeping the grid aligned
  const std::string wide = format_score_table({{"prior_per_qtype", b}, {"m", b}});
  const auto first_newline = wide.find('\n');
  const auto second_newline = wide.find('\n', first_newline + 1);
  CHECK(first_newline == second_newline - first_newline - 1);
  CHECK(wide.rfind("Model ", 0) == 0);
  CHECK(wide.find("prior_per_qtype ") != std::string::npos);
}
