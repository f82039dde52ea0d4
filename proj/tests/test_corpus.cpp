#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>

#include "priorshift/corpus.hpp"
#include "priorshift/embeddings.hpp"
#include "priorshift/errors.hpp"
#include "priorshift/text.hpp"
#include "support/fixtures.hpp"
#include "support/process.hpp"

using namespace priorshift;
using testsupport::TempDir;

TEST_CASE("normalize_answer strips punctuation without splitting words") {
  CHECK(normalize_answer("  Black-and-White. ") == "blackandwhite");
  CHECK(normalize_answer("Yes!") == "yes");
  CHECK(normalize_answer("2 ") == "2");
  CHECK(normalize_answer("A \t B") == "a b");
  CHECK(normalize_answer("surfing") == "surfing");
  CHECK(normalize_answer("") == "");
  CHECK(normalize_answer("   ") == "");
  CHECK(normalize_answer("don't") == "dont");
}

TEST_CASE("normalize_answer is idempotent") {
  const char* samples[] = {"  Black-and-White. ", "Yes!", "A \t B", "2 ", "x-1!?",
                           "many  spaces   here", "MIXED case"};
  for (const char* s : samples) {
    const std::string once = normalize_answer(s);
    CHECK(normalize_answer(once) == once);
  }
}

TEST_CASE("split_words lowercases maximal alphanumeric runs") {
  CHECK(split_words("What's on the plate?") ==
        std::vector<std::string>{"what", "s", "on", "the", "plate"});
  CHECK(split_words("") == std::vector<std::string>{});
  CHECK(split_words("a2b c") == std::vector<std::string>{"a2b", "c"});
}

TEST_CASE("tokenize_concepts removes stop words and duplicates") {
  const auto set = tokenize_concepts("What color is the truck? The truck!",
                                     StopWordList::default_list());
  CHECK(set == WordSet{"color", "truck"});
}

TEST_CASE("majority_ground_truth merges normalized forms, ties go lexicographic") {
  CHECK(majority_ground_truth({"Yes", "yes", "no"}) == "yes");
  CHECK(majority_ground_truth({"yes", "no", "yes", "no"}) == "no");
  CHECK(majority_ground_truth({"One!"}) == "one");
  CHECK_THROWS_AS(majority_ground_truth({}), DataError);
}

TEST_CASE("default stop word list holds exactly the documented words") {
  const StopWordList list = StopWordList::default_list();
  const std::set<std::string> expected = {"is", "are", "the", "a",    "an",   "of", "in",
                                          "on", "at",  "to",  "what", "this", "that"};
  CHECK(list.words() == expected);
}

TEST_CASE("stop word hash depends only on the word set") {
  const StopWordList a({"the", "a", "is"});
  const StopWordList b({"is", "the", "a", "the"});
  CHECK(a == b);
  CHECK(a.hash() == b.hash());
  const StopWordList c({"the", "a"});
  CHECK(a.hash() != c.hash());
}

TEST_CASE("stop word list reads files with comments") {
  TempDir dir("stopwords");
  testsupport::write_file(dir / "stop.txt", "# comment\nthe\nis\n\n  a  \n");
  const StopWordList list = StopWordList::from_file(dir / "stop.txt");
  CHECK(list.words() == std::set<std::string>{"the", "is", "a"});
  CHECK_THROWS_AS(StopWordList::from_file(dir / "missing.txt"), ConfigError);
}

TEST_CASE("question type list sorts, lowercases and keeps the fallback") {
  const QuestionTypeList list({"What Color", "what color", "is the"});
  CHECK(list.prefixes() ==
        std::vector<std::string>{"__other__", "is the", "what color"});
  CHECK(QuestionTypeList().prefixes() == std::vector<std::string>{"__other__"});
}

TEST_CASE("assign_question_type picks the longest prefix at a word boundary") {
  const QuestionTypeList list({"what color", "what color is the", "is the"});
  CHECK(assign_question_type("What color is the truck?", list) == "what color is the");
  CHECK(assign_question_type("What color?", list) == "what color");
  CHECK(assign_question_type("What colorful thing?", list) == "__other__");
  CHECK(assign_question_type("Is the dog here?", list) == "is the");
  CHECK(assign_question_type("Who is this?", list) == "__other__");
  CHECK(assign_question_type("", list) == "__other__");
}

TEST_CASE("jsonl corpus loads records and honors explicit fields") {
  TempDir dir("jsonl");
  testsupport::write_file(
      dir / "corpus.jsonl",
      R"({"id": "q1", "image": "i1", "question": "What color is the car?", "answer": "Blue!", "answers": ["red", "red", "blue"]})"
      "\n"
      R"({"id": "q2", "image": "i2", "question": "What sport?", "answers": ["tennis", "golf", "tennis"]})"
      "\n"
      R"({"id": 3, "image": 7, "question": "Is the cat black?", "qtype": "custom", "answer": "no", "answer_type": "yes/no", "concepts": ["cat", "black", "cat"]})"
      "\n");
  const QuestionTypeList qtypes({"what color", "what sport", "is the"});
  const Corpus corpus = load_jsonl_corpus(dir / "corpus.jsonl", qtypes);

  REQUIRE(corpus.records.size() == 3);
  // explicit answer wins over the multiset majority
  CHECK(corpus.records[0].ground_truth == "blue");
  CHECK(corpus.records[0].human_answers == std::vector<std::string>{"red", "red", "blue"});
  CHECK(corpus.records[0].question_type == "what color");
  // majority fills in a missing answer
  CHECK(corpus.records[1].ground_truth == "tennis");
  // numeric ids become strings; explicit qtype and hints survive
  CHECK(corpus.records[2].record_id == "3");
  CHECK(corpus.records[2].image_id == "7");
  CHECK(corpus.records[2].question_type == "custom");
  CHECK(corpus.records[2].answer_type == "yes/no");
  CHECK(corpus.records[2].latent_concepts == std::vector<std::string>{"black", "cat"});
}

TEST_CASE("jsonl loader reports the offending line") {
  TempDir dir("jsonl_bad");
  testsupport::write_file(dir / "bad.jsonl",
                          R"({"id": "q1", "image": "i", "question": "Ok?", "answer": "yes"})"
                          "\nnot json\n");
  try {
    load_jsonl_corpus(dir / "bad.jsonl", QuestionTypeList());
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  CHECK_THROWS_AS(load_jsonl_corpus(dir / "missing.jsonl", QuestionTypeList()),
                  ConfigError);
}

TEST_CASE("jsonl round trip preserves records") {
  TempDir dir("roundtrip");
  Corpus corpus;
  corpus.qtypes = QuestionTypeList({"what color"});
  corpus.records = {
      testsupport::record("q1", "i1", "What color is it?", "what color", "red",
                          {"red", "red", "blue"}, {"red", "truck"}),
      testsupport::record("q2", "i2", "Mystery?", "__other__", "thing"),
  };
  corpus.records[1].answer_type = "other";
  save_jsonl_corpus(corpus, {0, 1}, dir / "out.jsonl");
  const Corpus loaded = load_jsonl_corpus(dir / "out.jsonl", corpus.qtypes);
  REQUIRE(loaded.records.size() == 2);
  CHECK(loaded.records[0] == corpus.records[0]);
  CHECK(loaded.records[1] == corpus.records[1]);
}

TEST_CASE("ranked_answers orders by count then answer") {
  Corpus corpus;
  corpus.records = {
      testsupport::record("1", "i", "Q?", "t", "b"),
      testsupport::record("2", "i", "Q?", "t", "a"),
      testsupport::record("3", "i", "Q?", "t", "b"),
      testsupport::record("4", "i", "Q?", "t", "c"),
      testsupport::record("5", "i", "Q?", "t", "a"),
  };
  const auto ranked = ranked_answers(corpus, testsupport::indices(5));
  REQUIRE(ranked.size() == 3);
  CHECK(ranked[0] == std::pair<std::string, std::size_t>{"a", 2});
  CHECK(ranked[1] == std::pair<std::string, std::size_t>{"b", 2});
  CHECK(ranked[2] == std::pair<std::string, std::size_t>{"c", 1});
}

TEST_CASE("vqa annotation pair loads and cross-checks ids") {
  TempDir dir("vqa");
  testsupport::write_file(dir / "questions.json", R"({
    "questions": [
      {"question_id": 1, "image_id": 10, "question": "What color is the car?"},
      {"question_id": 2, "image_id": 11, "question": "Is the dog small?"}
    ]})");
  testsupport::write_file(dir / "annotations.json", R"({
    "annotations": [
      {"question_id": 1, "image_id": 10, "question_type": "what color",
       "multiple_choice_answer": "Blue",
       "answers": [{"answer": "blue"}, {"answer": "red"}]},
      {"question_id": 2, "image_id": 11, "answer_type": "yes/no",
       "multiple_choice_answer": "yes",
       "answers": [{"answer": "yes"}]}
    ]})");
  const QuestionTypeList qtypes({"what color", "is the"});
  const Corpus corpus =
      load_vqa_annotations(dir / "questions.json", dir / "annotations.json", qtypes);
  REQUIRE(corpus.records.size() == 2);
  CHECK(corpus.records[0].record_id == "1");
  CHECK(corpus.records[0].question_type == "what color");
  CHECK(corpus.records[0].ground_truth == "blue");
  CHECK(corpus.records[0].human_answers == std::vector<std::string>{"blue", "red"});
  // annotation without question_type falls back to prefix assignment
  CHECK(corpus.records[1].question_type == "is the");
  CHECK(corpus.records[1].answer_type == "yes/no");

  // extra annotation with no matching question
  testsupport::write_file(dir / "orphan.json", R"({
    "annotations": [
      {"question_id": 1, "multiple_choice_answer": "blue", "answers": []},
      {"question_id": 2, "multiple_choice_answer": "yes", "answers": []},
      {"question_id": 99, "multiple_choice_answer": "x", "answers": []}
    ]})");
  try {
    load_vqa_annotations(dir / "questions.json", dir / "orphan.json", qtypes);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("annotations without questions") !=
          std::string::npos);
    CHECK(std::string(e.what()).find("99") != std::string::npos);
  }

  // questions the annotation file never mentions
  testsupport::write_file(dir / "short.json", R"({
    "annotations": [
      {"question_id": 1, "multiple_choice_answer": "blue", "answers": []}
    ]})");
  try {
    load_vqa_annotations(dir / "questions.json", dir / "short.json", qtypes);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("questions without annotations") !=
          std::string::npos);
    CHECK(std::string(e.what()).find("2") != std::string::npos);
  }
}

TEST_CASE("embedding table loads, saves and averages phrases") {
  TempDir dir("embed");
  testsupport::write_file(dir / "vec.txt", "b 4 0\na 2 0\na 6 0\n");
  const EmbeddingTable table = EmbeddingTable::load(dir / "vec.txt");
  CHECK(table.dimension() == 2);
  CHECK(table.size() == 2);
  CHECK(table.duplicate_count() == 1);  // the later "a" row wins
  REQUIRE(table.lookup("a"));
  CHECK((*table.lookup("a"))[0] == doctest::Approx(6.0));

  const auto ab = table.phrase_vector("a b");
  REQUIRE(ab);
  CHECK((*ab)[0] == doctest::Approx(5.0));
  const auto with_oov = table.phrase_vector("a missing");
  REQUIRE(with_oov);
  CHECK((*with_oov)[0] == doctest::Approx(6.0));
  CHECK(!table.phrase_vector("missing words"));
  CHECK(!table.lookup("missing"));

  table.save(dir / "saved.txt");
  const std::string saved = testsupport::read_file(dir / "saved.txt");
  CHECK(saved == "a 6.000000 0.000000\nb 4.000000 0.000000\n");

  testsupport::write_file(dir / "ragged.txt", "a 1 2\nb 3\n");
  try {
    EmbeddingTable::load(dir / "ragged.txt");
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  testsupport::write_file(dir / "empty.txt", "");
  CHECK_THROWS_AS(EmbeddingTable::load(dir / "empty.txt"), DataError);
}
