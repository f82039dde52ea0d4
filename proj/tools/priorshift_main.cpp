// priorshift: changing-priors splits, shift analysis, prior baselines and the
// symbolic question answering pipeline, behind one executable.

#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "priorshift/analysis.hpp"
#include "priorshift/corpus.hpp"
#include "priorshift/embeddings.hpp"
#include "priorshift/errors.hpp"
#include "priorshift/eval.hpp"
#include "priorshift/gvqa.hpp"
#include "priorshift/splitter.hpp"
#include "priorshift/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace priorshift;

namespace {

bool use_color() {
  static const bool enabled = [] {
    if (std::getenv("PRIORSHIFT_NO_COLOR") != nullptr) return false;
    return isatty(fileno(stdout)) != 0;
  }();
  return enabled;
}

void note(const std::string& key, const std::string& value) {
  if (use_color())
    std::cout << "\x1b[36m" << key << "\x1b[0m " << value << '\n';
  else
    std::cout << key << ' ' << value << '\n';
}

std::string fmt(double value, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, value);
  return buf;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec && !fs::is_directory(dir))
    throw ConfigError("cannot create output directory: " + dir.string());
}

// every subcommand leaves its invocation next to its outputs
void write_run_config(const fs::path& out_dir, const std::string& subcommand,
                      const std::vector<std::string>& argv) {
  ordered_json j;
  j["tool"] = "priorshift";
  j["version"] = "0.1.0";
  j["subcommand"] = subcommand;
  j["argv"] = argv;
  std::ofstream out(out_dir / "run_config.json", std::ios::binary);
  if (!out)
    throw ConfigError("output file not writable: " +
                      (out_dir / "run_config.json").string());
  out << j.dump(2) << '\n';
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("output file not writable: " + path.string());
  out << text;
}

QuestionTypeList qtypes_from(const std::string& path) {
  if (path.empty()) return QuestionTypeList();
  return QuestionTypeList::from_file(path);
}

StopWordList stopwords_from(const std::string& path) {
  if (path.empty()) return StopWordList::default_list();
  return StopWordList::from_file(path);
}

// ---- synth -----------------------------------------------------------------

struct SynthArgs {
  std::string out_dir;
  std::string config_path;
  std::size_t record_count = 3000;
  double prior_strength = 0.8;
  int answers_per_record = 10;
  double disagreement = 0.1;
  std::uint64_t seed = 7;
};

int run_synth(const SynthArgs& args, const CLI::App& cmd,
              const std::vector<std::string>& argv) {
  SynthConfig config = args.config_path.empty()
                           ? default_synth_config(args.record_count, args.prior_strength)
                           : synth_config_from_json(args.config_path);
  if (!args.config_path.empty()) {
    if (cmd.count("--n")) config.record_count = args.record_count;
    if (cmd.count("--prior-strength")) config.prior_strength = args.prior_strength;
  }
  if (args.config_path.empty() || cmd.count("--answers-per-record"))
    config.answers_per_record = args.answers_per_record;
  if (args.config_path.empty() || cmd.count("--disagreement"))
    config.disagreement = args.disagreement;

  const Corpus corpus = generate_synthetic_corpus(config, args.seed);
  const EmbeddingTable embeddings = synthetic_embeddings(config);

  ensure_dir(args.out_dir);
  const fs::path out(args.out_dir);
  save_jsonl_corpus(corpus, all_record_indices(corpus), out / "corpus.jsonl");
  embeddings.save(out / "embeddings.txt");
  save_synth_metadata(config, args.seed, out / "synth_meta.json");
  write_run_config(out, "synth", argv);

  note("[synth]", "records " + std::to_string(corpus.records.size()) + ", qtypes " +
                      std::to_string(config.qtypes.size()) + ", objects " +
                      std::to_string(config.objects.size()));
  note("[synth]", "embeddings " + std::to_string(embeddings.size()) + " words, dim " +
                      std::to_string(embeddings.dimension()));
  note("[synth]", "wrote " + (out / "corpus.jsonl").string());
  return 0;
}

// ---- split -----------------------------------------------------------------

struct SplitArgs {
  std::string corpus_path, questions_path, annotations_path;
  std::string out_dir;
  std::string qtypes_path, stopwords_path;
  std::string mode = "cp";
  std::string order = "lex";
  double target = 1.0 / 3.0;
  std::size_t top_k = 1000;
  std::uint64_t seed = 7;
};

int run_split(const SplitArgs& args, const std::vector<std::string>& argv) {
  if (args.corpus_path.empty() == args.questions_path.empty())
    throw ConfigError(
        "split: pass either --corpus, or --questions with --annotations");
  if (!args.questions_path.empty() && args.annotations_path.empty())
    throw ConfigError("split: --questions needs --annotations");
  if (args.target <= 0.0 || args.target >= 1.0)
    throw ConfigError("split: --target must lie strictly between 0 and 1");

  const QuestionTypeList qtypes = qtypes_from(args.qtypes_path);
  const StopWordList stopwords = stopwords_from(args.stopwords_path);
  Corpus corpus = args.corpus_path.empty()
                      ? load_vqa_annotations(args.questions_path, args.annotations_path,
                                             qtypes)
                      : load_jsonl_corpus(args.corpus_path, qtypes, stopwords);
  corpus.stopwords = stopwords;

  SplitOutcome outcome;
  outcome.mode = args.mode;
  outcome.target_test_fraction = args.target;
  outcome.top_k = args.top_k;
  outcome.order = args.order;
  outcome.seed = args.seed;
  outcome.stopword_hash = stopwords.hash();

  if (args.mode == "cp") {
    const GroupSet groups = build_groups(corpus);
    ResplitOptions options;
    options.target_test_fraction = args.target;
    options.order = args.order == "input" ? IterOrder::Input : IterOrder::Lex;
    options.top_k = args.top_k;
    SplitAssignment assignment = greedy_resplit(groups, corpus, options);
    outcome.records = derive_records(groups, assignment);
    outcome.stats = assignment.stats;
    outcome.quarantined = groups.quarantined;
    outcome.assignment = std::move(assignment);
    const auto overlap =
        verify_disjointness(corpus, outcome.records.train, outcome.records.test);
    if (!overlap.empty())
      throw std::runtime_error("split: " + std::to_string(overlap.size()) +
                               " (qtype, answer) pairs appear on both sides");
  } else {
    outcome.records = iid_split(corpus, args.target, args.seed);
    outcome.stats = compute_coverage_stats(corpus, outcome.records.train,
                                           outcome.records.test, args.top_k);
    for (std::size_t i = 0; i < corpus.records.size(); ++i)
      if (corpus.records[i].ground_truth.empty()) outcome.quarantined.push_back(i);
  }

  ensure_dir(args.out_dir);
  export_split(corpus, outcome, args.out_dir);
  write_run_config(args.out_dir, "split", argv);

  const CoverageStats& s = outcome.stats;
  note("[split]", args.mode + " split of " + std::to_string(corpus.records.size()) +
                      " records (" + std::to_string(outcome.quarantined.size()) +
                      " quarantined)");
  note("[split]", "train " + std::to_string(s.train_questions) + " / test " +
                      std::to_string(s.test_questions) + " questions, test fraction " +
                      fmt(s.test_fraction));
  note("[split]", "question concept coverage " + fmt(s.question_concept_coverage) +
                      ", answer top-" + std::to_string(args.top_k) + " coverage " +
                      fmt(s.answer_topk_coverage));
  note("[split]", "wrote " + (fs::path(args.out_dir) / "train.jsonl").string());
  return 0;
}

// ---- analyze ---------------------------------------------------------------

struct AnalyzeArgs {
  std::string split_dir;
  std::string out_dir;
  std::optional<std::size_t> sample;
  std::uint64_t seed = 0;
  std::size_t top_answers = 5;
};

int run_analyze(const AnalyzeArgs& args, const std::vector<std::string>& argv) {
  const LoadedSplit split = load_split_dir(args.split_dir);
  const ShiftReport report =
      shift_report(split.corpus, split.train_idx, split.test_idx, args.sample, args.seed);

  ensure_dir(args.out_dir);
  const fs::path out(args.out_dir);
  save_report_json(report, out / "shift_report.json");
  write_text(out / "shift_report.csv", render_report_csv(report));
  write_text(out / "shift_report.svg", render_report_svg(report, args.top_answers));
  write_run_config(out, "analyze", argv);

  note("[analyze]", std::to_string(report.per_qtype.size()) + " question types, mean TV " +
                        fmt(report.mean_tv) + ", median TV " + fmt(report.median_tv));
  const std::size_t show = std::min<std::size_t>(5, report.per_qtype.size());
  for (std::size_t i = 0; i < show; ++i) {
    const QtypeShift& q = report.per_qtype[i];
    note("[analyze]", "  " + q.qtype + ": TV " + fmt(q.tv) + " over " +
                          std::to_string(q.question_count) + " questions" +
                          (q.one_sided ? " (one-sided)" : ""));
  }
  note("[analyze]", "wrote " + (out / "shift_report.json").string());
  return 0;
}

// ---- eval ------------------------------------------------------------------

struct EvalArgs {
  std::string split_dir;
  std::string out_dir;
  std::vector<std::string> prediction_paths;
  bool baselines = false;
  std::string prior_fit = "answers";
  bool strict = false;
};

ordered_json breakdown_json(const ScoreBreakdown& b) {
  ordered_json j;
  j["overall"] = b.overall;
  j["yes_no"] = b.yes_no;
  j["number"] = b.number;
  j["other"] = b.other;
  j["total"] = b.total;
  j["yes_no_count"] = b.yes_no_count;
  j["number_count"] = b.number_count;
  j["other_count"] = b.other_count;
  j["missing_predictions"] = b.missing_predictions;
  return j;
}

PredictionFile prior_predictions(const std::string& name, const PriorModel& model,
                                 const Corpus& corpus,
                                 const std::vector<std::size_t>& test_idx) {
  PredictionFile file;
  file.model_name = name;
  for (std::size_t i : test_idx) {
    const QaRecord& rec = corpus.records.at(i);
    file.answers[rec.record_id] = predict_prior(model, rec);
  }
  return file;
}

void save_predictions_jsonl(const PredictionFile& file, const Corpus& corpus,
                            const std::vector<std::size_t>& test_idx,
                            const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("output file not writable: " + path.string());
  for (std::size_t i : test_idx) {  // test order keeps the file reproducible
    const QaRecord& rec = corpus.records.at(i);
    auto it = file.answers.find(rec.record_id);
    if (it == file.answers.end()) continue;
    ordered_json j;
    j["id"] = rec.record_id;
    j["answer"] = it->second;
    out << j.dump() << '\n';
  }
}

int run_eval(const EvalArgs& args, const std::vector<std::string>& argv) {
  if (!args.baselines && args.prediction_paths.empty())
    throw ConfigError("eval: nothing to score; pass --baselines or --predictions");
  const LoadedSplit split = load_split_dir(args.split_dir);

  std::vector<std::pair<std::string, ScoreBreakdown>> rows;
  std::vector<std::pair<std::string, PredictionFile>> baseline_files;
  if (args.baselines) {
    const bool on_answers = args.prior_fit == "answers";
    const PriorModel per_qtype =
        fit_prior(split.corpus, split.train_idx, PriorMode::PerQtype, on_answers);
    const PriorModel global =
        fit_prior(split.corpus, split.train_idx, PriorMode::Global, on_answers);
    baseline_files.emplace_back(
        "prior_per_qtype",
        prior_predictions("prior_per_qtype", per_qtype, split.corpus, split.test_idx));
    baseline_files.emplace_back(
        "prior_global",
        prior_predictions("prior_global", global, split.corpus, split.test_idx));
    for (const auto& [name, file] : baseline_files)
      rows.emplace_back(name, evaluate(file, split.corpus, split.test_idx, args.strict));
  }
  for (const auto& path : args.prediction_paths) {
    const PredictionFile file = load_predictions(path);
    rows.emplace_back(file.model_name,
                      evaluate(file, split.corpus, split.test_idx, args.strict));
  }

  std::cout << format_score_table(rows);

  if (!args.out_dir.empty()) {
    ensure_dir(args.out_dir);
    const fs::path out(args.out_dir);
    ordered_json j;
    j["split_dir"] = args.split_dir;
    j["prior_fit"] = args.prior_fit;
    j["test_questions"] = split.test_idx.size();
    j["models"] = ordered_json::object();
    for (const auto& [name, breakdown] : rows) j["models"][name] = breakdown_json(breakdown);
    write_text(out / "scores.json", j.dump(2) + "\n");
    for (const auto& [name, file] : baseline_files)
      save_predictions_jsonl(file, split.corpus, split.test_idx,
                             out / (name + ".jsonl"));
    write_run_config(out, "eval", argv);
    note("[eval]", "wrote " + (out / "scores.json").string());
  }
  return 0;
}

// ---- gvqa ------------------------------------------------------------------

struct GvqaArgs {
  std::string split_dir;
  std::string embeddings_path;
  std::string out_dir;
  int clusters = 4;
  std::size_t vocab_size = 2000;
  std::size_t answer_class_count = 1000;
  std::uint64_t seed = 7;
  std::string recognizer = "oracle";
  double epsilon = 0.1;
  std::string cluster_predictor = "oracle";
  double verify_threshold = 0.5;
  std::size_t top_k = 5;
};

ordered_json trace_json(const GvqaTrace& trace) {
  ordered_json j;
  j["id"] = trace.record_id;
  j["route"] = trace.route == Route::YesNo ? "yes_no" : "non_yes_no";
  j["qtype"] = trace.qtype;
  j["qmain"] = trace.qmain;
  if (trace.route == Route::NonYesNo) j["cluster_id"] = trace.cluster_id;
  if (trace.extracted_concept) {
    j["extracted_concept"] = *trace.extracted_concept;
    j["concept_oov"] = trace.concept_oov;
  }
  ordered_json scores = ordered_json::array();
  for (const auto& [word, score] : trace.top_scores)
    scores.push_back(ordered_json::array({word, score}));
  j["top_scores"] = std::move(scores);
  j["answer"] = trace.answer;
  if (!trace.error.empty()) j["error"] = trace.error;
  return j;
}

int run_gvqa(const GvqaArgs& args, const std::vector<std::string>& argv) {
  const LoadedSplit split = load_split_dir(args.split_dir);
  const ConceptVocabulary vocab =
      build_concept_vocabulary(split.corpus, split.train_idx, args.vocab_size);
  const EmbeddingTable embeddings = EmbeddingTable::load(args.embeddings_path);
  const std::vector<std::string> classes =
      answer_classes(split.corpus, split.train_idx, args.answer_class_count);
  const ClusterModel model =
      build_cluster_model(classes, vocab, embeddings, args.clusters, args.seed);

  const OracleRecognizer oracle(split.corpus, vocab);
  std::unique_ptr<NoisyRecognizer> noisy;
  const ConceptRecognizer* recognizer = &oracle;
  if (args.recognizer == "noisy") {
    noisy = std::make_unique<NoisyRecognizer>(oracle, args.epsilon, args.seed);
    recognizer = noisy.get();
  }

  const OracleClusterPredictor oracle_clusters(model, &embeddings);
  std::unique_ptr<PriorClusterPredictor> prior_clusters;
  const ClusterPredictor* predictor = &oracle_clusters;
  if (args.cluster_predictor == "prior") {
    prior_clusters =
        std::make_unique<PriorClusterPredictor>(split.corpus, split.train_idx, model);
    predictor = prior_clusters.get();
  }

  ensure_dir(args.out_dir);
  const fs::path out(args.out_dir);
  save_vocab_json(vocab, out / "vocab.json");
  save_cluster_model_json(model, out / "cluster_model.json");

  std::ofstream predictions_out(out / "predictions.jsonl", std::ios::binary);
  std::ofstream traces_out(out / "traces.jsonl", std::ios::binary);
  if (!predictions_out || !traces_out)
    throw ConfigError("output files not writable under " + out.string());

  PredictionFile predictions;
  predictions.model_name = "gvqa";
  std::map<std::string, std::size_t> error_counts;
  for (std::size_t i : split.test_idx) {
    const QaRecord& rec = split.corpus.records.at(i);
    const GvqaTrace trace = gvqa_answer(rec, *recognizer, *predictor, model, vocab,
                                        args.verify_threshold, args.top_k);
    traces_out << trace_json(trace).dump() << '\n';
    if (!trace.error.empty()) {
      ++error_counts[trace.error.substr(0, trace.error.find(':'))];
      continue;  // unanswered records score zero through the missing-id path
    }
    predictions.answers[rec.record_id] = trace.answer;
    ordered_json j;
    j["id"] = rec.record_id;
    j["answer"] = trace.answer;
    predictions_out << j.dump() << '\n';
  }
  predictions_out.close();
  traces_out.close();

  const ScoreBreakdown breakdown =
      evaluate(predictions, split.corpus, split.test_idx, /*strict=*/false);
  std::cout << format_score_table({{"gvqa", breakdown}});

  ordered_json j;
  j["split_dir"] = args.split_dir;
  j["recognizer"] = args.recognizer;
  j["cluster_predictor"] = args.cluster_predictor;
  j["C"] = args.clusters;
  j["seed"] = args.seed;
  j["vocab_coverage"] = vocab.coverage();
  j["scores"] = breakdown_json(breakdown);
  ordered_json errors = ordered_json::object();
  for (const auto& [name, count] : error_counts) errors[name] = count;
  j["errors"] = std::move(errors);
  write_text(out / "scores.json", j.dump(2) + "\n");
  write_run_config(out, "gvqa", argv);

  note("[gvqa]", "vocabulary " + std::to_string(vocab.size()) + " concepts, coverage " +
                     fmt(vocab.coverage()));
  note("[gvqa]", "answered " + std::to_string(predictions.answers.size()) + " of " +
                     std::to_string(split.test_idx.size()) + " test questions");
  for (const auto& [name, count] : error_counts)
    note("[gvqa]", "  " + name + ": " + std::to_string(count));
  note("[gvqa]", "wrote " + (out / "predictions.jsonl").string());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"changing-priors splits and prior-blind question answering"};
  app.require_subcommand(1);
  std::vector<std::string> raw_args(argv, argv + argc);

  SynthArgs synth_args;
  CLI::App* synth = app.add_subcommand("synth", "generate a synthetic corpus");
  synth->add_option("--out", synth_args.out_dir, "output directory")->required();
  synth->add_option("--config", synth_args.config_path, "corpus config JSON");
  synth->add_option("--n", synth_args.record_count, "record count");
  synth->add_option("--prior-strength", synth_args.prior_strength,
                    "chance a record takes its question type's prior answer");
  synth->add_option("--answers-per-record", synth_args.answers_per_record,
                    "annotators per record");
  synth->add_option("--disagreement", synth_args.disagreement,
                    "chance an extra annotator answers off-script");
  synth->add_option("--seed", synth_args.seed, "random seed");

  SplitArgs split_args;
  CLI::App* split = app.add_subcommand("split", "build a train/test split");
  split->add_option("--corpus", split_args.corpus_path, "corpus JSONL");
  split->add_option("--questions", split_args.questions_path, "questions JSON");
  split->add_option("--annotations", split_args.annotations_path, "annotations JSON");
  split->add_option("--out", split_args.out_dir, "output directory")->required();
  split->add_option("--qtypes", split_args.qtypes_path, "question type prefix list");
  split->add_option("--stopwords", split_args.stopwords_path, "stop word list");
  split->add_option("--mode", split_args.mode, "cp or iid")
      ->check(CLI::IsMember({"cp", "iid"}));
  split->add_option("--order", split_args.order, "group iteration order")
      ->check(CLI::IsMember({"lex", "input"}));
  split->add_option("--target", split_args.target, "target test fraction");
  split->add_option("--top-k", split_args.top_k, "answer coverage horizon");
  split->add_option("--seed", split_args.seed, "random seed (iid mode)");

  AnalyzeArgs analyze_args;
  std::size_t analyze_sample = 0;
  CLI::App* analyze = app.add_subcommand("analyze", "quantify answer shift");
  analyze->add_option("--split", analyze_args.split_dir, "split directory")->required();
  analyze->add_option("--out", analyze_args.out_dir, "output directory")->required();
  analyze->add_option("--sample", analyze_sample, "questions sampled per side");
  analyze->add_option("--seed", analyze_args.seed, "sampling seed");
  analyze->add_option("--top-answers", analyze_args.top_answers,
                      "answers charted per question type");

  EvalArgs eval_args;
  CLI::App* eval = app.add_subcommand("eval", "score predictions on the test side");
  eval->add_option("--split", eval_args.split_dir, "split directory")->required();
  eval->add_option("--out", eval_args.out_dir, "output directory");
  eval->add_option("--predictions", eval_args.prediction_paths, "prediction files");
  eval->add_flag("--baselines", eval_args.baselines, "score the prior baselines");
  eval->add_option("--prior-fit", eval_args.prior_fit,
                   "fit priors on answer multisets or ground truths")
      ->check(CLI::IsMember({"answers", "gt"}));
  eval->add_flag("--strict", eval_args.strict, "fail on missing predictions");

  GvqaArgs gvqa_args;
  CLI::App* gvqa = app.add_subcommand("gvqa", "run the symbolic answering pipeline");
  gvqa->add_option("--split", gvqa_args.split_dir, "split directory")->required();
  gvqa->add_option("--embeddings", gvqa_args.embeddings_path, "embedding table")
      ->required();
  gvqa->add_option("--out", gvqa_args.out_dir, "output directory")->required();
  gvqa->add_option("--clusters", gvqa_args.clusters, "answer cluster count");
  gvqa->add_option("--vocab-size", gvqa_args.vocab_size, "concept vocabulary size");
  gvqa->add_option("--answer-classes", gvqa_args.answer_class_count,
                   "answer classes clustered");
  gvqa->add_option("--seed", gvqa_args.seed, "clustering and noise seed");
  gvqa->add_option("--recognizer", gvqa_args.recognizer, "concept recognizer")
      ->check(CLI::IsMember({"oracle", "noisy"}));
  gvqa->add_option("--epsilon", gvqa_args.epsilon, "noisy recognizer flip rate");
  gvqa->add_option("--cluster-predictor", gvqa_args.cluster_predictor,
                   "answer cluster predictor")
      ->check(CLI::IsMember({"oracle", "prior"}));
  gvqa->add_option("--verify-threshold", gvqa_args.verify_threshold,
                   "yes/no score threshold");
  gvqa->add_option("--top-k", gvqa_args.top_k, "scores kept per trace");

  try {
    app.parse(argc, argv);
    if (synth->parsed()) return run_synth(synth_args, *synth, raw_args);
    if (split->parsed()) return run_split(split_args, raw_args);
    if (analyze->parsed()) {
      if (analyze->count("--sample")) analyze_args.sample = analyze_sample;
      return run_analyze(analyze_args, raw_args);
    }
    if (eval->parsed()) return run_eval(eval_args, raw_args);
    if (gvqa->parsed()) return run_gvqa(gvqa_args, raw_args);
    return 0;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 1;
  }
}
