// swifm command-line tool: train, evaluate and inspect word-interaction
// sentiment models over TSV corpora.
//
// Exit codes: 0 success, 1 usage error, 2 data/model error.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "swifm/corpus.hpp"
#include "swifm/eval.hpp"
#include "swifm/inspect.hpp"
#include "swifm/model.hpp"
#include "swifm/rng.hpp"
#include "swifm/trainer.hpp"

namespace {

namespace fs = std::filesystem;

struct HyperFlags {
  std::int32_t k = 10;
  std::int32_t t = 5;
  double eta = 0.01;
  double lambda = 1.0;
  std::int32_t batch = 32;
  std::int32_t epochs = 100;
  std::int32_t patience = 5;
  std::int64_t min_count = 2;
  std::int64_t buckets = 1 << 20;
  std::uint64_t seed = 42;

  swifm::TrainConfig to_config() const {
    swifm::TrainConfig config;
    config.factor_dim = k;
    config.context_size = t;
    config.eta = eta;
    config.lambda = lambda;
    config.batch_size = batch;
    config.max_epochs = epochs;
    config.patience = patience;
    config.hash_buckets = buckets;
    config.seed = seed;
    return config;
  }
};

void add_hyper_flags(CLI::App* cmd, HyperFlags& flags) {
  cmd->add_option("--k", flags.k, "Factor dimension")->capture_default_str();
  cmd->add_option("--t", flags.t, "Context window size")->capture_default_str();
  cmd->add_option("--eta", flags.eta, "Base learning rate")->capture_default_str();
  cmd->add_option("--lambda", flags.lambda, "L2 coefficient")->capture_default_str();
  cmd->add_option("--batch", flags.batch, "Mini-batch size")->capture_default_str();
  cmd->add_option("--epochs", flags.epochs, "Maximum epochs")->capture_default_str();
  cmd->add_option("--patience", flags.patience, "Early-stop patience (epochs)")
      ->capture_default_str();
  cmd->add_option("--min-count", flags.min_count, "Vocabulary frequency cutoff")
      ->capture_default_str();
  cmd->add_option("--buckets", flags.buckets, "Pair-hash buckets (poly2)")
      ->capture_default_str();
  cmd->add_option("--seed", flags.seed, "PRNG seed")->capture_default_str();
}

struct Corpus {
  swifm::Vocabulary vocab;
  std::vector<swifm::LabeledDoc> docs;
};

std::vector<std::pair<std::vector<std::string>, int>> tokenize_tsv(
    const std::string& path) {
  std::vector<std::pair<std::vector<std::string>, int>> out;
  for (auto& [text, label] : swifm::load_tsv(path)) {
    out.emplace_back(swifm::tokenize(text), label);
  }
  return out;
}

Corpus load_corpus(const std::string& path, std::int64_t min_count) {
  auto records = tokenize_tsv(path);
  std::vector<std::vector<std::string>> token_lists;
  token_lists.reserve(records.size());
  for (auto& [tokens, label] : records) token_lists.push_back(tokens);

  Corpus corpus;
  corpus.vocab = swifm::build_vocab(token_lists, min_count);
  corpus.docs.reserve(records.size());
  for (auto& [tokens, label] : records) {
    corpus.docs.push_back({swifm::encode(corpus.vocab, tokens), label});
  }
  return corpus;
}

std::vector<swifm::LabeledDoc> encode_tsv(const swifm::Vocabulary& vocab,
                                          const std::string& path) {
  std::vector<swifm::LabeledDoc> docs;
  for (auto& [tokens, label] : tokenize_tsv(path)) {
    docs.push_back({swifm::encode(vocab, tokens), label});
  }
  return docs;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file: " + tmp);
    out << content;
    if (!out) throw std::runtime_error("write failed: " + tmp);
  }
  fs::rename(tmp, path);
}

struct ModelWithVocab {
  swifm::SwiModel model;
  swifm::Vocabulary vocab;
};

ModelWithVocab load_model_and_vocab(const std::string& model_path) {
  swifm::LoadedModel loaded = swifm::load_model(model_path);
  if (loaded.vocab_file.empty()) {
    throw std::runtime_error("model header has no vocabulary reference");
  }
  fs::path vocab_path(loaded.vocab_file);
  if (vocab_path.is_relative()) {
    vocab_path = fs::path(model_path).parent_path() / vocab_path;
  }
  return {std::move(loaded.model), swifm::load_vocab(vocab_path.string())};
}

void print_report(const swifm::EvalReport& report) {
  std::printf("n=%lld accuracy=%.6f macro_f1=%.6f tp=%lld fp=%lld tn=%lld fn=%lld\n",
              static_cast<long long>(report.n()), report.accuracy(),
              report.macro_f1(), static_cast<long long>(report.tp),
              static_cast<long long>(report.fp),
              static_cast<long long>(report.tn),
              static_cast<long long>(report.fn));
}

std::vector<swifm::ModelKind> parse_kind_list(const std::string& spec) {
  std::vector<swifm::ModelKind> kinds;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) kinds.push_back(swifm::kind_from_name(item));
  }
  if (kinds.empty()) throw std::invalid_argument("no model kinds in: " + spec);
  return kinds;
}

int run_train(const std::string& kind_name, const std::string& train_path,
              const std::string& valid_path, const HyperFlags& flags,
              const std::string& out_path, const std::string& history_path) {
  swifm::ModelKind kind = swifm::kind_from_name(kind_name);
  swifm::TrainConfig config = flags.to_config();
  config.validate();

  Corpus corpus = load_corpus(train_path, flags.min_count);
  std::vector<swifm::LabeledDoc> valid;
  if (!valid_path.empty()) valid = encode_tsv(corpus.vocab, valid_path);

  swifm::TrainResult result = swifm::train(kind, corpus.docs, valid,
                                           corpus.vocab.size(), config,
                                           &std::cout);

  std::string vocab_path = out_path + ".vocab";
  swifm::save_vocab(corpus.vocab, vocab_path);
  swifm::save_model(result.model, out_path,
                    fs::path(vocab_path).filename().string());
  if (!history_path.empty()) {
    write_text_file(history_path, swifm::history_json(result.history) + "\n");
  }

  if (!valid.empty()) {
    swifm::EvalReport report = swifm::evaluate(result.model, valid);
    std::printf("best_epoch=%d valid_accuracy=%.6f valid_macro_f1=%.6f\n",
                result.history.best_epoch, report.accuracy(), report.macro_f1());
  } else {
    std::printf("best_epoch=%d\n", result.history.best_epoch);
  }
  return 0;
}

int run_eval(const std::string& model_path, const std::string& data_path) {
  ModelWithVocab mv = load_model_and_vocab(model_path);
  auto docs = encode_tsv(mv.vocab, data_path);
  if (docs.empty()) throw std::runtime_error("no records in " + data_path);
  print_report(swifm::evaluate(mv.model, docs));
  return 0;
}

int run_predict(const std::string& model_path, const std::string& in_path) {
  ModelWithVocab mv = load_model_and_vocab(model_path);
  std::ifstream file;
  std::istream* in = &std::cin;
  if (!in_path.empty()) {
    file.open(in_path, std::ios::binary);
    if (!file) throw std::runtime_error("cannot open file: " + in_path);
    in = &file;
  }
  std::string line;
  while (std::getline(*in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto ids = swifm::encode(mv.vocab, swifm::tokenize(line));
    double prob = swifm::predict_prob(mv.model, ids);
    std::printf("%.6f\t%d\n", prob, prob >= 0.5 ? 1 : 0);
  }
  return 0;
}

int run_compare(const std::vector<swifm::ModelKind>& kinds,
                const std::string& docs_path, const std::string& snippets_path,
                const HyperFlags& flags, std::int32_t runs,
                const std::string& snippet_train, const std::string& csv_path) {
  swifm::ProtocolConfig config;
  config.train = flags.to_config();
  config.train.validate();
  config.n_runs = runs;
  if (snippet_train == "split") {
    config.snippet_train = swifm::SnippetTrain::kSplit;
  } else if (snippet_train == "all") {
    config.snippet_train = swifm::SnippetTrain::kAll;
  } else {
    throw std::invalid_argument("--snippet-train must be split or all");
  }

  Corpus corpus = load_corpus(docs_path, flags.min_count);
  auto snippets = encode_tsv(corpus.vocab, snippets_path);

  auto results = swifm::compare_models(kinds, corpus.docs, snippets,
                                       corpus.vocab.size(), config, &std::cerr);
  std::cout << swifm::results_table(results);
  if (!csv_path.empty()) {
    write_text_file(csv_path, swifm::results_csv(results));
  }
  return 0;
}

int run_inspect_pair(const std::string& model_path, const std::string& word_a,
                     const std::string& word_b,
                     std::optional<std::int32_t> dist) {
  ModelWithVocab mv = load_model_and_vocab(model_path);
  swifm::PairScore score = swifm::pair_score(mv.model, mv.vocab, word_a, word_b, dist);
  std::cout << swifm::pair_score_tsv(score) << '\n';
  return 0;
}

int run_inspect_top(const std::string& model_path, const std::string& word,
                    std::size_t count, const std::string& direction,
                    std::optional<std::int32_t> dist) {
  if (direction != "pos" && direction != "neg") {
    throw std::invalid_argument("--direction must be pos or neg");
  }
  ModelWithVocab mv = load_model_and_vocab(model_path);
  auto scores = swifm::top_interactions(
      mv.model, mv.vocab, word, count,
      direction == "pos" ? swifm::Direction::kPositive : swifm::Direction::kNegative,
      dist);
  for (const auto& score : scores) {
    std::cout << swifm::pair_score_tsv(score) << '\n';
  }
  return 0;
}

int run_gradcheck(const std::string& kind_name, std::int32_t trials,
                  std::uint64_t seed) {
  swifm::ModelKind kind = swifm::kind_from_name(kind_name);
  if (trials < 1) throw std::invalid_argument("--trials must be >= 1");

  constexpr std::int32_t kVocab = 12;
  double worst = 0.0;
  for (std::int32_t trial = 0; trial < trials; ++trial) {
    swifm::Rng rng(swifm::derive_seed(seed, static_cast<std::uint64_t>(trial)));
    swifm::LabeledDoc doc;
    std::size_t len = 2 + rng.next_below(7);
    for (std::size_t i = 0; i < len; ++i) {
      doc.tokens.push_back(static_cast<std::int32_t>(rng.next_below(kVocab)));
    }
    doc.label = static_cast<int>(rng.next_below(2));

    swifm::TrainConfig config;
    config.factor_dim = 1 + static_cast<std::int32_t>(rng.next_below(4));
    config.context_size = 1 + static_cast<std::int32_t>(rng.next_below(3));
    config.lambda = trial % 2 == 0 ? 0.0 : 1.0;
    config.hash_buckets = 64;
    config.seed = swifm::derive_seed(seed, 1000 + static_cast<std::uint64_t>(trial));
    worst = std::max(worst, swifm::finite_diff_check(kind, doc, kVocab, config));
  }
  std::printf("gradcheck model=%s trials=%d max_rel_err=%.3e\n",
              kind_name.c_str(), trials, worst);
  return worst <= 1e-4 ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Word-interaction factorization machines for sentiment classification"};
  app.require_subcommand(1);

  // train
  auto* train_cmd = app.add_subcommand("train", "Train a model on a TSV corpus");
  std::string train_model = "cfm", train_path, train_valid, train_out, train_history;
  HyperFlags train_flags;
  train_cmd->add_option("--model", train_model, "Model kind: lr, poly2, fm, cfm, pfm")
      ->capture_default_str();
  train_cmd->add_option("--train", train_path, "Training TSV file")->required();
  train_cmd->add_option("--valid", train_valid, "Validation TSV file (enables early stopping)");
  add_hyper_flags(train_cmd, train_flags);
  train_cmd->add_option("--out", train_out, "Output model file")->required();
  train_cmd->add_option("--history", train_history, "Write per-epoch history JSON here");

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a saved model on a TSV corpus");
  std::string eval_model, eval_data;
  eval_cmd->add_option("--model-file", eval_model, "Saved model file")->required();
  eval_cmd->add_option("--data", eval_data, "TSV file to evaluate on")->required();

  // predict
  auto* predict_cmd = app.add_subcommand("predict", "Predict one text per input line");
  std::string predict_model, predict_in;
  predict_cmd->add_option("--model-file", predict_model, "Saved model file")->required();
  predict_cmd->add_option("--in", predict_in, "Input text file (default: stdin)");

  // protocol
  auto* protocol_cmd = app.add_subcommand(
      "protocol", "Document-train / snippet-test evaluation over repeated runs");
  std::string protocol_model = "pfm", protocol_docs, protocol_snippets,
              protocol_snippet_train = "split", protocol_csv;
  std::int32_t protocol_runs = 5;
  HyperFlags protocol_flags;
  protocol_cmd->add_option("--model", protocol_model, "Model kind")->capture_default_str();
  protocol_cmd->add_option("--docs", protocol_docs, "Full-document TSV file")->required();
  protocol_cmd->add_option("--snippets", protocol_snippets, "Snippet TSV file")->required();
  protocol_cmd->add_option("--runs", protocol_runs, "Independent seeded runs")
      ->capture_default_str();
  protocol_cmd->add_option("--snippet-train", protocol_snippet_train,
                           "Model applied to snippets: split or all")
      ->capture_default_str();
  add_hyper_flags(protocol_cmd, protocol_flags);
  protocol_cmd->add_option("--csv", protocol_csv, "Write the results CSV here");

  // compare
  auto* compare_cmd = app.add_subcommand(
      "compare", "Run the protocol for several kinds with shared splits");
  std::string compare_models_arg = "fm,cfm,pfm", compare_docs, compare_snippets,
              compare_snippet_train = "split", compare_csv;
  std::int32_t compare_runs = 5;
  HyperFlags compare_flags;
  compare_cmd->add_option("--models", compare_models_arg, "Comma-separated model kinds")
      ->capture_default_str();
  compare_cmd->add_option("--docs", compare_docs, "Full-document TSV file")->required();
  compare_cmd->add_option("--snippets", compare_snippets, "Snippet TSV file")->required();
  compare_cmd->add_option("--runs", compare_runs, "Independent seeded runs")
      ->capture_default_str();
  compare_cmd->add_option("--snippet-train", compare_snippet_train,
                          "Model applied to snippets: split or all")
      ->capture_default_str();
  add_hyper_flags(compare_cmd, compare_flags);
  compare_cmd->add_option("--csv", compare_csv, "Write the results CSV here");

  // inspect
  auto* inspect_cmd = app.add_subcommand("inspect", "Inspect learned word interactions");
  inspect_cmd->require_subcommand(1);
  auto* pair_cmd = inspect_cmd->add_subcommand("pair", "Score one word pair");
  std::string pair_model, pair_a, pair_b;
  std::int32_t pair_dist = 0;
  pair_cmd->add_option("--model-file", pair_model, "Saved model file")->required();
  pair_cmd->add_option("--a", pair_a, "First word")->required();
  pair_cmd->add_option("--b", pair_b, "Second word")->required();
  auto* pair_dist_opt = pair_cmd->add_option("--dist", pair_dist, "Distance (pfm only, 1..t)");

  auto* top_cmd = inspect_cmd->add_subcommand("top", "Rank interaction partners of a word");
  std::string top_model, top_word, top_direction = "pos";
  std::size_t top_n = 10;
  std::int32_t top_dist = 0;
  top_cmd->add_option("--model-file", top_model, "Saved model file")->required();
  top_cmd->add_option("--word", top_word, "Anchor word")->required();
  top_cmd->add_option("--n", top_n, "Number of partners")->capture_default_str();
  top_cmd->add_option("--direction", top_direction, "pos or neg")->capture_default_str();
  auto* top_dist_opt = top_cmd->add_option("--dist", top_dist, "Distance (pfm only, 1..t)");

  // gradcheck
  auto* gradcheck_cmd = app.add_subcommand(
      "gradcheck", "Verify analytic gradients against finite differences");
  std::string gradcheck_model = "cfm";
  std::int32_t gradcheck_trials = 100;
  std::uint64_t gradcheck_seed = 1;
  gradcheck_cmd->add_option("--model", gradcheck_model, "Model kind")->capture_default_str();
  gradcheck_cmd->add_option("--trials", gradcheck_trials, "Random instances")
      ->capture_default_str();
  gradcheck_cmd->add_option("--seed", gradcheck_seed, "PRNG seed")->capture_default_str();

  try {
    app.parse(argc, argv);

    if (train_cmd->parsed()) {
      return run_train(train_model, train_path, train_valid, train_flags,
                       train_out, train_history);
    }
    if (eval_cmd->parsed()) return run_eval(eval_model, eval_data);
    if (predict_cmd->parsed()) return run_predict(predict_model, predict_in);
    if (protocol_cmd->parsed()) {
      return run_compare({swifm::kind_from_name(protocol_model)}, protocol_docs,
                         protocol_snippets, protocol_flags, protocol_runs,
                         protocol_snippet_train, protocol_csv);
    }
    if (compare_cmd->parsed()) {
      return run_compare(parse_kind_list(compare_models_arg), compare_docs,
                         compare_snippets, compare_flags, compare_runs,
                         compare_snippet_train, compare_csv);
    }
    if (inspect_cmd->parsed()) {
      if (pair_cmd->parsed()) {
        std::optional<std::int32_t> dist;
        if (pair_dist_opt->count() > 0) dist = pair_dist;
        return run_inspect_pair(pair_model, pair_a, pair_b, dist);
      }
      std::optional<std::int32_t> dist;
      if (top_dist_opt->count() > 0) dist = top_dist;
      return run_inspect_top(top_model, top_word, top_n, top_direction, dist);
    }
    if (gradcheck_cmd->parsed()) {
      return run_gradcheck(gradcheck_model, gradcheck_trials, gradcheck_seed);
    }
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
