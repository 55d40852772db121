// Classification metrics and the two-step evaluation protocol: repeated
// seeded document-level runs, each model then applied unchanged to the
// snippet set.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "swifm/corpus.hpp"
#include "swifm/model.hpp"
#include "swifm/trainer.hpp"

namespace swifm {

struct EvalReport {
  std::int64_t tp = 0, fp = 0, tn = 0, fn = 0;  // positive = label 1

  std::int64_t n() const { return tp + fp + tn + fn; }
  double accuracy() const;
  // Unweighted mean of the two per-class F1 scores; a class with zero
  // precision and recall contributes 0.
  double macro_f1() const;
};

// Thresholds predict_prob at 0.5 (>= 0.5 is positive).
EvalReport evaluate(const SwiModel& model, const std::vector<LabeledDoc>& docs);

enum class SnippetTrain {
  kSplit,  // apply each run's split-trained model to the snippets unchanged
  kAll,    // retrain on all documents for the best-epoch count, then apply
};

struct ProtocolConfig {
  TrainConfig train;
  SplitSpec split;  // fractions; the seed is derived per run from train.seed
  std::int32_t n_runs = 5;
  SnippetTrain snippet_train = SnippetTrain::kSplit;
};

struct RunResult {
  EvalReport document;
  EvalReport snippet;
  std::int32_t best_epoch = -1;
};

struct Aggregate {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation; 0 for a single run
};

struct ProtocolResult {
  ModelKind kind = ModelKind::LR;
  std::vector<RunResult> runs;
  Aggregate doc_acc, doc_f1, snip_acc, snip_f1;
};

// Run r uses seed = config.train.seed + r for both the split and training.
// Document metrics come from the held-out test fraction; snippet metrics
// from the full snippet set.
ProtocolResult run_protocol(ModelKind kind,
                            const std::vector<LabeledDoc>& documents,
                            const std::vector<LabeledDoc>& snippets,
                            std::int32_t vocab_size,
                            const ProtocolConfig& config,
                            std::ostream* progress = nullptr);

// Same as run_protocol for each kind, with run r sharing the identical
// document partition across all kinds.
std::vector<ProtocolResult> compare_models(
    const std::vector<ModelKind>& kinds,
    const std::vector<LabeledDoc>& documents,
    const std::vector<LabeledDoc>& snippets, std::int32_t vocab_size,
    const ProtocolConfig& config, std::ostream* progress = nullptr);

std::string results_csv(const std::vector<ProtocolResult>& results);
std::string results_table(const std::vector<ProtocolResult>& results);

}  // namespace swifm
