#include "swifm/eval.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace swifm {

namespace {

double f1_score(std::int64_t true_pos, std::int64_t predicted, std::int64_t actual) {
  double precision = predicted > 0 ? static_cast<double>(true_pos) / static_cast<double>(predicted) : 0.0;
  double recall = actual > 0 ? static_cast<double>(true_pos) / static_cast<double>(actual) : 0.0;
  if (precision + recall == 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

Aggregate aggregate(const std::vector<double>& values) {
  Aggregate a;
  for (double v : values) a.mean += v;
  a.mean /= static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - a.mean) * (v - a.mean);
    a.stddev = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return a;
}

void fill_aggregates(ProtocolResult& result) {
  std::vector<double> doc_acc, doc_f1, snip_acc, snip_f1;
  for (const auto& run : result.runs) {
    doc_acc.push_back(run.document.accuracy());
    doc_f1.push_back(run.document.macro_f1());
    snip_acc.push_back(run.snippet.accuracy());
    snip_f1.push_back(run.snippet.macro_f1());
  }
  result.doc_acc = aggregate(doc_acc);
  result.doc_f1 = aggregate(doc_f1);
  result.snip_acc = aggregate(snip_acc);
  result.snip_f1 = aggregate(snip_f1);
}

}  // namespace

double EvalReport::accuracy() const {
  return static_cast<double>(tp + tn) / static_cast<double>(n());
}

double EvalReport::macro_f1() const {
  double pos = f1_score(tp, tp + fp, tp + fn);
  double neg = f1_score(tn, tn + fn, tn + fp);
  return 0.5 * (pos + neg);
}

EvalReport evaluate(const SwiModel& model, const std::vector<LabeledDoc>& docs) {
  if (docs.empty()) throw std::runtime_error("evaluate: empty document set");
  EvalReport report;
  for (const auto& doc : docs) {
    bool predicted_pos = predict_prob(model, doc.tokens) >= 0.5;
    if (doc.label == 1) {
      (predicted_pos ? report.tp : report.fn) += 1;
    } else {
      (predicted_pos ? report.fp : report.tn) += 1;
    }
  }
  return report;
}

std::vector<ProtocolResult> compare_models(
    const std::vector<ModelKind>& kinds,
    const std::vector<LabeledDoc>& documents,
    const std::vector<LabeledDoc>& snippets, std::int32_t vocab_size,
    const ProtocolConfig& config, std::ostream* progress) {
  if (kinds.empty()) throw std::invalid_argument("no model kinds given");
  if (documents.empty()) throw std::runtime_error("protocol: empty document set");
  if (snippets.empty()) throw std::runtime_error("protocol: empty snippet set");
  if (config.n_runs < 1) throw std::invalid_argument("n_runs must be >= 1");

  std::vector<ProtocolResult> results(kinds.size());
  for (std::size_t m = 0; m < kinds.size(); ++m) results[m].kind = kinds[m];

  for (std::int32_t r = 0; r < config.n_runs; ++r) {
    std::uint64_t run_seed = config.train.seed + static_cast<std::uint64_t>(r);
    SplitSpec spec = config.split;
    spec.seed = run_seed;
    Split parts = split(documents, spec);  // shared by every kind this run

    for (std::size_t m = 0; m < kinds.size(); ++m) {
      TrainConfig tc = config.train;
      tc.seed = run_seed;
      if (progress) {
        (*progress) << "run " << (r + 1) << "/" << config.n_runs << " model "
                    << kind_name(kinds[m]) << "\n";
      }
      TrainResult trained = train(kinds[m], parts.train, parts.valid,
                                  vocab_size, tc);
      RunResult run;
      run.best_epoch = trained.history.best_epoch;
      run.document = evaluate(trained.model, parts.test);

      if (config.snippet_train == SnippetTrain::kAll) {
        // Retrain on every document for the epoch count the split phase
        // selected; no validation set, no early stop.
        TrainConfig tc_all = tc;
        tc_all.max_epochs = trained.history.best_epoch + 1;
        TrainResult full = train(kinds[m], documents, {}, vocab_size, tc_all);
        run.snippet = evaluate(full.model, snippets);
      } else {
        run.snippet = evaluate(trained.model, snippets);
      }
      results[m].runs.push_back(run);
    }
  }

  for (auto& result : results) fill_aggregates(result);
  return results;
}

ProtocolResult run_protocol(ModelKind kind,
                            const std::vector<LabeledDoc>& documents,
                            const std::vector<LabeledDoc>& snippets,
                            std::int32_t vocab_size,
                            const ProtocolConfig& config,
                            std::ostream* progress) {
  return compare_models({kind}, documents, snippets, vocab_size, config,
                        progress)[0];
}

std::string results_csv(const std::vector<ProtocolResult>& results) {
  std::string out =
      "kind,doc_acc_mean,doc_acc_std,doc_f1_mean,doc_f1_std,"
      "snip_acc_mean,snip_acc_std,snip_f1_mean,snip_f1_std\n";
  char line[256];
  for (const auto& r : results) {
    std::snprintf(line, sizeof line,
                  "%s,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f\n",
                  std::string(kind_name(r.kind)).c_str(), r.doc_acc.mean,
                  r.doc_acc.stddev, r.doc_f1.mean, r.doc_f1.stddev,
                  r.snip_acc.mean, r.snip_acc.stddev, r.snip_f1.mean,
                  r.snip_f1.stddev);
    out += line;
  }
  return out;
}

std::string results_table(const std::vector<ProtocolResult>& results) {
  std::string out;
  char line[256];
  std::snprintf(line, sizeof line, "%-6s  %-16s  %-16s  %-16s  %-16s\n",
                "model", "doc_acc", "doc_f1", "snip_acc", "snip_f1");
  out += line;
  for (const auto& r : results) {
    char cell[4][32];
    std::snprintf(cell[0], sizeof cell[0], "%.4f +/- %.4f", r.doc_acc.mean, r.doc_acc.stddev);
    std::snprintf(cell[1], sizeof cell[1], "%.4f +/- %.4f", r.doc_f1.mean, r.doc_f1.stddev);
    std::snprintf(cell[2], sizeof cell[2], "%.4f +/- %.4f", r.snip_acc.mean, r.snip_acc.stddev);
    std::snprintf(cell[3], sizeof cell[3], "%.4f +/- %.4f", r.snip_f1.mean, r.snip_f1.stddev);
    std::snprintf(line, sizeof line, "%-6s  %-16s  %-16s  %-16s  %-16s\n",
                  std::string(kind_name(r.kind)).c_str(), cell[0], cell[1],
                  cell[2], cell[3]);
    out += line;
  }
  return out;
}

}  // namespace swifm
