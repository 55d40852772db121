#include <cmath>
#include <algorithm>
#include <stdexcept>

#include "doctest.h"
#include "swifm/eval.hpp"
#include "synthetic.hpp"

using namespace swifm;

namespace {

// LR model where word 0 predicts positive and word 1 negative.
SwiModel signed_lr() {
  SwiModel m = init_model(ModelKind::LR, 2, 0, 0, 0, 1);
  m.linear[0] = 1.0;
  m.linear[1] = -1.0;
  return m;
}

ProtocolConfig quick_protocol(std::uint64_t seed) {
  ProtocolConfig config;
  config.train.factor_dim = 4;
  config.train.context_size = 3;
  config.train.lambda = 0.0;
  config.train.max_epochs = 3;
  config.train.hash_buckets = 64;
  config.train.seed = seed;
  config.n_runs = 2;
  return config;
}

}  // namespace

TEST_CASE("evaluate fills the confusion matrix and both metrics") {
  SwiModel m = signed_lr();
  // predictions [1,1,0,0] against labels [1,0,0,0]
  std::vector<LabeledDoc> docs = {{{0}, 1}, {{0}, 0}, {{1}, 0}, {{1}, 0}};
  EvalReport report = evaluate(m, docs);
  CHECK(report.tp == 1);
  CHECK(report.fp == 1);
  CHECK(report.tn == 2);
  CHECK(report.fn == 0);
  CHECK(report.n() == 4);
  CHECK(report.accuracy() == doctest::Approx(0.75));
  CHECK(report.macro_f1() == doctest::Approx((2.0 / 3.0 + 4.0 / 5.0) / 2.0));
}

TEST_CASE("perfect predictions give accuracy and macro-F1 of 1") {
  SwiModel m = signed_lr();
  std::vector<LabeledDoc> docs = {{{0}, 1}, {{1}, 0}, {{0}, 1}};
  EvalReport report = evaluate(m, docs);
  CHECK(report.accuracy() == doctest::Approx(1.0));
  CHECK(report.macro_f1() == doctest::Approx(1.0));
}

TEST_CASE("the constant classifier scores 0.5 on balanced data") {
  SwiModel zero = init_model(ModelKind::LR, 2, 0, 0, 0, 1);
  std::vector<LabeledDoc> docs;
  for (int i = 0; i < 20; ++i) docs.push_back({{i % 2}, i % 2});
  EvalReport report = evaluate(zero, docs);  // logit 0 -> positive everywhere
  CHECK(report.accuracy() == doctest::Approx(0.5));
  CHECK(report.fn == 0);
  CHECK(report.tn == 0);
  // The never-predicted class contributes F1 = 0.
  CHECK(report.macro_f1() == doctest::Approx(0.5 * (2.0 * 0.5 / 1.5)));
}

TEST_CASE("evaluate rejects an empty document set") {
  CHECK_THROWS(evaluate(signed_lr(), {}));
}

TEST_CASE("metric bounds hold on random reports") {
  synthetic::PairTask task = synthetic::make_pair_task(3, 40, 10, 10);
  SwiModel m = init_model(ModelKind::CFM, task.vocab.size(), 4, 3, 0, 5);
  EvalReport report = evaluate(m, task.train);
  CHECK(report.accuracy() >= 0.0);
  CHECK(report.accuracy() <= 1.0);
  CHECK(report.macro_f1() >= 0.0);
  CHECK(report.macro_f1() <= 1.0);
  CHECK(report.n() == static_cast<std::int64_t>(task.train.size()));
}

TEST_CASE("run_protocol is deterministic and aggregates correctly") {
  synthetic::PairTask task = synthetic::make_pair_task(11, 60, 0, 0);
  auto snippets = synthetic::make_pair_task(12, 40, 0, 0).train;

  ProtocolConfig config = quick_protocol(5);
  ProtocolResult a = run_protocol(ModelKind::CFM, task.train, snippets,
                                  task.vocab.size(), config);
  ProtocolResult b = run_protocol(ModelKind::CFM, task.train, snippets,
                                  task.vocab.size(), config);

  REQUIRE(a.runs.size() == 2);
  CHECK(results_csv({a}) == results_csv({b}));

  // Mean equals the arithmetic mean of the per-run values.
  double mean = 0.0, lo = 1.0, hi = 0.0;
  for (const auto& run : a.runs) {
    double acc = run.document.accuracy();
    mean += acc;
    lo = std::min(lo, acc);
    hi = std::max(hi, acc);
  }
  mean /= static_cast<double>(a.runs.size());
  CHECK(std::abs(a.doc_acc.mean - mean) <= 1e-12);
  CHECK(a.doc_acc.mean >= lo);
  CHECK(a.doc_acc.mean <= hi);
}

TEST_CASE("single-run protocol reports zero spread") {
  synthetic::PairTask task = synthetic::make_pair_task(13, 60, 0, 0);
  ProtocolConfig config = quick_protocol(5);
  config.n_runs = 1;
  ProtocolResult r = run_protocol(ModelKind::LR, task.train, task.train,
                                  task.vocab.size(), config);
  CHECK(r.runs.size() == 1);
  CHECK(r.doc_acc.stddev == 0.0);
  CHECK(r.snip_acc.stddev == 0.0);
}

TEST_CASE("extending the run count never perturbs earlier runs") {
  synthetic::PairTask task = synthetic::make_pair_task(17, 60, 0, 0);
  ProtocolConfig two = quick_protocol(9);
  ProtocolConfig three = quick_protocol(9);
  three.n_runs = 3;

  ProtocolResult a = run_protocol(ModelKind::CFM, task.train, task.train,
                                  task.vocab.size(), two);
  ProtocolResult b = run_protocol(ModelKind::CFM, task.train, task.train,
                                  task.vocab.size(), three);
  for (std::size_t r = 0; r < a.runs.size(); ++r) {
    CHECK(a.runs[r].document.tp == b.runs[r].document.tp);
    CHECK(a.runs[r].document.fp == b.runs[r].document.fp);
    CHECK(a.runs[r].snippet.tn == b.runs[r].snippet.tn);
    CHECK(a.runs[r].best_epoch == b.runs[r].best_epoch);
  }
}

TEST_CASE("compare_models pairs splits across kinds") {
  synthetic::PairTask task = synthetic::make_pair_task(19, 60, 0, 0);
  ProtocolConfig config = quick_protocol(21);

  auto joint = compare_models({ModelKind::LR, ModelKind::CFM}, task.train,
                              task.train, task.vocab.size(), config);
  REQUIRE(joint.size() == 2);
  CHECK(joint[0].kind == ModelKind::LR);
  CHECK(joint[1].kind == ModelKind::CFM);

  // Each kind alone sees exactly the same runs as in the joint comparison,
  // so the shared per-run partitions are purely seed-driven.
  auto lr_alone = run_protocol(ModelKind::LR, task.train, task.train,
                               task.vocab.size(), config);
  CHECK(results_csv({joint[0]}) == results_csv({lr_alone}));

  CHECK_THROWS_AS(compare_models({}, task.train, task.train, task.vocab.size(), config),
                  std::invalid_argument);
}

TEST_CASE("snippet-train all retrains on every document deterministically") {
  synthetic::PairTask task = synthetic::make_pair_task(23, 60, 0, 0);
  ProtocolConfig config = quick_protocol(25);
  config.snippet_train = SnippetTrain::kAll;
  config.n_runs = 1;
  ProtocolResult a = run_protocol(ModelKind::CFM, task.train, task.train,
                                  task.vocab.size(), config);
  ProtocolResult b = run_protocol(ModelKind::CFM, task.train, task.train,
                                  task.vocab.size(), config);
  CHECK(results_csv({a}) == results_csv({b}));
  CHECK(a.runs[0].snippet.n() == static_cast<std::int64_t>(task.train.size()));
}

TEST_CASE("windowed kinds beat plain fm on the pair task snippets") {
  // The designated pairs co-occur in every document regardless of label, so
  // the unwindowed FM sees identical pair sets in both classes and stays at
  // chance; CFM and PFM separate them by proximity.
  synthetic::PairTask task = synthetic::make_pair_task(37, 200, 0, 0);
  auto snippets = synthetic::make_pair_task(38, 100, 0, 0).train;

  ProtocolConfig config;
  config.train.factor_dim = 8;
  config.train.context_size = 3;
  config.train.eta = 0.05;
  config.train.lambda = 0.0;
  config.train.batch_size = 16;
  config.train.max_epochs = 40;
  config.train.patience = 40;
  config.train.seed = 39;
  config.n_runs = 1;

  auto results = compare_models({ModelKind::FM, ModelKind::CFM, ModelKind::PFM},
                                task.train, snippets, task.vocab.size(), config);
  double fm = results[0].snip_acc.mean;
  double cfm = results[1].snip_acc.mean;
  double pfm = results[2].snip_acc.mean;
  CHECK(cfm >= fm);
  CHECK(pfm >= fm);
  CHECK(cfm > 0.9);
  CHECK(pfm > 0.9);
  CHECK(fm < 0.7);
}

TEST_CASE("csv and table renderings carry one row per kind") {
  synthetic::PairTask task = synthetic::make_pair_task(29, 60, 0, 0);
  ProtocolConfig config = quick_protocol(31);
  config.n_runs = 1;
  auto results = compare_models({ModelKind::LR, ModelKind::FM, ModelKind::CFM},
                                task.train, task.train, task.vocab.size(), config);

  std::string csv = results_csv(results);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);  // header + 3 rows
  CHECK(csv.rfind("kind,doc_acc_mean,doc_acc_std,doc_f1_mean,doc_f1_std,"
                  "snip_acc_mean,snip_acc_std,snip_f1_mean,snip_f1_std\n", 0) == 0);

  std::string table = results_table(results);
  CHECK(std::count(table.begin(), table.end(), '\n') == 4);
  CHECK(table.find("cfm") != std::string::npos);
}
