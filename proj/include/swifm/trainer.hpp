// Mini-batch SGD with per-parameter AdaGrad learning rates, logistic loss
// and L2 regularization, plus a central finite-difference gradient oracle.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <utility>
#include <vector>

#include "swifm/corpus.hpp"
#include "swifm/model.hpp"

namespace swifm {

struct TrainConfig {
  std::int32_t factor_dim = 10;              // k
  std::int32_t context_size = 5;             // t
  double eta = 0.01;                         // base learning rate
  double lambda = 1.0;                       // L2 coefficient
  std::int32_t batch_size = 32;
  std::int32_t max_epochs = 100;
  std::int32_t patience = 5;                 // early-stop epochs without improvement
  double epsilon = 1e-8;                     // AdaGrad stabilizer
  std::int64_t hash_buckets = 1 << 20;       // B (POLY2)
  std::uint64_t seed = 42;

  void validate() const;  // throws std::invalid_argument
};

struct EpochRecord {
  std::int32_t epoch = 0;
  double train_loss = 0.0;  // mean loss over the epoch's forward passes
  double valid_acc = 0.0;   // NaN when no validation set was given
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  std::int32_t best_epoch = -1;
  bool stopped_early = false;
};

// History export: JSON array of per-epoch records.
std::string history_json(const TrainHistory& history);

// -[label*ln(p) + (1-label)*ln(1-p)], p clamped to [1e-12, 1-1e-12].
double logistic_loss(double prob, int label);

// Gradient of (logistic loss + L2 penalty) for one example, sparse over the
// parameters the document touches. Entries are keyed by the model's flat
// parameter index; order is unspecified. The L2 term lambda*theta is part of
// the gradient (and therefore enters the AdaGrad accumulator); the bias is
// not regularized.
struct SparseGrad {
  std::vector<std::pair<std::size_t, double>> entries;
};
SparseGrad compute_gradients(const SwiModel& model, const LabeledDoc& doc,
                             double lambda, double* loss_out = nullptr);

// Flat indices of the parameters the document touches (bias always first).
// Only these carry the L2 penalty for the example.
std::vector<std::size_t> touched_params(const SwiModel& model,
                                        const LabeledDoc& doc);

// Loss plus (lambda/2) * sum of squared touched parameters (bias excluded);
// the objective the gradient above differentiates.
double example_objective(const SwiModel& model, const LabeledDoc& doc,
                         double lambda);

// Per-parameter sums of squared gradients, congruent to the model's flat
// parameter vector. Entries never decrease, so effective step sizes
// eta / (sqrt(G) + epsilon) never grow.
struct AdaGradState {
  std::vector<double> accum;
  explicit AdaGradState(std::size_t n_params) : accum(n_params, 0.0) {}
};

// G' = G + grad^2 first, then param' = param - eta / (sqrt(G') + epsilon) * grad.
void adagrad_update(double& param, double grad, double& accum, double eta,
                    double epsilon);

// Fraction of docs whose thresholded probability (>= 0.5 positive) matches
// the label.
double accuracy(const SwiModel& model, const std::vector<LabeledDoc>& docs);

struct TrainResult {
  SwiModel model;
  TrainHistory history;
};

// Trains a fresh model. Shuffles each epoch with a seeded PRNG, averages
// gradients over each mini-batch, applies AdaGrad updates, and snapshots the
// best validation epoch. With an empty validation set there is no early
// stopping and the final model is returned. Deterministic per config.seed.
// When `log` is given, one line per epoch is written:
//   epoch=<n> loss=<f> valid_acc=<f>
TrainResult train(ModelKind kind, const std::vector<LabeledDoc>& train_docs,
                  const std::vector<LabeledDoc>& valid_docs,
                  std::int32_t vocab_size, const TrainConfig& config,
                  std::ostream* log = nullptr);

// Compares every analytic gradient entry against central finite differences
// of the example objective on a randomly initialized model; returns the
// maximum relative error (denominator max(|analytic|, |numeric|, 1e-8)).
double finite_diff_check(ModelKind kind, const LabeledDoc& doc,
                         std::int32_t vocab_size, const TrainConfig& config,
                         double h = 1e-4);

}  // namespace swifm
