#include "swifm/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <unordered_map>

#include "json.hpp"
#include "swifm/rng.hpp"

namespace swifm {

namespace {

// Stream tags for deriving independent PRNG sequences from config.seed.
constexpr std::uint64_t kShuffleStream = 1;
constexpr std::uint64_t kPerturbStream = 2;

// Everything a document structurally touches in a model: distinct words with
// occurrence counts, factor slices (word, distance) that appear in at least
// one interaction, and occurring pair-hash buckets. All lists are in first
// occurrence order, so gradient assembly is fully deterministic.
struct DocStructure {
  std::vector<std::pair<std::int32_t, std::int32_t>> word_counts;
  std::vector<std::pair<std::int32_t, std::int32_t>> factor_slices;  // (word, dist)
  std::vector<std::pair<std::uint64_t, std::int32_t>> pair_buckets;
};

DocStructure doc_structure(const SwiModel& model, const LabeledDoc& doc) {
  DocStructure s;
  const auto& toks = doc.tokens;
  auto n = static_cast<std::int32_t>(toks.size());

  std::unordered_map<std::int32_t, std::size_t> word_slot;
  for (std::int32_t id : toks) {
    auto [it, inserted] = word_slot.try_emplace(id, s.word_counts.size());
    if (inserted) s.word_counts.emplace_back(id, 0);
    ++s.word_counts[it->second].second;
  }

  auto add_slice = [&](std::unordered_map<std::int64_t, bool>& seen,
                       std::int32_t word, std::int32_t dist) {
    std::int64_t key = static_cast<std::int64_t>(word) * (model.context_size + 1) + dist;
    if (seen.try_emplace(key, true).second) s.factor_slices.emplace_back(word, dist);
  };

  switch (model.kind) {
    case ModelKind::LR:
      break;
    case ModelKind::POLY2: {
      std::unordered_map<std::uint64_t, std::size_t> bucket_slot;
      for (std::int32_t i = 0; i < n; ++i) {
        for (std::int32_t j = i + 1; j < n; ++j) {
          std::uint64_t b = pair_bucket(toks[i], toks[j], model.hash_buckets);
          auto [it, inserted] = bucket_slot.try_emplace(b, s.pair_buckets.size());
          if (inserted) s.pair_buckets.emplace_back(b, 0);
          ++s.pair_buckets[it->second].second;
        }
      }
      break;
    }
    case ModelKind::FM:
    case ModelKind::CFM: {
      // With t >= 1 every position has a window partner once N_d >= 2.
      if (n >= 2) {
        for (const auto& [word, count] : s.word_counts) {
          s.factor_slices.emplace_back(word, 1);
        }
      }
      break;
    }
    case ModelKind::PFM: {
      std::unordered_map<std::int64_t, bool> seen;
      for (std::int32_t i = 0; i < n; ++i) {
        for (std::int32_t d = 1; d <= model.context_size && i + d < n; ++d) {
          add_slice(seen, toks[i], d);
          add_slice(seen, toks[static_cast<std::size_t>(i + d)], d);
        }
      }
      break;
    }
  }
  return s;
}

}  // namespace

void TrainConfig::validate() const {
  if (factor_dim < 1) throw std::invalid_argument("factor_dim must be >= 1");
  if (context_size < 1) throw std::invalid_argument("context_size must be >= 1");
  if (!(eta > 0.0)) throw std::invalid_argument("eta must be > 0");
  if (lambda < 0.0) throw std::invalid_argument("lambda must be >= 0");
  if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  if (max_epochs < 1) throw std::invalid_argument("max_epochs must be >= 1");
  if (patience < 1) throw std::invalid_argument("patience must be >= 1");
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be > 0");
  if (hash_buckets < 1) throw std::invalid_argument("hash_buckets must be >= 1");
}

std::string history_json(const TrainHistory& history) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& e : history.epochs) {
    arr.push_back({{"epoch", e.epoch},
                   {"train_loss", e.train_loss},
                   {"valid_acc", e.valid_acc}});
  }
  return arr.dump();
}

double logistic_loss(double prob, int label) {
  double p = std::clamp(prob, 1e-12, 1.0 - 1e-12);
  return -(label * std::log(p) + (1 - label) * std::log(1.0 - p));
}

SparseGrad compute_gradients(const SwiModel& model, const LabeledDoc& doc,
                             double lambda, double* loss_out) {
  const auto& toks = doc.tokens;
  double logit = model_logit(model, toks).value;
  double prob = sigmoid(logit);
  if (loss_out) *loss_out = logistic_loss(prob, doc.label);
  double delta = prob - doc.label;

  DocStructure s = doc_structure(model, doc);
  auto n = static_cast<std::int32_t>(toks.size());
  auto k = static_cast<std::size_t>(model.factor_dim);

  SparseGrad grad;
  grad.entries.reserve(1 + s.word_counts.size() + s.factor_slices.size() * k +
                       s.pair_buckets.size());
  grad.entries.emplace_back(0, delta);
  for (const auto& [word, count] : s.word_counts) {
    grad.entries.emplace_back(
        model.linear_param(word),
        delta * count + lambda * model.linear[static_cast<std::size_t>(word)]);
  }

  if ((model.kind == ModelKind::FM || model.kind == ModelKind::CFM) && n >= 2) {
    // Per-slice accumulator; positions contribute delta * (sum of window
    // partner vectors).
    std::unordered_map<std::int32_t, std::size_t> slot;
    std::vector<double> scratch(s.factor_slices.size() * k, 0.0);
    for (std::size_t sl = 0; sl < s.factor_slices.size(); ++sl) {
      slot.emplace(s.factor_slices[sl].first, sl);
    }
    std::vector<double> psum(k);
    for (std::int32_t i = 0; i < n; ++i) {
      std::int32_t lo = 0, hi = n - 1;
      if (model.kind == ModelKind::CFM) {
        lo = std::max<std::int32_t>(0, i - model.context_size);
        hi = static_cast<std::int32_t>(std::min<std::int64_t>(
            static_cast<std::int64_t>(i) + model.context_size, n - 1));
      }
      std::fill(psum.begin(), psum.end(), 0.0);
      for (std::int32_t j = lo; j <= hi; ++j) {
        if (j == i) continue;
        auto v = model.factor(toks[static_cast<std::size_t>(j)]);
        for (std::size_t l = 0; l < k; ++l) psum[l] += v[l];
      }
      double* acc = scratch.data() + slot.at(toks[static_cast<std::size_t>(i)]) * k;
      for (std::size_t l = 0; l < k; ++l) acc[l] += delta * psum[l];
    }
    for (std::size_t sl = 0; sl < s.factor_slices.size(); ++sl) {
      std::int32_t word = s.factor_slices[sl].first;
      auto v = model.factor(word);
      for (std::size_t l = 0; l < k; ++l) {
        grad.entries.emplace_back(
            model.factor_param(word, 1, static_cast<std::int32_t>(l)),
            scratch[sl * k + l] + lambda * v[l]);
      }
    }
  } else if (model.kind == ModelKind::PFM) {
    std::unordered_map<std::int64_t, std::size_t> slot;
    for (std::size_t sl = 0; sl < s.factor_slices.size(); ++sl) {
      std::int64_t key = static_cast<std::int64_t>(s.factor_slices[sl].first) *
                             (model.context_size + 1) +
                         s.factor_slices[sl].second;
      slot.emplace(key, sl);
    }
    std::vector<double> scratch(s.factor_slices.size() * k, 0.0);
    auto slice_acc = [&](std::int32_t word, std::int32_t d) {
      std::int64_t key = static_cast<std::int64_t>(word) * (model.context_size + 1) + d;
      return scratch.data() + slot.at(key) * k;
    };
    for (std::int32_t i = 0; i < n; ++i) {
      for (std::int32_t d = 1; d <= model.context_size && i + d < n; ++d) {
        std::int32_t a = toks[static_cast<std::size_t>(i)];
        std::int32_t b = toks[static_cast<std::size_t>(i + d)];
        auto va = model.factor(a, d);
        auto vb = model.factor(b, d);
        double* ga = slice_acc(a, d);
        double* gb = slice_acc(b, d);
        for (std::size_t l = 0; l < k; ++l) {
          ga[l] += delta * vb[l];
          gb[l] += delta * va[l];
        }
      }
    }
    for (std::size_t sl = 0; sl < s.factor_slices.size(); ++sl) {
      auto [word, d] = s.factor_slices[sl];
      auto v = model.factor(word, d);
      for (std::size_t l = 0; l < k; ++l) {
        grad.entries.emplace_back(
            model.factor_param(word, d, static_cast<std::int32_t>(l)),
            scratch[sl * k + l] + lambda * v[l]);
      }
    }
  } else if (model.kind == ModelKind::POLY2) {
    for (const auto& [bucket, count] : s.pair_buckets) {
      grad.entries.emplace_back(model.pair_param(bucket),
                                delta * count + lambda * model.pair_weights[bucket]);
    }
  }
  return grad;
}

std::vector<std::size_t> touched_params(const SwiModel& model,
                                        const LabeledDoc& doc) {
  DocStructure s = doc_structure(model, doc);
  std::vector<std::size_t> indices;
  auto k = model.factor_dim;
  indices.reserve(1 + s.word_counts.size() +
                  s.factor_slices.size() * static_cast<std::size_t>(std::max(k, std::int32_t{0})) +
                  s.pair_buckets.size());
  indices.push_back(0);
  for (const auto& [word, count] : s.word_counts) {
    indices.push_back(model.linear_param(word));
  }
  for (const auto& [word, d] : s.factor_slices) {
    for (std::int32_t l = 0; l < k; ++l) {
      indices.push_back(model.factor_param(word, d, l));
    }
  }
  for (const auto& [bucket, count] : s.pair_buckets) {
    indices.push_back(model.pair_param(bucket));
  }
  return indices;
}

double example_objective(const SwiModel& model, const LabeledDoc& doc,
                         double lambda) {
  double loss = logistic_loss(sigmoid(model_logit(model, doc.tokens).value),
                              doc.label);
  double penalty = 0.0;
  for (std::size_t idx : touched_params(model, doc)) {
    if (idx == 0) continue;  // bias is unregularized
    double theta = model.param(idx);
    penalty += theta * theta;
  }
  return loss + 0.5 * lambda * penalty;
}

void adagrad_update(double& param, double grad, double& accum, double eta,
                    double epsilon) {
  accum += grad * grad;
  if (grad == 0.0) return;
  param -= eta / (std::sqrt(accum) + epsilon) * grad;
}

double accuracy(const SwiModel& model, const std::vector<LabeledDoc>& docs) {
  if (docs.empty()) throw std::invalid_argument("accuracy over empty docs");
  std::size_t correct = 0;
  for (const auto& doc : docs) {
    int predicted = predict_prob(model, doc.tokens) >= 0.5 ? 1 : 0;
    if (predicted == doc.label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(docs.size());
}

TrainResult train(ModelKind kind, const std::vector<LabeledDoc>& train_docs,
                  const std::vector<LabeledDoc>& valid_docs,
                  std::int32_t vocab_size, const TrainConfig& config,
                  std::ostream* log) {
  config.validate();
  if (train_docs.empty()) throw std::runtime_error("training set is empty");
  bool has_pos = false, has_neg = false;
  for (const auto& doc : train_docs) (doc.label == 1 ? has_pos : has_neg) = true;
  if (!has_pos || !has_neg) {
    throw std::runtime_error("training set must contain both classes");
  }

  SwiModel model = init_model(kind, vocab_size, config.factor_dim,
                              config.context_size, config.hash_buckets,
                              config.seed);
  std::size_t n_params = model.num_parameters();
  AdaGradState state(n_params);

  // Dense per-batch gradient buffer with stamps marking the slots the
  // current batch wrote, so only touched parameters are reset and updated.
  std::vector<double> batch_sum(n_params, 0.0);
  std::vector<std::uint64_t> stamp(n_params, 0);
  std::uint64_t batch_id = 0;
  std::vector<std::size_t> touched;

  Rng shuffle_rng(derive_seed(config.seed, kShuffleStream));
  std::vector<std::size_t> order(train_docs.size());
  std::iota(order.begin(), order.end(), 0);

  TrainHistory history;
  SwiModel best_model = model;
  double best_acc = -1.0;
  std::int32_t epochs_since_best = 0;
  const bool have_valid = !valid_docs.empty();
  auto n = train_docs.size();
  auto batch = static_cast<std::size_t>(config.batch_size);

  for (std::int32_t epoch = 0; epoch < config.max_epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double loss_sum = 0.0;

    for (std::size_t start = 0; start < n; start += batch) {
      std::size_t size = std::min(batch, n - start);
      ++batch_id;
      touched.clear();
      for (std::size_t b = 0; b < size; ++b) {
        double loss = 0.0;
        SparseGrad grad = compute_gradients(model, train_docs[order[start + b]],
                                            config.lambda, &loss);
        loss_sum += loss;
        for (const auto& [idx, value] : grad.entries) {
          if (stamp[idx] != batch_id) {
            stamp[idx] = batch_id;
            batch_sum[idx] = 0.0;
            touched.push_back(idx);
          }
          batch_sum[idx] += value;
        }
      }
      double inv = 1.0 / static_cast<double>(size);
      for (std::size_t idx : touched) {
        adagrad_update(model.param(idx), batch_sum[idx] * inv, state.accum[idx],
                       config.eta, config.epsilon);
      }
    }

    EpochRecord record;
    record.epoch = epoch;
    record.train_loss = loss_sum / static_cast<double>(n);
    record.valid_acc = have_valid ? accuracy(model, valid_docs)
                                  : std::numeric_limits<double>::quiet_NaN();
    history.epochs.push_back(record);

    if (log) {
      char line[128];
      if (std::isnan(record.valid_acc)) {
        std::snprintf(line, sizeof line, "epoch=%d loss=%.6f valid_acc=nan",
                      epoch, record.train_loss);
      } else {
        std::snprintf(line, sizeof line, "epoch=%d loss=%.6f valid_acc=%.6f",
                      epoch, record.train_loss, record.valid_acc);
      }
      (*log) << line << '\n';
    }

    if (have_valid) {
      if (record.valid_acc > best_acc) {
        best_acc = record.valid_acc;
        history.best_epoch = epoch;
        best_model = model;
        epochs_since_best = 0;
      } else if (++epochs_since_best >= config.patience) {
        history.stopped_early = true;
        break;
      }
    } else {
      history.best_epoch = epoch;
    }
  }

  TrainResult result;
  result.model = have_valid ? std::move(best_model) : std::move(model);
  result.history = std::move(history);
  return result;
}

double finite_diff_check(ModelKind kind, const LabeledDoc& doc,
                         std::int32_t vocab_size, const TrainConfig& config,
                         double h) {
  config.validate();
  if (!(h > 0.0)) throw std::invalid_argument("perturbation h must be > 0");

  SwiModel model = init_model(kind, vocab_size, config.factor_dim,
                              config.context_size, config.hash_buckets,
                              config.seed);
  // Redraw all parameters at a larger scale so the check also exercises the
  // regularization terms and nontrivial curvature.
  Rng rng(derive_seed(config.seed, kPerturbStream));
  model.bias = rng.next_gaussian(0.1);
  for (auto& w : model.linear) w = rng.next_gaussian(0.1);
  for (auto& f : model.factors) f = rng.next_gaussian(0.1);
  for (auto& w : model.pair_weights) w = rng.next_gaussian(0.1);

  SparseGrad analytic = compute_gradients(model, doc, config.lambda);
  std::unordered_map<std::size_t, double> by_index;
  std::vector<std::size_t> indices;
  for (const auto& [idx, value] : analytic.entries) {
    by_index.emplace(idx, value);
    indices.push_back(idx);
  }
  for (std::size_t idx : touched_params(model, doc)) {
    if (by_index.try_emplace(idx, 0.0).second) indices.push_back(idx);
  }

  double max_rel = 0.0;
  for (std::size_t idx : indices) {
    double saved = model.param(idx);
    model.param(idx) = saved + h;
    double loss_plus = example_objective(model, doc, config.lambda);
    model.param(idx) = saved - h;
    double loss_minus = example_objective(model, doc, config.lambda);
    model.param(idx) = saved;

    double numeric = (loss_plus - loss_minus) / (2.0 * h);
    double exact = by_index.at(idx);
    double rel = std::abs(exact - numeric) /
                 std::max({std::abs(exact), std::abs(numeric), 1e-8});
    max_rel = std::max(max_rel, rel);
  }
  return max_rel;
}

}  // namespace swifm
