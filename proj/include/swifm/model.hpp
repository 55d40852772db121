// Model parameterizations and logit computation for the word-interaction
// model family:
//
//   LR     linear bag-of-words score
//   POLY2  one independent weight per word pair (hashed), all pairs
//   FM     factorized pair weights <v_i, v_j>, all pairs
//   CFM    FM restricted to pairs within a forward context window of size t
//   PFM    CFM with factors additionally indexed by token distance ds = j-i
//
// Every token position carries feature value 1, so a word occurring at m
// positions contributes through each of its m positions.
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace swifm {

enum class ModelKind { LR, POLY2, FM, CFM, PFM };

std::string_view kind_name(ModelKind kind);
ModelKind kind_from_name(std::string_view name);  // throws std::invalid_argument

struct SwiModel {
  ModelKind kind = ModelKind::LR;
  std::int32_t vocab_size = 0;    // N
  std::int32_t factor_dim = 0;    // k (FM/CFM/PFM)
  std::int32_t context_size = 0;  // t (CFM/PFM)
  std::int64_t hash_buckets = 0;  // B (POLY2)

  double bias = 0.0;
  std::vector<double> linear;        // N per-word weights
  std::vector<double> factors;       // FM/CFM: N*k; PFM: N*t*k, [word][distance][dim]
  std::vector<double> pair_weights;  // POLY2: B

  // One distance slice per word for FM/CFM, t slices for PFM.
  std::int32_t distance_slices() const {
    return kind == ModelKind::PFM ? context_size : 1;
  }

  // Factor vector of `word` at distance `dist` (1-based; ignored unless PFM).
  std::span<const double> factor(std::int32_t word, std::int32_t dist = 1) const;
  std::span<double> factor(std::int32_t word, std::int32_t dist = 1);

  // Flat parameter indexing: [0] bias, [1..N] linear, then factors in memory
  // order, then pair weights. Used by the optimizer and the gradient oracle.
  std::size_t num_parameters() const {
    return 1 + linear.size() + factors.size() + pair_weights.size();
  }
  double& param(std::size_t index);
  double param(std::size_t index) const;
  std::size_t linear_param(std::int32_t word) const {
    return 1 + static_cast<std::size_t>(word);
  }
  std::size_t factor_param(std::int32_t word, std::int32_t dist,
                           std::int32_t dim) const;
  std::size_t pair_param(std::uint64_t bucket) const {
    return 1 + linear.size() + factors.size() + bucket;
  }
};

// Bucket index for a word pair under the hashing trick. Order-insensitive.
std::uint64_t pair_bucket(std::int32_t a, std::int32_t b, std::int64_t buckets);

struct InteractionTerm {
  std::int32_t pos_i = 0;    // token positions, pos_i < pos_j
  std::int32_t pos_j = 0;
  std::int32_t distance = 0; // pos_j - pos_i
  double value = 0.0;
};

struct Logit {
  double value = 0.0;
  bool has_terms = false;
  std::vector<InteractionTerm> terms;  // filled when requested
};

// Per-kind logits. All validate token ids against the vocabulary size.
Logit lr_logit(const SwiModel& model, std::span<const std::int32_t> tokens,
               bool with_terms = false);
Logit poly2_logit(const SwiModel& model, std::span<const std::int32_t> tokens,
                  bool with_terms = false);
// O(N_d * k) via the sum-of-squares identity; the term list, when requested,
// enumerates all pairs.
Logit fm_logit(const SwiModel& model, std::span<const std::int32_t> tokens,
               bool with_terms = false);
Logit cfm_logit(const SwiModel& model, std::span<const std::int32_t> tokens,
                bool with_terms = false);
Logit pfm_logit(const SwiModel& model, std::span<const std::int32_t> tokens,
                bool with_terms = false);

// Dispatch on model.kind.
Logit model_logit(const SwiModel& model, std::span<const std::int32_t> tokens,
                  bool with_terms = false);

double sigmoid(double x);
double predict_prob(const SwiModel& model, std::span<const std::int32_t> tokens);

// Zero bias and linear weights; factor entries and pair weights drawn i.i.d.
// from a zero-mean Gaussian with stddev 0.01. Deterministic per seed.
SwiModel init_model(ModelKind kind, std::int32_t vocab_size,
                    std::int32_t factor_dim, std::int32_t context_size,
                    std::int64_t hash_buckets, std::uint64_t seed);

// Model file: one JSON header line, then all parameters as raw 32-bit
// little-endian IEEE-754 floats in flat order. Loading rejects unknown
// format versions.
void save_model(const SwiModel& model, const std::string& path,
                const std::string& vocab_file);

struct LoadedModel {
  SwiModel model;
  std::string vocab_file;
};
LoadedModel load_model(const std::string& path);

}  // namespace swifm
