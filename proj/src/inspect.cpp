#include "swifm/inspect.hpp"

#include <algorithm>
#include <cstdio>
#include <stdexcept>
#include <unordered_map>

namespace swifm {

namespace {

bool is_factored(ModelKind kind) {
  return kind == ModelKind::FM || kind == ModelKind::CFM || kind == ModelKind::PFM;
}

std::int32_t check_distance(const SwiModel& model,
                            std::optional<std::int32_t> distance) {
  if (model.kind == ModelKind::PFM) {
    if (!distance) {
      throw std::invalid_argument("pfm models require a distance in 1..t");
    }
    if (*distance < 1 || *distance > model.context_size) {
      throw std::invalid_argument("distance out of range 1..t: " +
                                  std::to_string(*distance));
    }
    return *distance;
  }
  if (distance) {
    throw std::invalid_argument("distance is only meaningful for pfm models");
  }
  return 1;
}

double slice_dot(const SwiModel& model, std::int32_t a, std::int32_t b,
                 std::int32_t dist) {
  auto va = model.factor(a, dist);
  auto vb = model.factor(b, dist);
  double sum = 0.0;
  for (std::size_t l = 0; l < va.size(); ++l) sum += va[l] * vb[l];
  return sum;
}

}  // namespace

PairScore pair_score(const SwiModel& model, const Vocabulary& vocab,
                     const std::string& word_a, const std::string& word_b,
                     std::optional<std::int32_t> distance) {
  if (!is_factored(model.kind)) {
    throw std::invalid_argument("pair scores need a factorized model (fm/cfm/pfm)");
  }
  std::int32_t dist = check_distance(model, distance);
  std::int32_t a = vocab.require(word_a);
  std::int32_t b = vocab.require(word_b);

  PairScore out;
  out.word_a = word_a;
  out.word_b = word_b;
  if (model.kind == ModelKind::PFM) out.distance = dist;
  out.score = slice_dot(model, a, b, dist);
  return out;
}

std::vector<PairScore> top_interactions(const SwiModel& model,
                                        const Vocabulary& vocab,
                                        const std::string& word,
                                        std::size_t count, Direction direction,
                                        std::optional<std::int32_t> distance) {
  if (!is_factored(model.kind)) {
    throw std::invalid_argument("pair scores need a factorized model (fm/cfm/pfm)");
  }
  if (count < 1) throw std::invalid_argument("count must be >= 1");
  std::int32_t dist = check_distance(model, distance);
  std::int32_t anchor = vocab.require(word);

  std::vector<std::pair<double, std::int32_t>> scored;
  scored.reserve(static_cast<std::size_t>(model.vocab_size));
  for (std::int32_t id = 0; id < model.vocab_size; ++id) {
    scored.emplace_back(slice_dot(model, anchor, id, dist), id);
  }
  std::sort(scored.begin(), scored.end(), [&](const auto& x, const auto& y) {
    if (x.first != y.first) {
      return direction == Direction::kPositive ? x.first > y.first
                                               : x.first < y.first;
    }
    return x.second < y.second;
  });

  std::size_t take = std::min(count, scored.size());
  std::vector<PairScore> out;
  out.reserve(take);
  for (std::size_t i = 0; i < take; ++i) {
    PairScore p;
    p.word_a = word;
    p.word_b = vocab.id_to_word[static_cast<std::size_t>(scored[i].second)];
    if (model.kind == ModelKind::PFM) p.distance = dist;
    p.score = scored[i].first;
    out.push_back(std::move(p));
  }
  return out;
}

Explanation explain(const SwiModel& model, std::span<const std::int32_t> tokens) {
  if (model.kind == ModelKind::LR) {
    throw std::invalid_argument("explain needs an interaction model");
  }
  Logit logit = model_logit(model, tokens, /*with_terms=*/true);

  Explanation out;
  out.bias = model.bias;
  out.logit = logit.value;
  out.interactions = std::move(logit.terms);

  std::unordered_map<std::int32_t, std::size_t> slot;
  for (std::int32_t id : tokens) {
    auto [it, inserted] = slot.try_emplace(id, out.linear.size());
    if (inserted) out.linear.emplace_back(id, 0.0);
    out.linear[it->second].second += model.linear[static_cast<std::size_t>(id)];
  }
  return out;
}

std::string pair_score_tsv(const PairScore& score) {
  char buf[160];
  if (score.distance) {
    std::snprintf(buf, sizeof buf, "%s\t%s\t%d\t%.6f", score.word_a.c_str(),
                  score.word_b.c_str(), *score.distance, score.score);
  } else {
    std::snprintf(buf, sizeof buf, "%s\t%s\t-\t%.6f", score.word_a.c_str(),
                  score.word_b.c_str(), score.score);
  }
  return buf;
}

}  // namespace swifm
