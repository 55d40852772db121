// Read-only views into a trained model: word-pair interaction scores,
// ranked interaction partners, and per-term prediction breakdowns.
//
// Scores are raw factor dot products, i.e. logit contributions: positive
// pushes a co-occurring pair toward the positive class, 0 is neutral. For
// pairs that never co-occur in training the score only reflects
// initialization noise.
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "swifm/corpus.hpp"
#include "swifm/model.hpp"

namespace swifm {

struct PairScore {
  std::string word_a;
  std::string word_b;
  std::optional<std::int32_t> distance;  // PFM only
  double score = 0.0;
};

enum class Direction { kPositive, kNegative };

// Dot product of the two words' interaction vectors; for PFM at the given
// distance (required, 1..t), for FM/CFM distance must be absent. Unknown
// words raise an error naming the word.
PairScore pair_score(const SwiModel& model, const Vocabulary& vocab,
                     const std::string& word_a, const std::string& word_b,
                     std::optional<std::int32_t> distance = std::nullopt);

// Every vocabulary word scored against `word`, sorted by score (descending
// for positive, ascending for negative), ties broken by word id. Returns
// min(count, N) entries.
std::vector<PairScore> top_interactions(
    const SwiModel& model, const Vocabulary& vocab, const std::string& word,
    std::size_t count, Direction direction,
    std::optional<std::int32_t> distance = std::nullopt);

struct Explanation {
  double bias = 0.0;
  std::vector<std::pair<std::int32_t, double>> linear;  // (word id, weight * count)
  std::vector<InteractionTerm> interactions;
  double logit = 0.0;
};

// Term-by-term breakdown of a prediction; the listed terms plus bias and
// linear parts sum to the logit. Interaction kinds only.
Explanation explain(const SwiModel& model, std::span<const std::int32_t> tokens);

// One `word_a<TAB>word_b<TAB>distance|-<TAB>score` row.
std::string pair_score_tsv(const PairScore& score);

}  // namespace swifm
