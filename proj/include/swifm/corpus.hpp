// Text ingestion: tokenization, vocabulary construction, document encoding
// and deterministic stratified splits.
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace swifm {

// Bidirectional word <-> id map. Ids are dense 0..size()-1, assigned by
// descending training-corpus frequency with lexicographic tie-break.
struct Vocabulary {
  std::unordered_map<std::string, std::int32_t> word_to_id;
  std::vector<std::string> id_to_word;
  std::vector<std::int64_t> counts;  // per-id frequency in the build corpus

  std::int32_t size() const { return static_cast<std::int32_t>(id_to_word.size()); }

  std::optional<std::int32_t> find(const std::string& word) const {
    auto it = word_to_id.find(word);
    if (it == word_to_id.end()) return std::nullopt;
    return it->second;
  }

  // Lookup that throws, naming the missing word.
  std::int32_t require(const std::string& word) const;
};

// Encoded document: token ids plus a binary sentiment label (0 = negative,
// 1 = positive).
struct LabeledDoc {
  std::vector<std::int32_t> tokens;
  int label = 0;
};

struct SplitSpec {
  double train_frac = 0.7;
  double valid_frac = 0.1;
  double test_frac = 0.2;
  std::uint64_t seed = 42;

  void validate() const;  // throws std::invalid_argument
};

struct Split {
  std::vector<LabeledDoc> train;
  std::vector<LabeledDoc> valid;
  std::vector<LabeledDoc> test;
};

// Lowercases and splits on maximal runs of non-alphanumeric bytes; empty
// tokens are dropped, order preserved.
std::vector<std::string> tokenize(std::string_view text);

// Vocabulary of all words with frequency >= min_count. Throws if the result
// would be empty.
Vocabulary build_vocab(const std::vector<std::vector<std::string>>& docs,
                       std::int64_t min_count);

// Out-of-vocabulary tokens are silently dropped; positions re-compact.
std::vector<std::int32_t> encode(const Vocabulary& vocab,
                                 const std::vector<std::string>& tokens);

std::vector<std::string> decode(const Vocabulary& vocab,
                                std::span<const std::int32_t> ids);

// Reads `<text>\t<label>` records, one per line, label in {0,1}. Blank lines
// are skipped; malformed lines raise an error naming the line number.
std::vector<std::pair<std::string, int>> load_tsv(const std::string& path);

// Seeded, label-stratified shuffle-and-partition. Each partition's class
// ratio matches the whole within one document; deterministic per seed.
Split split(const std::vector<LabeledDoc>& docs, const SplitSpec& spec);

// Vocabulary file: one `<word>\t<id>\t<count>` per line, ids ascending.
void save_vocab(const Vocabulary& vocab, const std::string& path);
Vocabulary load_vocab(const std::string& path);

}  // namespace swifm
