#include "swifm/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "swifm/rng.hpp"

namespace swifm {

namespace {

bool is_word_byte(char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') ||
         (c >= 'A' && c <= 'Z');
}

char lower_byte(char c) {
  return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

}  // namespace

std::int32_t Vocabulary::require(const std::string& word) const {
  auto it = word_to_id.find(word);
  if (it == word_to_id.end()) {
    throw std::runtime_error("word not in vocabulary: " + word);
  }
  return it->second;
}

void SplitSpec::validate() const {
  if (!(train_frac > 0.0 && valid_frac > 0.0 && test_frac > 0.0)) {
    throw std::invalid_argument("split fractions must be positive");
  }
  if (std::abs(train_frac + valid_frac + test_frac - 1.0) > 1e-9) {
    throw std::invalid_argument("split fractions must sum to 1");
  }
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char c : text) {
    if (is_word_byte(c)) {
      current.push_back(lower_byte(c));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

Vocabulary build_vocab(const std::vector<std::vector<std::string>>& docs,
                       std::int64_t min_count) {
  if (min_count < 1) throw std::invalid_argument("min_count must be >= 1");
  std::unordered_map<std::string, std::int64_t> freq;
  for (const auto& doc : docs) {
    for (const auto& word : doc) ++freq[word];
  }

  std::vector<std::pair<std::string, std::int64_t>> retained;
  retained.reserve(freq.size());
  for (const auto& [word, count] : freq) {
    if (count >= min_count) retained.emplace_back(word, count);
  }
  if (retained.empty()) {
    throw std::runtime_error("empty vocabulary: no word reaches min_count");
  }
  std::sort(retained.begin(), retained.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });

  Vocabulary vocab;
  vocab.id_to_word.reserve(retained.size());
  vocab.counts.reserve(retained.size());
  for (std::size_t id = 0; id < retained.size(); ++id) {
    vocab.word_to_id.emplace(retained[id].first, static_cast<std::int32_t>(id));
    vocab.id_to_word.push_back(retained[id].first);
    vocab.counts.push_back(retained[id].second);
  }
  return vocab;
}

std::vector<std::int32_t> encode(const Vocabulary& vocab,
                                 const std::vector<std::string>& tokens) {
  std::vector<std::int32_t> ids;
  ids.reserve(tokens.size());
  for (const auto& token : tokens) {
    if (auto id = vocab.find(token)) ids.push_back(*id);
  }
  return ids;
}

std::vector<std::string> decode(const Vocabulary& vocab,
                                std::span<const std::int32_t> ids) {
  std::vector<std::string> words;
  words.reserve(ids.size());
  for (std::int32_t id : ids) {
    if (id < 0 || id >= vocab.size()) {
      throw std::runtime_error("token id out of range: " + std::to_string(id));
    }
    words.push_back(vocab.id_to_word[static_cast<std::size_t>(id)]);
  }
  return words;
}

std::vector<std::pair<std::string, int>> load_tsv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);

  std::vector<std::pair<std::string, int>> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::size_t tab = line.rfind('\t');
    if (tab == std::string::npos) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": missing tab separator");
    }
    std::string label = line.substr(tab + 1);
    if (label != "0" && label != "1") {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": label must be 0 or 1, got '" + label + "'");
    }
    records.emplace_back(line.substr(0, tab), label == "1" ? 1 : 0);
  }
  return records;
}

Split split(const std::vector<LabeledDoc>& docs, const SplitSpec& spec) {
  spec.validate();
  if (docs.size() < 10) {
    throw std::invalid_argument("split requires at least 10 documents");
  }

  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    (docs[i].label == 1 ? pos : neg).push_back(i);
  }

  Rng rng(spec.seed);
  rng.shuffle(pos);
  rng.shuffle(neg);

  Split out;
  auto partition = [&](const std::vector<std::size_t>& group) {
    auto n = group.size();
    auto b1 = static_cast<std::size_t>(std::llround(spec.train_frac * static_cast<double>(n)));
    auto b2 = static_cast<std::size_t>(
        std::llround((spec.train_frac + spec.valid_frac) * static_cast<double>(n)));
    b1 = std::min(b1, n);
    b2 = std::min(std::max(b2, b1), n);
    for (std::size_t i = 0; i < n; ++i) {
      auto& dest = i < b1 ? out.train : (i < b2 ? out.valid : out.test);
      dest.push_back(docs[group[i]]);
    }
  };
  partition(pos);
  partition(neg);

  // Interleave labels inside each partition.
  rng.shuffle(out.train);
  rng.shuffle(out.valid);
  rng.shuffle(out.test);
  return out;
}

void save_vocab(const Vocabulary& vocab, const std::string& path) {
  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file: " + tmp);
    for (std::int32_t id = 0; id < vocab.size(); ++id) {
      out << vocab.id_to_word[static_cast<std::size_t>(id)] << '\t' << id
          << '\t' << vocab.counts[static_cast<std::size_t>(id)] << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

Vocabulary load_vocab(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);

  Vocabulary vocab;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::size_t t1 = line.find('\t');
    std::size_t t2 = t1 == std::string::npos ? std::string::npos : line.find('\t', t1 + 1);
    if (t2 == std::string::npos) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": expected word\\tid\\tcount");
    }
    std::string word = line.substr(0, t1);
    long id = 0;
    long long count = 0;
    try {
      id = std::stol(line.substr(t1 + 1, t2 - t1 - 1));
      count = std::stoll(line.substr(t2 + 1));
    } catch (const std::exception&) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": bad id or count");
    }
    if (id != vocab.size()) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": ids must be ascending from 0");
    }
    vocab.word_to_id.emplace(word, static_cast<std::int32_t>(id));
    vocab.id_to_word.push_back(word);
    vocab.counts.push_back(count);
  }
  if (vocab.size() == 0) throw std::runtime_error("empty vocabulary file: " + path);
  return vocab;
}

}  // namespace swifm
