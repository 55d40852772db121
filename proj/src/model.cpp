#include "swifm/model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "json.hpp"
#include "swifm/rng.hpp"

namespace swifm {

namespace {

constexpr int kModelFormatVersion = 1;

void check_tokens(const SwiModel& model, std::span<const std::int32_t> tokens) {
  for (std::int32_t id : tokens) {
    if (id < 0 || id >= model.vocab_size) {
      throw std::runtime_error("token id out of range: " + std::to_string(id));
    }
  }
}

void check_kind(const SwiModel& model, ModelKind expected) {
  if (model.kind != expected) {
    throw std::invalid_argument(std::string("model kind mismatch: expected ") +
                                std::string(kind_name(expected)) + ", got " +
                                std::string(kind_name(model.kind)));
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t l = 0; l < a.size(); ++l) sum += a[l] * b[l];
  return sum;
}

// Bias + per-occurrence linear weights, shared by every kind.
double linear_part(const SwiModel& model, std::span<const std::int32_t> tokens) {
  double sum = model.bias;
  for (std::int32_t id : tokens) sum += model.linear[static_cast<std::size_t>(id)];
  return sum;
}

}  // namespace

std::string_view kind_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::LR: return "lr";
    case ModelKind::POLY2: return "poly2";
    case ModelKind::FM: return "fm";
    case ModelKind::CFM: return "cfm";
    case ModelKind::PFM: return "pfm";
  }
  throw std::invalid_argument("unknown model kind");
}

ModelKind kind_from_name(std::string_view name) {
  if (name == "lr") return ModelKind::LR;
  if (name == "poly2") return ModelKind::POLY2;
  if (name == "fm") return ModelKind::FM;
  if (name == "cfm") return ModelKind::CFM;
  if (name == "pfm") return ModelKind::PFM;
  throw std::invalid_argument("unknown model kind: " + std::string(name));
}

std::span<const double> SwiModel::factor(std::int32_t word, std::int32_t dist) const {
  std::size_t slot = kind == ModelKind::PFM ? static_cast<std::size_t>(dist - 1) : 0;
  std::size_t offset = (static_cast<std::size_t>(word) * static_cast<std::size_t>(distance_slices()) + slot) *
                       static_cast<std::size_t>(factor_dim);
  return {factors.data() + offset, static_cast<std::size_t>(factor_dim)};
}

std::span<double> SwiModel::factor(std::int32_t word, std::int32_t dist) {
  auto view = static_cast<const SwiModel&>(*this).factor(word, dist);
  return {factors.data() + (view.data() - factors.data()), view.size()};
}

double& SwiModel::param(std::size_t index) {
  if (index == 0) return bias;
  index -= 1;
  if (index < linear.size()) return linear[index];
  index -= linear.size();
  if (index < factors.size()) return factors[index];
  index -= factors.size();
  return pair_weights.at(index);
}

double SwiModel::param(std::size_t index) const {
  return const_cast<SwiModel&>(*this).param(index);
}

std::size_t SwiModel::factor_param(std::int32_t word, std::int32_t dist,
                                   std::int32_t dim) const {
  std::size_t slot = kind == ModelKind::PFM ? static_cast<std::size_t>(dist - 1) : 0;
  std::size_t offset = (static_cast<std::size_t>(word) * static_cast<std::size_t>(distance_slices()) + slot) *
                           static_cast<std::size_t>(factor_dim) +
                       static_cast<std::size_t>(dim);
  return 1 + linear.size() + offset;
}

std::uint64_t pair_bucket(std::int32_t a, std::int32_t b, std::int64_t buckets) {
  auto lo = static_cast<std::uint64_t>(std::min(a, b));
  auto hi = static_cast<std::uint64_t>(std::max(a, b));
  std::uint64_t key = (lo << 32) | hi;
  key = splitmix64_next(key);
  return key % static_cast<std::uint64_t>(buckets);
}

Logit lr_logit(const SwiModel& model, std::span<const std::int32_t> tokens,
               bool with_terms) {
  check_kind(model, ModelKind::LR);
  check_tokens(model, tokens);
  Logit out;
  out.value = linear_part(model, tokens);
  out.has_terms = with_terms;
  return out;
}

Logit poly2_logit(const SwiModel& model, std::span<const std::int32_t> tokens,
                  bool with_terms) {
  check_kind(model, ModelKind::POLY2);
  check_tokens(model, tokens);
  Logit out;
  out.has_terms = with_terms;
  double interactions = 0.0;
  auto n = static_cast<std::int32_t>(tokens.size());
  for (std::int32_t i = 0; i < n; ++i) {
    for (std::int32_t j = i + 1; j < n; ++j) {
      std::uint64_t bucket = pair_bucket(tokens[i], tokens[j], model.hash_buckets);
      double w = model.pair_weights[bucket];
      interactions += w;
      if (with_terms) out.terms.push_back({i, j, j - i, w});
    }
  }
  out.value = linear_part(model, tokens) + interactions;
  return out;
}

Logit fm_logit(const SwiModel& model, std::span<const std::int32_t> tokens,
               bool with_terms) {
  check_kind(model, ModelKind::FM);
  check_tokens(model, tokens);
  Logit out;
  out.has_terms = with_terms;

  // ((sum v)^2 - sum v^2) / 2 per dimension.
  double interactions = 0.0;
  auto k = static_cast<std::size_t>(model.factor_dim);
  std::vector<double> sums(k, 0.0);
  std::vector<double> sq_sums(k, 0.0);
  for (std::int32_t id : tokens) {
    auto v = model.factor(id);
    for (std::size_t l = 0; l < k; ++l) {
      sums[l] += v[l];
      sq_sums[l] += v[l] * v[l];
    }
  }
  for (std::size_t l = 0; l < k; ++l) {
    interactions += 0.5 * (sums[l] * sums[l] - sq_sums[l]);
  }

  if (with_terms) {
    auto n = static_cast<std::int32_t>(tokens.size());
    for (std::int32_t i = 0; i < n; ++i) {
      for (std::int32_t j = i + 1; j < n; ++j) {
        out.terms.push_back(
            {i, j, j - i, dot(model.factor(tokens[i]), model.factor(tokens[j]))});
      }
    }
  }
  out.value = linear_part(model, tokens) + interactions;
  return out;
}

Logit cfm_logit(const SwiModel& model, std::span<const std::int32_t> tokens,
                bool with_terms) {
  check_kind(model, ModelKind::CFM);
  check_tokens(model, tokens);
  Logit out;
  out.has_terms = with_terms;
  double interactions = 0.0;
  auto n = static_cast<std::int32_t>(tokens.size());
  for (std::int32_t i = 0; i < n; ++i) {
    std::int32_t hi = std::min<std::int64_t>(static_cast<std::int64_t>(i) + model.context_size, n - 1);
    for (std::int32_t j = i + 1; j <= hi; ++j) {
      double term = dot(model.factor(tokens[i]), model.factor(tokens[j]));
      interactions += term;
      if (with_terms) out.terms.push_back({i, j, j - i, term});
    }
  }
  out.value = linear_part(model, tokens) + interactions;
  return out;
}

Logit pfm_logit(const SwiModel& model, std::span<const std::int32_t> tokens,
                bool with_terms) {
  check_kind(model, ModelKind::PFM);
  check_tokens(model, tokens);
  Logit out;
  out.has_terms = with_terms;
  double interactions = 0.0;
  auto n = static_cast<std::int32_t>(tokens.size());
  for (std::int32_t i = 0; i < n; ++i) {
    std::int32_t hi = std::min<std::int64_t>(static_cast<std::int64_t>(i) + model.context_size, n - 1);
    for (std::int32_t j = i + 1; j <= hi; ++j) {
      std::int32_t d = j - i;
      double term = dot(model.factor(tokens[i], d), model.factor(tokens[j], d));
      interactions += term;
      if (with_terms) out.terms.push_back({i, j, d, term});
    }
  }
  out.value = linear_part(model, tokens) + interactions;
  return out;
}

Logit model_logit(const SwiModel& model, std::span<const std::int32_t> tokens,
                  bool with_terms) {
  switch (model.kind) {
    case ModelKind::LR: return lr_logit(model, tokens, with_terms);
    case ModelKind::POLY2: return poly2_logit(model, tokens, with_terms);
    case ModelKind::FM: return fm_logit(model, tokens, with_terms);
    case ModelKind::CFM: return cfm_logit(model, tokens, with_terms);
    case ModelKind::PFM: return pfm_logit(model, tokens, with_terms);
  }
  throw std::invalid_argument("unknown model kind");
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

double predict_prob(const SwiModel& model, std::span<const std::int32_t> tokens) {
  return sigmoid(model_logit(model, tokens).value);
}

SwiModel init_model(ModelKind kind, std::int32_t vocab_size,
                    std::int32_t factor_dim, std::int32_t context_size,
                    std::int64_t hash_buckets, std::uint64_t seed) {
  if (vocab_size < 1) throw std::invalid_argument("vocab_size must be >= 1");
  bool factored = kind == ModelKind::FM || kind == ModelKind::CFM || kind == ModelKind::PFM;
  if (factored && factor_dim < 1) {
    throw std::invalid_argument("factor_dim must be >= 1 for factorized kinds");
  }
  bool windowed = kind == ModelKind::CFM || kind == ModelKind::PFM;
  if (windowed && context_size < 1) {
    throw std::invalid_argument("context_size must be >= 1 for cfm/pfm");
  }
  if (kind == ModelKind::POLY2 && hash_buckets < 1) {
    throw std::invalid_argument("hash_buckets must be >= 1 for poly2");
  }

  SwiModel model;
  model.kind = kind;
  model.vocab_size = vocab_size;
  model.factor_dim = factored ? factor_dim : 0;
  model.context_size = windowed ? context_size : 0;
  model.hash_buckets = kind == ModelKind::POLY2 ? hash_buckets : 0;
  model.linear.assign(static_cast<std::size_t>(vocab_size), 0.0);

  Rng rng(seed);
  constexpr double kInitStddev = 0.01;
  if (factored) {
    std::size_t count = static_cast<std::size_t>(vocab_size) *
                        static_cast<std::size_t>(model.distance_slices()) *
                        static_cast<std::size_t>(factor_dim);
    model.factors.resize(count);
    for (auto& f : model.factors) f = rng.next_gaussian(kInitStddev);
  }
  if (kind == ModelKind::POLY2) {
    model.pair_weights.resize(static_cast<std::size_t>(hash_buckets));
    for (auto& w : model.pair_weights) w = rng.next_gaussian(kInitStddev);
  }
  return model;
}

namespace {

void write_f32(std::ostream& out, double value) {
  auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(value));
  char bytes[4] = {static_cast<char>(bits & 0xff),
                   static_cast<char>((bits >> 8) & 0xff),
                   static_cast<char>((bits >> 16) & 0xff),
                   static_cast<char>((bits >> 24) & 0xff)};
  out.write(bytes, 4);
}

double read_f32(std::istream& in) {
  unsigned char bytes[4];
  in.read(reinterpret_cast<char*>(bytes), 4);
  if (!in) throw std::runtime_error("truncated model file");
  std::uint32_t bits = static_cast<std::uint32_t>(bytes[0]) |
                       (static_cast<std::uint32_t>(bytes[1]) << 8) |
                       (static_cast<std::uint32_t>(bytes[2]) << 16) |
                       (static_cast<std::uint32_t>(bytes[3]) << 24);
  return static_cast<double>(std::bit_cast<float>(bits));
}

}  // namespace

void save_model(const SwiModel& model, const std::string& path,
                const std::string& vocab_file) {
  nlohmann::json header = {
      {"format", "swi-model"},
      {"version", kModelFormatVersion},
      {"kind", std::string(kind_name(model.kind))},
      {"vocab_size", model.vocab_size},
      {"factor_dim", model.factor_dim},
      {"context_size", model.context_size},
      {"hash_buckets", model.hash_buckets},
      {"vocab_file", vocab_file},
  };

  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file: " + tmp);
    out << header.dump() << '\n';
    write_f32(out, model.bias);
    for (double w : model.linear) write_f32(out, w);
    for (double f : model.factors) write_f32(out, f);
    for (double w : model.pair_weights) write_f32(out, w);
    if (!out) throw std::runtime_error("write failed: " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

LoadedModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);

  std::string header_line;
  if (!std::getline(in, header_line)) {
    throw std::runtime_error("missing model header: " + path);
  }
  nlohmann::json header = nlohmann::json::parse(header_line, nullptr, false);
  if (header.is_discarded() || header.value("format", "") != "swi-model") {
    throw std::runtime_error("not a model file: " + path);
  }
  if (header.value("version", -1) != kModelFormatVersion) {
    throw std::runtime_error("unsupported model format version in " + path);
  }

  LoadedModel loaded;
  loaded.vocab_file = header.value("vocab_file", "");
  SwiModel& model = loaded.model;
  model.kind = kind_from_name(header.at("kind").get<std::string>());
  model.vocab_size = header.at("vocab_size").get<std::int32_t>();
  model.factor_dim = header.at("factor_dim").get<std::int32_t>();
  model.context_size = header.at("context_size").get<std::int32_t>();
  model.hash_buckets = header.at("hash_buckets").get<std::int64_t>();
  if (model.vocab_size < 1) throw std::runtime_error("bad vocab_size in " + path);

  model.bias = read_f32(in);
  model.linear.resize(static_cast<std::size_t>(model.vocab_size));
  for (auto& w : model.linear) w = read_f32(in);

  bool factored = model.kind == ModelKind::FM || model.kind == ModelKind::CFM ||
                  model.kind == ModelKind::PFM;
  if (factored) {
    std::size_t count = static_cast<std::size_t>(model.vocab_size) *
                        static_cast<std::size_t>(model.distance_slices()) *
                        static_cast<std::size_t>(model.factor_dim);
    model.factors.resize(count);
    for (auto& f : model.factors) f = read_f32(in);
  }
  if (model.kind == ModelKind::POLY2) {
    model.pair_weights.resize(static_cast<std::size_t>(model.hash_buckets));
    for (auto& w : model.pair_weights) w = read_f32(in);
  }

  char extra;
  if (in.read(&extra, 1)) {
    throw std::runtime_error("trailing bytes in model file: " + path);
  }
  for (std::size_t i = 0; i < model.num_parameters(); ++i) {
    if (!std::isfinite(model.param(i))) {
      throw std::runtime_error("non-finite parameter in model file: " + path);
    }
  }
  return loaded;
}

}  // namespace swifm
