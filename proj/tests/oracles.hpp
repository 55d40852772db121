// Reference logit implementations: plain double loops over all position
// pairs, kept independent of the library's computation paths (the fast FM
// identity, windowed loops, gradient code).
#pragma once

#include <cstdint>
#include <vector>

#include "swifm/model.hpp"

namespace oracle {

// Reads a factor entry straight out of the flat storage.
inline double factor_entry(const swifm::SwiModel& m, std::int32_t word,
                           std::int32_t dist, std::int32_t dim) {
  std::int64_t slices = m.kind == swifm::ModelKind::PFM ? m.context_size : 1;
  std::int64_t slot = m.kind == swifm::ModelKind::PFM ? dist - 1 : 0;
  std::int64_t idx = (static_cast<std::int64_t>(word) * slices + slot) * m.factor_dim + dim;
  return m.factors[static_cast<std::size_t>(idx)];
}

inline double pair_dot(const swifm::SwiModel& m, std::int32_t a, std::int32_t b,
                       std::int32_t dist) {
  double sum = 0.0;
  for (std::int32_t l = 0; l < m.factor_dim; ++l) {
    sum += factor_entry(m, a, dist, l) * factor_entry(m, b, dist, l);
  }
  return sum;
}

inline double brute_logit(const swifm::SwiModel& m,
                          const std::vector<std::int32_t>& tokens) {
  double y = m.bias;
  for (std::int32_t id : tokens) y += m.linear[static_cast<std::size_t>(id)];

  auto n = static_cast<std::int32_t>(tokens.size());
  for (std::int32_t i = 0; i < n; ++i) {
    for (std::int32_t j = i + 1; j < n; ++j) {
      std::int32_t d = j - i;
      switch (m.kind) {
        case swifm::ModelKind::LR:
          break;
        case swifm::ModelKind::POLY2:
          y += m.pair_weights[swifm::pair_bucket(tokens[static_cast<std::size_t>(i)],
                                                 tokens[static_cast<std::size_t>(j)],
                                                 m.hash_buckets)];
          break;
        case swifm::ModelKind::FM:
          y += pair_dot(m, tokens[static_cast<std::size_t>(i)],
                        tokens[static_cast<std::size_t>(j)], 1);
          break;
        case swifm::ModelKind::CFM:
          if (d <= m.context_size) {
            y += pair_dot(m, tokens[static_cast<std::size_t>(i)],
                          tokens[static_cast<std::size_t>(j)], 1);
          }
          break;
        case swifm::ModelKind::PFM:
          if (d <= m.context_size) {
            y += pair_dot(m, tokens[static_cast<std::size_t>(i)],
                          tokens[static_cast<std::size_t>(j)], d);
          }
          break;
      }
    }
  }
  return y;
}

// |a - b| <= tol * max(|a|, |b|, 1).
inline bool rel_close(double a, double b, double tol) {
  double denom = std::max({std::abs(a), std::abs(b), 1.0});
  return std::abs(a - b) <= tol * denom;
}

}  // namespace oracle
