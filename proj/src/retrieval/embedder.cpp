#include "groundwork/retrieval/embedder.hpp"

#include <cmath>

#include "groundwork/core/hash.hpp"
#include "groundwork/core/text.hpp"

namespace groundwork::retrieval {

HashingEmbedder::HashingEmbedder(std::size_t dimension, std::uint64_t seed) : dimension_(dimension), seed_(seed) {
  if (dimension_ == 0) throw ConfigError("embedder dimension must be positive");
}

void HashingEmbedder::add_feature(std::vector<double>& v, std::string_view feature, double weight) const {
  std::uint64_t h = fnv1a64(feature, seed_);
  std::size_t idx = static_cast<std::size_t>(h % dimension_);
  double sign = ((h >> 40) & 1U) ? 1.0 : -1.0;
  v[idx] += sign * weight;
}

EmbeddingVector HashingEmbedder::embed(std::string_view input) const {
  if (text::trim(input).empty()) throw InvalidInput("cannot embed empty text");
  std::vector<double> v(dimension_, 0.0);
  auto tokens = text::tokenize(input);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    add_feature(v, tokens[i], 1.0);
    if (i + 1 < tokens.size()) add_feature(v, tokens[i] + ' ' + tokens[i + 1], 0.5);
  }
  double sq = 0.0;
  for (double x : v) sq += x * x;
  if (sq == 0.0) {
    // No alphanumeric tokens, or their contributions cancelled exactly.
    add_feature(v, std::string("\x01raw:") + std::string(input), 1.0);
    sq = 0.0;
    for (double x : v) sq += x * x;
  }
  double n = std::sqrt(sq);
  for (double& x : v) x /= n;
  return EmbeddingVector{std::move(v)};
}

}  // namespace groundwork::retrieval
