#pragma once

#include <cstdint>
#include <string_view>

#include "groundwork/retrieval/types.hpp"

namespace groundwork::retrieval {

class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual std::size_t dimension() const = 0;
  // Throws InvalidInput on empty text, EmbeddingError on provider failure.
  virtual EmbeddingVector embed(std::string_view text) const = 0;
};

// Offline embedder: signed feature hashing of lower-cased word unigrams and
// bigrams, L2-normalized. Deterministic for a given (dimension, seed).
class HashingEmbedder final : public Embedder {
 public:
  static constexpr std::size_t kDefaultDimension = 256;

  explicit HashingEmbedder(std::size_t dimension = kDefaultDimension, std::uint64_t seed = 0x5eed);

  std::size_t dimension() const override { return dimension_; }
  EmbeddingVector embed(std::string_view text) const override;

 private:
  void add_feature(std::vector<double>& v, std::string_view feature, double weight) const;

  std::size_t dimension_;
  std::uint64_t seed_;
};

}  // namespace groundwork::retrieval
