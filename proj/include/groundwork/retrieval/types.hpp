#pragma once

#include <compare>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "groundwork/core/canonical_id.hpp"
#include "groundwork/core/error.hpp"

namespace groundwork::retrieval {

class IndexError : public Error {
 public:
  using Error::Error;
};

class EmbeddingError : public Error {
 public:
  using Error::Error;
};

struct EmbeddingVector {
  std::vector<double> values;

  std::size_t dimension() const { return values.size(); }
  double norm() const;
  bool operator==(const EmbeddingVector&) const = default;
};

double dot(const EmbeddingVector& a, const EmbeddingVector& b);
double cosine(const EmbeddingVector& a, const EmbeddingVector& b);

struct CharSpan {
  std::size_t start = 0;
  std::size_t end = 0;
  auto operator<=>(const CharSpan&) const = default;
};

struct ChunkMetadata {
  std::string title;
  std::vector<std::string> authors;
  int year = 0;
  std::string venue;
  int tier = 0;
  bool operator==(const ChunkMetadata&) const = default;
};

// (doc_id, span_id): the unit of citation and of index identity.
struct EvidenceKey {
  CanonicalId doc_id;
  int span_id = 0;
  auto operator<=>(const EvidenceKey&) const = default;
  std::string to_string() const;  // "doi:10.1/x#3"
};

struct Chunk {
  CanonicalId doc_id;
  int span_id = 0;
  std::string text;
  CharSpan offsets;
  ChunkMetadata metadata;

  EvidenceKey key() const { return {doc_id, span_id}; }
  bool operator==(const Chunk&) const = default;
};

struct EvidenceItem {
  Chunk chunk;
  double similarity = 0.0;
  int retrieved_at_iteration = 0;

  EvidenceKey key() const { return chunk.key(); }
};

// Ranking order for retrieval results: similarity descending, then key
// ascending. Every ranked list in the engine uses this comparator.
bool ranks_before(const EvidenceItem& a, const EvidenceItem& b);

double mean_similarity(const std::vector<EvidenceItem>& items);

struct RetrievalConfig {
  std::size_t start_k = 3;
  std::size_t batch_increment = 3;
  std::size_t max_k = 12;
  double similarity_threshold = 0.75;
  std::size_t top_l = 12;

  // Throws ConfigError.
  void validate() const;
};

}  // namespace groundwork::retrieval
