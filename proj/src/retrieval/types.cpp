#include "groundwork/retrieval/types.hpp"

#include <cmath>

namespace groundwork::retrieval {

double EmbeddingVector::norm() const { return std::sqrt(dot(*this, *this)); }

double dot(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.values.size() != b.values.size()) {
    throw IndexError("dimension mismatch: " + std::to_string(a.values.size()) + " vs " +
                     std::to_string(b.values.size()));
  }
  double s = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) s += a.values[i] * b.values[i];
  return s;
}

double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
  double na = a.norm();
  double nb = b.norm();
  if (na == 0.0 || nb == 0.0) throw IndexError("cosine of a zero vector");
  return dot(a, b) / (na * nb);
}

std::string EvidenceKey::to_string() const { return doc_id.to_string() + "#" + std::to_string(span_id); }

bool ranks_before(const EvidenceItem& a, const EvidenceItem& b) {
  if (a.similarity != b.similarity) return a.similarity > b.similarity;
  return a.key() < b.key();
}

double mean_similarity(const std::vector<EvidenceItem>& items) {
  if (items.empty()) return 0.0;
  double s = 0.0;
  for (const auto& it : items) s += it.similarity;
  return s / static_cast<double>(items.size());
}

void RetrievalConfig::validate() const {
  if (start_k < 1) throw ConfigError("retrieval: start_k must be >= 1");
  if (start_k > max_k) throw ConfigError("retrieval: start_k must not exceed max_k");
  if (batch_increment < 1) throw ConfigError("retrieval: batch_increment must be >= 1");
  if (top_l < 1) throw ConfigError("retrieval: top_L must be >= 1");
  if (!(similarity_threshold >= -1.0 && similarity_threshold <= 1.0)) {
    throw ConfigError("retrieval: similarity_threshold must lie in [-1, 1]");
  }
}

}  // namespace groundwork::retrieval
