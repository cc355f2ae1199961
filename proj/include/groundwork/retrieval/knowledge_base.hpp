#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "groundwork/retrieval/embedder.hpp"
#include "groundwork/retrieval/vector_index.hpp"

namespace groundwork::retrieval {

struct DynamicKResult {
  std::vector<EvidenceItem> evidence;
  double mean_similarity = 0.0;  // over `evidence`, i.e. after top-L truncation
  // k values tried, per index name, in order.
  std::map<std::string, std::vector<std::size_t>> ladder;
};

// Escalating top-k over a single index: k starts at start_k and grows by
// batch_increment while the mean similarity of the current result set is
// below the threshold and k < max_k. Result is truncated to top_L.
DynamicKResult dynamic_k_search(const VectorIndex& index, const EmbeddingVector& query, const RetrievalConfig& cfg);

// Named set of vector indexes sharing one embedder. The default index is
// "main"; ingestion writes there, session ingestion writes to "sessions".
class KnowledgeBase {
 public:
  static constexpr std::string_view kMainIndex = "main";
  static constexpr std::string_view kSessionIndex = "sessions";

  explicit KnowledgeBase(std::shared_ptr<const Embedder> embedder);

  const Embedder& embedder() const { return *embedder_; }

  VectorIndex& index(std::string_view name = kMainIndex);  // created on first use
  const VectorIndex* find_index(std::string_view name) const;
  std::vector<std::string> index_names() const;
  std::size_t total_size() const;

  // Embeds and upserts. Returns the number of genuinely new keys.
  std::size_t index_add(const std::vector<Chunk>& chunks, std::string_view name = kMainIndex,
                        IndexUndo* undo = nullptr);

  std::vector<EvidenceItem> query_topk(std::string_view query, std::size_t k,
                                       std::string_view name = kMainIndex) const;

  // Dynamic-k per index, pooled, deduplicated by key, re-ranked and cut to
  // top_L. Empty knowledge base gives ({}, 0.0).
  DynamicKResult dynamic_k_retrieve(std::string_view query, const RetrievalConfig& cfg) const;

  void save(const std::filesystem::path& dir) const;
  void load(const std::filesystem::path& dir);

 private:
  std::shared_ptr<const Embedder> embedder_;
  mutable std::mutex mu_;  // guards the map, not the indexes themselves
  std::map<std::string, std::unique_ptr<VectorIndex>, std::less<>> indexes_;
};

struct ChunkingConfig {
  std::size_t window = 1000;
  std::size_t overlap = 200;
};

// Fixed-size character windows with overlap. Boundaries never split a UTF-8
// sequence. span_id counts from `first_span_id`.
std::vector<Chunk> chunk_text(const CanonicalId& doc_id, std::string_view text, const ChunkMetadata& metadata,
                              const ChunkingConfig& cfg = {}, int first_span_id = 0);

}  // namespace groundwork::retrieval
