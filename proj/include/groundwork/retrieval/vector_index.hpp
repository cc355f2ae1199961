#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "groundwork/retrieval/types.hpp"

namespace groundwork::retrieval {

struct IndexEntry {
  Chunk chunk;
  EmbeddingVector vector;
};

// Previous state of every key touched by one upsert, replayable by
// VectorIndex::rollback. Lets a caller compose the index write into a larger
// transaction without snapshotting the whole index.
struct IndexUndo {
  std::vector<std::pair<EvidenceKey, std::optional<IndexEntry>>> previous;
};

// Exact cosine index. Entries are keyed by (doc_id, span_id); re-adding a key
// replaces its chunk and vector. Reads run concurrently; an upsert is applied
// under an exclusive lock after full validation, so readers see the index
// either before or after a write, never in between.
class VectorIndex {
 public:
  static constexpr std::string_view kFormatTag = "groundwork-index/1";

  explicit VectorIndex(std::size_t dimension);
  VectorIndex(const VectorIndex& other);
  VectorIndex& operator=(const VectorIndex& other);

  std::size_t dimension() const { return dimension_; }
  std::size_t size() const;

  // Returns the number of keys that were not present before. Throws
  // IndexError on dimension mismatch, zero vectors or duplicate keys within
  // the batch; nothing is written in that case.
  std::size_t upsert(std::vector<IndexEntry> entries, IndexUndo* undo = nullptr);
  void rollback(const IndexUndo& undo);

  // At most k items ranked by ranks_before; exact over every entry.
  std::vector<EvidenceItem> search(const EmbeddingVector& query, std::size_t k) const;

  std::optional<IndexEntry> find(const EvidenceKey& key) const;
  std::vector<IndexEntry> entries() const;  // key order

  // Header line then one record per entry, key order. Byte-stable for equal
  // contents.
  std::string export_text() const;
  static VectorIndex import_text(std::string_view text);
  void save(const std::filesystem::path& path) const;
  static VectorIndex load(const std::filesystem::path& path);

 private:
  struct Stored {
    IndexEntry entry;
    double norm = 0.0;
  };

  std::size_t dimension_;
  mutable std::shared_mutex mu_;
  std::map<EvidenceKey, Stored> entries_;
};

}  // namespace groundwork::retrieval
