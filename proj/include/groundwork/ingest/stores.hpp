#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "groundwork/ingest/types.hpp"

namespace groundwork::ingest {

enum class DedupDecision { Accept, Duplicate };

// Admission table. A candidate is a duplicate when its PDF hash matches any
// stored hash or its id matches any stored id. Check-and-insert is atomic.
// Optionally mirrored to a file of JSON lines {"doi": .., "sha1": ..} in
// sorted key order.
class DedupStore {
 public:
  DedupStore() = default;
  explicit DedupStore(std::filesystem::path path);

  // Throws InvalidInput for a key with neither component.
  DedupDecision check_and_insert(const DedupKey& key);
  bool contains(const DedupKey& key) const;  // either-match, no insert
  bool contains_id(std::string_view doi) const;
  // Undoes an admission (exact key). Used when a later stage rolls back.
  void erase(const DedupKey& key);
  // Records the PDF hash of an entry admitted without one.
  void attach_sha1(std::string_view doi, const std::string& sha1);

  std::vector<DedupKey> entries() const;  // sorted
  std::size_t size() const;
  std::string export_text() const;

 private:
  bool matches_locked(const DedupKey& key) const;
  void flush_locked() const;

  std::optional<std::filesystem::path> path_;
  mutable std::mutex mu_;
  std::vector<DedupKey> keys_;
};

struct MissingEntry {
  CanonicalId canonical;
  std::string title;
  int tier = 1;
  Timestamp first_seen;
  bool operator==(const MissingEntry&) const = default;
};

// Documents awaiting a curator upload (paywalled or unparseable), keyed by
// canonical id. Export is newline-delimited {canonical, title, tier,
// first_seen} in canonical order.
class MissingList {
 public:
  MissingList() = default;
  explicit MissingList(std::filesystem::path path);

  // False (and no change) if the id is already listed.
  bool add(const MissingEntry& entry);
  bool remove(const CanonicalId& canonical);
  bool contains(const CanonicalId& canonical) const;
  std::vector<MissingEntry> entries() const;
  std::size_t size() const;
  std::string export_text() const;
  static std::vector<MissingEntry> parse(std::string_view text);

 private:
  std::string text_locked() const;
  void flush_locked() const;

  std::optional<std::filesystem::path> path_;
  mutable std::mutex mu_;
  std::map<CanonicalId, MissingEntry> entries_;
};

// Every document the pipeline has admitted, with its status history.
class RecordRegistry {
 public:
  RecordRegistry() = default;
  explicit RecordRegistry(std::filesystem::path path);

  void put(const DocumentRecord& record);
  std::optional<DocumentRecord> find(const CanonicalId& canonical) const;
  void erase(const CanonicalId& canonical);
  // Applies a status move; throws NotFound or InvalidInput.
  DocumentRecord transition(const CanonicalId& canonical, DocStatus next);
  std::vector<DocumentRecord> records() const;  // canonical order
  std::size_t size() const;
  std::string export_text() const;

 private:
  std::string text_locked() const;
  void flush_locked() const;

  std::optional<std::filesystem::path> path_;
  mutable std::mutex mu_;
  std::map<CanonicalId, DocumentRecord> records_;
};

std::string record_to_json(const DocumentRecord& record);
DocumentRecord record_from_json(std::string_view text);  // throws ValidationError

}  // namespace groundwork::ingest
