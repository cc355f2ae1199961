#include "groundwork/retrieval/vector_index.hpp"

#include <algorithm>
#include <mutex>
#include <set>
#include <sstream>

#include <json.hpp>

#include "groundwork/core/fs.hpp"

namespace groundwork::retrieval {

using ordered_json = nlohmann::ordered_json;

VectorIndex::VectorIndex(std::size_t dimension) : dimension_(dimension) {
  if (dimension_ == 0) throw IndexError("index dimension must be positive");
}

VectorIndex::VectorIndex(const VectorIndex& other) : dimension_(other.dimension_) {
  std::shared_lock lock(other.mu_);
  entries_ = other.entries_;
}

VectorIndex& VectorIndex::operator=(const VectorIndex& other) {
  if (this == &other) return *this;
  std::map<EvidenceKey, Stored> copy;
  {
    std::shared_lock lock(other.mu_);
    copy = other.entries_;
  }
  std::unique_lock lock(mu_);
  dimension_ = other.dimension_;
  entries_ = std::move(copy);
  return *this;
}

std::size_t VectorIndex::size() const {
  std::shared_lock lock(mu_);
  return entries_.size();
}

std::size_t VectorIndex::upsert(std::vector<IndexEntry> batch, IndexUndo* undo) {
  std::set<EvidenceKey> seen;
  std::vector<double> norms;
  norms.reserve(batch.size());
  for (const auto& e : batch) {
    if (e.vector.dimension() != dimension_) {
      throw IndexError("vector for " + e.chunk.key().to_string() + " has dimension " +
                       std::to_string(e.vector.dimension()) + ", index expects " + std::to_string(dimension_));
    }
    if (!seen.insert(e.chunk.key()).second) {
      throw IndexError("duplicate key in batch: " + e.chunk.key().to_string());
    }
    double n = e.vector.norm();
    if (!(n > 0.0)) throw IndexError("zero-norm vector for " + e.chunk.key().to_string());
    norms.push_back(n);
  }

  std::unique_lock lock(mu_);
  std::size_t added = 0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    auto key = batch[i].chunk.key();
    auto it = entries_.find(key);
    if (undo != nullptr) {
      undo->previous.emplace_back(key, it == entries_.end() ? std::nullopt : std::optional(it->second.entry));
    }
    if (it == entries_.end()) {
      entries_.emplace(key, Stored{std::move(batch[i]), norms[i]});
      ++added;
    } else {
      it->second = Stored{std::move(batch[i]), norms[i]};
    }
  }
  return added;
}

void VectorIndex::rollback(const IndexUndo& undo) {
  std::unique_lock lock(mu_);
  // Reverse order restores the oldest state when a key was touched twice.
  for (auto it = undo.previous.rbegin(); it != undo.previous.rend(); ++it) {
    const auto& [key, prev] = *it;
    if (prev) {
      entries_[key] = Stored{*prev, prev->vector.norm()};
    } else {
      entries_.erase(key);
    }
  }
}

std::vector<EvidenceItem> VectorIndex::search(const EmbeddingVector& query, std::size_t k) const {
  if (query.dimension() != dimension_) {
    throw IndexError("query has dimension " + std::to_string(query.dimension()) + ", index expects " +
                     std::to_string(dimension_));
  }
  double qn = query.norm();
  if (!(qn > 0.0)) throw IndexError("zero-norm query vector");

  std::shared_lock lock(mu_);
  std::vector<EvidenceItem> scored;
  scored.reserve(entries_.size());
  for (const auto& [key, stored] : entries_) {
    EvidenceItem item;
    item.chunk = stored.entry.chunk;
    item.similarity = dot(query, stored.entry.vector) / (qn * stored.norm);
    scored.push_back(std::move(item));
  }
  lock.unlock();

  std::size_t keep = std::min(k, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(keep), scored.end(), ranks_before);
  scored.resize(keep);
  return scored;
}

std::optional<IndexEntry> VectorIndex::find(const EvidenceKey& key) const {
  std::shared_lock lock(mu_);
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second.entry;
}

std::vector<IndexEntry> VectorIndex::entries() const {
  std::shared_lock lock(mu_);
  std::vector<IndexEntry> out;
  out.reserve(entries_.size());
  for (const auto& [key, stored] : entries_) out.push_back(stored.entry);
  return out;
}

std::string VectorIndex::export_text() const {
  std::shared_lock lock(mu_);
  std::ostringstream os;
  ordered_json header;
  header["format"] = kFormatTag;
  header["dimension"] = dimension_;
  header["count"] = entries_.size();
  header["metric"] = "cosine";
  os << header.dump() << '\n';
  for (const auto& [key, stored] : entries_) {
    const auto& c = stored.entry.chunk;
    ordered_json rec;
    rec["doc_id"] = c.doc_id.to_string();
    rec["span_id"] = c.span_id;
    rec["offsets"] = {c.offsets.start, c.offsets.end};
    rec["metadata"] = ordered_json{{"title", c.metadata.title},
                                   {"authors", c.metadata.authors},
                                   {"year", c.metadata.year},
                                   {"venue", c.metadata.venue},
                                   {"tier", c.metadata.tier}};
    rec["text"] = c.text;
    rec["vector"] = stored.entry.vector.values;
    os << rec.dump() << '\n';
  }
  return os.str();
}

VectorIndex VectorIndex::import_text(std::string_view text) {
  std::istringstream is{std::string(text)};
  std::string line;
  if (!std::getline(is, line)) throw IndexError("index file is empty");
  auto header = nlohmann::json::parse(line, nullptr, false);
  if (header.is_discarded() || !header.is_object() || header.value("format", "") != kFormatTag) {
    throw IndexError("unsupported index format header");
  }
  if (header.value("metric", "") != "cosine") throw IndexError("unsupported index metric");
  VectorIndex index(header.at("dimension").get<std::size_t>());
  auto expected = header.at("count").get<std::size_t>();
  std::vector<IndexEntry> batch;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    auto rec = nlohmann::json::parse(line, nullptr, false);
    if (rec.is_discarded()) throw IndexError("malformed index record");
    IndexEntry e;
    e.chunk.doc_id = CanonicalId::parse(rec.at("doc_id").get<std::string>());
    e.chunk.span_id = rec.at("span_id").get<int>();
    e.chunk.offsets = {rec.at("offsets").at(0).get<std::size_t>(), rec.at("offsets").at(1).get<std::size_t>()};
    const auto& m = rec.at("metadata");
    e.chunk.metadata.title = m.at("title").get<std::string>();
    e.chunk.metadata.authors = m.at("authors").get<std::vector<std::string>>();
    e.chunk.metadata.year = m.at("year").get<int>();
    e.chunk.metadata.venue = m.at("venue").get<std::string>();
    e.chunk.metadata.tier = m.at("tier").get<int>();
    e.chunk.text = rec.at("text").get<std::string>();
    e.vector.values = rec.at("vector").get<std::vector<double>>();
    batch.push_back(std::move(e));
  }
  if (batch.size() != expected) {
    throw IndexError("index header declares " + std::to_string(expected) + " records, found " +
                     std::to_string(batch.size()));
  }
  index.upsert(std::move(batch));
  return index;
}

void VectorIndex::save(const std::filesystem::path& path) const { fs::write_file_atomic(path, export_text()); }

VectorIndex VectorIndex::load(const std::filesystem::path& path) { return import_text(fs::read_file(path)); }

}  // namespace groundwork::retrieval
