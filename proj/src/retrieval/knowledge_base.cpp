#include "groundwork/retrieval/knowledge_base.hpp"

#include <algorithm>
#include <set>

namespace groundwork::retrieval {

DynamicKResult dynamic_k_search(const VectorIndex& index, const EmbeddingVector& query, const RetrievalConfig& cfg) {
  cfg.validate();
  DynamicKResult out;
  auto& ladder = out.ladder["index"];
  std::size_t k = cfg.start_k;
  std::vector<EvidenceItem> current;
  while (true) {
    ladder.push_back(k);
    current = index.search(query, k);
    if (mean_similarity(current) >= cfg.similarity_threshold || k >= cfg.max_k) break;
    k = std::min(k + cfg.batch_increment, cfg.max_k);
  }
  if (current.size() > cfg.top_l) current.resize(cfg.top_l);
  out.mean_similarity = mean_similarity(current);
  out.evidence = std::move(current);
  return out;
}

KnowledgeBase::KnowledgeBase(std::shared_ptr<const Embedder> embedder) : embedder_(std::move(embedder)) {
  if (!embedder_) throw ConfigError("knowledge base needs an embedder");
}

VectorIndex& KnowledgeBase::index(std::string_view name) {
  std::lock_guard lock(mu_);
  auto it = indexes_.find(name);
  if (it == indexes_.end()) {
    it = indexes_.emplace(std::string(name), std::make_unique<VectorIndex>(embedder_->dimension())).first;
  }
  return *it->second;
}

const VectorIndex* KnowledgeBase::find_index(std::string_view name) const {
  std::lock_guard lock(mu_);
  auto it = indexes_.find(name);
  return it == indexes_.end() ? nullptr : it->second.get();
}

std::vector<std::string> KnowledgeBase::index_names() const {
  std::lock_guard lock(mu_);
  std::vector<std::string> out;
  for (const auto& [name, idx] : indexes_) out.push_back(name);
  return out;
}

std::size_t KnowledgeBase::total_size() const {
  std::lock_guard lock(mu_);
  std::size_t n = 0;
  for (const auto& [name, idx] : indexes_) n += idx->size();
  return n;
}

std::size_t KnowledgeBase::index_add(const std::vector<Chunk>& chunks, std::string_view name, IndexUndo* undo) {
  std::vector<IndexEntry> batch;
  batch.reserve(chunks.size());
  for (const auto& c : chunks) batch.push_back(IndexEntry{c, embedder_->embed(c.text)});
  return index(name).upsert(std::move(batch), undo);
}

std::vector<EvidenceItem> KnowledgeBase::query_topk(std::string_view query, std::size_t k,
                                                    std::string_view name) const {
  if (k < 1) throw InvalidInput("query_topk: k must be >= 1");
  const VectorIndex* idx = find_index(name);
  if (idx == nullptr || idx->size() == 0) return {};
  return idx->search(embedder_->embed(query), k);
}

DynamicKResult KnowledgeBase::dynamic_k_retrieve(std::string_view query, const RetrievalConfig& cfg) const {
  cfg.validate();
  DynamicKResult out;
  std::vector<std::pair<std::string, const VectorIndex*>> targets;
  {
    std::lock_guard lock(mu_);
    for (const auto& [name, idx] : indexes_) {
      if (idx->size() > 0) targets.emplace_back(name, idx.get());
    }
  }
  if (targets.empty()) return out;

  auto q = embedder_->embed(query);
  std::vector<EvidenceItem> pooled;
  std::set<EvidenceKey> keys;
  for (const auto& [name, idx] : targets) {
    auto part = dynamic_k_search(*idx, q, cfg);
    out.ladder[name] = std::move(part.ladder["index"]);
    for (auto& item : part.evidence) {
      if (keys.insert(item.key()).second) pooled.push_back(std::move(item));
    }
  }
  std::sort(pooled.begin(), pooled.end(), ranks_before);
  if (pooled.size() > cfg.top_l) pooled.resize(cfg.top_l);
  out.mean_similarity = mean_similarity(pooled);
  out.evidence = std::move(pooled);
  return out;
}

void KnowledgeBase::save(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  std::lock_guard lock(mu_);
  for (const auto& [name, idx] : indexes_) idx->save(dir / (name + ".gwidx"));
}

void KnowledgeBase::load(const std::filesystem::path& dir) {
  if (!std::filesystem::exists(dir)) return;
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() == ".gwidx") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    auto loaded = VectorIndex::load(f);
    if (loaded.dimension() != embedder_->dimension()) {
      throw IndexError("index " + f.string() + " has dimension " + std::to_string(loaded.dimension()) +
                       ", embedder produces " + std::to_string(embedder_->dimension()));
    }
    std::lock_guard lock(mu_);
    indexes_[f.stem().string()] = std::make_unique<VectorIndex>(std::move(loaded));
  }
}

namespace {
bool is_continuation(unsigned char c) { return (c & 0xC0) == 0x80; }

std::size_t align_back(std::string_view s, std::size_t pos) {
  while (pos > 0 && pos < s.size() && is_continuation(static_cast<unsigned char>(s[pos]))) --pos;
  return pos;
}
}  // namespace

std::vector<Chunk> chunk_text(const CanonicalId& doc_id, std::string_view text, const ChunkMetadata& metadata,
                              const ChunkingConfig& cfg, int first_span_id) {
  if (cfg.window == 0 || cfg.overlap >= cfg.window) throw ConfigError("chunking: need 0 <= overlap < window");
  std::vector<Chunk> out;
  if (text.empty()) return out;
  std::size_t start = 0;
  int span = first_span_id;
  while (true) {
    std::size_t end = std::min(start + cfg.window, text.size());
    end = align_back(text, end);
    if (end <= start) end = std::min(start + cfg.window, text.size());  // pathological: no boundary found
    Chunk c;
    c.doc_id = doc_id;
    c.span_id = span++;
    c.text = std::string(text.substr(start, end - start));
    c.offsets = {start, end};
    c.metadata = metadata;
    out.push_back(std::move(c));
    if (end >= text.size()) break;
    std::size_t next = align_back(text, end - cfg.overlap);
    start = next > start ? next : end;
  }
  return out;
}

}  // namespace groundwork::retrieval
