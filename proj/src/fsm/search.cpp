#include "groundwork/fsm/search.hpp"

#include <algorithm>

namespace groundwork::fsm {

std::vector<EvidenceItem> KnowledgeBaseSearch::search(const std::string& query, std::size_t k) {
  std::vector<EvidenceItem> pooled;
  for (const auto& name : kb_->index_names()) {
    auto items = kb_->query_topk(query, k, name);
    pooled.insert(pooled.end(), items.begin(), items.end());
  }
  std::sort(pooled.begin(), pooled.end(), retrieval::ranks_before);
  if (pooled.size() > k) pooled.resize(k);
  return pooled;
}

void ScriptedSearch::set_results(const std::string& query, std::vector<EvidenceItem> items) {
  std::lock_guard lock(mu_);
  results_[query] = std::move(items);
}

void ScriptedSearch::set_handler(Handler handler) {
  std::lock_guard lock(mu_);
  handler_ = std::move(handler);
}

void ScriptedSearch::set_unavailable(bool unavailable) {
  std::lock_guard lock(mu_);
  unavailable_ = unavailable;
}

std::vector<EvidenceItem> ScriptedSearch::search(const std::string& query, std::size_t k) {
  Handler handler;
  std::vector<EvidenceItem> out;
  {
    std::lock_guard lock(mu_);
    log_.push_back(query);
    if (unavailable_) throw SearchUnavailable("scripted search is unavailable");
    if (auto it = results_.find(query); it != results_.end()) {
      out = it->second;
    } else {
      handler = handler_;
    }
  }
  if (handler) out = handler(query, k);
  if (out.size() > k) out.resize(k);
  return out;
}

std::vector<std::string> ScriptedSearch::queries() const {
  std::lock_guard lock(mu_);
  return log_;
}

}  // namespace groundwork::fsm
