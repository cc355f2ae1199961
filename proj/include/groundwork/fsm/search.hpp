#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "groundwork/retrieval/knowledge_base.hpp"

namespace groundwork::fsm {

using retrieval::EvidenceItem;

// The source of targeted sub-question results could not be reached. A
// refinement round treats this as an empty result.
class SearchUnavailable : public Error {
 public:
  using Error::Error;
};

class SearchProvider {
 public:
  virtual ~SearchProvider() = default;
  // At most k items, ranked by retrieval::ranks_before.
  virtual std::vector<EvidenceItem> search(const std::string& query, std::size_t k) = 0;
};

// Top-k over every index of a knowledge base, pooled and re-ranked.
class KnowledgeBaseSearch final : public SearchProvider {
 public:
  explicit KnowledgeBaseSearch(std::shared_ptr<const retrieval::KnowledgeBase> kb) : kb_(std::move(kb)) {}
  std::vector<EvidenceItem> search(const std::string& query, std::size_t k) override;

 private:
  std::shared_ptr<const retrieval::KnowledgeBase> kb_;
};

// Deterministic test double. Looks up exact queries first, then a handler,
// then returns nothing. Logs every query.
class ScriptedSearch final : public SearchProvider {
 public:
  using Handler = std::function<std::vector<EvidenceItem>(const std::string&, std::size_t)>;

  void set_results(const std::string& query, std::vector<EvidenceItem> items);
  void set_handler(Handler handler);
  void set_unavailable(bool unavailable);

  std::vector<EvidenceItem> search(const std::string& query, std::size_t k) override;
  std::vector<std::string> queries() const;

 private:
  mutable std::mutex mu_;
  std::map<std::string, std::vector<EvidenceItem>> results_;
  Handler handler_;
  bool unavailable_ = false;
  std::vector<std::string> log_;
};

}  // namespace groundwork::fsm
