#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "groundwork/ingest/types.hpp"

namespace groundwork::ingest {

class CrawlError : public Error {
 public:
  using Error::Error;
};

// "doi:...", "isbn:...", "urlhash:..." or a bare DOI / DOI URL. DOIs are
// normalized. Throws InvalidInput.
CanonicalId parse_source_id(std::string_view raw);

// A document found by a source adapter. pdf_bytes is absent when the full
// text is behind a paywall; the abstract is always available.
struct Candidate {
  DocumentRecord record;
  std::string abstract;
  std::optional<std::string> pdf_bytes;
};

// One literature portal. Tier 1 is the most trusted.
class SourceAdapter {
 public:
  virtual ~SourceAdapter() = default;
  virtual int tier() const = 0;
  virtual std::string name() const = 0;
  // Throws on portal failure; crawl_tiers degrades to the remaining tiers.
  virtual std::vector<Candidate> search(const KeywordTuple& tuple) = 0;
  // Resolves an identifier found by snowballing. nullopt if unknown here.
  virtual std::optional<Candidate> fetch(const CanonicalId& /*id*/) { return std::nullopt; }
};

struct CrawlResult {
  std::vector<Candidate> candidates;  // tier order, adapter order within a tier
  std::vector<std::string> warnings;
};

// Queries adapters in ascending tier order and tags each candidate with the
// adapter's tier. Duplicates are passed through. Throws CrawlError when every
// adapter fails.
CrawlResult crawl_tiers(const KeywordTuple& tuple, const std::vector<std::shared_ptr<SourceAdapter>>& adapters);

// Backward references and forward cited-by lookups.
class CitationGraph {
 public:
  virtual ~CitationGraph() = default;
  virtual std::vector<CanonicalId> references(const CanonicalId& id) const = 0;
  virtual std::vector<CanonicalId> cited_by(const CanonicalId& id) const = 0;
};

// In-memory graph. Text form: one edge per line, "<citing> -> <cited>",
// ids as "doi:..." or bare DOIs; blank lines and '#' comments skipped.
class MapCitationGraph final : public CitationGraph {
 public:
  void add_edge(const CanonicalId& citing, const CanonicalId& cited);
  static MapCitationGraph parse(std::string_view text);  // throws ValidationError

  std::vector<CanonicalId> references(const CanonicalId& id) const override;
  std::vector<CanonicalId> cited_by(const CanonicalId& id) const override;
  std::size_t node_count() const;
  std::size_t edge_count() const;

 private:
  std::map<CanonicalId, std::set<CanonicalId>> out_;
  std::map<CanonicalId, std::set<CanonicalId>> in_;
};

struct SnowballWave {
  std::size_t encountered = 0;  // distinct neighbour ids of the frontier
  std::size_t known = 0;        // of those, already seen or visited
  double known_fraction = 0.0;
  std::vector<CanonicalId> discovered;
};

struct SnowballResult {
  std::vector<CanonicalId> discovered;  // BFS order
  std::vector<SnowballWave> waves;
  bool saturated = false;  // stopped on the fraction rule, not an empty frontier
};

// Breadth-first expansion along references and cited-by links. Each wave
// looks at the distinct neighbours of the current frontier; ids already in
// `seen` or visited by this expansion count as known. Unknown neighbours are
// discovered and form the next frontier. Expansion stops when a wave's known
// fraction exceeds `saturation` (its discoveries are still returned) or when
// a wave encounters nothing new. The visited set bounds the wave count by
// the node count.
SnowballResult snowball(const std::vector<CanonicalId>& seeds, const CitationGraph& graph,
                        const std::function<bool(const CanonicalId&)>& seen, double saturation = 0.9);

}  // namespace groundwork::ingest
