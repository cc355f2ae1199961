#include "groundwork/ingest/sources.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>

#include "groundwork/citation/canonicalize.hpp"
#include "groundwork/core/text.hpp"

namespace groundwork::ingest {

CrawlResult crawl_tiers(const KeywordTuple& tuple, const std::vector<std::shared_ptr<SourceAdapter>>& adapters) {
  std::vector<std::shared_ptr<SourceAdapter>> ordered;
  for (const auto& a : adapters) {
    if (a) ordered.push_back(a);
  }
  std::stable_sort(ordered.begin(), ordered.end(), [](const auto& a, const auto& b) { return a->tier() < b->tier(); });

  CrawlResult result;
  std::size_t failures = 0;
  for (const auto& adapter : ordered) {
    try {
      for (auto& c : adapter->search(tuple)) {
        c.record.tier = adapter->tier();
        result.candidates.push_back(std::move(c));
      }
    } catch (const std::exception& e) {
      ++failures;
      auto msg = "tier " + std::to_string(adapter->tier()) + " (" + adapter->name() + ") failed for '" +
                 tuple.to_string() + "': " + e.what();
      spdlog::warn("{}", msg);
      result.warnings.push_back(std::move(msg));
    }
  }
  if (ordered.empty() || failures == ordered.size()) {
    throw CrawlError("every source tier failed for '" + tuple.to_string() + "'");
  }
  return result;
}

void MapCitationGraph::add_edge(const CanonicalId& citing, const CanonicalId& cited) {
  out_[citing].insert(cited);
  in_[cited].insert(citing);
}

CanonicalId parse_source_id(std::string_view raw) {
  auto t = text::trim(raw);
  if (t.starts_with("doi:") || t.starts_with("isbn:") || t.starts_with("urlhash:")) {
    auto id = CanonicalId::parse(t);
    if (id.kind == CanonicalId::Kind::Doi) {
      auto norm = citation::normalize_doi(id.value);
      if (!norm) throw InvalidInput("bad DOI '" + id.value + "'");
      id.value = *norm;
    }
    return id;
  }
  if (auto doi = citation::normalize_doi(t)) return {CanonicalId::Kind::Doi, *doi};
  throw InvalidInput("not a source id: '" + std::string(t) + "'");
}

namespace {

CanonicalId parse_node(std::string_view raw, std::size_t line_no) {
  try {
    return parse_source_id(raw);
  } catch (const InvalidInput&) {
    throw ValidationError("citation graph line " + std::to_string(line_no) + ": bad id '" +
                          std::string(text::trim(raw)) + "'");
  }
}

std::vector<CanonicalId> as_vector(const std::map<CanonicalId, std::set<CanonicalId>>& m, const CanonicalId& id) {
  auto it = m.find(id);
  if (it == m.end()) return {};
  return {it->second.begin(), it->second.end()};
}

}  // namespace

MapCitationGraph MapCitationGraph::parse(std::string_view text) {
  MapCitationGraph g;
  std::size_t line_no = 0;
  for (const auto& raw : text::split(text, '\n')) {
    ++line_no;
    std::string_view line = raw;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = text::trim(line);
    if (line.empty()) continue;
    auto arrow = line.find("->");
    if (arrow == std::string_view::npos) {
      throw ValidationError("citation graph line " + std::to_string(line_no) + ": expected '<citing> -> <cited>'");
    }
    g.add_edge(parse_node(line.substr(0, arrow), line_no), parse_node(line.substr(arrow + 2), line_no));
  }
  return g;
}

std::vector<CanonicalId> MapCitationGraph::references(const CanonicalId& id) const { return as_vector(out_, id); }

std::vector<CanonicalId> MapCitationGraph::cited_by(const CanonicalId& id) const { return as_vector(in_, id); }

std::size_t MapCitationGraph::node_count() const {
  std::set<CanonicalId> nodes;
  for (const auto& [k, v] : out_) {
    nodes.insert(k);
    nodes.insert(v.begin(), v.end());
  }
  return nodes.size();
}

std::size_t MapCitationGraph::edge_count() const {
  std::size_t n = 0;
  for (const auto& [_, v] : out_) n += v.size();
  return n;
}

SnowballResult snowball(const std::vector<CanonicalId>& seeds, const CitationGraph& graph,
                        const std::function<bool(const CanonicalId&)>& seen, double saturation) {
  SnowballResult result;
  std::set<CanonicalId> visited(seeds.begin(), seeds.end());
  std::vector<CanonicalId> frontier;
  for (const auto& s : seeds) {
    if (std::find(frontier.begin(), frontier.end(), s) == frontier.end()) frontier.push_back(s);
  }

  while (!frontier.empty()) {
    std::vector<CanonicalId> encountered;
    std::set<CanonicalId> encountered_set;
    for (const auto& node : frontier) {
      for (auto list : {graph.references(node), graph.cited_by(node)}) {
        for (auto& n : list) {
          if (encountered_set.insert(n).second) encountered.push_back(std::move(n));
        }
      }
    }
    if (encountered.empty()) break;

    SnowballWave wave;
    wave.encountered = encountered.size();
    for (const auto& n : encountered) {
      if (visited.count(n) || (seen && seen(n))) {
        ++wave.known;
      } else {
        wave.discovered.push_back(n);
      }
    }
    wave.known_fraction = static_cast<double>(wave.known) / static_cast<double>(wave.encountered);
    for (const auto& d : wave.discovered) {
      visited.insert(d);
      result.discovered.push_back(d);
    }
    frontier = wave.discovered;
    bool saturated = wave.known_fraction > saturation;
    result.waves.push_back(std::move(wave));
    if (saturated) {
      result.saturated = true;
      break;
    }
  }
  return result;
}

}  // namespace groundwork::ingest
