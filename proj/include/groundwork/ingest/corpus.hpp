#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "groundwork/ingest/sources.hpp"

namespace groundwork::ingest {

// On-disk synthetic corpus: a directory of "*.doc" files, an optional
// "citations.graph" (one "a -> b" edge per line) and an optional "axes.txt"
// (lines "platforms: a; b", "devices: ...", "speeds: ...").
//
// A .doc file is a metadata block followed by the document bytes:
//
//   %META v1
//   canonical: doi:10.5555/x.1
//   title: <title>
//   date: 2021-03-04
//   tier: 2
//   venue: <venue>
//   authors: A. One; B. Two
//   keywords: <platform> | <device class> | <speed marker>
//   access: open            (or: paywalled)
//   abstract: <one line>
//   %BODY
//   <bytes handed to the document parser>
struct CorpusDocument {
  Candidate candidate;
  KeywordTuple keywords;
  std::string file_name;
};

class SyntheticCorpus {
 public:
  static SyntheticCorpus load(const std::filesystem::path& dir);  // throws ValidationError
  static CorpusDocument parse_document(std::string_view text, const std::string& file_name);

  const std::vector<CorpusDocument>& documents() const { return docs_; }
  std::shared_ptr<const MapCitationGraph> graph() const { return graph_; }
  const KeywordAxes& axes() const { return axes_; }

  // One adapter per tier 1-5. An adapter returns the documents of its tier
  // whose keyword triple equals the query tuple (case-insensitive) and whose
  // year falls in the tuple window, in file order; fetch() resolves any
  // document of its tier by id.
  std::vector<std::shared_ptr<SourceAdapter>> adapters() const;

 private:
  std::vector<CorpusDocument> docs_;
  std::shared_ptr<MapCitationGraph> graph_ = std::make_shared<MapCitationGraph>();
  KeywordAxes axes_;
};

struct SyntheticCorpusSpec {
  std::size_t documents = 50;
  std::uint64_t seed = 7;
  double paywalled_fraction = 0.1;
  double malformed_fraction = 0.06;
  std::size_t orphans = 4;  // reachable only through the citation graph
};

// Writes a deterministic corpus for the given spec, including one
// preprint/published pair (same DOI, different bytes).
void write_synthetic_corpus(const std::filesystem::path& dir, const SyntheticCorpusSpec& spec = {});

}  // namespace groundwork::ingest
