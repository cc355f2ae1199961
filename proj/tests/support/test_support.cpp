#include "test_support.hpp"

#include <atomic>

#include "groundwork/core/hash.hpp"

namespace groundwork::testkit {

TempDir::TempDir() {
  static std::atomic<int> counter{0};
  path_ = std::filesystem::temp_directory_path() /
          ("groundwork-test-" + make_uuid4().substr(0, 8) + "-" + std::to_string(counter++));
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

CanonicalId doi(const std::string& value) { return CanonicalId{CanonicalId::Kind::Doi, value}; }

retrieval::Chunk make_chunk(const CanonicalId& id, int span, const std::string& text, const std::string& title) {
  retrieval::Chunk c;
  c.doc_id = id;
  c.span_id = span;
  c.text = text;
  c.offsets = {static_cast<std::size_t>(span) * 100, static_cast<std::size_t>(span) * 100 + text.size()};
  c.metadata.title = title.empty() ? "Title of " + id.value : title;
  c.metadata.year = 2021;
  c.metadata.venue = "Test Venue";
  c.metadata.tier = 1;
  return c;
}

retrieval::EvidenceItem make_item(const CanonicalId& id, int span, double similarity, const std::string& title) {
  return retrieval::EvidenceItem{make_chunk(id, span, "Evidence text for " + id.value, title), similarity, 0};
}

retrieval::EmbeddingVector random_vector(std::mt19937_64& rng, std::size_t dim) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  retrieval::EmbeddingVector v;
  v.values.resize(dim);
  for (auto& x : v.values) x = d(rng);
  return v;
}

}  // namespace groundwork::testkit
