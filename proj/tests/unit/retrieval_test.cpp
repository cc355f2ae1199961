#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <thread>

#include "groundwork/retrieval/knowledge_base.hpp"
#include "test_support.hpp"

using namespace groundwork;
using namespace groundwork::retrieval;
using groundwork::testkit::doi;
using groundwork::testkit::make_chunk;

namespace {

// Brute-force reference: score every entry, order by similarity desc then key.
std::vector<std::pair<EvidenceKey, double>> brute_force_topk(const std::vector<IndexEntry>& entries,
                                                             const EmbeddingVector& q, std::size_t k) {
  std::vector<std::pair<EvidenceKey, double>> scored;
  for (const auto& e : entries) {
    double d = 0, nq = 0, ne = 0;
    for (std::size_t i = 0; i < q.values.size(); ++i) {
      d += q.values[i] * e.vector.values[i];
      nq += q.values[i] * q.values[i];
      ne += e.vector.values[i] * e.vector.values[i];
    }
    scored.emplace_back(e.chunk.key(), d / (std::sqrt(nq) * std::sqrt(ne)));
  }
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  if (scored.size() > k) scored.resize(k);
  return scored;
}

EmbeddingVector axis_mix(std::size_t dim, double along_first, std::size_t other_axis) {
  EmbeddingVector v;
  v.values.assign(dim, 0.0);
  v.values[0] = along_first;
  v.values[other_axis] = std::sqrt(1.0 - along_first * along_first);
  return v;
}

EmbeddingVector unit_axis(std::size_t dim, std::size_t axis) {
  EmbeddingVector v;
  v.values.assign(dim, 0.0);
  v.values[axis] = 1.0;
  return v;
}

// Hand simulation of the escalation rule against precomputed sorted scores.
std::vector<std::size_t> simulate_ladder(std::vector<double> sorted_sims, const RetrievalConfig& cfg) {
  std::vector<std::size_t> ladder;
  std::size_t k = cfg.start_k;
  while (true) {
    ladder.push_back(k);
    std::size_t n = std::min(k, sorted_sims.size());
    double mean = 0;
    for (std::size_t i = 0; i < n; ++i) mean += sorted_sims[i];
    mean = n == 0 ? 0.0 : mean / static_cast<double>(n);
    if (mean >= cfg.similarity_threshold || k >= cfg.max_k) break;
    k = std::min(k + cfg.batch_increment, cfg.max_k);
  }
  return ladder;
}

}  // namespace

TEST(Embedder, DeterministicUnitNorm) {
  HashingEmbedder emb;
  auto a = emb.embed("Thin-film lithium niobate modulators reach 100 GHz");
  auto b = emb.embed("Thin-film lithium niobate modulators reach 100 GHz");
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.dimension(), 256u);
  EXPECT_NEAR(a.norm(), 1.0, 1e-9);
  EXPECT_NEAR(cosine(a, a), 1.0, 1e-9);
  EXPECT_THROW(emb.embed(""), InvalidInput);
}

TEST(Embedder, PunctuationOnlyTextStillEmbeds) {
  HashingEmbedder emb;
  auto v = emb.embed("?!");
  EXPECT_NEAR(v.norm(), 1.0, 1e-9);
}

TEST(Embedder, RelatedTextScoresHigherThanUnrelated) {
  HashingEmbedder emb;
  auto q = emb.embed("modulator bandwidth limits");
  auto near = emb.embed("the bandwidth of the modulator is limited by RC effects");
  auto far = emb.embed("recipe for sourdough bread with rye flour");
  EXPECT_GT(cosine(q, near), cosine(q, far));
}

TEST(VectorIndex, AddCountsNewKeysOnly) {
  VectorIndex idx(4);
  std::vector<IndexEntry> batch;
  for (int i = 0; i < 3; ++i) batch.push_back({make_chunk(doi("10.1/a"), i, "t"), unit_axis(4, i)});
  EXPECT_EQ(idx.upsert(batch), 3u);
  EXPECT_EQ(idx.size(), 3u);
  EXPECT_EQ(idx.upsert({{make_chunk(doi("10.1/a"), 0, "replaced"), unit_axis(4, 3)}}), 0u);
  EXPECT_EQ(idx.size(), 3u);
  EXPECT_EQ(idx.find(EvidenceKey{doi("10.1/a"), 0})->chunk.text, "replaced");
}

TEST(VectorIndex, RejectsWrongDimensionWithoutPartialWrite) {
  VectorIndex idx(4);
  EmbeddingVector bad;
  bad.values = {1.0, 0.0};
  std::vector<IndexEntry> batch = {{make_chunk(doi("10.1/a"), 0, "ok"), unit_axis(4, 0)},
                                   {make_chunk(doi("10.1/a"), 1, "bad"), bad}};
  EXPECT_THROW(idx.upsert(batch), IndexError);
  EXPECT_EQ(idx.size(), 0u);
}

TEST(VectorIndex, RollbackRestoresPreviousState) {
  VectorIndex idx(4);
  idx.upsert({{make_chunk(doi("10.1/a"), 0, "orig"), unit_axis(4, 0)}});
  auto before = idx.export_text();
  IndexUndo undo;
  idx.upsert({{make_chunk(doi("10.1/a"), 0, "new"), unit_axis(4, 1)}, {make_chunk(doi("10.1/b"), 0, "b"), unit_axis(4, 2)}},
             &undo);
  EXPECT_NE(idx.export_text(), before);
  idx.rollback(undo);
  EXPECT_EQ(idx.export_text(), before);
}

TEST(VectorIndex, SingletonReturnsCosine) {
  VectorIndex idx(3);
  EmbeddingVector v;
  v.values = {1.0, 2.0, 2.0};
  idx.upsert({{make_chunk(doi("10.1/a"), 0, "t"), v}});
  EmbeddingVector q;
  q.values = {1.0, 0.0, 0.0};
  auto r = idx.search(q, 5);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_NEAR(r[0].similarity, 1.0 / 3.0, 1e-12);
}

TEST(VectorIndex, KLargerThanIndexReturnsAllSorted) {
  std::mt19937_64 rng(11);
  VectorIndex idx(8);
  std::vector<IndexEntry> batch;
  for (int i = 0; i < 5; ++i) batch.push_back({make_chunk(doi("10.1/x"), i, "t"), testkit::random_vector(rng, 8)});
  idx.upsert(batch);
  auto r = idx.search(testkit::random_vector(rng, 8), 50);
  ASSERT_EQ(r.size(), 5u);
  EXPECT_TRUE(std::is_sorted(r.begin(), r.end(), ranks_before));
}

TEST(VectorIndex, FiftyChunksTopEightMatchesBruteForce) {
  std::mt19937_64 rng(50);
  VectorIndex idx(16);
  std::vector<IndexEntry> batch;
  for (int i = 0; i < 50; ++i) {
    batch.push_back({make_chunk(doi("10.1/d" + std::to_string(i % 7)), i, "t"), testkit::random_vector(rng, 16)});
  }
  idx.upsert(batch);
  auto q = testkit::random_vector(rng, 16);
  auto expected = brute_force_topk(idx.entries(), q, 8);
  auto got = idx.search(q, 8);
  ASSERT_EQ(got.size(), 8u);
  for (std::size_t i = 0; i < 8; ++i) {
    EXPECT_EQ(got[i].key(), expected[i].first);
    EXPECT_NEAR(got[i].similarity, expected[i].second, 1e-12);
  }
}

TEST(VectorIndex, RandomIndexesMatchBruteForceIncludingTies) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 100; ++trial) {
    std::size_t n = 1 + rng() % 200;
    std::size_t dim = 2 + rng() % 12;
    VectorIndex idx(dim);
    std::vector<IndexEntry> batch;
    std::vector<EmbeddingVector> pool;
    for (std::size_t i = 0; i < n; ++i) {
      // Reuse earlier vectors a third of the time to force exact ties.
      EmbeddingVector v = (!pool.empty() && rng() % 3 == 0) ? pool[rng() % pool.size()] : testkit::random_vector(rng, dim);
      pool.push_back(v);
      batch.push_back({make_chunk(doi("10.9/t" + std::to_string(rng() % 20)), static_cast<int>(i), "t"), v});
    }
    idx.upsert(batch);
    auto q = testkit::random_vector(rng, dim);
    std::size_t k = 1 + rng() % 20;
    auto expected = brute_force_topk(idx.entries(), q, k);
    auto got = idx.search(q, k);
    ASSERT_EQ(got.size(), expected.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
      ASSERT_EQ(got[i].key(), expected[i].first) << "trial " << trial << " rank " << i;
    }
  }
}

TEST(VectorIndex, ExportImportRoundTrip) {
  std::mt19937_64 rng(5);
  VectorIndex idx(6);
  std::vector<IndexEntry> batch;
  for (int i = 0; i < 4; ++i) batch.push_back({make_chunk(doi("10.1/r"), i, "chunk \"quoted\"\nline"), testkit::random_vector(rng, 6)});
  idx.upsert(batch);
  auto text = idx.export_text();
  EXPECT_NE(text.find("\"format\":\"groundwork-index/1\""), std::string::npos);
  EXPECT_NE(text.find("\"metric\":\"cosine\""), std::string::npos);
  auto copy = VectorIndex::import_text(text);
  EXPECT_EQ(copy.export_text(), text);
  EXPECT_EQ(copy.size(), 4u);
}

TEST(DynamicK, StopsAtThreeWhenTopThreeMeanClearsThreshold) {
  const std::size_t dim = 32;
  VectorIndex idx(dim);
  std::vector<IndexEntry> batch;
  std::vector<double> sims;
  for (int i = 0; i < 3; ++i) {
    batch.push_back({make_chunk(doi("10.1/hi"), i, "t"), axis_mix(dim, 0.8, 1 + i)});
    sims.push_back(0.8);
  }
  for (int i = 0; i < 15; ++i) {
    batch.push_back({make_chunk(doi("10.1/lo"), i, "t"), axis_mix(dim, 0.2, 4 + i)});
    sims.push_back(0.2);
  }
  idx.upsert(batch);
  RetrievalConfig cfg;
  auto r = dynamic_k_search(idx, unit_axis(dim, 0), cfg);
  EXPECT_EQ(r.ladder.at("index"), simulate_ladder(sims, cfg));
  EXPECT_EQ(r.ladder.at("index"), (std::vector<std::size_t>{3}));
  EXPECT_EQ(r.evidence.size(), 3u);
  EXPECT_NEAR(r.mean_similarity, 0.8, 1e-12);
}

TEST(DynamicK, LowSimilarityEscalatesToTwelve) {
  const std::size_t dim = 32;
  VectorIndex idx(dim);
  std::vector<IndexEntry> batch;
  std::vector<double> sims;
  for (int i = 0; i < 20; ++i) {
    batch.push_back({make_chunk(doi("10.1/lo"), i, "t"), axis_mix(dim, 0.1, 1 + i)});
    sims.push_back(0.1);
  }
  idx.upsert(batch);
  RetrievalConfig cfg;
  auto r = dynamic_k_search(idx, unit_axis(dim, 0), cfg);
  EXPECT_EQ(r.ladder.at("index"), simulate_ladder(sims, cfg));
  EXPECT_EQ(r.ladder.at("index"), (std::vector<std::size_t>{3, 6, 9, 12}));
  EXPECT_EQ(r.evidence.size(), 12u);
  EXPECT_LT(r.mean_similarity, 0.75);
}

TEST(DynamicK, CustomLadderClampsAtMaxK) {
  const std::size_t dim = 32;
  VectorIndex idx(dim);
  std::vector<IndexEntry> batch;
  std::vector<double> sims;
  for (int i = 0; i < 20; ++i) {
    batch.push_back({make_chunk(doi("10.1/lo"), i, "t"), axis_mix(dim, 0.3, 1 + i)});
    sims.push_back(0.3);
  }
  idx.upsert(batch);
  RetrievalConfig cfg{2, 5, 11, 0.75, 4};
  auto r = dynamic_k_search(idx, unit_axis(dim, 0), cfg);
  EXPECT_EQ(r.ladder.at("index"), simulate_ladder(sims, cfg));
  EXPECT_EQ(r.ladder.at("index"), (std::vector<std::size_t>{2, 7, 11}));
  EXPECT_EQ(r.evidence.size(), 4u);  // top_L
}

TEST(DynamicK, EmptyIndexGivesEmptySetAndZeroMean) {
  KnowledgeBase kb(std::make_shared<HashingEmbedder>());
  auto r = kb.dynamic_k_retrieve("anything", RetrievalConfig{});
  EXPECT_TRUE(r.evidence.empty());
  EXPECT_EQ(r.mean_similarity, 0.0);
  EXPECT_TRUE(kb.query_topk("anything", 3).empty());
}

TEST(DynamicK, BoundsAndTruncationNeverLowerTheMean) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 50; ++trial) {
    std::size_t dim = 8;
    VectorIndex idx(dim);
    std::vector<IndexEntry> batch;
    std::size_t n = 1 + rng() % 40;
    for (std::size_t i = 0; i < n; ++i) batch.push_back({make_chunk(doi("10.1/b"), static_cast<int>(i), "t"), testkit::random_vector(rng, dim)});
    idx.upsert(batch);
    RetrievalConfig cfg;
    cfg.top_l = 1 + rng() % 12;
    auto r = dynamic_k_search(idx, testkit::random_vector(rng, dim), cfg);
    EXPECT_LE(r.evidence.size(), std::min({cfg.max_k, cfg.top_l, n}));
    for (auto k : r.ladder.at("index")) EXPECT_LE(k, 12u);
    for (std::size_t m = 1; m <= r.evidence.size(); ++m) {
      std::vector<EvidenceItem> prefix(r.evidence.begin(), r.evidence.begin() + static_cast<long>(m));
      EXPECT_GE(mean_similarity(prefix) + 1e-12, r.mean_similarity);
    }
  }
}

TEST(KnowledgeBase, PoolsNamedIndexes) {
  KnowledgeBase kb(std::make_shared<HashingEmbedder>());
  kb.index_add({make_chunk(doi("10.1/main"), 0, "electro-optic modulator bandwidth")});
  kb.index_add({make_chunk(doi("10.1/sess"), 0, "electro-optic modulator bandwidth notes")}, KnowledgeBase::kSessionIndex);
  auto r = kb.dynamic_k_retrieve("modulator bandwidth", RetrievalConfig{});
  EXPECT_EQ(r.evidence.size(), 2u);
  EXPECT_EQ(r.ladder.size(), 2u);
  EXPECT_TRUE(std::is_sorted(r.evidence.begin(), r.evidence.end(), ranks_before));
}

TEST(KnowledgeBase, SaveLoadRoundTrip) {
  testkit::TempDir dir;
  auto emb = std::make_shared<HashingEmbedder>();
  KnowledgeBase kb(emb);
  kb.index_add({make_chunk(doi("10.1/a"), 0, "alpha text"), make_chunk(doi("10.1/a"), 1, "beta text")});
  kb.save(dir.path());
  KnowledgeBase other(emb);
  other.load(dir.path());
  EXPECT_EQ(other.index().export_text(), kb.index().export_text());
}

TEST(KnowledgeBase, QueryRejectsZeroK) {
  KnowledgeBase kb(std::make_shared<HashingEmbedder>());
  EXPECT_THROW(kb.query_topk("q", 0), InvalidInput);
}

TEST(Chunking, WindowsOverlapByTwoHundred) {
  std::string text(2500, 'a');
  auto chunks = chunk_text(doi("10.1/c"), text, ChunkMetadata{});
  ASSERT_EQ(chunks.size(), 3u);
  EXPECT_EQ(chunks[0].offsets, (CharSpan{0, 1000}));
  EXPECT_EQ(chunks[1].offsets, (CharSpan{800, 1800}));
  EXPECT_EQ(chunks[2].offsets, (CharSpan{1600, 2500}));
  EXPECT_EQ(chunks[2].span_id, 2);
}

TEST(Chunking, NeverSplitsUtf8Sequences) {
  std::string text;
  for (int i = 0; i < 700; ++i) text += "\xCF\x80";  // U+03C0, two bytes
  auto chunks = chunk_text(doi("10.1/u"), text, ChunkMetadata{}, ChunkingConfig{333, 50});
  for (const auto& c : chunks) {
    EXPECT_EQ(c.text.size() % 2, 0u);
    EXPECT_EQ(static_cast<unsigned char>(c.text.front()), 0xCF);
    EXPECT_LE(c.offsets.end, text.size());
  }
  EXPECT_EQ(chunks.back().offsets.end, text.size());
}

TEST(VectorIndex, ReadersSeeWholeBatches) {
  VectorIndex idx(4);
  std::atomic<bool> stop{false};
  std::atomic<int> bad{0};
  std::thread reader([&] {
    while (!stop) {
      auto n = idx.size();
      if (n % 10 != 0) ++bad;
    }
  });
  for (int b = 0; b < 50; ++b) {
    std::vector<IndexEntry> batch;
    for (int i = 0; i < 10; ++i) batch.push_back({make_chunk(doi("10.1/w"), b * 10 + i, "t"), unit_axis(4, i % 4)});
    idx.upsert(batch);
  }
  stop = true;
  reader.join();
  EXPECT_EQ(bad.load(), 0);
  EXPECT_EQ(idx.size(), 500u);
}
