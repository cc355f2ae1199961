// Acceptance suite: one PASS/FAIL line per primary criterion. Each criterion
// runs its own oracle and must also finish inside its pinned time limit.
// Exit status is the number of failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>
#include <spdlog/spdlog.h>

#include "groundwork/citation/markers.hpp"
#include "groundwork/citation/pipeline.hpp"
#include "groundwork/core/csv.hpp"
#include "groundwork/core/hash.hpp"
#include "groundwork/core/text.hpp"
#include "groundwork/eval/harness.hpp"
#include "groundwork/fsm/context_format.hpp"
#include "groundwork/fsm/engine.hpp"
#include "groundwork/fsm/offline_backend.hpp"
#include "groundwork/ingest/corpus.hpp"
#include "groundwork/ingest/extraction.hpp"
#include "groundwork/ingest/pipeline.hpp"
#include "groundwork/retrieval/knowledge_base.hpp"
#include "test_support.hpp"

using namespace groundwork;
using testkit::doi;
using testkit::make_chunk;
using testkit::make_item;

namespace {

// Time limits in seconds.
constexpr double kFsmLimit = 10.0;
constexpr double kCitationLimit = 5.0;
constexpr double kCalibrationLimit = 10.0;
constexpr double kRetrievalLimit = 10.0;
constexpr double kIngestionLimit = 20.0;
constexpr double kExtractionLimit = 10.0;
constexpr double kHarnessLimit = 30.0;
constexpr double kGateLimit = 10.0;

// Numeric tolerances.
constexpr double kEceOracleTol = 1e-12;
constexpr double kPerfectEceTol = 1e-9;
constexpr double kAurcOracleTol = 1e-15;
constexpr double kExtractionTol = 1e-12;

const std::filesystem::path kData = GROUNDWORK_TEST_DATA;

// Collects the first few failure messages of a criterion.
class Check {
 public:
  void expect(bool ok, const std::string& what) {
    ++checks_;
    if (ok) return;
    ++failures_;
    if (messages_.size() < 3) messages_.push_back(what);
  }
  bool ok() const { return failures_ == 0; }
  std::string summary() const {
    if (ok()) return std::to_string(checks_) + " checks";
    std::string s = std::to_string(failures_) + "/" + std::to_string(checks_) + " failed: ";
    for (std::size_t i = 0; i < messages_.size(); ++i) s += (i ? "; " : "") + messages_[i];
    return s;
  }

 private:
  std::size_t checks_ = 0;
  std::size_t failures_ = 0;
  std::vector<std::string> messages_;
};

Timestamp epoch_ms(long long ms) { return Timestamp{std::chrono::milliseconds{ms}}; }

// --- FSM ------------------------------------------------------------------

std::string verdict_json(double score) {
  return R"({"confidence_score": )" + text::format_shortest(score) + R"(, "confident": )" +
         (score >= 0.75 ? "true" : "false") + R"(, "reasoning": "scripted"})";
}

std::string cite_first(const gateway::CompletionRequest& r) {
  auto entries = fsm::parse_evidence_block(r.prompt);
  if (entries.empty()) return "Nothing to cite.";
  return "The evidence supports this " + entries.front().marker + ".";
}

struct FsmRig {
  std::shared_ptr<gateway::ScriptedProvider> provider = std::make_shared<gateway::ScriptedProvider>();
  std::shared_ptr<retrieval::KnowledgeBase> kb =
      std::make_shared<retrieval::KnowledgeBase>(std::make_shared<retrieval::HashingEmbedder>());
  std::shared_ptr<fsm::ScriptedSearch> search = std::make_shared<fsm::ScriptedSearch>();
  std::shared_ptr<ManualClock> clock = std::make_shared<ManualClock>(epoch_ms(1792140600000), std::chrono::milliseconds{1});
  fsm::EngineConfig config;

  FsmRig() {
    kb->index_add({make_chunk(doi("10.1/mod"), 0, "Thin film lithium niobate modulators reach 100 GHz bandwidth."),
                   make_chunk(doi("10.1/mod"), 1, "Drive voltage and loss trade off against electrode length."),
                   make_chunk(doi("10.1/pkg"), 0, "Packaging adds insertion loss at the fiber interface.")});
    config.generate_titles = false;
  }
  fsm::Engine engine() const {
    return fsm::Engine(fsm::EngineDeps{std::make_shared<gateway::Gateway>(provider), kb, search, nullptr, clock}, config);
  }
};

using EdgeTriple = std::tuple<fsm::FsmState, fsm::StateEvent, fsm::FsmState>;

// The state table written out independently of the library's copy.
const std::set<EdgeTriple>& declared_edges() {
  using S = fsm::FsmState;
  using E = fsm::StateEvent;
  static const std::set<EdgeTriple> edges = {
      {S::Idle, E::QuestionReceived, S::RelevanceCheck},
      {S::RelevanceCheck, E::Irrelevant, S::Done},
      {S::RelevanceCheck, E::Relevant, S::ConfidenceCheck},
      {S::ConfidenceCheck, E::Confident, S::Answer},
      {S::ConfidenceCheck, E::NotConfident, S::Decomposition},
      {S::Decomposition, E::Decomposed, S::SelfEvaluation},
      {S::SelfEvaluation, E::AllConfident, S::Answer},
      {S::SelfEvaluation, E::NeedsSearch, S::SearchOnline},
      {S::SelfEvaluation, E::BudgetExhausted, S::Answer},
      {S::SelfEvaluation, E::SearchDisabled, S::Answer},
      {S::SearchOnline, E::SearchCompleted, S::SelfEvaluation},
      {S::Answer, E::Answered, S::Done},
      {S::Answer, E::CitationCheckFailed, S::RelevanceCheck},
  };
  return edges;
}

void check_trace(Check& c, const fsm::Trace& trace, int run) {
  const auto tag = "run " + std::to_string(run);
  c.expect(!trace.empty() && trace.front().from == fsm::FsmState::Idle, tag + ": trace starts outside Idle");
  c.expect(!trace.empty() && trace.back().to == fsm::FsmState::Done, tag + ": trace does not end in Done");
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const auto& t = trace[i];
    c.expect(declared_edges().count({t.from, t.event, t.to}) == 1,
             tag + ": edge " + std::string(fsm::state_name(t.from)) + "->" + std::string(fsm::state_name(t.to)) +
                 " not in table");
    if (i) c.expect(trace[i - 1].to == t.from, tag + ": trace does not chain");
  }
}

void fsm_criterion(Check& c) {
  std::mt19937_64 rng(20261016);
  const std::vector<double> scores = {0.0, 0.25, 0.5, 0.75, 1.0};
  for (int run = 0; run < 1000; ++run) {
    FsmRig h;
    h.config.retry_budget = static_cast<int>(rng() % 6);
    h.config.allow_online_search = rng() % 4 != 0;
    h.config.answer_gate = std::vector<double>{0.25, 0.5, 0.75, 1.0}[rng() % 4];
    bool relevant = rng() % 8 != 0;
    h.provider->set_default("relevance", relevant ? "Relevant: Yes" : "Relevant: No");
    h.provider->set_handler("confidence", [&](const gateway::CompletionRequest&) { return verdict_json(scores[rng() % 5]); });
    h.provider->set_default("decomposition", rng() % 2 ? R"(["one", "two"])" : R"(["one", "two", "three"])");
    h.provider->set_handler("self_eval",
                            [&](const gateway::CompletionRequest&) { return text::format_shortest(scores[rng() % 5]); });
    h.provider->set_handler("answer", [&](const gateway::CompletionRequest& r) {
      return rng() % 3 == 0 ? std::string("Made up [[cite: doi:10.99/x # 1]].") : cite_first(r);
    });
    if (rng() % 5 == 0) h.search->set_unavailable(true);
    h.search->set_handler([&](const std::string& q, std::size_t) {
      return std::vector<retrieval::EvidenceItem>{
          make_item(doi("10.3/" + std::to_string(q.size())), static_cast<int>(rng() % 3), 0.4)};
    });
    auto e = h.engine();
    auto ctx = e.start_session("modulator bandwidth", false);
    e.run_question(ctx);
    c.expect(ctx.state == fsm::FsmState::Done, "run " + std::to_string(run) + " did not reach Done");
    c.expect(ctx.iteration_i <= 5, "run " + std::to_string(run) + " exceeded 5 refinement iterations");
    check_trace(c, ctx.trace, run);
  }

  // Every self-evaluation pinned at 0.5.
  FsmRig h;
  h.provider->set_default("relevance", "Relevant: Yes");
  h.provider->set_default("confidence", verdict_json(0.5));
  h.provider->set_default("decomposition", R"(["electrode design", "material loss", "packaging limits"])");
  h.provider->set_default("self_eval", "0.5");
  h.provider->set_handler("answer", cite_first);
  auto e = h.engine();
  auto ctx = e.start_session("modulator bandwidth", false);
  auto r = e.run_question(ctx);
  c.expect(ctx.iteration_i == 5, "pinned fixture ran " + std::to_string(ctx.iteration_i) + " iterations, expected 5");
  c.expect(ctx.state == fsm::FsmState::Done, "pinned fixture did not reach Done");
  c.expect(r.answer && r.answer->disclaimer.has_value(), "pinned fixture has no disclaimer");
  c.expect(r.answer && !r.answer->abstained, "pinned fixture abstained at the gate");
  check_trace(c, ctx.trace, -1);
}

// --- Closed-world citations -------------------------------------------------

void citation_criterion(Check& c) {
  std::mt19937_64 rng(7001);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<retrieval::EvidenceItem> ev;
    std::set<retrieval::EvidenceKey> ev_keys;
    int n_ev = 1 + static_cast<int>(rng() % 8);
    for (int i = 0; i < n_ev; ++i) {
      auto item = make_item(doi("10.5/e" + std::to_string(rng() % 6)), static_cast<int>(rng() % 4), 0.5);
      if (ev_keys.insert(item.key()).second) ev.push_back(item);
    }
    std::string draft;
    std::vector<retrieval::EvidenceKey> cited;
    int sentences = 1 + static_cast<int>(rng() % 6);
    for (int s = 0; s < sentences; ++s) {
      draft += "Claim " + std::to_string(s) + " about modulator bandwidth";
      int nm = static_cast<int>(rng() % 4);
      for (int m = 0; m < nm; ++m) {
        retrieval::EvidenceKey key;
        switch (rng() % 3) {
          case 0: key = ev[rng() % ev.size()].key(); break;
          case 1: key = {doi("10.66/fabricated" + std::to_string(rng() % 50)), static_cast<int>(rng() % 4)}; break;
          default: {
            // Real document, span outside the pool.
            auto base = ev[rng() % ev.size()].key();
            key = {base.doc_id, base.span_id + 10 + static_cast<int>(rng() % 3)};
          }
        }
        cited.push_back(key);
        draft += " " + citation::format_marker(key.doc_id, key.span_id);
      }
      draft += ". ";
    }
    const auto tag = "draft " + std::to_string(trial);
    auto cw = citation::enforce_closed_world(draft, ev);

    // Set-difference oracle over cited markers, in draft order.
    std::vector<retrieval::EvidenceKey> expected_rejected;
    for (const auto& k : cited)
      if (!ev_keys.count(k)) expected_rejected.push_back(k);
    std::vector<retrieval::EvidenceKey> got_rejected;
    for (const auto& r : cw.rejected) got_rejected.push_back({*r.id, r.span_id});
    c.expect(got_rejected == expected_rejected, tag + ": rejected list differs from cited \\ evidence");

    std::size_t out_of_evidence = 0;
    for (const auto& m : citation::parse_markers(cw.text)) out_of_evidence += ev_keys.count({*m.id, m.span_id}) ? 0 : 1;
    for (const auto& item : cw.citations) out_of_evidence += ev_keys.count(item.key()) ? 0 : 1;
    c.expect(out_of_evidence == 0, tag + ": out-of-evidence citation in final output");
    c.expect(cw.final_report.fabricated_rate == 0.0, tag + ": fabricated rate of final output is not 0");
    if (cw.abstain) c.expect(cw.citations.empty(), tag + ": abstention keeps citations");
  }
}

// --- Calibration ------------------------------------------------------------

double ece_oracle(const std::vector<eval::ScoredItem>& items, int bins) {
  double total = 0;
  for (int b = 0; b < bins; ++b) {
    double lo = static_cast<double>(b) / bins, hi = static_cast<double>(b + 1) / bins;
    double sum_c = 0, sum_y = 0;
    std::size_t n = 0;
    for (const auto& it : items) {
      bool in = (it.confidence >= lo && it.confidence < hi) || (b == bins - 1 && it.confidence == 1.0);
      if (!in) continue;
      sum_c += it.confidence;
      sum_y += it.correct ? 1.0 : 0.0;
      ++n;
    }
    if (n) total += (static_cast<double>(n) / items.size()) * std::fabs(sum_c / n - sum_y / n);
  }
  return total;
}

// Enumerates prefixes of the stable confidence-descending order and sums the
// area in exact integer arithmetic over the denominator 2 * N * lcm(1..N).
double aurc_oracle(const std::vector<eval::ScoredItem>& items) {
  const auto n = static_cast<long long>(items.size());
  std::vector<std::size_t> order(items.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return items[a].confidence > items[b].confidence; });
  long long l = 1;
  for (long long i = 1; i <= n; ++i) l = std::lcm(l, i);
  std::vector<long long> errors(static_cast<std::size_t>(n) + 1, 0);
  for (long long i = 1; i <= n; ++i) errors[i] = errors[i - 1] + (items[order[i - 1]].correct ? 0 : 1);
  // risk_i = errors_i / i, scaled by l.
  auto risk = [&](long long i) { return errors[i] * (l / i); };
  long long num = 2 * risk(1);  // cov_1 * risk_1 = risk_1 / N
  for (long long i = 2; i <= n; ++i) num += risk(i) + risk(i - 1);
  return static_cast<double>(static_cast<long double>(num) / (2.0L * n * l));
}

void calibration_criterion(Check& c) {
  std::mt19937_64 rng(4242);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int set = 0; set < 200; ++set) {
    std::vector<eval::ScoredItem> items(1 + rng() % 80);
    for (auto& it : items) {
      it.confidence = rng() % 5 == 0 ? static_cast<double>(rng() % 11) / 10.0 : unit(rng);
      it.correct = unit(rng) < it.confidence;
    }
    int bins = 1 + static_cast<int>(rng() % 15);
    double got = eval::compute_ece(items, bins), want = ece_oracle(items, bins);
    c.expect(std::fabs(got - want) <= kEceOracleTol, "ECE set " + std::to_string(set) + " off by " + std::to_string(got - want));
  }

  std::vector<eval::ScoredItem> perfect;
  for (int b = 0; b < 10; ++b) {
    double conf = (b + 0.5) / 10.0;  // 0.05, 0.15, ..., 0.95
    for (int i = 0; i < 20; ++i) perfect.push_back({conf, i < static_cast<int>(std::lround(conf * 20))});
  }
  c.expect(eval::compute_ece(perfect) < kPerfectEceTol, "perfectly calibrated fixture has ECE >= 1e-9");

  for (int set = 0; set < 300; ++set) {
    std::vector<eval::ScoredItem> items(1 + rng() % 20);
    for (auto& it : items) {
      it.confidence = static_cast<double>(rng() % 5) / 4.0;  // frequent ties
      it.correct = rng() % 2;
    }
    double got = eval::compute_aurc(items), want = aurc_oracle(items);
    c.expect(std::fabs(got - want) <= kAurcOracleTol, "AURC set " + std::to_string(set) + " differs from prefix oracle");
  }

  // Calibration fixtures: overconfident, underconfident, a mixed model and
  // randomly drawn miscalibrated sets.
  std::vector<std::vector<eval::ScoredItem>> fixtures;
  {
    std::vector<eval::ScoredItem> over, under, mixed;
    for (int i = 0; i < 200; ++i) {
      double conf = 0.6 + 0.4 * (i % 10) / 10.0;
      over.push_back({conf, unit(rng) < conf - 0.3});
      double low = 0.1 + 0.4 * (i % 10) / 10.0;
      under.push_back({low, unit(rng) < low + 0.4});
      double m = (i % 20) / 20.0;
      mixed.push_back({m, unit(rng) < (m < 0.5 ? m + 0.3 : m - 0.3)});
    }
    fixtures = {over, under, mixed};
    for (int k = 0; k < 20; ++k) {
      std::vector<eval::ScoredItem> f(50 + rng() % 150);
      double shift = unit(rng) * 0.6 - 0.3;
      for (auto& it : f) {
        it.confidence = unit(rng);
        it.correct = unit(rng) < std::clamp(it.confidence + shift, 0.0, 1.0);
      }
      fixtures.push_back(f);
    }
  }
  for (std::size_t f = 0; f < fixtures.size(); ++f) {
    auto map = eval::IsotonicMap::fit(fixtures[f]);
    bool monotone = true;
    double prev = -1;
    for (int g = 0; g <= 1000; ++g) {
      double v = map(g / 1000.0);
      monotone = monotone && v >= prev && v >= 0.0 && v <= 1.0;
      prev = v;
    }
    c.expect(monotone, "isotonic map of fixture " + std::to_string(f) + " is not monotone");
    auto rep = eval::calibrate(fixtures[f]);
    c.expect(rep.ece_after <= rep.ece_before, "fixture " + std::to_string(f) + ": post-ECE " +
                                                  std::to_string(rep.ece_after) + " > pre-ECE " +
                                                  std::to_string(rep.ece_before));
  }
}

// --- Retrieval --------------------------------------------------------------

std::vector<retrieval::EvidenceKey> brute_force_topk(const std::vector<retrieval::IndexEntry>& entries,
                                                     const retrieval::EmbeddingVector& q, std::size_t k) {
  std::vector<std::pair<retrieval::EvidenceKey, double>> scored;
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
  std::vector<retrieval::EvidenceKey> keys;
  for (std::size_t i = 0; i < std::min(k, scored.size()); ++i) keys.push_back(scored[i].first);
  return keys;
}

retrieval::EmbeddingVector axis_mix(std::size_t dim, double along_first, std::size_t other_axis) {
  retrieval::EmbeddingVector v;
  v.values.assign(dim, 0.0);
  v.values[0] = along_first;
  v.values[other_axis] = std::sqrt(1.0 - along_first * along_first);
  return v;
}

std::vector<std::size_t> simulate_ladder(const std::vector<double>& sorted_sims, const retrieval::RetrievalConfig& cfg) {
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

void retrieval_criterion(Check& c) {
  std::mt19937_64 rng(2024);
  const std::vector<std::string> words = {"lithium", "niobate", "modulator", "bandwidth", "electrode", "loss",
                                          "silicon", "ring",    "driver",    "voltage",   "packaging", "fiber"};
  for (int trial = 0; trial < 100; ++trial) {
    const auto tag = "index " + std::to_string(trial);
    std::size_t n = 1 + rng() % 200;
    std::size_t k = 1 + rng() % 20;
    if (trial % 2 == 0) {
      // Random vectors, a third reused to force exact ties.
      std::size_t dim = 2 + rng() % 12;
      retrieval::VectorIndex idx(dim);
      std::vector<retrieval::IndexEntry> batch;
      std::vector<retrieval::EmbeddingVector> pool;
      for (std::size_t i = 0; i < n; ++i) {
        auto v = (!pool.empty() && rng() % 3 == 0) ? pool[rng() % pool.size()] : testkit::random_vector(rng, dim);
        pool.push_back(v);
        batch.push_back({make_chunk(doi("10.9/t" + std::to_string(rng() % 20)), static_cast<int>(i), "t"), v});
      }
      idx.upsert(batch);
      auto q = testkit::random_vector(rng, dim);
      std::vector<retrieval::EvidenceKey> got;
      for (const auto& r : idx.search(q, k)) got.push_back(r.key());
      c.expect(got == brute_force_topk(idx.entries(), q, k), tag + ": top-k differs from brute force");
    } else {
      // Text through the knowledge base; repeated texts tie exactly.
      retrieval::KnowledgeBase kb(std::make_shared<retrieval::HashingEmbedder>());
      std::vector<retrieval::Chunk> chunks;
      for (std::size_t i = 0; i < n; ++i) {
        std::string t;
        for (int w = 0; w < 1 + static_cast<int>(rng() % 5); ++w) t += words[rng() % words.size()] + " ";
        chunks.push_back(make_chunk(doi("10.8/k" + std::to_string(rng() % 30)), static_cast<int>(i), t));
      }
      kb.index_add(chunks);
      std::string query = words[rng() % words.size()] + " " + words[rng() % words.size()];
      std::vector<retrieval::EvidenceKey> got;
      for (const auto& r : kb.query_topk(query, k)) got.push_back(r.key());
      auto want = brute_force_topk(kb.index().entries(), kb.embedder().embed(query), k);
      c.expect(got == want, tag + ": query_topk differs from brute force");
    }
  }

  // Constructed fixtures. The mean of a descending prefix never rises with
  // k, so a run stops at start_k or at the ceiling; ceilings of 6 and 9 give
  // the intermediate rungs.
  const std::size_t dim = 40;
  auto run_fixture = [&](double hi_sim, std::size_t hi_count, double lo_sim, std::size_t max_k,
                         std::vector<std::size_t> expected) {
    retrieval::VectorIndex idx(dim);
    std::vector<retrieval::IndexEntry> batch;
    std::vector<double> sims;
    for (std::size_t i = 0; i < 20; ++i) {
      double s = i < hi_count ? hi_sim : lo_sim;
      batch.push_back({make_chunk(doi("10.1/fx"), static_cast<int>(i), "t"), axis_mix(dim, s, 1 + i)});
      sims.push_back(s);
    }
    idx.upsert(batch);
    retrieval::RetrievalConfig cfg;
    cfg.max_k = max_k;
    retrieval::EmbeddingVector q;
    q.values.assign(dim, 0.0);
    q.values[0] = 1.0;
    auto r = retrieval::dynamic_k_search(idx, q, cfg);
    const auto& ladder = r.ladder.at("index");
    auto label = "ceiling " + std::to_string(max_k) + " stopped at " + std::to_string(ladder.back());
    c.expect(ladder == simulate_ladder(sims, cfg), label + ": ladder differs from hand simulation");
    c.expect(ladder == expected, label + ": unexpected ladder");
    c.expect(r.evidence.size() == std::min(ladder.back(), cfg.top_l), label + ": wrong evidence size");
  };
  run_fixture(0.9, 3, 0.1, 12, {3});
  run_fixture(0.5, 3, 0.1, 6, {3, 6});
  run_fixture(0.5, 3, 0.1, 9, {3, 6, 9});
  run_fixture(0.5, 3, 0.1, 12, {3, 6, 9, 12});

  // Bounds under random pools and several indexes.
  for (int trial = 0; trial < 50; ++trial) {
    retrieval::KnowledgeBase kb(std::make_shared<retrieval::HashingEmbedder>());
    for (const auto* name : {"main", "sessions", "extra"}) {
      std::vector<retrieval::Chunk> chunks;
      for (std::size_t i = 0; i < 1 + rng() % 40; ++i) {
        chunks.push_back(make_chunk(doi(std::string("10.2/") + name), static_cast<int>(i),
                                    words[rng() % words.size()] + " " + words[rng() % words.size()]));
      }
      kb.index_add(chunks, name);
    }
    auto r = kb.dynamic_k_retrieve(words[rng() % words.size()], retrieval::RetrievalConfig{});
    c.expect(r.evidence.size() <= 12, "pooled evidence exceeds top_L 12");
    for (const auto& [name, ladder] : r.ladder)
      for (auto k : ladder) c.expect(k <= 12, "ladder of " + name + " exceeds 12");
  }
}

// --- Ingestion --------------------------------------------------------------

struct IngestRig {
  ingest::PipelineStores stores;
  std::unique_ptr<ingest::IngestionPipeline> pipeline;

  explicit IngestRig(const ingest::SyntheticCorpus& corpus) {
    stores.knowledge = std::make_shared<retrieval::KnowledgeBase>(std::make_shared<retrieval::HashingEmbedder>());
    stores.metrics = std::make_shared<store::MetricsStore>();
    stores.dedup = std::make_shared<ingest::DedupStore>();
    stores.missing = std::make_shared<ingest::MissingList>();
    stores.records = std::make_shared<ingest::RecordRegistry>();
    ingest::PipelineConfig config;
    config.axes = corpus.axes();
    auto clock = std::make_shared<ManualClock>(epoch_ms(1792140600000), std::chrono::milliseconds{1});
    pipeline = std::make_unique<ingest::IngestionPipeline>(stores, corpus.adapters(), corpus.graph(),
                                                           std::make_shared<ingest::PlainTextParser>(), nullptr, clock,
                                                           config);
  }
  std::string exports() const {
    return stores.knowledge->index().export_text() + "\n--\n" + stores.metrics->export_csv() + "\n--\n" +
           stores.dedup->export_text() + "\n--\n" + stores.missing->export_text() + "\n--\n" +
           stores.records->export_text();
  }
};

CanonicalId node(int i) { return doi("10.7/n" + std::to_string(i)); }

void ingestion_criterion(Check& c) {
  // Double run on the 50-document synthetic corpus.
  testkit::TempDir dir;
  ingest::write_synthetic_corpus(dir.path());
  auto corpus = ingest::SyntheticCorpus::load(dir.path());
  IngestRig rig(corpus);
  auto first_report = rig.pipeline->run();
  auto first = rig.exports();
  c.expect(first_report.ingested + first_report.abstract_only + first_report.needs_manual_fix == 50,
           "first run did not settle all 50 documents");
  auto second = rig.pipeline->run();
  c.expect(rig.exports() == first, "second run changed the store exports");
  c.expect(second.ingested + second.abstract_only + second.needs_manual_fix == 0, "second run admitted documents");
  IngestRig fresh(corpus);
  fresh.pipeline->run();
  c.expect(fresh.exports() == first, "a fresh run gives different exports");

  // Dedup either-match on the preprint/published pair.
  auto fixture = ingest::SyntheticCorpus::load(kData / "corpus");
  std::vector<const ingest::CorpusDocument*> pair;
  for (const auto& d : fixture.documents())
    if (d.candidate.record.canonical == doi("10.5555/fx.1")) pair.push_back(&d);
  c.expect(pair.size() == 2, "fixture lacks the preprint/published pair");
  if (pair.size() == 2) {
    auto key = [](const ingest::CorpusDocument* d) {
      return ingest::DedupKey{sha1_hex(*d->candidate.pdf_bytes), d->candidate.record.canonical.to_string()};
    };
    c.expect(key(pair[0]).sha1_pdf != key(pair[1]).sha1_pdf, "pair shares file bytes");
    ingest::DedupStore store;
    c.expect(store.check_and_insert(key(pair[0])) == ingest::DedupDecision::Accept, "first copy not admitted");
    c.expect(store.check_and_insert(key(pair[1])) == ingest::DedupDecision::Duplicate, "same id, new bytes admitted");
    c.expect(store.check_and_insert({key(pair[0]).sha1_pdf, "doi:10.5555/other"}) == ingest::DedupDecision::Duplicate,
             "same bytes, new id admitted");
    c.expect(store.size() == 1, "dedup store grew on duplicates");
  }
  IngestRig fixture_rig(fixture);
  auto fixture_report = fixture_rig.pipeline->run();
  c.expect(fixture_report.duplicates >= 1, "fixture run reported no duplicate");

  // Snowball against an independent BFS, random graphs with cycles.
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 30);
    const int edges = static_cast<int>(rng() % (3 * n));
    ingest::MapCitationGraph g;
    std::vector<std::set<int>> adj(n);
    for (int e = 0; e < edges; ++e) {
      int a = static_cast<int>(rng() % n), b = static_cast<int>(rng() % n);
      g.add_edge(node(a), node(b));
      adj[a].insert(b);
      adj[b].insert(a);
    }
    std::vector<bool> seen(n);
    for (int i = 0; i < n; ++i) seen[i] = rng() % 4 == 0;
    auto result = ingest::snowball({node(0)}, g,
                                   [&](const CanonicalId& id) { return seen[std::stoi(id.value.substr(6))]; });
    std::set<int> visited{0};
    std::vector<int> frontier{0};
    std::set<CanonicalId> want;
    std::size_t waves = 0;
    bool saturated = false;
    while (!frontier.empty()) {
      std::set<int> met;
      for (int f : frontier)
        for (int m : adj[f]) met.insert(m);
      if (met.empty()) break;
      ++waves;
      std::size_t known = 0;
      std::vector<int> next;
      for (int m : met) {
        if (visited.count(m) || seen[m]) {
          ++known;
        } else {
          next.push_back(m);
        }
      }
      for (int m : next) {
        visited.insert(m);
        want.insert(node(m));
      }
      frontier = next;
      if (static_cast<double>(known) / static_cast<double>(met.size()) > 0.9) {
        saturated = true;
        break;
      }
    }
    const auto tag = "graph " + std::to_string(trial);
    c.expect(std::set<CanonicalId>(result.discovered.begin(), result.discovered.end()) == want &&
                 result.discovered.size() == want.size(),
             tag + ": discovered set differs from BFS oracle");
    c.expect(result.waves.size() == waves, tag + ": wave count differs");
    c.expect(result.saturated == saturated, tag + ": saturation flag differs");
  }
  ingest::MapCitationGraph ring;
  for (int i = 0; i < 12; ++i) ring.add_edge(node(i), node((i + 1) % 12));
  auto cyc = ingest::snowball({node(0)}, ring, [](const CanonicalId&) { return false; });
  c.expect(cyc.discovered.size() == 11 && cyc.waves.size() <= 12, "cyclic graph not covered exactly once");

  // dual_write with a fault at every point.
  for (auto point : {ingest::WritePoint::BeforeIndex, ingest::WritePoint::AfterIndex, ingest::WritePoint::AfterMetrics}) {
    retrieval::KnowledgeBase kb{std::make_shared<retrieval::HashingEmbedder>()};
    store::MetricsStore ms;
    kb.index_add({make_chunk(doi("10.1/dw"), 0, "old text"), make_chunk(doi("10.1/other"), 0, "other text")});
    ms.upsert(doi("10.1/dw"), Date{2020, 1, 1}, ingest::extract_deterministic("insertion loss of 4 dB"), epoch_ms(1));
    auto before = std::make_pair(kb.index().export_text(), ms.export_csv());
    ingest::DocumentRecord doc;
    doc.canonical = doi("10.1/dw");
    doc.title = "Dual write";
    doc.pub_date = Date{2021, 5, 1};
    auto r = ingest::dual_write(doc,
                                {make_chunk(doc.canonical, 0, "new zero"), make_chunk(doc.canonical, 1, "new one")},
                                ingest::extract_deterministic("a 3-dB bandwidth of 90 GHz"), kb, ms, epoch_ms(2),
                                [point](ingest::WritePoint p) {
                                  if (p == point) throw StoreError("injected");
                                });
    auto name = std::string(ingest::write_point_name(point));
    c.expect(!r.committed, "fault at " + name + " reported a commit");
    c.expect(std::make_pair(kb.index().export_text(), ms.export_csv()) == before,
             "fault at " + name + " left the stores changed");
  }
}

// --- Extraction -------------------------------------------------------------

struct ExtractionCase {
  std::string text;
  std::optional<double> bandwidth, vpil, loss;
};

void extraction_criterion(Check& c) {
  // Worked by hand from the rule table: first statement wins, THz x1000,
  // MHz /1000, V*mm /10.
  const std::vector<ExtractionCase> cases = {
      {"The modulator has a 3-dB bandwidth of 67 GHz.", 67.0, {}, {}},
      {"We measure a 3-dB bandwidth of 0.067 THz.", 67.0, {}, {}},
      {"A V\xCF\x80\xC2\xB7L of 2.2 V\xC2\xB7" "cm is obtained.", {}, 2.2, {}},
      {"No figures of merit are stated here.", {}, {}, {}},
      {"It offers a 3 dB bandwidth exceeding 110 GHz.", 110.0, {}, {}},
      {"The 3-dB electro-optic bandwidth is 45 GHz.", 45.0, {}, {}},
      {"This yields a 50 GHz 3-dB bandwidth.", 50.0, {}, {}},
      {"The VpiL of 12 V\xC2\xB7mm is low.", {}, 1.2, {}},
      {"Vpi*L = 1.8 V*cm at 1550 nm.", {}, 1.8, {}},
      {"The insertion loss of 3.5 dB includes the couplers.", {}, {}, 3.5},
      {"An on-chip insertion loss below 1 dB is achieved.", {}, {}, 1.0},
      {"We observe 0.8 dB insertion loss.", {}, {}, 0.8},
      {"The 3-dB bandwidth of 500 MHz limits the link.", 0.5, {}, {}},
      {"A 3-dB bandwidth of 40 GHz was measured; a later chip had a 3-dB bandwidth of 80 GHz.", 40.0, {}, {}},
      {"A 60 GHz 3-dB bandwidth, while the 3-dB bandwidth of 70 GHz is simulated.", 60.0, {}, {}},
      {"The bandwidth of 67 GHz is limited by the driver.", {}, {}, {}},
      {"A 3-dB bandwidth of 67 Gbaud is claimed.", {}, {}, {}},
      {"A 3-dB bandwidth of 100 GHz, VpiL of 2.8 V\xC2\xB7" "cm and insertion loss of 6 dB.", 100.0, 2.8, 6.0},
      {"The V\xCF\x80 L product of 3.1 V cm is typical.", {}, 3.1, {}},
      {"Energy per bit of 45 fJ and an extinction ratio of 20 dB.", {}, {}, {}},
  };
  c.expect(cases.size() == 20, "fixture count is not 20");
  for (const auto& k : cases) {
    auto m = ingest::extract_deterministic(k.text);
    auto field = [&](const std::optional<store::Field<double>>& got, std::optional<double> want, const char* name) {
      bool ok = got.has_value() == want.has_value() &&
                (!want || (std::fabs(got->value - *want) <= kExtractionTol &&
                           got->provenance == store::Provenance::Deterministic));
      c.expect(ok, std::string(name) + " wrong in: " + k.text);
    };
    field(m.bandwidth_3db_ghz, k.bandwidth, "bandwidth");
    field(m.vpi_l_v_cm, k.vpil, "VpiL");
    field(m.insertion_loss_db, k.loss, "insertion loss");
  }

  // The reasoning pass never overwrites a deterministic field.
  std::mt19937_64 rng(17);
  const auto& fields = store::numeric_fields();
  for (int trial = 0; trial < 500; ++trial) {
    ingest::ExtractedMetrics det;
    for (const auto& f : fields)
      if (rng() % 2) det.*store::numeric_field(f) = store::Field<double>{1.0 + rng() % 100, store::Provenance::Deterministic};
    nlohmann::json reply = nlohmann::json::object();
    for (const auto& f : fields) {
      switch (rng() % 4) {
        case 0: reply[f] = nullptr; break;
        case 1: reply[f] = 1.0 + rng() % 500; break;
        case 2: reply[f] = "garbage"; break;
        default: break;
      }
    }
    auto p = std::make_shared<gateway::ScriptedProvider>();
    p->push("extraction", reply.dump());
    auto out = ingest::extract_reasoning("excerpt", det, gateway::Gateway(p));
    auto combined = ingest::combine_passes(det, out.metrics);
    for (const auto& f : fields) {
      auto member = store::numeric_field(f);
      if (det.*member) c.expect(combined.*member == det.*member, "reasoning overwrote " + f);
    }
  }
}

// --- Harness ----------------------------------------------------------------

std::vector<eval::Question> sixty_questions() {
  std::vector<eval::Question> qs;
  const auto& cats = eval::question_categories();
  for (int i = 0; i < 60; ++i) {
    eval::Question q;
    q.question_id = "q" + std::to_string(i + 1);
    q.category = cats[static_cast<std::size_t>(i) % cats.size()];
    q.text = i % 2 ? "What bandwidth do thin film lithium niobate modulators reach?"
                   : "How does packaging add insertion loss at the fiber interface?";
    q.gold_answer = "Lithium niobate modulators reach 100 GHz bandwidth.";
    qs.push_back(q);
  }
  return qs;
}

void harness_criterion(Check& c) {
  auto questions = sixty_questions();
  eval::Factors factors;  // 2 knowledge models x 3 depths x 3 reasoning levels
  c.expect(factors.settings() == 18, "declared factors do not give 18 settings");
  auto manifest = eval::build_manifest(factors, questions, 1080);
  c.expect(manifest.runs.size() == 1080, "manifest has " + std::to_string(manifest.runs.size()) + " runs");

  auto provider = fsm::make_offline_provider();
  auto kb = std::make_shared<retrieval::KnowledgeBase>(std::make_shared<retrieval::HashingEmbedder>());
  kb->index_add({make_chunk(doi("10.1/mod"), 0, "Thin film lithium niobate modulators reach 100 GHz bandwidth.", "Modulators"),
                 make_chunk(doi("10.1/mod"), 1, "Drive voltage and loss trade off against electrode length.", "Modulators"),
                 make_chunk(doi("10.1/pkg"), 0, "Packaging adds insertion loss at the fiber interface.", "Packaging")});
  fsm::EngineConfig base;
  base.generate_titles = false;
  eval::EngineFactory factory = [&](const eval::RunConfig& run) {
    auto gw = std::make_shared<gateway::Gateway>(provider, eval::bindings_for(run));
    auto clock = std::make_shared<ManualClock>(epoch_ms(1792140600000), std::chrono::milliseconds{1});
    return std::make_shared<const fsm::Engine>(fsm::EngineDeps{gw, kb, nullptr, nullptr, clock},
                                               eval::engine_config_for(run, base));
  };
  auto stepping = [] { return std::make_shared<ManualClock>(epoch_ms(1792140600000), std::chrono::milliseconds{250}); };
  auto a = eval::results_csv(eval::execute_manifest(manifest, questions, factory, {1, stepping}));
  auto again = eval::build_manifest(factors, questions, 1080);
  auto b = eval::results_csv(eval::execute_manifest(again, questions, factory, {4, stepping}));
  auto rows = csv::parse(a);
  c.expect(rows.size() == 1081, "results file has " + std::to_string(rows.size() - 1) + " rows");
  c.expect(a == b, "results file differs between runs under one seed");

  auto exact = [](const std::string& x, const std::string& y) { return x == y; };
  auto prf = eval::citation_prf({"A", "B", "C"}, {"A"}, exact);
  c.expect(std::fabs(prf.precision - 1.0 / 3.0) < 1e-15 && prf.recall == 1.0 && std::fabs(prf.f1 - 0.5) < 1e-15,
           "citation_prf hand example is not P 1/3, R 1, F1 0.5");

  // Nearest rank by counting: the smallest value with at least ceil(pN/100)
  // values at or below it.
  std::mt19937_64 rng(90);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> v(1 + rng() % 40);
    for (auto& x : v) x = static_cast<double>(rng() % 25);
    for (int p : {50, 90, 1, 100}) {
      auto need = static_cast<std::size_t>((p * v.size() + 99) / 100);
      double want = 0;
      std::set<double> distinct(v.begin(), v.end());
      for (double cand : distinct) {
        auto at_or_below = static_cast<std::size_t>(std::count_if(v.begin(), v.end(), [&](double x) { return x <= cand; }));
        if (at_or_below >= need) {
          want = cand;
          break;
        }
      }
      c.expect(eval::percentile_nearest_rank(v, p) == want, "p" + std::to_string(p) + " differs from hand count");
    }
  }
}

// --- Gate -------------------------------------------------------------------

void gate_criterion(Check& c) {
  // Scripted distribution over self-reported confidence; at gate 0.5 the
  // analytic answered fraction is P(score >= 0.5).
  const std::vector<std::pair<double, int>> distribution = {{0.0, 90}, {0.25, 193}, {0.5, 217}, {0.75, 250}, {1.0, 250}};
  int total = 0, analytic_answered = 0;
  std::vector<double> draws;
  for (const auto& [score, count] : distribution) {
    total += count;
    if (score >= 0.5) analytic_answered += count;
    for (int i = 0; i < count; ++i) draws.push_back(score);
  }
  std::shuffle(draws.begin(), draws.end(), std::mt19937_64(717));

  int answered = 0, abstained = 0;
  for (double score : draws) {
    FsmRig h;
    h.config.allow_online_search = false;
    h.provider->set_default("relevance", "Relevant: Yes");
    h.provider->set_default("confidence", verdict_json(score));
    h.provider->set_default("decomposition", R"(["first topic", "second topic"])");
    h.provider->set_default("self_eval", text::format_shortest(score));
    h.provider->set_handler("answer", cite_first);
    auto e = h.engine();
    auto ctx = e.start_session("modulator bandwidth", false);
    auto r = e.run_question(ctx);
    if (!r.answer) {
      c.expect(false, "relevant question produced no answer record");
      continue;
    }
    (r.answer->abstained ? abstained : answered) += 1;
    c.expect(r.answer->final_confidence.value() == score, "final confidence does not follow the scripted score");
  }
  c.expect(answered == analytic_answered && abstained == total - analytic_answered,
           "answered " + std::to_string(answered) + "/" + std::to_string(total) + ", analytic " +
               std::to_string(analytic_answered));
}

struct Criterion {
  std::string name;
  double limit_s;
  std::function<void(Check&)> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {"FSM termination and legality", kFsmLimit, fsm_criterion},
      {"Closed-world citations", kCitationLimit, citation_criterion},
      {"Calibration oracles", kCalibrationLimit, calibration_criterion},
      {"Retrieval equivalence", kRetrievalLimit, retrieval_criterion},
      {"Ingestion properties", kIngestionLimit, ingestion_criterion},
      {"Extraction", kExtractionLimit, extraction_criterion},
      {"Harness", kHarnessLimit, harness_criterion},
      {"Gate behavior", kGateLimit, gate_criterion},
  };
  spdlog::set_level(spdlog::level::err);
  int failed = 0;
  for (const auto& cr : criteria) {
    Check check;
    auto t0 = std::chrono::steady_clock::now();
    try {
      cr.run(check);
    } catch (const std::exception& e) {
      check.expect(false, std::string("threw: ") + e.what());
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    bool in_time = secs < cr.limit_s;
    bool pass = check.ok() && in_time;
    failed += pass ? 0 : 1;
    char timing[64];
    std::snprintf(timing, sizeof timing, "%.2fs < %.0fs", secs, cr.limit_s);
    std::cout << (pass ? "PASS " : "FAIL ") << cr.name << " [" << timing << (in_time ? "" : " EXCEEDED") << "] "
              << check.summary() << "\n";
  }
  std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << "/" << criteria.size() << " criteria passed\n";
  return failed;
}
