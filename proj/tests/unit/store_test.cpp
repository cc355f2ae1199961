#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <thread>

#include "groundwork/core/fs.hpp"
#include "groundwork/core/hash.hpp"
#include "groundwork/core/text.hpp"

#include <json.hpp>
#include "groundwork/store/metrics_store.hpp"
#include "groundwork/store/session_store.hpp"
#include "test_support.hpp"

using namespace groundwork;
using namespace groundwork::store;
using groundwork::testkit::doi;

namespace {

Timestamp at(long long ms) { return Timestamp{std::chrono::milliseconds{ms}}; }

Field<double> det(double v) { return {v, Provenance::Deterministic}; }
Field<double> rsn(double v) { return {v, Provenance::Reasoning}; }

// Independent dominance check: s dominates r when it is at least as good in
// both coordinates and strictly better in one.
bool dominates(double sx, double sy, double rx, double ry, Sense ax, Sense ay) {
  auto ge = [](double a, double b, Sense s) { return s == Sense::Max ? a >= b : a <= b; };
  auto gt = [](double a, double b, Sense s) { return s == Sense::Max ? a > b : a < b; };
  return ge(sx, rx, ax) && ge(sy, ry, ay) && (gt(sx, rx, ax) || gt(sy, ry, ay));
}

}  // namespace

TEST(Metrics, MergeKeepsAbsentAndDeterministic) {
  ExtractedMetrics stored;
  stored.bandwidth_3db_ghz = det(100.0);
  stored.vpi_l_v_cm = rsn(2.0);
  ExtractedMetrics incoming;
  incoming.bandwidth_3db_ghz = rsn(50.0);  // must not replace deterministic
  incoming.vpi_l_v_cm = det(2.2);          // deterministic replaces reasoning
  incoming.insertion_loss_db = rsn(0.5);   // new field
  auto m = merge_metrics(stored, incoming);
  EXPECT_EQ(m.bandwidth_3db_ghz, det(100.0));
  EXPECT_EQ(m.vpi_l_v_cm, det(2.2));
  EXPECT_EQ(m.insertion_loss_db, rsn(0.5));
  EXPECT_FALSE(m.energy_per_bit_fj.has_value());
  ExtractedMetrics newer;
  newer.bandwidth_3db_ghz = det(110.0);
  EXPECT_EQ(merge_metrics(m, newer).bandwidth_3db_ghz, det(110.0));
}

TEST(Metrics, UpsertMergesWithStoredRow) {
  MetricsStore s;
  ExtractedMetrics a;
  a.bandwidth_3db_ghz = det(40.0);
  s.upsert(doi("10.1/a"), Date{2020, 5, 1}, a, at(1000));
  ExtractedMetrics b;
  b.energy_per_bit_fj = rsn(12.0);
  auto row = s.upsert(doi("10.1/a"), Date{2020, 5, 1}, b, at(2000));
  EXPECT_EQ(row.metrics.bandwidth_3db_ghz, det(40.0));
  EXPECT_EQ(row.metrics.energy_per_bit_fj, rsn(12.0));
  EXPECT_EQ(row.updated_at, at(2000));
  EXPECT_EQ(s.size(), 1u);
}

TEST(Metrics, InvalidDateRejected) {
  MetricsStore s;
  EXPECT_THROW(s.upsert(doi("10.1/a"), Date{2021, 2, 30}, {}, at(0)), ValidationError);
  EXPECT_EQ(s.size(), 0u);
}

TEST(Metrics, UnknownFieldIsQueryError) {
  MetricsStore s;
  EXPECT_THROW(s.pareto_front("speed", Sense::Max, "vpi_l_v_cm", Sense::Min), QueryError);
  EXPECT_THROW(s.trend("speed"), QueryError);
}

TEST(Metrics, ParetoMatchesQuadraticOracle) {
  std::mt19937_64 rng(77);
  const auto& fields = numeric_fields();
  for (int trial = 0; trial < 40; ++trial) {
    MetricsStore s;
    std::size_t n = rng() % 501;
    for (std::size_t i = 0; i < n; ++i) {
      ExtractedMetrics m;
      // Small integer grid forces ties; a few rows miss a coordinate.
      if (rng() % 10 != 0) m.bandwidth_3db_ghz = det(static_cast<double>(rng() % 15));
      if (rng() % 10 != 0) m.vpi_l_v_cm = det(static_cast<double>(rng() % 15));
      s.upsert(doi("10.7/p" + std::to_string(i)), Date{2000 + static_cast<int>(rng() % 20), 1, 1}, m, at(0));
    }
    Sense sx = rng() % 2 ? Sense::Max : Sense::Min;
    Sense sy = rng() % 2 ? Sense::Max : Sense::Min;
    auto front = s.pareto_front(fields[0], sx, fields[1], sy);
    std::vector<CanonicalId> expected;
    auto rows = s.rows();
    for (const auto& r : rows) {
      if (!r.metrics.bandwidth_3db_ghz || !r.metrics.vpi_l_v_cm) continue;
      bool dominated = false;
      for (const auto& o : rows) {
        if (!o.metrics.bandwidth_3db_ghz || !o.metrics.vpi_l_v_cm) continue;
        if (dominates(o.metrics.bandwidth_3db_ghz->value, o.metrics.vpi_l_v_cm->value, r.metrics.bandwidth_3db_ghz->value,
                      r.metrics.vpi_l_v_cm->value, sx, sy)) {
          dominated = true;
          break;
        }
      }
      if (!dominated) expected.push_back(r.doi);
    }
    std::vector<CanonicalId> got;
    for (const auto& r : front) got.push_back(r.doi);
    EXPECT_EQ(got, expected) << "trial " << trial;
  }
}

TEST(Metrics, TrendPerYear) {
  MetricsStore s;
  auto put = [&](const std::string& id, int year, std::optional<double> bw) {
    ExtractedMetrics m;
    if (bw) m.bandwidth_3db_ghz = det(*bw);
    s.upsert(doi(id), Date{year, 6, 1}, m, at(0));
  };
  put("10.1/a", 2019, 30.0);
  put("10.1/b", 2019, 50.0);
  put("10.1/c", 2021, 100.0);
  put("10.1/d", 2020, std::nullopt);
  EXPECT_EQ(s.trend("bandwidth_3db_ghz"), (std::vector<TrendPoint>{{2019, 40.0, 2}, {2021, 100.0, 1}}));
}

TEST(Metrics, CsvHeaderAndRoundTrip) {
  testkit::TempDir dir;
  auto path = dir / "metrics.csv";
  {
    MetricsStore s(path);
    ExtractedMetrics m;
    m.bandwidth_3db_ghz = det(110.5);
    m.energy_per_bit_fj = rsn(4.2);
    m.packaging = Field<std::string>{"flip-chip, co-packaged", Provenance::Reasoning};
    s.upsert(doi("10.1/a"), Date{2022, 3, 9}, m, at(1792140600250));
    s.upsert(doi("10.1/b"), Date{2018, 1, 1}, {}, at(1792140600251));
  }
  auto text = fs::read_file(path);
  auto first_line = text.substr(0, text.find('\n'));
  EXPECT_EQ(first_line,
            "doi,pub_date,bandwidth_3db_ghz,bandwidth_3db_ghz_provenance,vpi_l_v_cm,vpi_l_v_cm_provenance,"
            "insertion_loss_db,insertion_loss_db_provenance,energy_per_bit_fj,energy_per_bit_fj_provenance,"
            "packaging,packaging_provenance,updated_at");
  MetricsStore reloaded(path);
  EXPECT_EQ(reloaded.rows(), MetricsStore(path).rows());
  ASSERT_EQ(reloaded.size(), 2u);
  auto a = reloaded.find(doi("10.1/a"));
  ASSERT_TRUE(a.has_value());
  EXPECT_EQ(a->metrics.bandwidth_3db_ghz, det(110.5));
  EXPECT_EQ(a->metrics.energy_per_bit_fj, rsn(4.2));
  EXPECT_EQ(a->metrics.packaging->value, "flip-chip, co-packaged");
  EXPECT_EQ(a->updated_at, at(1792140600250));
  EXPECT_EQ(reloaded.export_csv(), text);
}

TEST(Metrics, RestoreUndoesUpsert) {
  MetricsStore s;
  ExtractedMetrics m;
  m.vpi_l_v_cm = det(1.0);
  s.upsert(doi("10.1/a"), Date{2020, 1, 1}, m, at(0));
  auto before = s.find(doi("10.1/a"));
  ExtractedMetrics n;
  n.vpi_l_v_cm = det(3.0);
  s.upsert(doi("10.1/a"), Date{2020, 1, 1}, n, at(5));
  s.restore(doi("10.1/a"), before);
  EXPECT_EQ(s.find(doi("10.1/a")), before);
  s.restore(doi("10.1/z"), std::nullopt);
  EXPECT_EQ(s.size(), 1u);
}

namespace {

SessionRecord random_session(std::mt19937_64& rng) {
  SessionRecord r;
  r.session_id = make_uuid4(rng);
  static const std::vector<std::string> words = {"thin", "film", "modulator", "design", "loss", "bandwidth", "drive"};
  std::size_t nw = 3 + rng() % 4;
  std::vector<std::string> title;
  for (std::size_t i = 0; i < nw; ++i) title.push_back(words[rng() % words.size()]);
  r.title = text::join(title, " ");
  long long t = 1700000000000LL + static_cast<long long>(rng() % 1000000);
  r.created_at = at(t);
  std::size_t nm = rng() % 6;
  for (std::size_t i = 0; i < nm; ++i) {
    MessageEntry m;
    m.role = static_cast<MessageRole>(rng() % 3);
    m.content = "message \"" + std::to_string(rng()) + "\"\nwith newline";
    t += static_cast<long long>(rng() % 1000);
    m.timestamp = at(t);
    if (rng() % 2) m.usage = gateway::CompletionUsage{static_cast<long long>(rng() % 500), static_cast<long long>(rng() % 500), 0.25};
    r.messages.push_back(m);
  }
  return r;
}

}  // namespace

TEST(Sessions, RandomRoundTrip) {
  testkit::TempDir dir;
  SessionStore store(dir.path());
  std::mt19937_64 rng(12);
  for (int i = 0; i < 50; ++i) {
    auto rec = random_session(rng);
    store.persist(rec);
    EXPECT_EQ(store.load(rec.session_id), rec);
    EXPECT_EQ(session_from_json(to_json(rec)), rec);
  }
  EXPECT_EQ(store.list().size(), 50u);
}

TEST(Sessions, JsonShape) {
  std::mt19937_64 rng(4);
  auto rec = random_session(rng);
  MessageEntry m{MessageRole::User, "hi", rec.created_at, std::nullopt};
  rec.messages = {m};
  auto j = nlohmann::json::parse(to_json(rec));
  EXPECT_EQ(j.size(), 4u);
  EXPECT_EQ(j["messages"][0].size(), 4u);
  EXPECT_TRUE(j["messages"][0]["usage"].is_null());
  EXPECT_EQ(j["messages"][0]["role"], "user");
}

TEST(Sessions, NotFoundAndOverwrite) {
  testkit::TempDir dir;
  SessionStore store(dir.path());
  EXPECT_THROW(store.load("00000000-0000-4000-8000-000000000000"), NotFound);
  std::mt19937_64 rng(5);
  auto rec = random_session(rng);
  store.persist(rec);
  rec.title = "A Completely Different Title";
  store.persist(rec);
  EXPECT_EQ(store.load(rec.session_id).title, "A Completely Different Title");
  EXPECT_EQ(store.list().size(), 1u);
}

TEST(Sessions, ValidationRejectsBadRecords) {
  std::mt19937_64 rng(6);
  auto rec = random_session(rng);
  auto bad_id = rec;
  bad_id.session_id = "abc";
  EXPECT_THROW(validate(bad_id), ValidationError);
  auto bad_title = rec;
  bad_title.title = "Two words";
  EXPECT_THROW(validate(bad_title), ValidationError);
  auto bad_order = rec;
  bad_order.messages = {{MessageRole::User, "a", at(10), std::nullopt}, {MessageRole::Assistant, "b", at(5), std::nullopt}};
  EXPECT_THROW(validate(bad_order), ValidationError);
  EXPECT_THROW(session_from_json("{}"), ValidationError);
}

TEST(Sessions, ConcurrentUpdatesAreSerialized) {
  testkit::TempDir dir;
  SessionStore store(dir.path());
  std::mt19937_64 rng(9);
  auto rec = random_session(rng);
  rec.messages.clear();
  store.persist(rec);
  std::vector<std::thread> threads;
  for (int t = 0; t < 8; ++t) {
    threads.emplace_back([&, t] {
      for (int i = 0; i < 10; ++i) {
        store.update(rec.session_id, [&](SessionRecord& r) {
          r.messages.push_back({MessageRole::User, "t" + std::to_string(t), rec.created_at, std::nullopt});
        });
      }
    });
  }
  for (auto& th : threads) th.join();
  EXPECT_EQ(store.load(rec.session_id).messages.size(), 80u);
}

namespace {

gateway::Gateway title_gateway(std::shared_ptr<gateway::ScriptedProvider> p) { return gateway::Gateway(p); }

}  // namespace

TEST(Titles, AcceptsValidTitle) {
  auto p = std::make_shared<gateway::ScriptedProvider>();
  p->push("title", "\"Thin Film Modulator Design\"");
  EXPECT_EQ(title_session("User: q\nAssistant: a", title_gateway(p), at(0)), "Thin Film Modulator Design");
}

TEST(Titles, ShortRepliesFallBackAfterBudget) {
  auto p = std::make_shared<gateway::ScriptedProvider>();
  p->set_default("title", "Notes");
  gateway::CompletionUsage usage;
  // 2026-10-16T08:50:00Z
  EXPECT_EQ(title_session("User: q", title_gateway(p), at(1792140600000), &usage), "Untitled Session 2026-10-16");
  EXPECT_EQ(p->call_count("title"), 3u);
  EXPECT_GT(usage.token_in, 0);
}

TEST(Titles, LongReplyCutToSixWords) {
  auto p = std::make_shared<gateway::ScriptedProvider>();
  p->set_default("title", "one two three four five six seven eight nine");
  EXPECT_EQ(title_session("User: q", title_gateway(p), at(0)), "one two three four five six");
  EXPECT_EQ(fallback_title(at(0)), "Untitled Session 1970-01-01");
}
