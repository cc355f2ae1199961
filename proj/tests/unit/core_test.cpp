#include <gtest/gtest.h>

#include <random>

#include "groundwork/core/canonical_id.hpp"
#include "groundwork/core/csv.hpp"
#include "groundwork/core/fs.hpp"
#include "groundwork/core/hash.hpp"
#include "groundwork/core/text.hpp"
#include "groundwork/core/time.hpp"
#include "test_support.hpp"

using namespace groundwork;

TEST(Text, TrimAndSplit) {
  EXPECT_EQ(text::trim("  a b \n"), "a b");
  EXPECT_EQ(text::split_words("  one\ttwo  three\n"), (std::vector<std::string>{"one", "two", "three"}));
  EXPECT_EQ(text::split("a,,b", ','), (std::vector<std::string>{"a", "", "b"}));
  EXPECT_EQ(text::join({"x", "y"}, "-"), "x-y");
}

TEST(Text, NormalizeTitleFoldsCaseAndPunctuation) {
  EXPECT_EQ(text::normalize_title("  Thin-Film  Lithium Niobate: A Review!"), "thin film lithium niobate a review");
  EXPECT_EQ(text::normalize_title("THIN FILM lithium niobate, a review"), "thin film lithium niobate a review");
}

TEST(Text, FormatFixedRounds) {
  EXPECT_EQ(text::format_fixed(0.8215, 2), "0.82");
  EXPECT_EQ(text::format_fixed(0.825, 1), "0.8");
  EXPECT_EQ(text::format_fixed(2.0, 2), "2.00");
}

TEST(Text, FormatShortestRoundTrips) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> d(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    double v = d(rng);
    EXPECT_EQ(std::stod(text::format_shortest(v)), v);
  }
  EXPECT_EQ(text::format_shortest(0.25), "0.25");
}

TEST(Time, IsoRoundTripAtMillisecondPrecision) {
  Timestamp t{std::chrono::milliseconds{1792140600250}};
  auto s = format_iso8601(t);
  EXPECT_EQ(s, "2026-10-16T08:50:00.250Z");
  EXPECT_EQ(parse_iso8601(s), t);
  EXPECT_THROW(parse_iso8601("2026-13-01T00:00:00.000Z"), ValidationError);
  EXPECT_THROW(parse_iso8601("yesterday"), ValidationError);
}

TEST(Time, ManualClockSteps) {
  ManualClock clock(Timestamp{std::chrono::milliseconds{1000}}, std::chrono::milliseconds{5});
  EXPECT_EQ(clock.now().time_since_epoch().count(), 1000);
  EXPECT_EQ(clock.now().time_since_epoch().count(), 1005);
}

TEST(Time, DateParsing) {
  EXPECT_EQ(Date::parse("2021-03-04"), (Date{2021, 3, 4}));
  EXPECT_EQ(Date::parse("2019"), (Date{2019, 1, 1}));
  EXPECT_EQ(Date::parse("2019").to_string(), "2019-01-01");
  EXPECT_THROW(Date::parse("2021-02-30"), ValidationError);
  EXPECT_THROW(Date::parse("March 2021"), ValidationError);
}

TEST(Hash, Sha1KnownVector) {
  EXPECT_EQ(sha1_hex("abc"), "a9993e364706816aba3e25717850c26c9cd0d89d");
  EXPECT_TRUE(is_sha1_hex(sha1_hex("")));
  EXPECT_FALSE(is_sha1_hex("XYZ"));
}

TEST(Hash, Base64RoundTrip) {
  EXPECT_EQ(base64_encode("hello"), "aGVsbG8=");
  std::mt19937_64 rng(3);
  for (int n = 0; n < 64; ++n) {
    std::string bytes(n, '\0');
    for (auto& b : bytes) b = static_cast<char>(rng() & 0xff);
    EXPECT_EQ(base64_decode(base64_encode(bytes)), bytes);
  }
  EXPECT_THROW(base64_decode("***"), InvalidInput);
}

TEST(Hash, Uuid4Shape) {
  std::mt19937_64 rng(1);
  auto id = make_uuid4(rng);
  EXPECT_TRUE(is_uuid4(id)) << id;
  EXPECT_EQ(id[14], '4');
  EXPECT_FALSE(is_uuid4("not-a-uuid"));
  EXPECT_NE(make_uuid4(), make_uuid4());
}

TEST(Csv, QuotingRoundTrip) {
  csv::Row row = {"plain", "with,comma", "with \"quote\"", "multi\nline", ""};
  auto parsed = csv::parse(csv::format_row(row) + "\n");
  ASSERT_EQ(parsed.size(), 1u);
  EXPECT_EQ(parsed[0], row);
  EXPECT_THROW(csv::parse("\"open"), ValidationError);
}

TEST(Csv, TableColumns) {
  auto t = csv::parse_table("a,b\n1,2\n3,4\n");
  EXPECT_EQ(t.column("b"), 1);
  EXPECT_EQ(t.column("z"), -1);
  EXPECT_EQ(t.rows.size(), 2u);
  EXPECT_THROW(csv::parse_table("a,b\n1\n"), ValidationError);
}

TEST(CanonicalIdText, RoundTrip) {
  CanonicalId id{CanonicalId::Kind::Isbn, "9780131103627"};
  EXPECT_EQ(id.to_string(), "isbn:9780131103627");
  EXPECT_EQ(CanonicalId::parse(id.to_string()), id);
  EXPECT_THROW(CanonicalId::parse("issn:1234"), InvalidInput);
  EXPECT_THROW(CanonicalId::parse("doi:"), InvalidInput);
}

TEST(Fs, AtomicWriteReplaces) {
  testkit::TempDir dir;
  auto p = dir / "f.txt";
  fs::write_file_atomic(p, "one");
  fs::write_file_atomic(p, "two");
  EXPECT_EQ(fs::read_file(p), "two");
  EXPECT_THROW(fs::read_file(dir / "missing"), NotFound);
}
