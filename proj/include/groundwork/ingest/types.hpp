#pragma once

#include <chrono>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "groundwork/core/canonical_id.hpp"
#include "groundwork/core/error.hpp"
#include "groundwork/core/time.hpp"

namespace groundwork::ingest {

struct YearRange {
  int first = 2018;
  int last = 9999;  // open-ended: "to present"
  bool contains(int year) const { return year >= first && year <= last; }
  bool operator==(const YearRange&) const = default;
};

struct KeywordTuple {
  std::string platform;
  std::string device_class;
  std::string speed_marker;
  YearRange window;
  auto operator<=>(const KeywordTuple& o) const {
    return std::tie(platform, device_class, speed_marker) <=> std::tie(o.platform, o.device_class, o.speed_marker);
  }
  bool operator==(const KeywordTuple& o) const {
    return platform == o.platform && device_class == o.device_class && speed_marker == o.speed_marker;
  }
  std::string to_string() const;  // "platform | device | speed"
};

struct KeywordAxes {
  std::vector<std::string> platforms;
  std::vector<std::string> devices;
  std::vector<std::string> speeds;
  YearRange window;
};

// Cartesian product of the three axes in lexicographic order, duplicates
// within an axis removed. Throws ConfigError when an axis is empty.
std::vector<KeywordTuple> expand_matrix(const KeywordAxes& axes);

enum class PipelinePhase { Idle, CrawlSources };

// Periodic trigger with single-flight semantics: a due tick starts a run
// (Idle -> CrawlSources) and further ticks are ignored until complete().
class Scheduler {
 public:
  static constexpr std::chrono::milliseconds kDefaultPeriod =
      std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::months{1});

  explicit Scheduler(std::optional<Timestamp> last_run = std::nullopt,
                     std::chrono::milliseconds period = kDefaultPeriod);

  // True iff idle and now - last_run >= period (or no run has happened yet).
  bool tick(Timestamp now);
  void complete(Timestamp now);

  PipelinePhase phase() const;
  std::optional<Timestamp> last_run() const;

 private:
  mutable std::mutex mu_;
  std::optional<Timestamp> last_run_;
  std::chrono::milliseconds period_;
  PipelinePhase phase_ = PipelinePhase::Idle;
};

// Stateless form of the due check.
bool scheduler_tick(Timestamp now, Timestamp last_run,
                    std::chrono::milliseconds period = Scheduler::kDefaultPeriod);

enum class DocStatus { New, AbstractOnly, Parsed, NeedsManualFix, Ingested };

std::string_view status_name(DocStatus s);
DocStatus parse_status(std::string_view name);  // throws InvalidInput

// Legal status moves. Forward: New -> {AbstractOnly, Parsed, NeedsManualFix},
// Parsed -> {Ingested, NeedsManualFix}. Re-entry after an upload:
// {AbstractOnly, NeedsManualFix} -> New.
bool is_status_edge(DocStatus from, DocStatus to);
bool is_status_path(const std::vector<DocStatus>& history);

struct DocumentRecord {
  CanonicalId canonical;
  std::optional<std::string> sha1_pdf;
  std::string title;
  int tier = 1;
  DocStatus status = DocStatus::New;
  std::vector<CanonicalId> citations_out;
  std::vector<CanonicalId> cited_by;
  std::vector<DocStatus> history{DocStatus::New};
  // Source metadata carried so that an upload can be ingested without
  // re-crawling.
  Date pub_date;
  std::string venue;
  std::vector<std::string> authors;

  // Throws InvalidInput when the move is not an edge.
  void move_to(DocStatus next);
  bool operator==(const DocumentRecord&) const = default;
};

// Admission key. The id component is the canonical id text; for DOI sources
// that is the normalized DOI, otherwise the ISBN or URL hash stands in.
struct DedupKey {
  std::optional<std::string> sha1_pdf;
  std::optional<std::string> doi;
  bool operator==(const DedupKey&) const = default;
  auto operator<=>(const DedupKey&) const = default;
};

}  // namespace groundwork::ingest
