#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "groundwork/core/canonical_id.hpp"
#include "groundwork/core/error.hpp"
#include "groundwork/core/time.hpp"

namespace groundwork::store {

class QueryError : public Error {
 public:
  using Error::Error;
};

enum class Provenance { Deterministic, Reasoning };

std::string_view provenance_name(Provenance p);

template <typename T>
struct Field {
  T value{};
  Provenance provenance = Provenance::Deterministic;
  bool operator==(const Field&) const = default;
};

// Units: GHz, V*cm, dB, fJ/bit.
struct ExtractedMetrics {
  std::optional<Field<double>> bandwidth_3db_ghz;
  std::optional<Field<double>> vpi_l_v_cm;
  std::optional<Field<double>> insertion_loss_db;
  std::optional<Field<double>> energy_per_bit_fj;
  std::optional<Field<std::string>> packaging;
  bool operator==(const ExtractedMetrics&) const = default;
};

// Names of the numeric fields, in column order.
const std::vector<std::string>& numeric_fields();
// Pointer to a numeric field by name; throws QueryError for unknown names.
std::optional<Field<double>> ExtractedMetrics::*numeric_field(std::string_view name);

// Field-wise merge: an absent incoming field keeps the stored one, and a
// reasoning value never replaces a deterministic one.
ExtractedMetrics merge_metrics(const ExtractedMetrics& stored, const ExtractedMetrics& incoming);

struct MetricsRow {
  CanonicalId doi;
  Date pub_date;
  ExtractedMetrics metrics;
  Timestamp updated_at;
  bool operator==(const MetricsRow&) const = default;
};

enum class Sense { Min, Max };

struct TrendPoint {
  int year = 0;
  double mean = 0.0;
  std::size_t count = 0;
  bool operator==(const TrendPoint&) const = default;
};

// Metrics table keyed by canonical id, held in memory and mirrored to a
// single CSV file when a path is given. Single writer, many readers.
class MetricsStore {
 public:
  MetricsStore() = default;
  // Loads the file if it exists; later writes go back to it atomically.
  explicit MetricsStore(std::filesystem::path path);

  // Throws ValidationError on an invalid calendar date.
  MetricsRow upsert(const CanonicalId& doi, const Date& pub_date, const ExtractedMetrics& metrics, Timestamp now);

  std::optional<MetricsRow> find(const CanonicalId& doi) const;
  std::vector<MetricsRow> rows() const;  // canonical id order
  std::size_t size() const;

  // Puts a row back exactly as it was (nullopt removes it). Used to undo an
  // upsert inside a larger transaction.
  void restore(const CanonicalId& doi, const std::optional<MetricsRow>& previous);

  // Rows not dominated under the two senses; rows lacking either field are
  // skipped. Canonical id order. Throws QueryError for unknown fields.
  std::vector<MetricsRow> pareto_front(std::string_view metric_x, Sense sense_x, std::string_view metric_y,
                                       Sense sense_y) const;
  // Mean and count of present values per publication year, ascending.
  std::vector<TrendPoint> trend(std::string_view metric) const;

  // Header plus one record per row, stable column order.
  std::string export_csv() const;
  static std::map<CanonicalId, MetricsRow> parse_csv(std::string_view text);

 private:
  void flush_locked() const;

  std::optional<std::filesystem::path> path_;
  mutable std::shared_mutex mu_;
  std::map<CanonicalId, MetricsRow> rows_;
};

}  // namespace groundwork::store
