#include "groundwork/store/metrics_store.hpp"

#include <algorithm>
#include <charconv>
#include <mutex>
#include <sstream>

#include "groundwork/core/csv.hpp"
#include "groundwork/core/fs.hpp"
#include "groundwork/core/text.hpp"

namespace groundwork::store {

std::string_view provenance_name(Provenance p) {
  return p == Provenance::Deterministic ? "deterministic" : "reasoning";
}

namespace {

Provenance parse_provenance(std::string_view s) {
  if (s == "deterministic") return Provenance::Deterministic;
  if (s == "reasoning") return Provenance::Reasoning;
  throw ValidationError("unknown provenance '" + std::string(s) + "'");
}

double parse_number(std::string_view s) {
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || p != s.data() + s.size()) {
    throw ValidationError("'" + std::string(s) + "' is not a number");
  }
  return v;
}

template <typename T>
std::optional<Field<T>> merge_field(const std::optional<Field<T>>& stored, const std::optional<Field<T>>& incoming) {
  if (!incoming) return stored;
  if (stored && stored->provenance == Provenance::Deterministic && incoming->provenance == Provenance::Reasoning) {
    return stored;
  }
  return incoming;
}

void check_date(const Date& d) {
  std::chrono::year_month_day ymd{std::chrono::year{d.year}, std::chrono::month{d.month}, std::chrono::day{d.day}};
  if (!ymd.ok()) throw ValidationError("invalid publication date " + d.to_string());
}

using NumericMember = std::optional<Field<double>> ExtractedMetrics::*;

const std::vector<std::pair<std::string, NumericMember>>& numeric_members() {
  static const std::vector<std::pair<std::string, NumericMember>> kMembers = {
      {"bandwidth_3db_ghz", &ExtractedMetrics::bandwidth_3db_ghz},
      {"vpi_l_v_cm", &ExtractedMetrics::vpi_l_v_cm},
      {"insertion_loss_db", &ExtractedMetrics::insertion_loss_db},
      {"energy_per_bit_fj", &ExtractedMetrics::energy_per_bit_fj},
  };
  return kMembers;
}

}  // namespace

const std::vector<std::string>& numeric_fields() {
  static const std::vector<std::string> kNames = [] {
    std::vector<std::string> names;
    for (const auto& [name, _] : numeric_members()) names.push_back(name);
    return names;
  }();
  return kNames;
}

std::optional<Field<double>> ExtractedMetrics::*numeric_field(std::string_view name) {
  for (const auto& [n, member] : numeric_members()) {
    if (n == name) return member;
  }
  throw QueryError("unknown metric field '" + std::string(name) + "'");
}

ExtractedMetrics merge_metrics(const ExtractedMetrics& stored, const ExtractedMetrics& incoming) {
  ExtractedMetrics out;
  for (const auto& [_, member] : numeric_members()) out.*member = merge_field(stored.*member, incoming.*member);
  out.packaging = merge_field(stored.packaging, incoming.packaging);
  return out;
}

MetricsStore::MetricsStore(std::filesystem::path path) : path_(std::move(path)) {
  if (std::filesystem::exists(*path_)) rows_ = parse_csv(fs::read_file(*path_));
}

MetricsRow MetricsStore::upsert(const CanonicalId& doi, const Date& pub_date, const ExtractedMetrics& metrics,
                                Timestamp now) {
  check_date(pub_date);
  std::unique_lock lock(mu_);
  auto previous = rows_.find(doi) == rows_.end() ? std::nullopt : std::optional<MetricsRow>(rows_.at(doi));
  MetricsRow row;
  row.doi = doi;
  row.pub_date = pub_date;
  row.metrics = previous ? merge_metrics(previous->metrics, metrics) : metrics;
  row.updated_at = now;
  rows_[doi] = row;
  try {
    flush_locked();
  } catch (...) {
    if (previous) {
      rows_[doi] = *previous;
    } else {
      rows_.erase(doi);
    }
    throw;
  }
  return row;
}

std::optional<MetricsRow> MetricsStore::find(const CanonicalId& doi) const {
  std::shared_lock lock(mu_);
  auto it = rows_.find(doi);
  if (it == rows_.end()) return std::nullopt;
  return it->second;
}

std::vector<MetricsRow> MetricsStore::rows() const {
  std::shared_lock lock(mu_);
  std::vector<MetricsRow> out;
  out.reserve(rows_.size());
  for (const auto& [_, row] : rows_) out.push_back(row);
  return out;
}

std::size_t MetricsStore::size() const {
  std::shared_lock lock(mu_);
  return rows_.size();
}

void MetricsStore::restore(const CanonicalId& doi, const std::optional<MetricsRow>& previous) {
  std::unique_lock lock(mu_);
  if (previous) {
    rows_[doi] = *previous;
  } else {
    rows_.erase(doi);
  }
  flush_locked();
}

std::vector<MetricsRow> MetricsStore::pareto_front(std::string_view metric_x, Sense sense_x,
                                                   std::string_view metric_y, Sense sense_y) const {
  auto mx = numeric_field(metric_x);
  auto my = numeric_field(metric_y);
  struct Point {
    double x, y;
    const MetricsRow* row;
  };
  std::shared_lock lock(mu_);
  std::vector<Point> points;
  for (const auto& [_, row] : rows_) {
    const auto& fx = row.metrics.*mx;
    const auto& fy = row.metrics.*my;
    if (!fx || !fy) continue;
    // Work in "larger is better" on both axes.
    points.push_back({sense_x == Sense::Max ? fx->value : -fx->value, sense_y == Sense::Max ? fy->value : -fy->value,
                      &row});
  }
  std::sort(points.begin(), points.end(), [](const Point& a, const Point& b) {
    if (a.x != b.x) return a.x > b.x;
    return a.y > b.y;
  });
  // Sweep groups of equal x in descending order. A point survives when it has
  // the largest y of its group and beats every y seen at a strictly larger x.
  std::vector<const MetricsRow*> front;
  bool have_best = false;
  double best_y = 0.0;
  for (std::size_t g = 0; g < points.size();) {
    std::size_t end = g;
    while (end < points.size() && points[end].x == points[g].x) ++end;
    double group_max = points[g].y;
    for (std::size_t i = g; i < end; ++i) {
      if (points[i].y == group_max && (!have_best || points[i].y > best_y)) front.push_back(points[i].row);
    }
    if (!have_best || group_max > best_y) best_y = group_max;
    have_best = true;
    g = end;
  }
  std::vector<MetricsRow> out;
  for (const auto* r : front) out.push_back(*r);
  std::sort(out.begin(), out.end(), [](const MetricsRow& a, const MetricsRow& b) { return a.doi < b.doi; });
  return out;
}

std::vector<TrendPoint> MetricsStore::trend(std::string_view metric) const {
  auto m = numeric_field(metric);
  std::map<int, std::pair<double, std::size_t>> buckets;
  std::shared_lock lock(mu_);
  for (const auto& [_, row] : rows_) {
    const auto& f = row.metrics.*m;
    if (!f) continue;
    auto& b = buckets[row.pub_date.year];
    b.first += f->value;
    ++b.second;
  }
  std::vector<TrendPoint> out;
  for (const auto& [year, b] : buckets) out.push_back({year, b.first / static_cast<double>(b.second), b.second});
  return out;
}

namespace {

csv::Row header_row() {
  csv::Row h = {"doi", "pub_date"};
  for (const auto& name : numeric_fields()) {
    h.push_back(name);
    h.push_back(name + "_provenance");
  }
  h.push_back("packaging");
  h.push_back("packaging_provenance");
  h.push_back("updated_at");
  return h;
}

std::string render_csv(const std::map<CanonicalId, MetricsRow>& rows) {
  std::ostringstream os;
  csv::write_row(os, header_row());
  for (const auto& [_, row] : rows) {
    csv::Row r = {row.doi.to_string(), row.pub_date.to_string()};
    for (const auto& [name, member] : numeric_members()) {
      const auto& f = row.metrics.*member;
      r.push_back(f ? text::format_shortest(f->value) : "");
      r.push_back(f ? std::string(provenance_name(f->provenance)) : "");
    }
    r.push_back(row.metrics.packaging ? row.metrics.packaging->value : "");
    r.push_back(row.metrics.packaging ? std::string(provenance_name(row.metrics.packaging->provenance)) : "");
    r.push_back(format_iso8601(row.updated_at));
    csv::write_row(os, r);
  }
  return os.str();
}

}  // namespace

std::string MetricsStore::export_csv() const {
  std::shared_lock lock(mu_);
  return render_csv(rows_);
}

std::map<CanonicalId, MetricsRow> MetricsStore::parse_csv(std::string_view text) {
  auto table = csv::parse_table(text);
  if (table.header != header_row()) throw ValidationError("metrics file has an unexpected header");
  std::map<CanonicalId, MetricsRow> rows;
  for (const auto& r : table.rows) {
    MetricsRow row;
    row.doi = CanonicalId::parse(r[0]);
    row.pub_date = Date::parse(r[1]);
    std::size_t c = 2;
    for (const auto& [name, member] : numeric_members()) {
      if (!r[c].empty()) row.metrics.*member = Field<double>{parse_number(r[c]), parse_provenance(r[c + 1])};
      c += 2;
    }
    if (!r[c + 1].empty()) row.metrics.packaging = Field<std::string>{r[c], parse_provenance(r[c + 1])};
    row.updated_at = parse_iso8601(r[c + 2]);
    rows.emplace(row.doi, std::move(row));
  }
  return rows;
}

void MetricsStore::flush_locked() const {
  if (path_) fs::write_file_atomic(*path_, render_csv(rows_));
}

}  // namespace groundwork::store
