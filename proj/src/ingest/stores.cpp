#include "groundwork/ingest/stores.hpp"

#include <json.hpp>

#include <algorithm>

#include "groundwork/core/fs.hpp"
#include "groundwork/core/hash.hpp"
#include "groundwork/core/text.hpp"

namespace groundwork::ingest {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::vector<json> json_lines(std::string_view text, const char* what) {
  std::vector<json> out;
  std::size_t line_no = 0;
  for (const auto& line : text::split(text, '\n')) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    auto j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      throw ValidationError(std::string(what) + " line " + std::to_string(line_no) + " is not a JSON object");
    }
    out.push_back(std::move(j));
  }
  return out;
}

std::string required_string(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_string()) throw ValidationError(std::string("missing string field '") + key + "'");
  return it->get<std::string>();
}

std::optional<std::string> optional_string(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw ValidationError(std::string("field '") + key + "' must be a string");
  return it->get<std::string>();
}

int required_int(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_number_integer()) {
    throw ValidationError(std::string("missing integer field '") + key + "'");
  }
  return it->get<int>();
}

CanonicalId parse_id(const std::string& s) {
  try {
    return CanonicalId::parse(s);
  } catch (const InvalidInput& e) {
    throw ValidationError(e.what());
  }
}

void check_tier(int tier) {
  if (tier < 1 || tier > 5) throw ValidationError("tier " + std::to_string(tier) + " outside 1-5");
}

}  // namespace

// --- DedupStore ---

namespace {

std::string dedup_text(const std::vector<DedupKey>& keys) {
  std::string out;
  for (const auto& k : keys) {
    ordered_json j = ordered_json::object();
    if (k.doi) j["doi"] = *k.doi;
    if (k.sha1_pdf) j["sha1"] = *k.sha1_pdf;
    out += j.dump() + "\n";
  }
  return out;
}

}  // namespace

DedupStore::DedupStore(std::filesystem::path path) : path_(std::move(path)) {
  if (!std::filesystem::exists(*path_)) return;
  for (const auto& j : json_lines(fs::read_file(*path_), "dedup store")) {
    DedupKey key{optional_string(j, "sha1"), optional_string(j, "doi")};
    if (!key.sha1_pdf && !key.doi) throw ValidationError("dedup entry without sha1 or doi");
    keys_.push_back(std::move(key));
  }
  std::sort(keys_.begin(), keys_.end());
}

bool DedupStore::matches_locked(const DedupKey& key) const {
  return std::any_of(keys_.begin(), keys_.end(), [&](const DedupKey& k) {
    return (key.sha1_pdf && k.sha1_pdf == key.sha1_pdf) || (key.doi && k.doi == key.doi);
  });
}

DedupDecision DedupStore::check_and_insert(const DedupKey& key) {
  if (!key.sha1_pdf && !key.doi) throw InvalidInput("dedup key needs a sha1 or an id");
  if (key.sha1_pdf && !is_sha1_hex(*key.sha1_pdf)) throw InvalidInput("dedup sha1 is not 40 lower-case hex");
  std::lock_guard lock(mu_);
  if (matches_locked(key)) return DedupDecision::Duplicate;
  keys_.insert(std::upper_bound(keys_.begin(), keys_.end(), key), key);
  flush_locked();
  return DedupDecision::Accept;
}

bool DedupStore::contains(const DedupKey& key) const {
  std::lock_guard lock(mu_);
  return matches_locked(key);
}

bool DedupStore::contains_id(std::string_view doi) const {
  std::lock_guard lock(mu_);
  return std::any_of(keys_.begin(), keys_.end(), [&](const DedupKey& k) { return k.doi && *k.doi == doi; });
}

void DedupStore::erase(const DedupKey& key) {
  std::lock_guard lock(mu_);
  auto it = std::find(keys_.begin(), keys_.end(), key);
  if (it == keys_.end()) return;
  keys_.erase(it);
  flush_locked();
}

void DedupStore::attach_sha1(std::string_view doi, const std::string& sha1) {
  if (!is_sha1_hex(sha1)) throw InvalidInput("dedup sha1 is not 40 lower-case hex");
  std::lock_guard lock(mu_);
  auto it = std::find_if(keys_.begin(), keys_.end(), [&](const DedupKey& k) { return k.doi && *k.doi == doi; });
  if (it == keys_.end()) throw NotFound("no dedup entry for '" + std::string(doi) + "'");
  if (it->sha1_pdf == sha1) return;
  DedupKey updated = *it;
  updated.sha1_pdf = sha1;
  keys_.erase(it);
  keys_.insert(std::upper_bound(keys_.begin(), keys_.end(), updated), updated);
  flush_locked();
}

std::vector<DedupKey> DedupStore::entries() const {
  std::lock_guard lock(mu_);
  return keys_;
}

std::size_t DedupStore::size() const {
  std::lock_guard lock(mu_);
  return keys_.size();
}

std::string DedupStore::export_text() const {
  std::lock_guard lock(mu_);
  return dedup_text(keys_);
}

void DedupStore::flush_locked() const {
  if (path_) fs::write_file_atomic(*path_, dedup_text(keys_));
}

// --- MissingList ---

namespace {

std::string missing_line(const MissingEntry& e) {
  ordered_json j;
  j["canonical"] = e.canonical.to_string();
  j["title"] = e.title;
  j["tier"] = e.tier;
  j["first_seen"] = format_iso8601(e.first_seen);
  return j.dump() + "\n";
}

}  // namespace

MissingList::MissingList(std::filesystem::path path) : path_(std::move(path)) {
  if (!std::filesystem::exists(*path_)) return;
  for (auto& e : parse(fs::read_file(*path_))) entries_.emplace(e.canonical, std::move(e));
}

bool MissingList::add(const MissingEntry& entry) {
  check_tier(entry.tier);
  std::lock_guard lock(mu_);
  if (!entries_.emplace(entry.canonical, entry).second) return false;
  flush_locked();
  return true;
}

bool MissingList::remove(const CanonicalId& canonical) {
  std::lock_guard lock(mu_);
  if (entries_.erase(canonical) == 0) return false;
  flush_locked();
  return true;
}

bool MissingList::contains(const CanonicalId& canonical) const {
  std::lock_guard lock(mu_);
  return entries_.count(canonical) > 0;
}

std::vector<MissingEntry> MissingList::entries() const {
  std::lock_guard lock(mu_);
  std::vector<MissingEntry> out;
  for (const auto& [_, e] : entries_) out.push_back(e);
  return out;
}

std::size_t MissingList::size() const {
  std::lock_guard lock(mu_);
  return entries_.size();
}

std::string MissingList::export_text() const {
  std::lock_guard lock(mu_);
  return text_locked();
}

std::vector<MissingEntry> MissingList::parse(std::string_view text) {
  std::vector<MissingEntry> out;
  for (const auto& j : json_lines(text, "missing list")) {
    MissingEntry e;
    e.canonical = parse_id(required_string(j, "canonical"));
    e.title = required_string(j, "title");
    e.tier = required_int(j, "tier");
    check_tier(e.tier);
    e.first_seen = parse_iso8601(required_string(j, "first_seen"));
    out.push_back(std::move(e));
  }
  return out;
}

std::string MissingList::text_locked() const {
  std::string out;
  for (const auto& [_, e] : entries_) out += missing_line(e);
  return out;
}

void MissingList::flush_locked() const {
  if (path_) fs::write_file_atomic(*path_, text_locked());
}

// --- RecordRegistry ---

std::string record_to_json(const DocumentRecord& r) {
  auto ids = [](const std::vector<CanonicalId>& v) {
    auto a = ordered_json::array();
    for (const auto& id : v) a.push_back(id.to_string());
    return a;
  };
  ordered_json j;
  j["canonical"] = r.canonical.to_string();
  j["sha1_pdf"] = r.sha1_pdf ? ordered_json(*r.sha1_pdf) : ordered_json(nullptr);
  j["title"] = r.title;
  j["tier"] = r.tier;
  j["status"] = std::string(status_name(r.status));
  j["citations_out"] = ids(r.citations_out);
  j["cited_by"] = ids(r.cited_by);
  auto history = ordered_json::array();
  for (auto s : r.history) history.push_back(std::string(status_name(s)));
  j["history"] = history;
  j["pub_date"] = r.pub_date.to_string();
  j["venue"] = r.venue;
  j["authors"] = r.authors;
  return j.dump();
}

DocumentRecord record_from_json(std::string_view text) {
  auto j = json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw ValidationError("document record is not a JSON object");
  auto id_list = [&](const char* key) {
    std::vector<CanonicalId> out;
    auto it = j.find(key);
    if (it == j.end() || !it->is_array()) throw ValidationError(std::string("missing array field '") + key + "'");
    for (const auto& v : *it) {
      if (!v.is_string()) throw ValidationError(std::string("non-string id in '") + key + "'");
      out.push_back(parse_id(v.get<std::string>()));
    }
    return out;
  };
  DocumentRecord r;
  r.canonical = parse_id(required_string(j, "canonical"));
  r.sha1_pdf = optional_string(j, "sha1_pdf");
  if (r.sha1_pdf && !is_sha1_hex(*r.sha1_pdf)) throw ValidationError("sha1_pdf is not 40 lower-case hex");
  r.title = required_string(j, "title");
  r.tier = required_int(j, "tier");
  check_tier(r.tier);
  try {
    r.status = parse_status(required_string(j, "status"));
    r.history.clear();
    auto it = j.find("history");
    if (it == j.end() || !it->is_array()) throw ValidationError("missing array field 'history'");
    for (const auto& s : *it) {
      if (!s.is_string()) throw ValidationError("non-string status in history");
      r.history.push_back(parse_status(s.get<std::string>()));
    }
  } catch (const InvalidInput& e) {
    throw ValidationError(e.what());
  }
  if (!is_status_path(r.history) || r.history.back() != r.status) {
    throw ValidationError("status history is not a legal path ending in the current status");
  }
  r.citations_out = id_list("citations_out");
  r.cited_by = id_list("cited_by");
  r.pub_date = Date::parse(required_string(j, "pub_date"));
  r.venue = required_string(j, "venue");
  auto authors = j.find("authors");
  if (authors == j.end() || !authors->is_array()) throw ValidationError("missing array field 'authors'");
  for (const auto& a : *authors) {
    if (!a.is_string()) throw ValidationError("non-string author");
    r.authors.push_back(a.get<std::string>());
  }
  return r;
}

RecordRegistry::RecordRegistry(std::filesystem::path path) : path_(std::move(path)) {
  if (!std::filesystem::exists(*path_)) return;
  for (const auto& line : text::split(fs::read_file(*path_), '\n')) {
    if (text::trim(line).empty()) continue;
    auto r = record_from_json(line);
    records_.emplace(r.canonical, std::move(r));
  }
}

void RecordRegistry::put(const DocumentRecord& record) {
  std::lock_guard lock(mu_);
  records_.insert_or_assign(record.canonical, record);
  flush_locked();
}

std::optional<DocumentRecord> RecordRegistry::find(const CanonicalId& canonical) const {
  std::lock_guard lock(mu_);
  auto it = records_.find(canonical);
  if (it == records_.end()) return std::nullopt;
  return it->second;
}

void RecordRegistry::erase(const CanonicalId& canonical) {
  std::lock_guard lock(mu_);
  if (records_.erase(canonical) > 0) flush_locked();
}

DocumentRecord RecordRegistry::transition(const CanonicalId& canonical, DocStatus next) {
  std::lock_guard lock(mu_);
  auto it = records_.find(canonical);
  if (it == records_.end()) throw NotFound("no document record for " + canonical.to_string());
  it->second.move_to(next);
  flush_locked();
  return it->second;
}

std::vector<DocumentRecord> RecordRegistry::records() const {
  std::lock_guard lock(mu_);
  std::vector<DocumentRecord> out;
  for (const auto& [_, r] : records_) out.push_back(r);
  return out;
}

std::size_t RecordRegistry::size() const {
  std::lock_guard lock(mu_);
  return records_.size();
}

std::string RecordRegistry::export_text() const {
  std::lock_guard lock(mu_);
  return text_locked();
}

std::string RecordRegistry::text_locked() const {
  std::string out;
  for (const auto& [_, r] : records_) out += record_to_json(r) + "\n";
  return out;
}

void RecordRegistry::flush_locked() const {
  if (path_) fs::write_file_atomic(*path_, text_locked());
}

}  // namespace groundwork::ingest
