#include "groundwork/ingest/types.hpp"

#include <algorithm>
#include <array>

namespace groundwork::ingest {

std::string KeywordTuple::to_string() const { return platform + " | " + device_class + " | " + speed_marker; }

namespace {

std::vector<std::string> sorted_unique(std::vector<std::string> v, const char* axis) {
  if (v.empty()) throw ConfigError(std::string("keyword axis '") + axis + "' is empty");
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

}  // namespace

std::vector<KeywordTuple> expand_matrix(const KeywordAxes& axes) {
  auto platforms = sorted_unique(axes.platforms, "platforms");
  auto devices = sorted_unique(axes.devices, "devices");
  auto speeds = sorted_unique(axes.speeds, "speeds");
  if (axes.window.first > axes.window.last) throw ConfigError("keyword window ends before it starts");
  std::vector<KeywordTuple> out;
  out.reserve(platforms.size() * devices.size() * speeds.size());
  for (const auto& p : platforms) {
    for (const auto& d : devices) {
      for (const auto& s : speeds) out.push_back({p, d, s, axes.window});
    }
  }
  return out;
}

Scheduler::Scheduler(std::optional<Timestamp> last_run, std::chrono::milliseconds period)
    : last_run_(last_run), period_(period) {
  if (period_ <= std::chrono::milliseconds::zero()) throw ConfigError("scheduler period must be positive");
}

bool Scheduler::tick(Timestamp now) {
  std::lock_guard lock(mu_);
  if (phase_ != PipelinePhase::Idle) return false;
  if (last_run_ && !scheduler_tick(now, *last_run_, period_)) return false;
  phase_ = PipelinePhase::CrawlSources;
  return true;
}

void Scheduler::complete(Timestamp now) {
  std::lock_guard lock(mu_);
  phase_ = PipelinePhase::Idle;
  last_run_ = now;
}

PipelinePhase Scheduler::phase() const {
  std::lock_guard lock(mu_);
  return phase_;
}

std::optional<Timestamp> Scheduler::last_run() const {
  std::lock_guard lock(mu_);
  return last_run_;
}

bool scheduler_tick(Timestamp now, Timestamp last_run, std::chrono::milliseconds period) {
  return now - last_run >= period;
}

namespace {

constexpr std::array<std::pair<DocStatus, std::string_view>, 5> kStatusNames{{
    {DocStatus::New, "New"},
    {DocStatus::AbstractOnly, "AbstractOnly"},
    {DocStatus::Parsed, "Parsed"},
    {DocStatus::NeedsManualFix, "NeedsManualFix"},
    {DocStatus::Ingested, "Ingested"},
}};

}  // namespace

std::string_view status_name(DocStatus s) {
  for (const auto& [status, name] : kStatusNames) {
    if (status == s) return name;
  }
  return "?";
}

DocStatus parse_status(std::string_view name) {
  for (const auto& [status, n] : kStatusNames) {
    if (n == name) return status;
  }
  throw InvalidInput("unknown document status '" + std::string(name) + "'");
}

bool is_status_edge(DocStatus from, DocStatus to) {
  using S = DocStatus;
  switch (from) {
    case S::New:
      return to == S::AbstractOnly || to == S::Parsed || to == S::NeedsManualFix;
    case S::Parsed:
      return to == S::Ingested || to == S::NeedsManualFix;
    case S::AbstractOnly:
    case S::NeedsManualFix:
      return to == S::New;
    case S::Ingested:
      return false;
  }
  return false;
}

bool is_status_path(const std::vector<DocStatus>& history) {
  if (history.empty() || history.front() != DocStatus::New) return false;
  for (std::size_t i = 1; i < history.size(); ++i) {
    if (!is_status_edge(history[i - 1], history[i])) return false;
  }
  return true;
}

void DocumentRecord::move_to(DocStatus next) {
  if (!is_status_edge(status, next)) {
    throw InvalidInput("illegal status move " + std::string(status_name(status)) + " -> " +
                       std::string(status_name(next)) + " for " + canonical.to_string());
  }
  status = next;
  history.push_back(next);
}

}  // namespace groundwork::ingest
