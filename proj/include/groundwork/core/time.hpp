#pragma once

#include <atomic>
#include <chrono>
#include <compare>
#include <string>
#include <string_view>

namespace groundwork {

// Millisecond wall-clock instant. Everything persisted uses this resolution so
// that ISO-8601 text round-trips exactly.
using Timestamp = std::chrono::sys_time<std::chrono::milliseconds>;

std::string format_iso8601(Timestamp t);  // 2026-10-16T08:30:00.250Z
Timestamp parse_iso8601(std::string_view s);  // throws ValidationError

class Clock {
 public:
  virtual ~Clock() = default;
  virtual Timestamp now() const = 0;
};

class SystemClock final : public Clock {
 public:
  Timestamp now() const override;
};

// Deterministic clock for tests and replayable runs: every call to now()
// advances by `step` after returning the current value.
class ManualClock final : public Clock {
 public:
  explicit ManualClock(Timestamp start, std::chrono::milliseconds step = std::chrono::milliseconds{0});
  Timestamp now() const override;
  void set(Timestamp t);
  void advance(std::chrono::milliseconds d);

 private:
  mutable std::atomic<std::int64_t> ms_;
  std::chrono::milliseconds step_;
};

const Clock& system_clock();

// Calendar date. Year-only sources are represented as January 1.
struct Date {
  int year = 1970;
  unsigned month = 1;
  unsigned day = 1;

  auto operator<=>(const Date&) const = default;

  // Accepts "YYYY-MM-DD" or "YYYY". Throws ValidationError otherwise.
  static Date parse(std::string_view s);
  std::string to_string() const;
};

}  // namespace groundwork
