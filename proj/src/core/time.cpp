#include "groundwork/core/time.hpp"

#include <charconv>
#include <cstdio>

#include "groundwork/core/error.hpp"

namespace groundwork {

namespace {

template <typename Int>
bool parse_int(std::string_view s, Int& out) {
  if (s.empty()) return false;
  for (char c : s) {
    if (c < '0' || c > '9') return false;
  }
  auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc{} && res.ptr == s.data() + s.size();
}

}  // namespace

std::string format_iso8601(Timestamp t) {
  using namespace std::chrono;
  auto day = floor<days>(t);
  year_month_day ymd{day};
  hh_mm_ss<milliseconds> hms{t - day};
  char buf[40];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02d.%03dZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                static_cast<int>(hms.seconds().count()), static_cast<int>(hms.subseconds().count()));
  return buf;
}

Timestamp parse_iso8601(std::string_view s) {
  using namespace std::chrono;
  // YYYY-MM-DDTHH:MM:SS[.mmm]Z
  auto fail = [&]() -> Timestamp { throw ValidationError("malformed ISO-8601 timestamp: " + std::string(s)); };
  if (s.size() < 20 || s[4] != '-' || s[7] != '-' || s[10] != 'T' || s[13] != ':' || s[16] != ':' ||
      s.back() != 'Z') {
    return fail();
  }
  int y = 0;
  unsigned mo = 0, d = 0;
  int h = 0, mi = 0, se = 0, ms = 0;
  if (!parse_int(s.substr(0, 4), y) || !parse_int(s.substr(5, 2), mo) || !parse_int(s.substr(8, 2), d) ||
      !parse_int(s.substr(11, 2), h) || !parse_int(s.substr(14, 2), mi) || !parse_int(s.substr(17, 2), se)) {
    return fail();
  }
  std::string_view rest = s.substr(19, s.size() - 20);
  if (!rest.empty()) {
    if (rest.front() != '.' || rest.size() != 4 || !parse_int(rest.substr(1), ms)) return fail();
  }
  year_month_day ymd{year{y}, month{mo}, day{d}};
  if (!ymd.ok() || h > 23 || mi > 59 || se > 59) return fail();
  return sys_days{ymd} + hours{h} + minutes{mi} + seconds{se} + milliseconds{ms};
}

Timestamp SystemClock::now() const {
  return std::chrono::floor<std::chrono::milliseconds>(std::chrono::system_clock::now());
}

ManualClock::ManualClock(Timestamp start, std::chrono::milliseconds step)
    : ms_(start.time_since_epoch().count()), step_(step) {}

Timestamp ManualClock::now() const {
  auto v = ms_.fetch_add(step_.count());
  return Timestamp{std::chrono::milliseconds{v}};
}

void ManualClock::set(Timestamp t) { ms_.store(t.time_since_epoch().count()); }

void ManualClock::advance(std::chrono::milliseconds d) { ms_.fetch_add(d.count()); }

const Clock& system_clock() {
  static const SystemClock clock;
  return clock;
}

Date Date::parse(std::string_view s) {
  namespace chr = std::chrono;
  Date out;
  auto fail = [&]() -> Date { throw ValidationError("malformed date: '" + std::string(s) + "'"); };
  if (s.size() == 4) {
    if (!parse_int(s, out.year)) return fail();
    return out;
  }
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return fail();
  if (!parse_int(s.substr(0, 4), out.year) || !parse_int(s.substr(5, 2), out.month) ||
      !parse_int(s.substr(8, 2), out.day)) {
    return fail();
  }
  chr::year_month_day ymd{chr::year{out.year}, chr::month{out.month}, chr::day{out.day}};
  if (!ymd.ok()) return fail();
  return out;
}

std::string Date::to_string() const {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", year, month, day);
  return buf;
}

}  // namespace groundwork
