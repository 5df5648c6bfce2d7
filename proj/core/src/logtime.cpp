#include "range/logtime.hpp"

#include <cstdio>
#include <cstring>
#include <ctime>

namespace range {

namespace {

const char* const kMonths[] = {"Jan", "Feb", "Mar", "Apr", "May", "Jun",
                               "Jul", "Aug", "Sep", "Oct", "Nov", "Dec"};
const char* const kDays[] = {"Sun", "Mon", "Tue", "Wed", "Thu", "Fri", "Sat"};

std::tm utc_tm(Micros ts) {
  std::time_t secs = ts / kMicrosPerSecond;
  if (ts < 0 && ts % kMicrosPerSecond != 0) --secs;
  std::tm tm{};
  gmtime_r(&secs, &tm);
  return tm;
}

int month_index(const char* name) {
  for (int i = 0; i < 12; ++i)
    if (std::strncmp(name, kMonths[i], 3) == 0) return i;
  return -1;
}

Micros from_fields(int year, int mon, int day, int h, int m, int s) {
  std::tm tm{};
  tm.tm_year = year - 1900;
  tm.tm_mon = mon;
  tm.tm_mday = day;
  tm.tm_hour = h;
  tm.tm_min = m;
  tm.tm_sec = s;
  return Micros(timegm(&tm)) * kMicrosPerSecond;
}

}  // namespace

std::string format_access_time(Micros ts) {
  const std::tm tm = utc_tm(ts);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%02d/%s/%04d:%02d:%02d:%02d +0000",
                tm.tm_mday, kMonths[tm.tm_mon], tm.tm_year + 1900, tm.tm_hour,
                tm.tm_min, tm.tm_sec);
  return buf;
}

std::optional<Micros> parse_access_time(const std::string& text) {
  int day, year, h, m, s;
  char mon[4] = {};
  if (std::sscanf(text.c_str(), "%2d/%3s/%4d:%2d:%2d:%2d +0000", &day, mon,
                  &year, &h, &m, &s) != 6)
    return std::nullopt;
  const int mi = month_index(mon);
  if (mi < 0) return std::nullopt;
  return from_fields(year, mi, day, h, m, s);
}

std::string format_error_time(Micros ts) {
  const std::tm tm = utc_tm(ts);
  const long usec = long(((ts % kMicrosPerSecond) + kMicrosPerSecond) %
                         kMicrosPerSecond);
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%s %s %02d %02d:%02d:%02d.%06ld %04d",
                kDays[tm.tm_wday], kMonths[tm.tm_mon], tm.tm_mday, tm.tm_hour,
                tm.tm_min, tm.tm_sec, usec, tm.tm_year + 1900);
  return buf;
}

std::optional<Micros> parse_error_time(const std::string& text) {
  char day_name[4] = {}, mon[4] = {};
  int day, h, m, s, year;
  long usec;
  if (std::sscanf(text.c_str(), "%3s %3s %2d %2d:%2d:%2d.%6ld %4d", day_name,
                  mon, &day, &h, &m, &s, &usec, &year) != 8)
    return std::nullopt;
  const int mi = month_index(mon);
  if (mi < 0) return std::nullopt;
  return from_fields(year, mi, day, h, m, s) + usec;
}

std::string format_ban_time(Micros ts) {
  const std::tm tm = utc_tm(ts);
  const long msec = long((((ts % kMicrosPerSecond) + kMicrosPerSecond) %
                          kMicrosPerSecond) /
                         1000);
  char buf[80];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d %02d:%02d:%02d,%03ld",
                tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday, tm.tm_hour,
                tm.tm_min, tm.tm_sec, msec);
  return buf;
}

}  // namespace range
