#include "remtime/time_util.hpp"

#include <cstdio>
#include <ctime>
#include <stdexcept>

namespace remtime {

namespace {

[[noreturn]] void bad_timestamp(std::string_view text, const char* why) {
  throw std::invalid_argument("invalid timestamp '" + std::string(text) + "': " + why);
}

}  // namespace

Millis parse_iso8601(std::string_view text) {
  int year = 0, month = 0, day = 0, hour = 0, minute = 0, second = 0;
  int consumed = 0;
  std::string buf(text);
  if (std::sscanf(buf.c_str(), "%4d-%2d-%2d%*1[T ]%2d:%2d:%2d%n", &year, &month, &day,
                  &hour, &minute, &second, &consumed) != 6 ||
      consumed < 19) {
    bad_timestamp(text, "expected YYYY-MM-DDTHH:MM:SS");
  }
  if (month < 1 || month > 12 || day < 1 || day > 31 || hour > 23 || minute > 59 ||
      second > 60) {
    bad_timestamp(text, "field out of range");
  }

  const char* p = buf.c_str() + consumed;
  Millis frac_ms = 0;
  if (*p == '.' || *p == ',') {
    ++p;
    int digits = 0;
    long value = 0;
    while (*p >= '0' && *p <= '9') {
      if (digits < 3) value = value * 10 + (*p - '0');
      ++digits;
      ++p;
    }
    if (digits == 0) bad_timestamp(text, "empty fractional seconds");
    while (digits < 3) {
      value *= 10;
      ++digits;
    }
    frac_ms = value;
  }

  long offset_s = 0;
  if (*p == 'Z' || *p == 'z') {
    ++p;
  } else if (*p == '+' || *p == '-') {
    int sign = (*p == '-') ? -1 : 1;
    ++p;
    int oh = 0, om = 0, n = 0;
    if (std::sscanf(p, "%2d:%2d%n", &oh, &om, &n) == 2 && n >= 4) {
      p += n;
    } else if (std::sscanf(p, "%2d%2d%n", &oh, &om, &n) == 2 && n == 4) {
      p += n;
    } else if (std::sscanf(p, "%2d%n", &oh, &n) == 1 && n == 2) {
      p += n;
    } else {
      bad_timestamp(text, "malformed zone offset");
    }
    offset_s = sign * (oh * 3600L + om * 60L);
  }
  if (*p != '\0') bad_timestamp(text, "trailing characters");

  std::tm tm{};
  tm.tm_year = year - 1900;
  tm.tm_mon = month - 1;
  tm.tm_mday = day;
  tm.tm_hour = hour;
  tm.tm_min = minute;
  tm.tm_sec = second;
  const time_t epoch_s = timegm(&tm);
  return static_cast<Millis>(epoch_s - offset_s) * 1000 + frac_ms;
}

std::string format_iso8601(Millis ms) {
  Millis s = ms / 1000;
  Millis rem = ms % 1000;
  if (rem < 0) {
    rem += 1000;
    s -= 1;
  }
  std::tm tm{};
  time_t tt = static_cast<time_t>(s);
  gmtime_r(&tt, &tm);
  char out[48];
  std::snprintf(out, sizeof(out), "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm.tm_year + 1900,
                tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec,
                static_cast<int>(rem));
  return out;
}

Millis parse_timestamp(std::string_view text, const std::string& format) {
  if (format.empty() || format == "iso8601") return parse_iso8601(text);
  std::tm tm{};
  std::string buf(text);
  const char* end = strptime(buf.c_str(), format.c_str(), &tm);
  if (end == nullptr) {
    bad_timestamp(text, ("does not match format '" + format + "'").c_str());
  }
  return static_cast<Millis>(timegm(&tm)) * 1000;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b) {
  std::uint64_t s = splitmix64(base ^ splitmix64(a));
  return splitmix64(s ^ splitmix64(b + 0x51'7c'c1'b7'27'22'0a'95ULL));
}

}  // namespace remtime
