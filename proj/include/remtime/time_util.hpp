#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace remtime {

/// Timestamps are integer milliseconds since the Unix epoch; durations are
/// integer milliseconds. Conversion to real seconds happens at API
/// boundaries only.
using Millis = std::int64_t;

constexpr double ms_to_seconds(double ms) { return ms / 1000.0; }
constexpr double ms_to_days(double ms) { return ms / 86'400'000.0; }
constexpr Millis seconds_to_ms(double s) {
  return static_cast<Millis>(s * 1000.0 + (s >= 0 ? 0.5 : -0.5));
}

/// Parses an ISO-8601 timestamp ("2011-01-01T00:00:00.000+00:00",
/// "2011-01-01T00:00:00Z", offset or zone-less, fraction optional) to
/// milliseconds since epoch. Zone-less input is read as UTC.
/// Throws std::invalid_argument on malformed input.
Millis parse_iso8601(std::string_view text);

/// Formats milliseconds since epoch as "YYYY-MM-DDTHH:MM:SS.mmmZ" (UTC).
std::string format_iso8601(Millis ms);

/// Parses a timestamp with a strptime(3) format string, interpreted as UTC.
/// The special format "iso8601" selects parse_iso8601.
Millis parse_timestamp(std::string_view text, const std::string& format);

// --- deterministic seeding helpers ---

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t fnv1a64(std::string_view s);

/// Derives an independent RNG stream seed from a base seed and stream
/// labels. Identical inputs give identical seeds on every platform.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0);

}  // namespace remtime
