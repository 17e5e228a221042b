#pragma once

#include <cmath>
#include <cstdint>

namespace twin {

// The simulation timeline is integer nanoseconds. Protocol epochs are sums
// of config constants and byte transmission times, so schedule arithmetic
// stays exact and collision checks can be bit-exact.
using TimePoint = std::int64_t;
using TimeSpan = std::int64_t;

inline constexpr TimeSpan kMicro = 1'000;
inline constexpr TimeSpan kMilli = 1'000'000;
inline constexpr TimeSpan kSecond = 1'000'000'000;

inline TimeSpan from_us(double us) { return std::llround(us * 1e3); }
inline TimeSpan from_ms(double ms) { return std::llround(ms * 1e6); }
inline TimeSpan from_s(double s) { return std::llround(s * 1e9); }
inline double to_us(TimeSpan t) { return static_cast<double>(t) / 1e3; }
inline double to_ms(TimeSpan t) { return static_cast<double>(t) / 1e6; }
inline double to_s(TimeSpan t) { return static_cast<double>(t) / 1e9; }

// Channel rate with exact byte <-> wire-time conversions. bytes_in() floors,
// and the pair maintains bytes_time(bytes_in(t)) <= t so burst packing never
// overruns its time budget. At the default 1 Gb/s one byte is exactly 8 ns.
struct ChannelRate {
  std::int64_t bits_per_s = 1'000'000'000;

  TimeSpan bytes_time(std::int64_t bytes) const {
    __int128 num = static_cast<__int128>(bytes) * 8 * 1'000'000'000;
    return static_cast<TimeSpan>((num + bits_per_s / 2) / bits_per_s);
  }

  std::int64_t bytes_in(TimeSpan span) const {
    if (span <= 0) return 0;
    __int128 num = static_cast<__int128>(span) * bits_per_s;
    auto bytes = static_cast<std::int64_t>(num / (8 * static_cast<__int128>(1'000'000'000)));
    while (bytes > 0 && bytes_time(bytes) > span) --bytes;
    return bytes;
  }
};

}  // namespace twin
