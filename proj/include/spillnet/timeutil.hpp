#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace spillnet {

/// UTC seconds since the Unix epoch.
using UtcSeconds = std::int64_t;

/// Accepts "YYYY-MM-DD", "YYYY-MM-DDThh:mm[:ss[.fff]]" with optional "Z" or
/// "+hh:mm"/"-hh:mm" offset. Throws ParseError.
UtcSeconds parse_iso8601(std::string_view text);

/// Formats as "YYYY-MM-DDThh:mm:ssZ".
std::string format_iso8601(UtcSeconds t);

struct CalendarParts {
  int year;
  int day_of_year;  // 0-based
  double hour_of_day;
};

CalendarParts calendar_parts(UtcSeconds t);

}  // namespace spillnet
