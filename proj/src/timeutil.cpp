#include "spillnet/timeutil.hpp"

#include <chrono>
#include <cstdio>
#include <string>

#include "spillnet/error.hpp"

namespace spillnet {
namespace {

int read_digits(std::string_view text, std::size_t& pos, int count) {
  int v = 0;
  for (int i = 0; i < count; ++i, ++pos) {
    if (pos >= text.size() || text[pos] < '0' || text[pos] > '9') {
      throw Error(ErrorCode::ParseError, "bad ISO-8601 timestamp '" + std::string(text) + "'");
    }
    v = v * 10 + (text[pos] - '0');
  }
  return v;
}

void expect(std::string_view text, std::size_t& pos, char c) {
  if (pos >= text.size() || text[pos] != c) {
    throw Error(ErrorCode::ParseError, "bad ISO-8601 timestamp '" + std::string(text) + "'");
  }
  ++pos;
}

}  // namespace

UtcSeconds parse_iso8601(std::string_view text) {
  using namespace std::chrono;
  std::size_t pos = 0;
  const int y = read_digits(text, pos, 4);
  expect(text, pos, '-');
  const int mo = read_digits(text, pos, 2);
  expect(text, pos, '-');
  const int d = read_digits(text, pos, 2);
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) throw Error(ErrorCode::ParseError, "invalid calendar date '" + std::string(text) + "'");
  int hh = 0, mm = 0, ss = 0;
  int offset_s = 0;
  if (pos < text.size() && (text[pos] == 'T' || text[pos] == ' ')) {
    ++pos;
    hh = read_digits(text, pos, 2);
    expect(text, pos, ':');
    mm = read_digits(text, pos, 2);
    if (pos < text.size() && text[pos] == ':') {
      ++pos;
      ss = read_digits(text, pos, 2);
      if (pos < text.size() && text[pos] == '.') {
        ++pos;
        while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') ++pos;
      }
    }
    if (hh > 23 || mm > 59 || ss > 60) {
      throw Error(ErrorCode::ParseError, "time of day out of range in '" + std::string(text) + "'");
    }
    if (pos < text.size() && text[pos] == 'Z') {
      ++pos;
    } else if (pos < text.size() && (text[pos] == '+' || text[pos] == '-')) {
      const int sign = text[pos] == '-' ? -1 : 1;
      ++pos;
      const int oh = read_digits(text, pos, 2);
      if (pos < text.size() && text[pos] == ':') ++pos;
      const int om = read_digits(text, pos, 2);
      offset_s = sign * (oh * 3600 + om * 60);
    }
  }
  if (pos != text.size()) {
    throw Error(ErrorCode::ParseError, "trailing characters in timestamp '" + std::string(text) + "'");
  }
  const auto days = sys_days{ymd}.time_since_epoch().count();
  return static_cast<UtcSeconds>(days) * 86400 + hh * 3600 + mm * 60 + ss - offset_s;
}

std::string format_iso8601(UtcSeconds t) {
  using namespace std::chrono;
  const auto day_count = t >= 0 ? t / 86400 : -((-t + 86399) / 86400);
  const UtcSeconds rem = t - day_count * 86400;
  const year_month_day ymd{sys_days{days{day_count}}};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(rem / 3600), static_cast<int>((rem % 3600) / 60),
                static_cast<int>(rem % 60));
  return buf;
}

CalendarParts calendar_parts(UtcSeconds t) {
  using namespace std::chrono;
  const auto day_count = t >= 0 ? t / 86400 : -((-t + 86399) / 86400);
  const UtcSeconds rem = t - day_count * 86400;
  const sys_days today{days{day_count}};
  const year_month_day ymd{today};
  const sys_days jan1{ymd.year() / January / 1};
  return CalendarParts{static_cast<int>(ymd.year()), static_cast<int>((today - jan1).count()),
                       static_cast<double>(rem) / 3600.0};
}

}  // namespace spillnet
