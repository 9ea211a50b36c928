#include "lexzip/timestamp.hpp"

#include <charconv>
#include <cstdio>

#include "lexzip/error.hpp"

namespace lexzip {
namespace {

int read_int(std::string_view text, std::size_t pos, std::size_t len) {
  if (pos + len > text.size()) throw Error(ErrorCode::Parse, "truncated timestamp: " + std::string(text));
  int value = 0;
  auto first = text.data() + pos;
  auto [ptr, ec] = std::from_chars(first, first + len, value);
  if (ec != std::errc() || ptr != first + len) {
    throw Error(ErrorCode::Parse, "bad timestamp field in: " + std::string(text));
  }
  return value;
}

void expect(std::string_view text, std::size_t pos, char c) {
  if (pos >= text.size() || text[pos] != c) {
    throw Error(ErrorCode::Parse, "malformed timestamp: " + std::string(text));
  }
}

}  // namespace

std::string format_timestamp(Timestamp t) {
  using namespace std::chrono;
  const auto day = floor<days>(t);
  const year_month_day ymd{day};
  const hh_mm_ss hms{t - day};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                static_cast<int>(hms.seconds().count()));
  return buf;
}

Timestamp parse_timestamp(std::string_view text) {
  using namespace std::chrono;
  const int y = read_int(text, 0, 4);
  expect(text, 4, '-');
  const int mo = read_int(text, 5, 2);
  expect(text, 7, '-');
  const int d = read_int(text, 8, 2);
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) throw Error(ErrorCode::Parse, "invalid date: " + std::string(text));
  Timestamp result{sys_days{ymd}};
  if (text.size() == 10) return result;

  if (text[10] != 'T' && text[10] != ' ') throw Error(ErrorCode::Parse, "malformed timestamp: " + std::string(text));
  const int hh = read_int(text, 11, 2);
  expect(text, 13, ':');
  const int mm = read_int(text, 14, 2);
  expect(text, 16, ':');
  const int ss = read_int(text, 17, 2);
  if (hh > 23 || mm > 59 || ss > 60) throw Error(ErrorCode::Parse, "invalid time: " + std::string(text));
  result += hours{hh} + minutes{mm} + seconds{ss};

  std::size_t pos = 19;
  if (pos < text.size() && text[pos] == '.') {
    ++pos;
    while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') ++pos;
  }
  const std::string_view zone = text.substr(pos);
  if (zone.empty() || zone == "Z") return result;
  if (zone.size() == 6 && (zone[0] == '+' || zone[0] == '-') && zone[3] == ':') {
    const int oh = read_int(zone, 1, 2);
    const int om = read_int(zone, 4, 2);
    const auto offset = hours{oh} + minutes{om};
    return zone[0] == '+' ? result - offset : result + offset;
  }
  throw Error(ErrorCode::Parse, "unsupported timezone in: " + std::string(text));
}

}  // namespace lexzip
