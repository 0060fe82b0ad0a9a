#include "odsaudit/timestamp.hpp"

#include "odsaudit/error.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>

namespace odsaudit {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotAZipArchive: return "NotAZipArchive";
    case ErrorCode::MissingContentPart: return "MissingContentPart";
    case ErrorCode::UnreadableEntry: return "UnreadableEntry";
    case ErrorCode::EncryptedContainer: return "EncryptedContainer";
    case ErrorCode::UnknownPart: return "UnknownPart";
    case ErrorCode::MalformedXml: return "MalformedXml";
    case ErrorCode::BadCellAddress: return "BadCellAddress";
    case ErrorCode::SyntaxError: return "SyntaxError";
    case ErrorCode::NotFoldable: return "NotFoldable";
    case ErrorCode::InvalidFilter: return "InvalidFilter";
    case ErrorCode::CheckpointNotFound: return "CheckpointNotFound";
    case ErrorCode::UnreplayableRecord: return "UnreplayableRecord";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

namespace {

bool read_fixed(std::string_view text, std::size_t pos, std::size_t len,
                int& out) {
  if (pos + len > text.size()) return false;
  for (std::size_t i = pos; i < pos + len; ++i) {
    if (!std::isdigit(static_cast<unsigned char>(text[i]))) return false;
  }
  auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + pos + len, out);
  return ec == std::errc{};
}

}  // namespace

std::optional<CalendarDate> parse_date(std::string_view text) {
  int y = 0, m = 0, d = 0;
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
  if (!read_fixed(text, 0, 4, y) || !read_fixed(text, 5, 2, m) ||
      !read_fixed(text, 8, 2, d)) {
    return std::nullopt;
  }
  std::chrono::year_month_day ymd{std::chrono::year{y},
                                  std::chrono::month{static_cast<unsigned>(m)},
                                  std::chrono::day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) return std::nullopt;
  return CalendarDate{ymd};
}

std::optional<Timestamp> parse_timestamp(std::string_view text) {
  if (text.size() < 19) return std::nullopt;
  auto date = parse_date(text.substr(0, 10));
  if (!date) return std::nullopt;
  if (text[10] != 'T' && text[10] != ' ') return std::nullopt;
  int hh = 0, mm = 0, ss = 0;
  if (text[13] != ':' || text[16] != ':' || !read_fixed(text, 11, 2, hh) ||
      !read_fixed(text, 14, 2, mm) || !read_fixed(text, 17, 2, ss)) {
    return std::nullopt;
  }
  if (hh > 23 || mm > 59 || ss > 60) return std::nullopt;
  std::size_t pos = 19;
  if (pos < text.size() && (text[pos] == '.' || text[pos] == ',')) {
    ++pos;
    while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
  }
  if (pos < text.size() && text[pos] == 'Z') ++pos;
  if (pos != text.size()) return std::nullopt;
  using namespace std::chrono;
  return Timestamp{*date} + hours{hh} + minutes{mm} + seconds{ss};
}

CalendarDate date_of(Timestamp ts) {
  return std::chrono::floor<std::chrono::days>(ts);
}

std::string format_date(CalendarDate date) {
  std::chrono::year_month_day ymd{date};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

std::string format_time(Timestamp ts) {
  auto secs = (ts - date_of(ts)).count();
  char buf[64];
  std::snprintf(buf, sizeof buf, "%02lld:%02lld:%02lld",
                static_cast<long long>(secs / 3600),
                static_cast<long long>(secs / 60 % 60),
                static_cast<long long>(secs % 60));
  return buf;
}

std::string format_timestamp(Timestamp ts) {
  return format_date(date_of(ts)) + "T" + format_time(ts);
}

}  // namespace odsaudit
