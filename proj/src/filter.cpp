#include "odsaudit/filter.hpp"

#include "odsaudit/error.hpp"

#include <algorithm>
#include <cctype>

namespace odsaudit {

namespace {

// Decodes UTF-8 into code points; malformed bytes pass through one by one.
std::u32string decode(std::string_view s, bool fold) {
  std::u32string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size();) {
    auto b = static_cast<unsigned char>(s[i]);
    char32_t cp = b;
    std::size_t len = 1;
    if (b >= 0xC0 && b < 0xE0) len = 2, cp = b & 0x1F;
    else if (b >= 0xE0 && b < 0xF0) len = 3, cp = b & 0x0F;
    else if (b >= 0xF0 && b < 0xF8) len = 4, cp = b & 0x07;
    if (len > 1) {
      bool ok = i + len <= s.size();
      for (std::size_t k = 1; ok && k < len; ++k) {
        auto cont = static_cast<unsigned char>(s[i + k]);
        if ((cont & 0xC0) != 0x80) ok = false;
        else cp = (cp << 6) | (cont & 0x3F);
      }
      if (!ok) len = 1, cp = b;
    }
    if (fold && cp < 128) cp = static_cast<char32_t>(std::tolower(static_cast<int>(cp)));
    out.push_back(cp);
    i += len;
  }
  return out;
}

[[noreturn]] void invalid(std::string_view text, const std::string& why) {
  throw Error(ErrorCode::InvalidFilter, "invalid filter '" + std::string(text) + "': " + why);
}

std::optional<ContentSelector> parse_selector(std::string_view s) {
  if (s == "empty") return ContentSelector::Empty;
  if (s == "static") return ContentSelector::Static;
  if (s == "formula") return ContentSelector::Formula;
  if (s == "any") return ContentSelector::Any;
  return std::nullopt;
}

struct KindName {
  std::string_view text;
  ChangeKind kind;
};

constexpr KindName kKindNames[] = {
    {"content", ChangeKind::CellContent},
    {"row-insert", ChangeKind::RowInsertion},
    {"row-delete", ChangeKind::RowDeletion},
    {"col-insert", ChangeKind::ColumnInsertion},
    {"col-delete", ChangeKind::ColumnDeletion},
};

bool selector_matches(ContentSelector s, const CellContent& c) {
  switch (s) {
    case ContentSelector::Any: return true;
    case ContentSelector::Empty: return c.kind == ContentKind::Empty;
    case ContentSelector::Static: return c.kind == ContentKind::Static;
    case ContentSelector::Formula: return c.kind == ContentKind::Formula;
  }
  return false;
}

std::string trim_quotes(std::string_view s) {
  if (s.size() >= 2 && s.front() == '\'' && s.back() == '\'') s = s.substr(1, s.size() - 2);
  return std::string(s);
}

}  // namespace

bool match_wildcard(std::string_view pattern, std::string_view subject, bool ignore_case) {
  std::u32string p = decode(pattern, ignore_case);
  std::u32string s = decode(subject, ignore_case);
  // Greedy scan, backtracking only to the most recent '*'.
  std::size_t pi = 0, si = 0;
  std::size_t star = std::u32string::npos, resume = 0;
  while (si < s.size()) {
    if (pi < p.size() && (p[pi] == U'?' || (p[pi] != U'*' && p[pi] == s[si]))) {
      ++pi;
      ++si;
    } else if (pi < p.size() && p[pi] == U'*') {
      star = pi++;
      resume = si;
    } else if (star != std::u32string::npos) {
      pi = star + 1;
      si = ++resume;
    } else {
      return false;
    }
  }
  while (pi < p.size() && p[pi] == U'*') ++pi;
  return pi == p.size();
}

std::string_view to_string(ContentSelector s) {
  switch (s) {
    case ContentSelector::Empty: return "empty";
    case ContentSelector::Static: return "static";
    case ContentSelector::Formula: return "formula";
    case ContentSelector::Any: return "any";
  }
  return "any";
}

FilterSpec parse_filter(std::string_view text) {
  if (text.empty()) invalid(text, "empty");
  FilterSpec spec;
  switch (text.front()) {
    case '+':
    case ' ':  // '+' after form-decoding of a query string
      spec.action = FilterAction::Include;
      break;
    case '-': spec.action = FilterAction::Exclude; break;
    case '~': spec.action = FilterAction::Disabled; break;
    default: invalid(text, "must start with '+', '-' or '~'");
  }
  std::string_view body = text.substr(1);
  auto eq = body.find('=');
  if (eq == std::string_view::npos) invalid(text, "expected key=value");
  std::string_view key = body.substr(0, eq);
  std::string_view value = body.substr(eq + 1);

  if (key == "author") {
    AuthorPattern a;
    if (value.ends_with(",ci")) {
      a.ignore_case = true;
      value.remove_suffix(3);
    }
    if (value.empty()) invalid(text, "empty author pattern");
    a.pattern = std::string(value);
    spec.predicate = a;
  } else if (key == "date") {
    DateRange d;
    auto dots = value.find("..");
    std::string_view from = dots == std::string_view::npos ? value : value.substr(0, dots);
    std::string_view to = dots == std::string_view::npos ? value : value.substr(dots + 2);
    if (!from.empty()) {
      d.from = parse_date(from);
      if (!d.from) invalid(text, "bad date '" + std::string(from) + "'");
    }
    if (!to.empty()) {
      d.to = parse_date(to);
      if (!d.to) invalid(text, "bad date '" + std::string(to) + "'");
    }
    if (!d.from && !d.to) invalid(text, "date range needs at least one bound");
    spec.predicate = d;
  } else if (key == "range") {
    CellRangeFilter r;
    auto bang = value.rfind('!');
    std::string_view cells = value;
    if (bang != std::string_view::npos) {
      r.sheet_pattern = trim_quotes(value.substr(0, bang));
      cells = value.substr(bang + 1);
    }
    auto colon = cells.find(':');
    std::string_view first = cells.substr(0, colon);
    std::string_view last = colon == std::string_view::npos ? first : cells.substr(colon + 1);
    auto strip = [](std::string_view s) {
      std::string out;
      for (char c : s) if (c != '$') out += c;
      return out;
    };
    auto a = parse_a1(strip(first));
    auto b = parse_a1(strip(last));
    if (!a || !b) invalid(text, "bad cell range");
    r.first_column = std::min(a->column, b->column);
    r.last_column = std::max(a->column, b->column);
    r.first_row = std::min(a->row, b->row);
    r.last_row = std::max(a->row, b->row);
    spec.predicate = r;
  } else if (key == "transition") {
    auto arrow = value.find("->");
    if (arrow == std::string_view::npos) invalid(text, "expected <before>-><after>");
    auto before = parse_selector(value.substr(0, arrow));
    auto after = parse_selector(value.substr(arrow + 2));
    if (!before || !after) invalid(text, "content kinds are empty|static|formula|any");
    spec.predicate = ContentTransition{*before, *after};
  } else if (key == "kind") {
    auto it = std::find_if(std::begin(kKindNames), std::end(kKindNames),
                           [&](const KindName& k) { return k.text == value; });
    if (it != std::end(kKindNames)) {
      spec.predicate = KindIs{it->kind};
    } else if (auto k = parse_change_kind(value)) {
      spec.predicate = KindIs{*k};
    } else {
      invalid(text, "unknown change kind");
    }
  } else {
    invalid(text, "unknown filter key '" + std::string(key) + "'");
  }
  validate_filter(spec);
  return spec;
}

std::string format_filter(const FilterSpec& spec) {
  std::string out;
  switch (spec.action) {
    case FilterAction::Include: out = "+"; break;
    case FilterAction::Exclude: out = "-"; break;
    case FilterAction::Disabled: out = "~"; break;
  }
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, AuthorPattern>) {
          out += "author=" + p.pattern + (p.ignore_case ? ",ci" : "");
        } else if constexpr (std::is_same_v<T, DateRange>) {
          out += "date=";
          if (p.from) out += format_date(*p.from);
          out += "..";
          if (p.to) out += format_date(*p.to);
        } else if constexpr (std::is_same_v<T, CellRangeFilter>) {
          out += "range=";
          if (p.sheet_pattern) out += *p.sheet_pattern + "!";
          out += column_letters(p.first_column) + std::to_string(p.first_row + 1) + ":" +
                 column_letters(p.last_column) + std::to_string(p.last_row + 1);
        } else if constexpr (std::is_same_v<T, ContentTransition>) {
          out += "transition=" + std::string(to_string(p.before)) + "->" +
                 std::string(to_string(p.after));
        } else {
          for (const auto& k : kKindNames) {
            if (k.kind == p.kind) out += "kind=" + std::string(k.text);
          }
        }
      },
      spec.predicate);
  return out;
}

void validate_filter(const FilterSpec& spec) {
  if (const auto* d = std::get_if<DateRange>(&spec.predicate)) {
    if (d->from && d->to && *d->from > *d->to) {
      throw Error(ErrorCode::InvalidFilter, "invalid filter: date range from " +
                                                format_date(*d->from) + " is after " +
                                                format_date(*d->to));
    }
  }
  if (const auto* a = std::get_if<AuthorPattern>(&spec.predicate)) {
    if (a->pattern.empty()) throw Error(ErrorCode::InvalidFilter, "invalid filter: empty author pattern");
  }
}

bool eval_filter(const FilterSpec& spec, const ChangeRecord& record) {
  return std::visit(
      [&](const auto& p) -> bool {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, AuthorPattern>) {
          return match_wildcard(p.pattern, record.author, p.ignore_case);
        } else if constexpr (std::is_same_v<T, DateRange>) {
          CalendarDate d = date_of(record.timestamp);
          return (!p.from || *p.from <= d) && (!p.to || d <= *p.to);
        } else if constexpr (std::is_same_v<T, CellRangeFilter>) {
          if (record.kind != ChangeKind::CellContent) return false;
          const CellAddress& a = *record.address;
          if (p.sheet_pattern && !match_wildcard(*p.sheet_pattern, a.sheet, false)) return false;
          return a.column >= p.first_column && a.column <= p.last_column &&
                 a.row >= p.first_row && a.row <= p.last_row;
        } else if constexpr (std::is_same_v<T, ContentTransition>) {
          if (record.kind != ChangeKind::CellContent) return false;
          return selector_matches(p.before, record.before) &&
                 selector_matches(p.after, record.after);
        } else {
          return record.kind == p.kind;
        }
      },
      spec.predicate);
}

std::vector<ChangeRecord> apply_filters(std::span<const FilterSpec> specs,
                                        std::span<const ChangeRecord> records) {
  for (const auto& s : specs) validate_filter(s);
  std::vector<ChangeRecord> out;
  for (const auto& r : records) {
    bool keep = std::all_of(specs.begin(), specs.end(), [&](const FilterSpec& s) {
      switch (s.action) {
        case FilterAction::Include: return eval_filter(s, r);
        case FilterAction::Exclude: return !eval_filter(s, r);
        case FilterAction::Disabled: return true;
      }
      return true;
    });
    if (keep) out.push_back(r);
  }
  return out;
}

std::vector<ChangeRecord> apply_filters(std::span<const FilterSpec> specs,
                                        const Workbook& workbook) {
  return apply_filters(specs, std::span<const ChangeRecord>(workbook.changes));
}

Summary summarize(std::span<const ChangeRecord> records) {
  Summary s;
  for (const auto& r : records) {
    ++s.total;
    ++s.by_kind[r.kind];
    ++s.by_author[r.author];
    CalendarDate d = date_of(r.timestamp);
    ++s.by_date[d];
    if (!s.first_date || d < *s.first_date) s.first_date = d;
    if (!s.last_date || d > *s.last_date) s.last_date = d;
  }
  return s;
}

}  // namespace odsaudit
