#pragma once

#include "odsaudit/formula.hpp"
#include "odsaudit/timestamp.hpp"
#include "odsaudit/workbook.hpp"

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace odsaudit {

// "*" matches any run (possibly empty), "?" exactly one character; all else
// literal. With ignore_case both sides are case-folded (ASCII) first.
bool match_wildcard(std::string_view pattern, std::string_view subject, bool ignore_case);

enum class FilterAction { Include, Exclude, Disabled };

// Content-kind selector for transition filters.
enum class ContentSelector { Empty, Static, Formula, Any };

std::string_view to_string(ContentSelector s);

struct AuthorPattern {
  std::string pattern;
  bool ignore_case = false;
};

struct DateRange {
  std::optional<CalendarDate> from;
  std::optional<CalendarDate> to;
};

struct CellRangeFilter {
  std::optional<std::string> sheet_pattern;  // wildcard; absent = any sheet
  int first_column = 0;
  int first_row = 0;
  int last_column = 0;
  int last_row = 0;
};

struct ContentTransition {
  ContentSelector before = ContentSelector::Any;
  ContentSelector after = ContentSelector::Any;
};

struct KindIs {
  ChangeKind kind = ChangeKind::CellContent;
};

using FilterPredicate =
    std::variant<AuthorPattern, DateRange, CellRangeFilter, ContentTransition, KindIs>;

struct FilterSpec {
  FilterAction action = FilterAction::Include;
  FilterPredicate predicate;
};

// Parses the text form: a leading '+' (include), '-' (exclude) or '~'
// (disabled), then one of
//   author=<pattern>[,ci]   date=<from>..<to>   range=[Sheet!]A1:C9
//   transition=<before>-><after>  (empty|static|formula|any)
//   kind=content|row-insert|row-delete|col-insert|col-delete
// Throws Error(InvalidFilter).
FilterSpec parse_filter(std::string_view text);

// Inverse of parse_filter.
std::string format_filter(const FilterSpec& spec);

// Throws Error(InvalidFilter) for specs that cannot be evaluated, such as a
// reversed date range.
void validate_filter(const FilterSpec& spec);

// Whether the predicate holds for the record; the action is ignored.
bool eval_filter(const FilterSpec& spec, const ChangeRecord& record);

// Records for which every enabled include filter holds and no enabled
// exclude filter holds, in chronological order.
std::vector<ChangeRecord> apply_filters(std::span<const FilterSpec> specs,
                                        std::span<const ChangeRecord> records);
std::vector<ChangeRecord> apply_filters(std::span<const FilterSpec> specs,
                                        const Workbook& workbook);

struct Summary {
  std::size_t total = 0;
  std::map<ChangeKind, std::size_t> by_kind;
  std::map<std::string, std::size_t> by_author;
  std::map<CalendarDate, std::size_t> by_date;
  std::optional<CalendarDate> first_date;
  std::optional<CalendarDate> last_date;
};

Summary summarize(std::span<const ChangeRecord> records);

}  // namespace odsaudit
