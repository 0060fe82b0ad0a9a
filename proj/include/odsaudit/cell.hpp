#pragma once

#include <compare>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace odsaudit {

constexpr int kMaxColumns = 16384;    // A..XFD
constexpr int kMaxRows = 1048576;

struct CellAddress {
  std::string sheet;
  int column = 0;
  int row = 0;
  bool col_absolute = false;
  bool row_absolute = false;

  // Identity of the addressed cell; absolute markers do not take part.
  bool same_cell(const CellAddress& o) const {
    return sheet == o.sheet && column == o.column && row == o.row;
  }
  bool operator==(const CellAddress&) const = default;
};

// 0 -> "A", 25 -> "Z", 26 -> "AA".
std::string column_letters(int column);
// Inverse of column_letters (case-insensitive); nullopt for anything else or
// for columns beyond XFD.
std::optional<int> parse_column_letters(std::string_view letters);

// "K22", "$A$1"; no sheet.
std::string to_a1(const CellAddress& address);
// Parses "K22" / "$A$1" (no sheet part) into a CellAddress on `sheet`.
std::optional<CellAddress> parse_a1(std::string_view text, std::string sheet = {});

enum class ValueType { Float, Currency, Percentage, String, Date, Boolean };

std::string_view to_string(ValueType type);
std::optional<ValueType> parse_value_type(std::string_view text);

struct StaticValue {
  ValueType type = ValueType::String;
  std::string lexical;
  std::optional<double> numeric;  // present iff float, currency or percentage
  std::optional<std::string> currency_code;

  static StaticValue number(double v, ValueType type = ValueType::Float);
  static StaticValue string(std::string s);
  static StaticValue boolean(bool b);

  bool operator==(const StaticValue&) const = default;
};

bool is_numeric(ValueType type);

// Shortest round-trip decimal text for a number ("6", "0.1", "1e+20").
std::string format_number(double v);

// A spreadsheet error value such as "#DIV/0!" or "Err:502".
struct ErrorToken {
  std::string text;
  bool operator==(const ErrorToken&) const = default;
};

bool looks_like_error_token(std::string_view text);

using CachedResult = std::variant<StaticValue, ErrorToken>;

enum class ContentKind { Empty, Static, Formula };

struct CellContent {
  ContentKind kind = ContentKind::Empty;
  std::optional<StaticValue> static_value;
  std::optional<std::string> formula_source;  // begins with "="
  std::optional<CachedResult> cached_result;

  static CellContent empty() { return {}; }
  static CellContent make_static(StaticValue v);
  static CellContent make_formula(std::string source,
                                  std::optional<CachedResult> result = std::nullopt);

  bool is_empty() const { return kind == ContentKind::Empty; }
  bool operator==(const CellContent&) const = default;
};

// "<empty>", "Travel (string)", "=SUM(E11:E16) {0 (float)}".
std::string render_content(const CellContent& content);
// "$5,150 (currency)", "0 (float)".
std::string render_value(const StaticValue& value);
std::string render_result(const CachedResult& result);
// Display text without the type suffix: "$5,150", "Travel".
std::string display_text(const StaticValue& value);

struct Cell {
  CellContent content;
  bool is_protected = false;
  // Placeholder re-inserted for deleted rows/columns whose prior content is
  // not recoverable.
  bool unrecoverable = false;
};

// Ragged row-major cell grid. Cells outside the materialized area read as
// empty; trailing empty cells carry no meaning.
class Grid {
 public:
  const Cell& at(int row, int column) const;
  Cell& mutable_at(int row, int column);
  void set(int row, int column, CellContent content);

  int row_count() const { return static_cast<int>(rows_.size()); }
  int column_count() const;
  std::size_t materialized_cells() const;

  void insert_rows(int at, int count, bool placeholder);
  void erase_rows(int at, int count);
  void insert_columns(int at, int count, bool placeholder);
  void erase_columns(int at, int count);

  // Appends a row; used while loading.
  std::vector<Cell>& append_row() { return rows_.emplace_back(); }

  const std::vector<std::vector<Cell>>& rows() const { return rows_; }

  // Logical equality of cell contents, ignoring trailing empties and flags.
  bool same_content(const Grid& other) const;

  template <typename F>
  void for_each_nonempty(F&& f) const {
    for (int r = 0; r < row_count(); ++r) {
      const auto& row = rows_[static_cast<std::size_t>(r)];
      for (int c = 0; c < static_cast<int>(row.size()); ++c) {
        const Cell& cell = row[static_cast<std::size_t>(c)];
        if (!cell.content.is_empty()) f(r, c, cell);
      }
    }
  }

 private:
  std::vector<std::vector<Cell>> rows_;
};

struct Sheet {
  std::string name;
  bool is_protected = false;
  Grid cells;
  // Cells declared by repetition attributes but left unmaterialized because
  // they formed a trailing empty run.
  std::size_t elided_cells = 0;
};

}  // namespace odsaudit
