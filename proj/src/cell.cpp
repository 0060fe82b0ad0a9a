#include "odsaudit/cell.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <system_error>

namespace odsaudit {

std::string column_letters(int column) {
  std::string out;
  int n = column + 1;
  while (n > 0) {
    int rem = (n - 1) % 26;
    out.insert(out.begin(), static_cast<char>('A' + rem));
    n = (n - 1) / 26;
  }
  return out;
}

std::optional<int> parse_column_letters(std::string_view letters) {
  if (letters.empty() || letters.size() > 3) return std::nullopt;
  int n = 0;
  for (char ch : letters) {
    char up = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
    if (up < 'A' || up > 'Z') return std::nullopt;
    n = n * 26 + (up - 'A' + 1);
  }
  if (n > kMaxColumns) return std::nullopt;
  return n - 1;
}

std::string to_a1(const CellAddress& a) {
  std::string out;
  if (a.col_absolute) out += '$';
  out += column_letters(a.column);
  if (a.row_absolute) out += '$';
  out += std::to_string(a.row + 1);
  return out;
}

std::optional<CellAddress> parse_a1(std::string_view text, std::string sheet) {
  CellAddress a;
  a.sheet = std::move(sheet);
  std::size_t i = 0;
  if (i < text.size() && text[i] == '$') {
    a.col_absolute = true;
    ++i;
  }
  std::size_t letters = i;
  while (i < text.size() && std::isalpha(static_cast<unsigned char>(text[i]))) ++i;
  auto col = parse_column_letters(text.substr(letters, i - letters));
  if (!col) return std::nullopt;
  a.column = *col;
  if (i < text.size() && text[i] == '$') {
    a.row_absolute = true;
    ++i;
  }
  std::size_t digits = i;
  while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
  if (digits == i || i != text.size() || text[digits] == '0') return std::nullopt;
  int row = 0;
  auto [ptr, ec] = std::from_chars(text.data() + digits, text.data() + i, row);
  if (ec != std::errc{} || row < 1 || row > kMaxRows) return std::nullopt;
  a.row = row - 1;
  return a;
}

std::string_view to_string(ValueType type) {
  switch (type) {
    case ValueType::Float: return "float";
    case ValueType::Currency: return "currency";
    case ValueType::Percentage: return "percentage";
    case ValueType::String: return "string";
    case ValueType::Date: return "date";
    case ValueType::Boolean: return "boolean";
  }
  return "string";
}

std::optional<ValueType> parse_value_type(std::string_view text) {
  for (auto t : {ValueType::Float, ValueType::Currency, ValueType::Percentage,
                 ValueType::String, ValueType::Date, ValueType::Boolean}) {
    if (to_string(t) == text) return t;
  }
  return std::nullopt;
}

bool is_numeric(ValueType type) {
  return type == ValueType::Float || type == ValueType::Currency ||
         type == ValueType::Percentage;
}

std::string format_number(double v) {
  if (v == 0) return "0";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

StaticValue StaticValue::number(double v, ValueType type) {
  StaticValue s;
  s.type = type;
  s.lexical = format_number(v);
  s.numeric = v;
  return s;
}

StaticValue StaticValue::string(std::string text) {
  StaticValue s;
  s.type = ValueType::String;
  s.lexical = std::move(text);
  return s;
}

StaticValue StaticValue::boolean(bool b) {
  StaticValue s;
  s.type = ValueType::Boolean;
  s.lexical = b ? "true" : "false";
  return s;
}

bool looks_like_error_token(std::string_view text) {
  static constexpr std::array<std::string_view, 8> kTokens = {
      "#NULL!", "#DIV/0!", "#VALUE!", "#REF!", "#NAME?", "#NUM!", "#N/A", "#NAME!"};
  if (std::find(kTokens.begin(), kTokens.end(), text) != kTokens.end()) return true;
  if (text.starts_with("Err:") && text.size() > 4) {
    return std::all_of(text.begin() + 4, text.end(),
                       [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
  }
  return false;
}

CellContent CellContent::make_static(StaticValue v) {
  CellContent c;
  c.kind = ContentKind::Static;
  c.static_value = std::move(v);
  return c;
}

CellContent CellContent::make_formula(std::string source,
                                      std::optional<CachedResult> result) {
  CellContent c;
  c.kind = ContentKind::Formula;
  c.formula_source = std::move(source);
  c.cached_result = std::move(result);
  return c;
}

namespace {

std::string currency_symbol(const std::optional<std::string>& code) {
  if (!code || code->empty() || *code == "USD") return "$";
  if (*code == "EUR") return "€";
  if (*code == "GBP") return "£";
  if (*code == "JPY") return "¥";
  return {};
}

std::string group_thousands(std::string digits) {
  for (int i = static_cast<int>(digits.size()) - 3; i > 0; i -= 3) {
    digits.insert(static_cast<std::size_t>(i), ",");
  }
  return digits;
}

std::string format_currency(double v, const std::optional<std::string>& code) {
  double magnitude = std::fabs(v);
  double whole = std::floor(magnitude);
  long long cents = std::llround((magnitude - whole) * 100.0);
  if (cents == 100) {
    whole += 1;
    cents = 0;
  }
  std::string text = group_thousands(std::to_string(static_cast<long long>(whole)));
  if (cents != 0) {
    text += '.';
    if (cents < 10) text += '0';
    text += std::to_string(cents);
  }
  std::string symbol = currency_symbol(code);
  std::string sign = v < 0 ? "-" : "";
  if (symbol.empty()) return sign + (code ? *code : std::string()) + " " + text;
  return sign + symbol + text;
}

}  // namespace

std::string display_text(const StaticValue& value) {
  if (value.type == ValueType::Currency && value.numeric) {
    return format_currency(*value.numeric, value.currency_code);
  }
  return value.lexical;
}

std::string render_value(const StaticValue& value) {
  return display_text(value) + " (" + std::string(to_string(value.type)) + ")";
}

std::string render_result(const CachedResult& result) {
  if (const auto* err = std::get_if<ErrorToken>(&result)) return err->text + " (error)";
  return render_value(std::get<StaticValue>(result));
}

std::string render_content(const CellContent& content) {
  switch (content.kind) {
    case ContentKind::Empty:
      return "<empty>";
    case ContentKind::Static:
      return render_value(*content.static_value);
    case ContentKind::Formula: {
      std::string out = *content.formula_source;
      if (content.cached_result) out += " {" + render_result(*content.cached_result) + "}";
      return out;
    }
  }
  return "<empty>";
}

const Cell& Grid::at(int row, int column) const {
  static const Cell kEmpty;
  if (row < 0 || column < 0 || row >= row_count()) return kEmpty;
  const auto& r = rows_[static_cast<std::size_t>(row)];
  if (column >= static_cast<int>(r.size())) return kEmpty;
  return r[static_cast<std::size_t>(column)];
}

Cell& Grid::mutable_at(int row, int column) {
  if (row >= row_count()) rows_.resize(static_cast<std::size_t>(row) + 1);
  auto& r = rows_[static_cast<std::size_t>(row)];
  if (column >= static_cast<int>(r.size())) r.resize(static_cast<std::size_t>(column) + 1);
  return r[static_cast<std::size_t>(column)];
}

void Grid::set(int row, int column, CellContent content) {
  if (content.is_empty() && at(row, column).content.is_empty()) return;
  Cell& cell = mutable_at(row, column);
  cell.content = std::move(content);
  cell.unrecoverable = false;
}

int Grid::column_count() const {
  std::size_t width = 0;
  for (const auto& r : rows_) width = std::max(width, r.size());
  return static_cast<int>(width);
}

std::size_t Grid::materialized_cells() const {
  std::size_t n = 0;
  for (const auto& r : rows_) n += r.size();
  return n;
}

void Grid::insert_rows(int at, int count, bool placeholder) {
  if (count <= 0) return;
  if (at > row_count()) {
    if (!placeholder) return;
    rows_.resize(static_cast<std::size_t>(at));
  }
  std::vector<Cell> blank;
  if (placeholder) {
    Cell flagged;
    flagged.unrecoverable = true;
    blank.assign(static_cast<std::size_t>(std::max(column_count(), 1)), flagged);
  }
  rows_.insert(rows_.begin() + at, static_cast<std::size_t>(count), blank);
}

void Grid::erase_rows(int at, int count) {
  if (count <= 0 || at >= row_count()) return;
  int end = std::min(row_count(), at + count);
  rows_.erase(rows_.begin() + at, rows_.begin() + end);
}

void Grid::insert_columns(int at, int count, bool placeholder) {
  if (count <= 0) return;
  Cell flagged;
  flagged.unrecoverable = true;
  for (auto& r : rows_) {
    if (at > static_cast<int>(r.size())) {
      if (!placeholder) continue;
      r.resize(static_cast<std::size_t>(at));
    }
    r.insert(r.begin() + at, static_cast<std::size_t>(count),
             placeholder ? flagged : Cell{});
  }
}

void Grid::erase_columns(int at, int count) {
  if (count <= 0) return;
  for (auto& r : rows_) {
    if (at >= static_cast<int>(r.size())) continue;
    int end = std::min(static_cast<int>(r.size()), at + count);
    r.erase(r.begin() + at, r.begin() + end);
  }
}

bool Grid::same_content(const Grid& other) const {
  int rows = std::max(row_count(), other.row_count());
  for (int r = 0; r < rows; ++r) {
    int a = r < row_count() ? static_cast<int>(rows_[static_cast<std::size_t>(r)].size()) : 0;
    int b = r < other.row_count()
                ? static_cast<int>(other.rows_[static_cast<std::size_t>(r)].size())
                : 0;
    int cols = std::max(a, b);
    for (int c = 0; c < cols; ++c) {
      if (!(at(r, c).content == other.at(r, c).content)) return false;
    }
  }
  return true;
}

}  // namespace odsaudit
