#include "odsaudit/workbook.hpp"

#include "odsaudit/error.hpp"
#include "odsaudit/formula.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <system_error>
#include <tuple>
#include <unordered_map>

namespace odsaudit {

std::string_view to_string(ChangeKind kind) {
  switch (kind) {
    case ChangeKind::CellContent: return "cell-content";
    case ChangeKind::RowInsertion: return "row-insertion";
    case ChangeKind::RowDeletion: return "row-deletion";
    case ChangeKind::ColumnInsertion: return "column-insertion";
    case ChangeKind::ColumnDeletion: return "column-deletion";
  }
  return "cell-content";
}

std::optional<ChangeKind> parse_change_kind(std::string_view text) {
  for (auto k : {ChangeKind::CellContent, ChangeKind::RowInsertion, ChangeKind::RowDeletion,
                 ChangeKind::ColumnInsertion, ChangeKind::ColumnDeletion}) {
    if (to_string(k) == text) return k;
  }
  return std::nullopt;
}

std::string_view change_label(ChangeKind kind) {
  switch (kind) {
    case ChangeKind::CellContent: return "Cell content";
    case ChangeKind::RowInsertion:
    case ChangeKind::ColumnInsertion: return "Insertion";
    case ChangeKind::RowDeletion:
    case ChangeKind::ColumnDeletion: return "Deletion";
  }
  return "Cell content";
}

std::string_view kind_label(ChangeKind kind) {
  switch (kind) {
    case ChangeKind::CellContent: return "Cell content";
    case ChangeKind::RowInsertion: return "Row insertion";
    case ChangeKind::RowDeletion: return "Row deletion";
    case ChangeKind::ColumnInsertion: return "Column insertion";
    case ChangeKind::ColumnDeletion: return "Column deletion";
  }
  return "Cell content";
}

bool is_structural(ChangeKind kind) { return kind != ChangeKind::CellContent; }

bool is_row_kind(ChangeKind kind) {
  return kind == ChangeKind::RowInsertion || kind == ChangeKind::RowDeletion;
}

bool is_insertion(ChangeKind kind) {
  return kind == ChangeKind::RowInsertion || kind == ChangeKind::ColumnInsertion;
}

std::string_view to_string(AcceptanceState state) {
  switch (state) {
    case AcceptanceState::Pending: return "pending";
    case AcceptanceState::Accepted: return "accepted";
    case AcceptanceState::Rejected: return "rejected";
  }
  return "pending";
}

std::optional<AcceptanceState> parse_acceptance_state(std::string_view text) {
  for (auto s : {AcceptanceState::Pending, AcceptanceState::Accepted, AcceptanceState::Rejected}) {
    if (to_string(s) == text) return s;
  }
  return std::nullopt;
}

std::string_view to_string(RecordingStatus status) {
  return status == RecordingStatus::Enabled ? "enabled" : "no-history-found";
}

const Sheet* Workbook::find_sheet(std::string_view name) const {
  for (const auto& s : sheets) {
    if (s.name == name) return &s;
  }
  return nullptr;
}

std::string canonical_formula_text(std::string_view raw, const CellAddress& host) {
  try {
    return print_canonical(parse_formula(raw, host));
  } catch (const FormulaSyntaxError&) {
    return strip_formula_prefix(raw);
  }
}

namespace {

int to_int(const std::string* text, int fallback) {
  if (!text) return fallback;
  int v = 0;
  auto [ptr, ec] = std::from_chars(text->data(), text->data() + text->size(), v);
  if (ec != std::errc{} || ptr != text->data() + text->size()) return fallback;
  return v;
}

std::optional<double> to_double(const std::string* text) {
  if (!text) return std::nullopt;
  double v = 0;
  auto [ptr, ec] = std::from_chars(text->data(), text->data() + text->size(), v);
  if (ec != std::errc{}) return std::nullopt;
  return v;
}

std::string paragraph_text(const XmlElement& cell) {
  std::string out;
  bool first = true;
  for (const auto& c : cell.children) {
    if (!c.is("text", "p")) continue;
    if (!first) out += '\n';
    out += c.inner_text();
    first = false;
  }
  return out;
}

bool has_paragraph(const XmlElement& cell) {
  return std::any_of(cell.children.begin(), cell.children.end(),
                     [](const XmlElement& c) { return c.is("text", "p"); });
}

std::optional<StaticValue> read_value(const XmlElement& cell) {
  const std::string* type_text = cell.attribute("value-type");
  if (!type_text) return std::nullopt;
  StaticValue v;
  if (*type_text == "time") {
    v.type = ValueType::String;
    v.lexical = cell.attribute_or("time-value", paragraph_text(cell));
    return v;
  }
  auto type = parse_value_type(*type_text);
  if (!type) return std::nullopt;
  v.type = *type;
  switch (*type) {
    case ValueType::Float:
    case ValueType::Currency:
    case ValueType::Percentage: {
      auto num = to_double(cell.attribute("value"));
      if (!num) return std::nullopt;
      v.numeric = *num;
      v.lexical = format_number(*num);
      if (const auto* code = cell.attribute("currency")) v.currency_code = *code;
      break;
    }
    case ValueType::Date:
      v.lexical = cell.attribute_or("date-value", paragraph_text(cell));
      break;
    case ValueType::Boolean:
      v.lexical = cell.attribute_or("boolean-value", "false");
      break;
    case ValueType::String:
      if (const auto* sv = cell.attribute("string-value")) {
        v.lexical = *sv;
      } else {
        v.lexical = paragraph_text(cell);
      }
      break;
  }
  return v;
}

CellContent read_content(const XmlElement& cell, const CellAddress& host) {
  if (const auto* formula = cell.attribute("formula")) {
    std::optional<CachedResult> result;
    std::string text = paragraph_text(cell);
    if (looks_like_error_token(text)) {
      result = ErrorToken{text};
    } else if (auto v = read_value(cell)) {
      result = std::move(*v);
    }
    return CellContent::make_formula(canonical_formula_text(*formula, host), std::move(result));
  }
  if (auto v = read_value(cell)) return CellContent::make_static(std::move(*v));
  if (has_paragraph(cell)) {
    std::string text = paragraph_text(cell);
    if (!text.empty()) return CellContent::make_static(StaticValue::string(std::move(text)));
  }
  return CellContent::empty();
}

// Automatic cell styles: name -> cell is protected.
using ProtectionStyles = std::map<std::string, bool, std::less<>>;

ProtectionStyles read_protection_styles(const XmlElement& root) {
  ProtectionStyles styles;
  const XmlElement* automatic = root.child("office", "automatic-styles");
  if (!automatic) return styles;
  for (const auto& s : automatic->children) {
    if (!s.is("style", "style")) continue;
    const XmlElement* props = s.child("style", "table-cell-properties");
    if (!props) props = s.child("style", "properties");  // OpenOffice 1.0
    if (!props) continue;
    if (const auto* protect = props->attribute("cell-protect")) {
      styles[s.attribute_or("name", "")] = protect->find("protected") != std::string::npos &&
                                            *protect != "none";
    }
  }
  return styles;
}

struct ColumnStyleRun {
  int count;
  std::string style;
};

class SheetLoader {
 public:
  SheetLoader(Sheet& sheet, const ProtectionStyles& styles) : sheet_(sheet), styles_(styles) {}

  void load(const XmlElement& table) {
    walk(table);
    sheet_.elided_cells += pending_elided_;
  }

 private:
  Sheet& sheet_;
  const ProtectionStyles& styles_;
  std::vector<ColumnStyleRun> column_styles_;
  int row_ = 0;
  int pending_empty_rows_ = 0;
  std::size_t pending_elided_ = 0;

  void walk(const XmlElement& parent) {
    for (const auto& child : parent.children) {
      if (child.ns != "table") continue;
      if (child.name == "table-column") {
        column_styles_.push_back({std::max(1, to_int(child.attribute("number-columns-repeated"), 1)),
                                  child.attribute_or("default-cell-style-name", "")});
      } else if (child.name == "table-row") {
        read_row(child);
      } else if (child.name == "table-header-rows" || child.name == "table-rows" ||
                 child.name == "table-row-group" || child.name == "table-header-columns" ||
                 child.name == "table-columns" || child.name == "table-column-group") {
        walk(child);
      }
    }
  }

  bool style_protected(const std::string& style, int column) const {
    std::string_view name = style;
    if (name.empty()) {
      int at = 0;
      for (const auto& run : column_styles_) {
        if (column < at + run.count) {
          name = run.style;
          break;
        }
        at += run.count;
      }
    }
    auto it = styles_.find(name);
    return it != styles_.end() && it->second;
  }

  void read_row(const XmlElement& row) {
    int repeat = std::max(1, to_int(row.attribute("number-rows-repeated"), 1));
    std::vector<Cell> cells;
    std::size_t declared = 0;
    int column = 0;
    int pending_empty = 0;
    for (const auto& c : row.children) {
      if (!c.is("table", "table-cell") && !c.is("table", "covered-table-cell")) continue;
      int n = std::max(1, to_int(c.attribute("number-columns-repeated"), 1));
      declared += static_cast<std::size_t>(n);
      CellAddress host{sheet_.name, column, row_};
      Cell cell;
      cell.content = read_content(c, host);
      if (cell.content.is_empty()) {
        pending_empty += n;
        column += n;
        continue;
      }
      cells.resize(cells.size() + static_cast<std::size_t>(pending_empty));
      pending_empty = 0;
      std::string style = c.attribute_or("style-name", "");
      for (int i = 0; i < n && column < kMaxColumns; ++i, ++column) {
        Cell copy = cell;
        if (i > 0 && cell.content.kind == ContentKind::Formula) {
          // Repeated formulas are stored once; each copy keeps its own host.
          copy.content = read_content(c, CellAddress{sheet_.name, column, row_});
        }
        copy.is_protected = style_protected(style, column);
        cells.push_back(std::move(copy));
      }
    }
    // Fix up protection for cells materialized as empty padding.
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (cells[i].content.is_empty()) cells[i].is_protected = style_protected("", static_cast<int>(i));
    }

    if (cells.empty()) {
      pending_empty_rows_ += repeat;
      pending_elided_ += declared * static_cast<std::size_t>(repeat);
      row_ += repeat;
      return;
    }
    for (int i = 0; i < pending_empty_rows_; ++i) sheet_.cells.append_row();
    sheet_.elided_cells += pending_elided_;
    pending_empty_rows_ = 0;
    pending_elided_ = 0;
    std::size_t elided_per_row = declared - cells.size();
    for (int i = 0; i < repeat && row_ < kMaxRows; ++i, ++row_) {
      sheet_.cells.append_row() = cells;
      sheet_.elided_cells += elided_per_row;
    }
  }
};

const XmlElement* find_spreadsheet(const XmlElement& root) {
  const XmlElement* body = root.child("office", "body");
  if (!body) return nullptr;
  if (const auto* ss = body->child("office", "spreadsheet")) return ss;
  return body;  // OpenOffice 1.0 keeps tables directly under the body
}

const std::string& sheet_by_index(const std::vector<Sheet>& sheets, int index,
                                  const std::string& id) {
  if (index < 0 || index >= static_cast<int>(sheets.size())) {
    throw Error(ErrorCode::BadCellAddress,
                "change " + id + " refers to sheet index " + std::to_string(index) +
                    " but the document has " + std::to_string(sheets.size()) + " sheets");
  }
  return sheets[static_cast<std::size_t>(index)].name;
}

void read_change_info(const XmlElement& change, std::string& author,
                      std::optional<Timestamp>& when) {
  const XmlElement* info = change.child("office", "change-info");
  if (!info) return;
  if (const auto* creator = info->child("dc", "creator")) author = creator->inner_text();
  if (const auto* date = info->child("dc", "date")) when = parse_timestamp(date->inner_text());
  // OpenOffice 1.0 keeps both as attributes.
  if (const auto* a = info->attribute("chg-author")) author = *a;
  if (const auto* d = info->attribute("chg-date-time")) when = parse_timestamp(*d);
}

}  // namespace

void sort_changes(std::vector<ChangeRecord>& changes) {
  std::stable_sort(changes.begin(), changes.end(), [](const ChangeRecord& a, const ChangeRecord& b) {
    if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
    return a.document_order < b.document_order;
  });
}

Workbook build_workbook(const XmlElement& content, ContainerManifest manifest) {
  Workbook wb;
  wb.manifest = std::move(manifest);
  const XmlElement* spreadsheet = find_spreadsheet(content);
  if (!spreadsheet) return wb;

  ProtectionStyles styles = read_protection_styles(content);
  for (const auto& t : spreadsheet->children) {
    if (!t.is("table", "table")) continue;
    Sheet sheet;
    sheet.name = t.attribute_or("name", "Sheet" + std::to_string(wb.sheets.size() + 1));
    sheet.is_protected = t.attribute_or("protected", "false") == "true";
    SheetLoader(sheet, styles).load(t);
    wb.sheets.push_back(std::move(sheet));
  }

  const XmlElement* tracked = spreadsheet->child("table", "tracked-changes");
  if (!tracked) return wb;
  wb.recording = RecordingStatus::Enabled;

  std::size_t order = 0;
  for (const auto& el : tracked->children) {
    if (el.ns != "table") continue;
    ++order;
    std::string id = el.attribute_or("id", "change" + std::to_string(order));
    std::string author;
    std::optional<Timestamp> when;
    read_change_info(el, author, when);

    auto opaque = [&](const std::string& why) {
      wb.opaque_changes.push_back({id, el.name, author, when, order});
      wb.notices.push_back("UnsupportedChangeKind: " + id + " (" + why + ") kept opaque");
    };

    if (!when) {
      opaque("missing or unparsable change date");
      continue;
    }

    ChangeRecord rec;
    rec.id = id;
    rec.author = author;
    rec.timestamp = *when;
    rec.document_order = order;
    auto state = parse_acceptance_state(el.attribute_or("acceptance-state", "pending"));
    rec.state = state.value_or(AcceptanceState::Pending);

    if (el.name == "cell-content-change") {
      const XmlElement* addr = el.child("table", "cell-address");
      if (!addr) {
        throw Error(ErrorCode::BadCellAddress, "change " + id + " has no cell address");
      }
      int col = to_int(addr->attribute("column"), -1);
      int row = to_int(addr->attribute("row"), -1);
      int tab = to_int(addr->attribute("table"), -1);
      if (col < 0 || row < 0 || col >= kMaxColumns || row >= kMaxRows) {
        throw Error(ErrorCode::BadCellAddress, "change " + id + " has an invalid cell address");
      }
      rec.kind = ChangeKind::CellContent;
      rec.sheet = sheet_by_index(wb.sheets, tab, id);
      rec.address = CellAddress{rec.sheet, col, row};
      if (const XmlElement* prev = el.child("table", "previous")) {
        if (const XmlElement* cell = prev->child("table", "change-track-table-cell")) {
          rec.before = read_content(*cell, *rec.address);
        }
      }
    } else if (el.name == "insertion" || el.name == "deletion") {
      std::string type = el.attribute_or("type", "row");
      if (type != "row" && type != "column") {
        opaque(type + " " + el.name);
        continue;
      }
      bool insert = el.name == "insertion";
      rec.kind = type == "row" ? (insert ? ChangeKind::RowInsertion : ChangeKind::RowDeletion)
                               : (insert ? ChangeKind::ColumnInsertion : ChangeKind::ColumnDeletion);
      rec.sheet = sheet_by_index(wb.sheets, to_int(el.attribute("table"), 0), id);
      int pos = to_int(el.attribute("position"), -1);
      if (pos < 0) {
        throw Error(ErrorCode::BadCellAddress, "change " + id + " has an invalid position");
      }
      rec.position = Position{pos, std::max(1, to_int(el.attribute("count"), 1))};
    } else {
      opaque(el.name);
      continue;
    }
    wb.changes.push_back(std::move(rec));
  }

  sort_changes(wb.changes);

  // Resolve after-contents: walk each address's records newest first.
  std::map<std::tuple<std::string, int, int>, CellContent> next_before;
  for (auto it = wb.changes.rbegin(); it != wb.changes.rend(); ++it) {
    if (it->kind != ChangeKind::CellContent) continue;
    auto key = std::make_tuple(it->address->sheet, it->address->row, it->address->column);
    auto found = next_before.find(key);
    if (found != next_before.end()) {
      it->after = found->second;
    } else {
      const Sheet* sheet = wb.find_sheet(it->sheet);
      it->after = sheet->cells.at(it->address->row, it->address->column).content;
    }
    // A rejected record never took effect, so its before is not part of the chain.
    if (it->state != AcceptanceState::Rejected) next_before[key] = it->before;
  }
  return wb;
}

Workbook load_workbook(const std::filesystem::path& path) {
  Container container = Container::open(path);
  XmlElement content = container.read_part(container.manifest().content_part);
  return build_workbook(content, container.manifest());
}

CellContent resolve_after_content(const Workbook& workbook, const ChangeRecord& record) {
  if (record.kind != ChangeKind::CellContent || !record.address) return CellContent::empty();
  auto self = std::find_if(workbook.changes.begin(), workbook.changes.end(),
                           [&](const ChangeRecord& r) { return r.id == record.id; });
  if (self != workbook.changes.end()) {
    for (auto it = std::next(self); it != workbook.changes.end(); ++it) {
      if (it->kind == ChangeKind::CellContent && it->state != AcceptanceState::Rejected &&
          it->address->same_cell(*record.address)) {
        return it->before;
      }
    }
  }
  const Sheet* sheet = workbook.find_sheet(record.address->sheet);
  if (!sheet) return CellContent::empty();
  return sheet->cells.at(record.address->row, record.address->column).content;
}

std::string render_address(const ChangeRecord& record) {
  if (record.kind == ChangeKind::CellContent) return to_a1(*record.address);
  if (is_row_kind(record.kind)) return std::to_string(record.position->index + 1);
  return column_letters(record.position->index);
}

std::string render_change_detail(const ChangeRecord& record) {
  if (record.kind == ChangeKind::CellContent) {
    return render_content(record.before) + " -> " + render_content(record.after);
  }
  const Position& p = *record.position;
  std::string count = std::to_string(p.count);
  if (is_row_kind(record.kind)) {
    return count + (p.count == 1 ? " row" : " rows") + " at row " + std::to_string(p.index + 1);
  }
  return count + (p.count == 1 ? " column" : " columns") + " at column " +
         column_letters(p.index);
}

}  // namespace odsaudit
