#include "book_writer.hpp"

#include "odsaudit/formula.hpp"

#include <algorithm>
#include <regex>
#include <stdexcept>

namespace testsupport {

using namespace odsaudit;

const CellContent& PlainSheet::at(int r, int c) const {
  static const CellContent kEmpty;
  if (r < 0 || c < 0 || r >= row_count()) return kEmpty;
  const auto& row = rows[static_cast<std::size_t>(r)];
  if (c >= static_cast<int>(row.size())) return kEmpty;
  return row[static_cast<std::size_t>(c)];
}

void PlainSheet::set(int r, int c, CellContent content) {
  if (r >= row_count()) rows.resize(static_cast<std::size_t>(r) + 1);
  auto& row = rows[static_cast<std::size_t>(r)];
  if (c >= static_cast<int>(row.size())) row.resize(static_cast<std::size_t>(c) + 1);
  row[static_cast<std::size_t>(c)] = std::move(content);
}

int PlainSheet::column_count() const {
  std::size_t w = 0;
  for (const auto& r : rows) w = std::max(w, r.size());
  return static_cast<int>(w);
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

namespace {

std::string value_attributes(const StaticValue& v) {
  std::string a = " office:value-type=\"" + std::string(to_string(v.type)) + "\"";
  switch (v.type) {
    case ValueType::Float:
    case ValueType::Percentage:
      a += " office:value=\"" + v.lexical + "\"";
      break;
    case ValueType::Currency:
      if (v.currency_code) a += " office:currency=\"" + xml_escape(*v.currency_code) + "\"";
      a += " office:value=\"" + v.lexical + "\"";
      break;
    case ValueType::Date: a += " office:date-value=\"" + v.lexical + "\""; break;
    case ValueType::Boolean: a += " office:boolean-value=\"" + v.lexical + "\""; break;
    case ValueType::String: break;
  }
  return a;
}

std::string cell_body(const CellContent& c, const std::string& element) {
  std::string attrs;
  std::string text;
  if (c.kind == ContentKind::Static) {
    attrs = value_attributes(*c.static_value);
    text = c.static_value->lexical;
  } else if (c.kind == ContentKind::Formula) {
    attrs = " table:formula=\"of:" + xml_escape(*c.formula_source) + "\"";
    if (c.cached_result) {
      if (const auto* e = std::get_if<ErrorToken>(&*c.cached_result)) {
        text = e->text;
      } else {
        const auto& v = std::get<StaticValue>(*c.cached_result);
        attrs += value_attributes(v);
        text = v.lexical;
      }
    }
  }
  if (c.kind == ContentKind::Empty) return "<" + element + "/>";
  return "<" + element + attrs + "><text:p>" + xml_escape(text) + "</text:p></" + element + ">";
}

std::string change_info(const ChangeRecord& r) {
  return "<office:change-info><dc:creator>" + xml_escape(r.author) + "</dc:creator><dc:date>" +
         format_timestamp(r.timestamp) + "</dc:date></office:change-info>";
}

int sheet_index(const std::vector<PlainSheet>& sheets, const std::string& name) {
  for (std::size_t i = 0; i < sheets.size(); ++i) {
    if (sheets[i].name == name) return static_cast<int>(i);
  }
  throw std::runtime_error("no sheet " + name);
}

}  // namespace

std::string content_xml(const std::vector<PlainSheet>& sheets,
                        const std::vector<ChangeRecord>& records, bool with_tracked_changes,
                        Dialect dialect) {
  std::string x =
      "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      "<office:document-content"
      " xmlns:office=\"urn:oasis:names:tc:opendocument:xmlns:office:1.0\""
      " xmlns:table=\"urn:oasis:names:tc:opendocument:xmlns:table:1.0\""
      " xmlns:text=\"urn:oasis:names:tc:opendocument:xmlns:text:1.0\""
      " xmlns:style=\"urn:oasis:names:tc:opendocument:xmlns:style:1.0\""
      " xmlns:dc=\"http://purl.org/dc/elements/1.1/\" office:version=\"1.2\">\n"
      "<office:body><office:spreadsheet>\n";
  if (with_tracked_changes) {
    x += "<table:tracked-changes>\n";
    for (const auto& r : records) {
      std::string state = " table:acceptance-state=\"" + std::string(to_string(r.state)) + "\"";
      int tab = sheet_index(sheets, r.sheet);
      if (r.kind == ChangeKind::CellContent) {
        x += "<table:cell-content-change table:id=\"" + r.id + "\"" + state + ">";
        x += "<table:cell-address table:column=\"" + std::to_string(r.address->column) +
             "\" table:row=\"" + std::to_string(r.address->row) + "\" table:table=\"" +
             std::to_string(tab) + "\"/>";
        x += change_info(r);
        x += "<table:previous>" + cell_body(r.before, "table:change-track-table-cell") +
             "</table:previous>";
        x += "</table:cell-content-change>\n";
      } else {
        std::string element = is_insertion(r.kind) ? "table:insertion" : "table:deletion";
        x += "<" + element + " table:id=\"" + r.id + "\"" + state + " table:type=\"" +
             (is_row_kind(r.kind) ? "row" : "column") + "\" table:position=\"" +
             std::to_string(r.position->index) + "\" table:count=\"" +
             std::to_string(r.position->count) + "\" table:table=\"" + std::to_string(tab) + "\">";
        x += change_info(r);
        x += "</" + element + ">\n";
      }
    }
    x += "</table:tracked-changes>\n";
  }
  for (const auto& s : sheets) {
    x += "<table:table table:name=\"" + xml_escape(s.name) + "\"" +
         (s.is_protected ? " table:protected=\"true\"" : "") + ">\n";
    int cols = std::max(1, s.column_count());
    x += "<table:table-column table:number-columns-repeated=\"" + std::to_string(cols) + "\"/>\n";
    int empty_rows = 0;
    auto flush_empty = [&] {
      if (empty_rows == 0) return;
      x += "<table:table-row table:number-rows-repeated=\"" + std::to_string(empty_rows) +
           "\"><table:table-cell table:number-columns-repeated=\"" + std::to_string(cols) +
           "\"/></table:table-row>\n";
      empty_rows = 0;
    };
    for (const auto& row : s.rows) {
      bool blank = std::all_of(row.begin(), row.end(), [](const CellContent& c) { return c.is_empty(); });
      if (blank) {
        ++empty_rows;
        continue;
      }
      flush_empty();
      x += "<table:table-row>";
      int run = 0;
      auto flush_run = [&] {
        if (run == 1) x += "<table:table-cell/>";
        else if (run > 1) x += "<table:table-cell table:number-columns-repeated=\"" + std::to_string(run) + "\"/>";
        run = 0;
      };
      for (const auto& c : row) {
        if (c.is_empty()) {
          ++run;
          continue;
        }
        flush_run();
        x += cell_body(c, "table:table-cell");
      }
      run += cols - static_cast<int>(row.size());
      flush_run();
      x += "</table:table-row>\n";
    }
    flush_empty();
    x += "</table:table>\n";
  }
  x += "</office:spreadsheet></office:body>\n</office:document-content>\n";
  return dialect == Dialect::OpenOffice1 ? to_openoffice1(x) : x;
}

std::string to_openoffice1(const std::string& odf_xml) {
  static const std::pair<const char*, const char*> kMap[] = {
      {"urn:oasis:names:tc:opendocument:xmlns:office:1.0", "http://openoffice.org/2000/office"},
      {"urn:oasis:names:tc:opendocument:xmlns:table:1.0", "http://openoffice.org/2000/table"},
      {"urn:oasis:names:tc:opendocument:xmlns:text:1.0", "http://openoffice.org/2000/text"},
      {"urn:oasis:names:tc:opendocument:xmlns:style:1.0", "http://openoffice.org/2000/style"},
  };
  std::string out = odf_xml;
  for (const auto& [from, to] : kMap) {
    for (std::size_t p = out.find(from); p != std::string::npos; p = out.find(from, p)) {
      out.replace(p, std::string(from).size(), to);
      p += std::string(to).size();
    }
  }
  // OpenOffice 1.0 carries author and date as change-info attributes, and
  // keeps tables directly under the body.
  static const std::regex info(
      "<office:change-info><dc:creator>([^<]*)</dc:creator><dc:date>([^<]*)</dc:date></office:change-info>");
  out = std::regex_replace(out, info,
                           "<office:change-info office:chg-author=\"$1\" office:chg-date-time=\"$2\"/>");
  static const std::regex body_open("<office:body><office:spreadsheet>");
  static const std::regex body_close("</office:spreadsheet></office:body>");
  out = std::regex_replace(out, body_open, "<office:body>");
  out = std::regex_replace(out, body_close, "</office:body>");
  return out;
}

bool same_cells(const Grid& grid, const PlainSheet& sheet, std::string* why) {
  int rows = std::max(grid.row_count(), sheet.row_count());
  int cols = std::max(grid.column_count(), sheet.column_count());
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const CellContent& a = grid.at(r, c).content;
      const CellContent& b = sheet.at(r, c);
      if (!(a == b)) {
        if (why) {
          *why = sheet.name + "!" + to_a1(CellAddress{sheet.name, c, r}) + ": got " +
                 render_content(a) + ", expected " + render_content(b);
        }
        return false;
      }
    }
  }
  return true;
}

}  // namespace testsupport
