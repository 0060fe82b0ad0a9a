#include "odsaudit/report.hpp"

#include <algorithm>
#include <cctype>

namespace odsaudit {

using ordered_json = nlohmann::ordered_json;

namespace {

// Display width in code points; good enough for aligned plain text.
std::size_t width(std::string_view s) {
  return static_cast<std::size_t>(std::count_if(s.begin(), s.end(), [](char c) {
    return (static_cast<unsigned char>(c) & 0xC0) != 0x80;
  }));
}

std::string lower_key(std::string_view s) {
  std::string out;
  for (char c : s) {
    out += c == ' ' ? '_' : static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

std::string ndjson(const std::vector<ordered_json>& objects) {
  std::string out;
  for (const auto& o : objects) out += o.dump() + "\n";
  return out;
}

}  // namespace

std::optional<OutputFormat> parse_output_format(std::string_view text) {
  if (text == "table") return OutputFormat::Table;
  if (text == "csv") return OutputFormat::Csv;
  if (text == "ndjson") return OutputFormat::Ndjson;
  return std::nullopt;
}

const std::vector<std::string>& change_columns() {
  static const std::vector<std::string> k = {"Change", "Sheet", "Address", "Author",
                                             "Date",   "Time",  "Status",  "Change Details"};
  return k;
}

std::vector<std::string> change_row(const ChangeRecord& r) {
  return {std::string(change_label(r.kind)),
          r.sheet,
          render_address(r),
          r.author,
          format_date(date_of(r.timestamp)),
          format_time(r.timestamp),
          std::string(to_string(r.state)),
          render_change_detail(r)};
}

const std::vector<std::string>& finding_columns() {
  static const std::vector<std::string> k = {"Check", "Severity", "Location", "Message", "Sheet"};
  return k;
}

std::vector<std::string> finding_row(const Finding& f) {
  return {std::string(to_string(f.check)), std::string(to_string(f.severity)), f.location(),
          f.message, f.sheet};
}

ordered_json change_json(const ChangeRecord& r) {
  ordered_json j;
  j["id"] = r.id;
  j["kind"] = to_string(r.kind);
  auto row = change_row(r);
  const auto& cols = change_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) j[lower_key(cols[i])] = row[i];
  return j;
}

ordered_json finding_json(const Finding& f) {
  ordered_json j;
  j["check"] = to_string(f.check);
  j["severity"] = to_string(f.severity);
  j["location"] = f.location();
  j["message"] = f.message;
  j["sheet"] = f.sheet;
  j["cell"] = f.cell ? ordered_json(to_a1(*f.cell)) : ordered_json(nullptr);
  ordered_json ev = ordered_json::object();
  for (const auto& [k, v] : f.evidence) ev[k] = v;
  j["evidence"] = ev;
  return j;
}

ordered_json summary_json(const Summary& s) {
  ordered_json j;
  j["total"] = s.total;
  j["first_date"] = s.first_date ? ordered_json(format_date(*s.first_date)) : ordered_json(nullptr);
  j["last_date"] = s.last_date ? ordered_json(format_date(*s.last_date)) : ordered_json(nullptr);
  ordered_json kinds = ordered_json::object();
  for (const auto& [k, n] : s.by_kind) kinds[std::string(to_string(k))] = n;
  j["by_kind"] = kinds;
  ordered_json authors = ordered_json::object();
  for (const auto& [a, n] : s.by_author) authors[a] = n;
  j["by_author"] = authors;
  ordered_json dates = ordered_json::object();
  for (const auto& [d, n] : s.by_date) dates[format_date(d)] = n;
  j["by_date"] = dates;
  return j;
}

std::string render_table(const std::vector<std::string>& header,
                         const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> widths(header.size(), 0);
  auto measure = [&](const std::vector<std::string>& row) {
    for (std::size_t i = 0; i < row.size() && i < widths.size(); ++i) {
      widths[i] = std::max(widths[i], width(row[i]));
    }
  };
  measure(header);
  for (const auto& r : rows) measure(r);

  auto line = [&](const std::vector<std::string>& row) {
    std::string out;
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i > 0) out += " | ";
      out += row[i];
      if (i + 1 < row.size()) out.append(widths[i] - width(row[i]), ' ');
    }
    return out + "\n";
  };
  std::string out = line(header);
  for (const auto& r : rows) out += line(r);
  return out;
}

std::string csv_field(std::string_view text) {
  if (text.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(text);
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string render_csv(const std::vector<std::string>& header,
                       const std::vector<std::vector<std::string>>& rows) {
  auto line = [](const std::vector<std::string>& row) {
    std::string out;
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i > 0) out += ',';
      out += csv_field(row[i]);
    }
    return out + "\r\n";
  };
  std::string out = line(header);
  for (const auto& r : rows) out += line(r);
  return out;
}

std::string render_change_table(std::span<const ChangeRecord> records, OutputFormat format) {
  if (format == OutputFormat::Ndjson) {
    std::vector<ordered_json> objects;
    for (const auto& r : records) objects.push_back(change_json(r));
    return ndjson(objects);
  }
  std::vector<std::vector<std::string>> rows;
  for (const auto& r : records) rows.push_back(change_row(r));
  return format == OutputFormat::Csv ? render_csv(change_columns(), rows)
                                     : render_table(change_columns(), rows);
}

std::string render_findings(std::span<const Finding> findings, OutputFormat format) {
  if (format == OutputFormat::Ndjson) {
    std::vector<ordered_json> objects;
    for (const auto& f : findings) objects.push_back(finding_json(f));
    return ndjson(objects);
  }
  std::vector<std::vector<std::string>> rows;
  for (const auto& f : findings) rows.push_back(finding_row(f));
  return format == OutputFormat::Csv ? render_csv(finding_columns(), rows)
                                     : render_table(finding_columns(), rows);
}

std::string render_summary(const Summary& s) {
  std::string out = std::to_string(s.total) + " Change Records";
  if (s.first_date && s.last_date) {
    out += " between: " + format_date(*s.first_date) + " and " + format_date(*s.last_date);
  }
  out += "\n";
  if (s.total == 0) return out;

  out += "\nof Change Types: " + std::to_string(s.by_kind.size()) + "\n";
  for (const auto& [k, n] : s.by_kind) out += std::to_string(n) + " " + std::string(kind_label(k)) + "\n";
  out += "\nof Authors: " + std::to_string(s.by_author.size()) + "\n";
  for (const auto& [a, n] : s.by_author) out += std::to_string(n) + " by \"" + a + "\"\n";
  out += "\nof Dates: " + std::to_string(s.by_date.size()) + "\n";
  for (const auto& [d, n] : s.by_date) out += std::to_string(n) + " on \"" + format_date(d) + "\"\n";
  return out;
}

}  // namespace odsaudit
