#pragma once

#include "odsaudit/analyzer.hpp"
#include "odsaudit/filter.hpp"
#include "odsaudit/workbook.hpp"

#include "json.hpp"

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace odsaudit {

enum class OutputFormat { Table, Csv, Ndjson };

std::optional<OutputFormat> parse_output_format(std::string_view text);

// Column headers of the change table.
const std::vector<std::string>& change_columns();
// One row of display fields, in change_columns() order.
std::vector<std::string> change_row(const ChangeRecord& record);

const std::vector<std::string>& finding_columns();
std::vector<std::string> finding_row(const Finding& finding);

// Display fields plus id and kind; keys are the lower-cased column names.
nlohmann::ordered_json change_json(const ChangeRecord& record);
nlohmann::ordered_json finding_json(const Finding& finding);
nlohmann::ordered_json summary_json(const Summary& summary);

std::string render_change_table(std::span<const ChangeRecord> records, OutputFormat format);
std::string render_findings(std::span<const Finding> findings, OutputFormat format);

// "23 Change Records between: 2003-03-28 and 2003-03-28" followed by
// count blocks for change types, authors and dates.
std::string render_summary(const Summary& summary);

// Space-aligned table with " | " separators and a header row.
std::string render_table(const std::vector<std::string>& header,
                         const std::vector<std::vector<std::string>>& rows);
std::string render_csv(const std::vector<std::string>& header,
                       const std::vector<std::vector<std::string>>& rows);
std::string csv_field(std::string_view text);

}  // namespace odsaudit
