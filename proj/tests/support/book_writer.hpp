#pragma once

#include "odsaudit/cell.hpp"
#include "odsaudit/workbook.hpp"

#include <string>
#include <vector>

namespace testsupport {

// Dense sheet used by generators; rows may be ragged.
struct PlainSheet {
  std::string name;
  bool is_protected = false;
  std::vector<std::vector<odsaudit::CellContent>> rows;

  const odsaudit::CellContent& at(int r, int c) const;
  void set(int r, int c, odsaudit::CellContent content);
  int row_count() const { return static_cast<int>(rows.size()); }
  int column_count() const;
};

enum class Dialect { Odf, OpenOffice1 };

std::string xml_escape(const std::string& s);

// Serializes sheets and change records (in the given document order) into a
// content.xml. Record addresses use sheet names resolved against `sheets`.
std::string content_xml(const std::vector<PlainSheet>& sheets,
                        const std::vector<odsaudit::ChangeRecord>& records,
                        bool with_tracked_changes = true, Dialect dialect = Dialect::Odf);

// Rewrites ODF 1.x namespace URIs to their OpenOffice 1.0 equivalents.
std::string to_openoffice1(const std::string& odf_xml);

// Cell-by-cell equality between a loaded grid and a plain sheet.
bool same_cells(const odsaudit::Grid& grid, const PlainSheet& sheet, std::string* why = nullptr);

}  // namespace testsupport
