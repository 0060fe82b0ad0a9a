#pragma once

#include "odsaudit/cell.hpp"
#include "odsaudit/workbook.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace odsaudit {

// Declaration order is the tie-break order within a cell.
enum class CheckId {
  UnparsableFormula,     // SA0
  ConstantEquation,      // SA1
  ErrorValue,            // SA2
  BlankReference,        // SA3
  RangeBoundary,         // SA4
  FillInconsistency,     // SA5
  DuplicateReference,    // SA6
  OverlappingRanges,     // SA7
  ProtectionHole,        // SA8
  LiteralParameter,      // SA9
  FunctionCategory,      // SA10
  ExternalReference,     // SA11
};

// "SA1-constant-equation" etc.
std::string_view to_string(CheckId id);
// Accepts the full id or its "SAn" prefix.
std::optional<CheckId> parse_check_id(std::string_view text);

enum class Severity { Info, Warn, Alert };

std::string_view to_string(Severity s);
std::optional<Severity> parse_severity(std::string_view text);

struct Finding {
  CheckId check = CheckId::ConstantEquation;
  Severity severity = Severity::Info;
  std::string sheet;
  std::optional<CellAddress> cell;  // absent for sheet-level findings
  std::string message;
  std::map<std::string, std::string> evidence;

  // "D4", or the sheet name for sheet-level findings.
  std::string location() const;
  bool operator==(const Finding&) const = default;
};

struct CheckConfig {
  std::set<CheckId> disabled;
  bool require_protection = false;
  // Upper-case function name -> 1-based argument positions that should be
  // references rather than literals.
  std::map<std::string, std::set<int>> reference_expected;
  // Upper-case function name -> category.
  std::map<std::string, std::string> function_category;
  std::set<std::string> deny_categories;
  // Functions whose range arguments are checked for boundary errors.
  std::set<std::string> aggregates;

  bool enabled(CheckId id) const { return !disabled.contains(id); }

  static CheckConfig defaults();
};

// Plain key/value lines, '#' comments:
//   check.SA5 = off
//   require_protection = true
//   reference_expected = NPV:1, PV:1
//   category.trigonometry = SIN, COS, TAN
//   deny_categories = trigonometry
//   aggregates = SUM, AVERAGE
// Keys present replace the corresponding defaults. Throws Error(InvalidConfig).
CheckConfig parse_check_config(std::string_view text);
CheckConfig load_check_config(const std::filesystem::path& path);

// Findings sorted by (sheet order, row, column, check); sheet-level findings
// precede the sheet's cell findings.
std::vector<Finding> scan(std::span<const Sheet> sheets, const CheckConfig& config);
std::vector<Finding> scan(const Workbook& workbook, const CheckConfig& config);

}  // namespace odsaudit
