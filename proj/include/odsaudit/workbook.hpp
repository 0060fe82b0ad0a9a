#pragma once

#include "odsaudit/cell.hpp"
#include "odsaudit/container.hpp"
#include "odsaudit/timestamp.hpp"
#include "odsaudit/xml.hpp"

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace odsaudit {

enum class ChangeKind {
  CellContent,
  RowInsertion,
  RowDeletion,
  ColumnInsertion,
  ColumnDeletion,
};

std::string_view to_string(ChangeKind kind);  // "cell-content", "row-insertion", ...
std::optional<ChangeKind> parse_change_kind(std::string_view text);
// Change column label: "Cell content", "Insertion", "Deletion".
std::string_view change_label(ChangeKind kind);
// Summary label: "Cell content", "Row insertion", ...
std::string_view kind_label(ChangeKind kind);

bool is_structural(ChangeKind kind);
bool is_row_kind(ChangeKind kind);
bool is_insertion(ChangeKind kind);

enum class AcceptanceState { Pending, Accepted, Rejected };

std::string_view to_string(AcceptanceState state);
std::optional<AcceptanceState> parse_acceptance_state(std::string_view text);

// 0-based first row/column and number of rows/columns.
struct Position {
  int index = 0;
  int count = 1;
  bool operator==(const Position&) const = default;
};

// One tracked change. Addresses and positions are expressed in the
// coordinates of the current document: the host application keeps them
// updated as later rows and columns are inserted or deleted.
struct ChangeRecord {
  std::string id;
  ChangeKind kind = ChangeKind::CellContent;
  std::string sheet;
  std::optional<CellAddress> address;  // cell-content only
  std::optional<Position> position;    // structural only
  std::string author;
  Timestamp timestamp{};
  AcceptanceState state = AcceptanceState::Pending;
  CellContent before;
  CellContent after;  // resolved, see resolve_after_content
  std::size_t document_order = 0;

  bool operator==(const ChangeRecord&) const = default;
};

// A change element of a kind we do not model (movement, rejection, sheet
// insertion). Kept so that reconstruction can refuse to cross it.
struct OpaqueChange {
  std::string id;
  std::string element;
  std::string author;
  std::optional<Timestamp> timestamp;
  std::size_t document_order = 0;
};

enum class RecordingStatus { Enabled, NoHistoryFound };

std::string_view to_string(RecordingStatus status);

struct Workbook {
  ContainerManifest manifest;
  std::vector<Sheet> sheets;
  std::vector<ChangeRecord> changes;  // sorted by (timestamp, document order)
  std::vector<OpaqueChange> opaque_changes;
  RecordingStatus recording = RecordingStatus::NoHistoryFound;
  std::vector<std::string> notices;

  const Sheet* find_sheet(std::string_view name) const;
};

// Builds the model from a parsed content part. Throws Error(BadCellAddress)
// for change records that point outside the sheet list.
Workbook build_workbook(const XmlElement& content, ContainerManifest manifest = {});

// Opens the container read-only and builds the workbook.
Workbook load_workbook(const std::filesystem::path& path);

// Sorts by (timestamp, document order).
void sort_changes(std::vector<ChangeRecord>& changes);

// Before-content of the chronologically next record at the same address, or
// the current grid content there.
CellContent resolve_after_content(const Workbook& workbook, const ChangeRecord& record);

// "<empty> -> =K8-K18-K20 {$5,150 (currency)}" or "1 row at row 17".
std::string render_change_detail(const ChangeRecord& record);

// Address column text: "K22" for content, "17" for rows, "C" for columns.
std::string render_address(const ChangeRecord& record);

// Normalizes a stored formula to canonical text when it parses, otherwise
// to its prefix-stripped source.
std::string canonical_formula_text(std::string_view raw, const CellAddress& host);

}  // namespace odsaudit
