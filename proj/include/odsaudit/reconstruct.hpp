#pragma once

#include "odsaudit/cell.hpp"
#include "odsaudit/error.hpp"
#include "odsaudit/workbook.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace odsaudit {

// Inclusive upper bound: an instant, or the id of a record (which includes
// every record sorted before it).
struct Checkpoint {
  std::variant<Timestamp, std::string> at;

  // A full timestamp, a bare date (end of that day), or else a record id.
  static Checkpoint parse(std::string_view text);
  std::string to_string() const;
};

struct GridSnapshot {
  std::vector<Sheet> sheets;
  std::optional<Timestamp> as_of;  // timestamp of the last applied record
  // Length of the prefix of the sorted change list in effect.
  std::size_t applied_count = 0;

  const Sheet* find_sheet(std::string_view name) const;
  // Sheet names, order and cell contents agree.
  bool same_content(const GridSnapshot& other) const;
};

// Raised when an opaque change record blocks reconstruction.
// earliest_count is the smallest applied_count that can still be reached.
class UnreplayableError : public Error {
 public:
  UnreplayableError(const std::string& what, std::size_t earliest_count,
                    std::optional<Timestamp> earliest_at)
      : Error(ErrorCode::UnreplayableRecord, what),
        earliest_count_(earliest_count),
        earliest_at_(earliest_at) {}

  std::size_t earliest_count() const noexcept { return earliest_count_; }
  const std::optional<Timestamp>& earliest_at() const noexcept { return earliest_at_; }

 private:
  std::size_t earliest_count_;
  std::optional<Timestamp> earliest_at_;
};

// The current grid, with every record applied.
GridSnapshot current_snapshot(const Workbook& workbook);

// Undoes every record newest to oldest. Throws UnreplayableError when
// opaque change kinds are present.
GridSnapshot revert_all(const Workbook& workbook);

// Undoes records back to the newest opaque change (or all of them when
// there is none); applied_count tells how far it got.
GridSnapshot revert_partial(const Workbook& workbook);

// Number of sorted records covered by the checkpoint. Throws
// Error(CheckpointNotFound) for unknown record ids or when the workbook has
// no change history.
std::size_t resolve_checkpoint(const Workbook& workbook, const Checkpoint& checkpoint);

// Replays records after base.applied_count up to the checkpoint. Throws
// UnreplayableError when the checkpoint precedes the base.
GridSnapshot replay_to(const GridSnapshot& base, const Workbook& workbook,
                       const Checkpoint& checkpoint);
GridSnapshot replay_count(const GridSnapshot& base, const Workbook& workbook,
                          std::size_t count);

// revert_partial followed by replay_to.
GridSnapshot reconstruct_at(const Workbook& workbook, const Checkpoint& checkpoint);

// One JSON object per line, chronological. Field order is fixed.
std::string change_to_json_line(const ChangeRecord& record);
ChangeRecord change_from_json_line(std::string_view line);

void export_changes_file(const Workbook& workbook, std::ostream& out);
// Throws Error(IoError).
void export_changes_file(const Workbook& workbook, const std::filesystem::path& path);

// Throws Error(IoError) on malformed lines.
std::vector<ChangeRecord> import_changes(std::istream& in);

}  // namespace odsaudit
