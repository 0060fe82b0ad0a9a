#include "odsaudit/reconstruct.hpp"

#include "json.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>

namespace odsaudit {

using ordered_json = nlohmann::ordered_json;

namespace {

// A record's location translated from final-document coordinates to the
// coordinates in effect right after the record itself.
struct Step {
  const ChangeRecord* record = nullptr;
  bool skip = false;
  int row = 0;     // content
  int column = 0;  // content
  int index = 0;   // structural
};

struct Shift {
  bool rows = true;
  bool insertion = true;
  int index = 0;
  int count = 1;
};

// `later` lists the structural records after the one being placed, newest
// first, each in the coordinates right after itself.
int unshift_element(int v, const std::vector<Shift>& later, bool rows, const ChangeRecord& rec) {
  for (const auto& sh : later) {
    if (sh.rows != rows) continue;
    if (sh.insertion) {
      if (v < sh.index) continue;
      if (v >= sh.index + sh.count) {
        v -= sh.count;
      } else {
        throw Error(ErrorCode::UnreplayableRecord,
                    "change " + rec.id + " lies inside a block inserted after it");
      }
    } else if (v >= sh.index) {
      v += sh.count;
    }
  }
  return v;
}

int unshift_gap(int g, const std::vector<Shift>& later, bool rows) {
  for (const auto& sh : later) {
    if (sh.rows != rows || g <= sh.index) continue;
    g += sh.insertion ? -sh.count : sh.count;
  }
  return g;
}

std::vector<Step> plan(const Workbook& wb) {
  std::vector<Step> steps(wb.changes.size());
  std::map<std::string, std::vector<Shift>, std::less<>> later;  // per sheet
  for (std::size_t i = wb.changes.size(); i-- > 0;) {
    const ChangeRecord& rec = wb.changes[i];
    Step& s = steps[i];
    s.record = &rec;
    s.skip = rec.state == AcceptanceState::Rejected;
    if (s.skip) continue;
    const auto& shifts = later[rec.sheet];
    if (rec.kind == ChangeKind::CellContent) {
      s.row = unshift_element(rec.address->row, shifts, true, rec);
      s.column = unshift_element(rec.address->column, shifts, false, rec);
      continue;
    }
    bool rows = is_row_kind(rec.kind);
    s.index = is_insertion(rec.kind) ? unshift_element(rec.position->index, shifts, rows, rec)
                                     : unshift_gap(rec.position->index, shifts, rows);
    later[rec.sheet].push_back({rows, is_insertion(rec.kind), s.index, rec.position->count});
  }
  return steps;
}

Sheet& sheet_of(GridSnapshot& snap, const std::string& name) {
  for (auto& s : snap.sheets) {
    if (s.name == name) return s;
  }
  throw Error(ErrorCode::BadCellAddress, "no sheet named " + name);
}

void undo(GridSnapshot& snap, const Step& s) {
  if (s.skip) return;
  const ChangeRecord& r = *s.record;
  Grid& g = sheet_of(snap, r.sheet).cells;
  int count = r.position ? r.position->count : 0;
  switch (r.kind) {
    case ChangeKind::CellContent: g.set(s.row, s.column, r.before); break;
    case ChangeKind::RowInsertion: g.erase_rows(s.index, count); break;
    case ChangeKind::ColumnInsertion: g.erase_columns(s.index, count); break;
    case ChangeKind::RowDeletion: g.insert_rows(s.index, count, true); break;
    case ChangeKind::ColumnDeletion: g.insert_columns(s.index, count, true); break;
  }
}

void redo(GridSnapshot& snap, const Step& s) {
  if (s.skip) return;
  const ChangeRecord& r = *s.record;
  Grid& g = sheet_of(snap, r.sheet).cells;
  int count = r.position ? r.position->count : 0;
  switch (r.kind) {
    case ChangeKind::CellContent: g.set(s.row, s.column, r.after); break;
    case ChangeKind::RowInsertion: g.insert_rows(s.index, count, false); break;
    case ChangeKind::ColumnInsertion: g.insert_columns(s.index, count, false); break;
    case ChangeKind::RowDeletion: g.erase_rows(s.index, count); break;
    case ChangeKind::ColumnDeletion: g.erase_columns(s.index, count); break;
  }
}

std::optional<Timestamp> as_of(const Workbook& wb, std::size_t count) {
  if (count == 0) return std::nullopt;
  return wb.changes[count - 1].timestamp;
}

// Records sorted at or before the newest opaque change cannot be undone.
std::size_t opaque_barrier(const Workbook& wb) {
  std::size_t barrier = 0;
  for (const auto& o : wb.opaque_changes) {
    if (!o.timestamp) return wb.changes.size();
    std::size_t k = 0;
    for (const auto& r : wb.changes) {
      if (r.timestamp < *o.timestamp ||
          (r.timestamp == *o.timestamp && r.document_order < o.document_order)) {
        ++k;
      }
    }
    barrier = std::max(barrier, k);
  }
  return barrier;
}

ordered_json content_json(const CellContent& c) {
  ordered_json j;
  auto kind = c.kind == ContentKind::Empty ? "empty" : c.kind == ContentKind::Static ? "static" : "formula";
  j["kind"] = kind;
  const StaticValue* v = c.static_value ? &*c.static_value : nullptr;
  j["type"] = v ? ordered_json(std::string(to_string(v->type))) : ordered_json(nullptr);
  j["lexical"] = v ? ordered_json(v->lexical) : ordered_json(nullptr);
  j["currency"] = v && v->currency_code ? ordered_json(*v->currency_code) : ordered_json(nullptr);
  j["formula"] = c.formula_source ? ordered_json(*c.formula_source) : ordered_json(nullptr);
  if (!c.cached_result) {
    j["result"] = nullptr;
  } else if (const auto* e = std::get_if<ErrorToken>(&*c.cached_result)) {
    j["result"] = ordered_json{{"error", e->text}};
  } else {
    const auto& r = std::get<StaticValue>(*c.cached_result);
    ordered_json rj;
    rj["type"] = to_string(r.type);
    rj["lexical"] = r.lexical;
    rj["currency"] = r.currency_code ? ordered_json(*r.currency_code) : ordered_json(nullptr);
    j["result"] = rj;
  }
  return j;
}

[[noreturn]] void bad_line(const std::string& why) {
  throw Error(ErrorCode::IoError, "malformed changes line: " + why);
}

StaticValue value_from_json(const ordered_json& j) {
  StaticValue v;
  auto type = parse_value_type(j.at("type").get<std::string>());
  if (!type) bad_line("unknown value type");
  v.type = *type;
  v.lexical = j.at("lexical").get<std::string>();
  if (j.contains("currency") && !j["currency"].is_null()) v.currency_code = j["currency"].get<std::string>();
  if (is_numeric(v.type)) {
    double d = 0;
    auto [p, ec] = std::from_chars(v.lexical.data(), v.lexical.data() + v.lexical.size(), d);
    if (ec != std::errc()) bad_line("non-numeric lexical '" + v.lexical + "'");
    v.numeric = d;
  }
  return v;
}

CellContent content_from_json(const ordered_json& j) {
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "empty") return CellContent::empty();
  if (kind == "static") return CellContent::make_static(value_from_json(j));
  if (kind != "formula") bad_line("unknown content kind '" + kind + "'");
  std::optional<CachedResult> result;
  const auto& r = j.at("result");
  if (r.is_object()) {
    if (r.contains("error")) result = ErrorToken{r["error"].get<std::string>()};
    else result = value_from_json(r);
  }
  return CellContent::make_formula(j.at("formula").get<std::string>(), std::move(result));
}

}  // namespace

Checkpoint Checkpoint::parse(std::string_view text) {
  if (auto ts = parse_timestamp(text)) return {*ts};
  if (auto d = parse_date(text)) {
    return {Timestamp(*d) + std::chrono::hours(23) + std::chrono::minutes(59) + std::chrono::seconds(59)};
  }
  return {std::string(text)};
}

std::string Checkpoint::to_string() const {
  if (const auto* ts = std::get_if<Timestamp>(&at)) return format_timestamp(*ts);
  return std::get<std::string>(at);
}

const Sheet* GridSnapshot::find_sheet(std::string_view name) const {
  for (const auto& s : sheets) {
    if (s.name == name) return &s;
  }
  return nullptr;
}

bool GridSnapshot::same_content(const GridSnapshot& other) const {
  if (sheets.size() != other.sheets.size()) return false;
  for (std::size_t i = 0; i < sheets.size(); ++i) {
    if (sheets[i].name != other.sheets[i].name) return false;
    if (!sheets[i].cells.same_content(other.sheets[i].cells)) return false;
  }
  return true;
}

GridSnapshot current_snapshot(const Workbook& workbook) {
  GridSnapshot snap;
  snap.sheets = workbook.sheets;
  snap.applied_count = workbook.changes.size();
  snap.as_of = as_of(workbook, snap.applied_count);
  return snap;
}

GridSnapshot revert_partial(const Workbook& workbook) {
  std::size_t barrier = opaque_barrier(workbook);
  std::vector<Step> steps = plan(workbook);
  GridSnapshot snap = current_snapshot(workbook);
  for (std::size_t i = steps.size(); i > barrier; --i) undo(snap, steps[i - 1]);
  snap.applied_count = barrier;
  snap.as_of = as_of(workbook, barrier);
  return snap;
}

GridSnapshot revert_all(const Workbook& workbook) {
  if (!workbook.opaque_changes.empty()) {
    std::size_t barrier = opaque_barrier(workbook);
    const auto& o = workbook.opaque_changes.front();
    throw UnreplayableError("change " + o.id + " (" + o.element +
                                ") cannot be reverted; earliest reachable checkpoint covers " +
                                std::to_string(barrier) + " records",
                            barrier, as_of(workbook, barrier));
  }
  return revert_partial(workbook);
}

std::size_t resolve_checkpoint(const Workbook& workbook, const Checkpoint& checkpoint) {
  if (workbook.recording == RecordingStatus::NoHistoryFound) {
    throw Error(ErrorCode::CheckpointNotFound, "no change history to reconstruct from");
  }
  const auto& changes = workbook.changes;
  if (const auto* ts = std::get_if<Timestamp>(&checkpoint.at)) {
    auto it = std::upper_bound(changes.begin(), changes.end(), *ts,
                               [](Timestamp t, const ChangeRecord& r) { return t < r.timestamp; });
    return static_cast<std::size_t>(it - changes.begin());
  }
  const auto& id = std::get<std::string>(checkpoint.at);
  auto it = std::find_if(changes.begin(), changes.end(),
                         [&](const ChangeRecord& r) { return r.id == id; });
  if (it == changes.end()) {
    throw Error(ErrorCode::CheckpointNotFound, "no change record with id '" + id + "'");
  }
  return static_cast<std::size_t>(it - changes.begin()) + 1;
}

GridSnapshot replay_count(const GridSnapshot& base, const Workbook& workbook, std::size_t count) {
  count = std::min(count, workbook.changes.size());
  if (count < base.applied_count) {
    throw UnreplayableError("checkpoint precedes the earliest reachable state (" +
                                std::to_string(base.applied_count) + " records)",
                            base.applied_count, as_of(workbook, base.applied_count));
  }
  std::vector<Step> steps = plan(workbook);
  GridSnapshot snap = base;
  for (std::size_t i = base.applied_count; i < count; ++i) redo(snap, steps[i]);
  snap.applied_count = count;
  snap.as_of = as_of(workbook, count);
  return snap;
}

GridSnapshot replay_to(const GridSnapshot& base, const Workbook& workbook,
                       const Checkpoint& checkpoint) {
  GridSnapshot snap = replay_count(base, workbook, resolve_checkpoint(workbook, checkpoint));
  if (const auto* ts = std::get_if<Timestamp>(&checkpoint.at)) snap.as_of = *ts;
  return snap;
}

GridSnapshot reconstruct_at(const Workbook& workbook, const Checkpoint& checkpoint) {
  resolve_checkpoint(workbook, checkpoint);  // fail before doing any work
  return replay_to(revert_partial(workbook), workbook, checkpoint);
}

std::string change_to_json_line(const ChangeRecord& r) {
  ordered_json j;
  j["id"] = r.id;
  j["kind"] = to_string(r.kind);
  j["sheet"] = r.sheet;
  j["address"] = render_address(r);
  if (r.position) {
    j["position"] = ordered_json{{"index", r.position->index}, {"count", r.position->count}};
  } else {
    j["position"] = nullptr;
  }
  j["author"] = r.author;
  j["timestamp"] = format_timestamp(r.timestamp);
  j["state"] = to_string(r.state);
  j["before"] = content_json(r.before);
  j["after"] = content_json(r.after);
  j["document_order"] = r.document_order;
  return j.dump();
}

ChangeRecord change_from_json_line(std::string_view line) {
  ordered_json j;
  try {
    j = ordered_json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    bad_line(e.what());
  }
  try {
    ChangeRecord r;
    r.id = j.at("id").get<std::string>();
    auto kind = parse_change_kind(j.at("kind").get<std::string>());
    if (!kind) bad_line("unknown kind");
    r.kind = *kind;
    r.sheet = j.at("sheet").get<std::string>();
    if (r.kind == ChangeKind::CellContent) {
      r.address = parse_a1(j.at("address").get<std::string>(), r.sheet);
      if (!r.address) bad_line("bad address");
    } else {
      const auto& p = j.at("position");
      r.position = Position{p.at("index").get<int>(), p.at("count").get<int>()};
    }
    r.author = j.at("author").get<std::string>();
    auto ts = parse_timestamp(j.at("timestamp").get<std::string>());
    if (!ts) bad_line("bad timestamp");
    r.timestamp = *ts;
    auto state = parse_acceptance_state(j.at("state").get<std::string>());
    if (!state) bad_line("bad state");
    r.state = *state;
    r.before = content_from_json(j.at("before"));
    r.after = content_from_json(j.at("after"));
    if (j.contains("document_order")) r.document_order = j["document_order"].get<std::size_t>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    bad_line(e.what());
  }
}

void export_changes_file(const Workbook& workbook, std::ostream& out) {
  for (const auto& r : workbook.changes) out << change_to_json_line(r) << '\n';
}

void export_changes_file(const Workbook& workbook, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  export_changes_file(workbook, out);
  out.flush();
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

std::vector<ChangeRecord> import_changes(std::istream& in) {
  std::vector<ChangeRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    out.push_back(change_from_json_line(line));
  }
  return out;
}

}  // namespace odsaudit
