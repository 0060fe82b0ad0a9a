#include "odsaudit/cli.hpp"

#include "odsaudit/analyzer.hpp"
#include "odsaudit/container.hpp"
#include "odsaudit/error.hpp"
#include "odsaudit/filter.hpp"
#include "odsaudit/reconstruct.hpp"
#include "odsaudit/report.hpp"
#include "odsaudit/service.hpp"
#include "odsaudit/workbook.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iostream>
#include <optional>

namespace odsaudit {

namespace fs = std::filesystem;

namespace {

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidFilter: return kExitInvalidFilter;
    case ErrorCode::CheckpointNotFound:
    case ErrorCode::UnreplayableRecord: return kExitCheckpoint;
    case ErrorCode::InvalidConfig: return kExitUsage;
    default: return kExitFileError;
  }
}

std::string cell_text(const Cell& cell) {
  const CellContent& c = cell.content;
  if (c.formula_source) return *c.formula_source;
  if (c.static_value) return c.static_value->lexical;
  return "";
}

std::string snapshot_csv(const Sheet& sheet) {
  std::string out;
  for (const auto& row : sheet.cells.rows()) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c > 0) out += ',';
      out += csv_field(cell_text(row[c]));
    }
    out += "\r\n";
  }
  return out;
}

std::string safe_file_name(const std::string& sheet) {
  std::string out;
  for (char ch : sheet) {
    auto u = static_cast<unsigned char>(ch);
    out += (std::isalnum(u) || ch == '-' || ch == '_' || ch == ' ' || ch == '.' || u >= 0x80) ? ch : '_';
  }
  if (out.empty() || out == "." || out == "..") out = "_" + out;
  return out;
}

struct Options {
  std::string format = "table";
  std::string config_path;
  std::string file;
  std::vector<std::string> filters;
  std::string at;
  std::string out_path;
  std::string root = ".";
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string ui;
};

std::vector<FilterSpec> parse_filters(const std::vector<std::string>& texts) {
  std::vector<FilterSpec> specs;
  for (const auto& t : texts) specs.push_back(parse_filter(t));
  return specs;
}

CheckConfig config_from(const Options& o) {
  return o.config_path.empty() ? CheckConfig::defaults() : load_check_config(o.config_path);
}

// Refuses output paths that would land on the audited file.
void guard_output(const fs::path& out, const fs::path& input) {
  std::error_code ec;
  if (fs::exists(out, ec) && fs::equivalent(out, input, ec)) {
    throw Error(ErrorCode::IoError, "refusing to write over the input file " + input.string());
  }
}

int cmd_changes(const Options& o, OutputFormat fmt, std::ostream& out) {
  auto specs = parse_filters(o.filters);
  Workbook wb = load_workbook(o.file);
  auto records = apply_filters(specs, wb);
  out << render_change_table(records, fmt);
  return kExitOk;
}

int cmd_summary(const Options& o, OutputFormat fmt, std::ostream& out) {
  auto specs = parse_filters(o.filters);
  Workbook wb = load_workbook(o.file);
  auto records = apply_filters(specs, wb);
  Summary s = summarize(records);
  if (fmt == OutputFormat::Ndjson) out << summary_json(s).dump() << "\n";
  else out << render_summary(s);
  return kExitOk;
}

int cmd_scan(const Options& o, OutputFormat fmt, std::ostream& out) {
  CheckConfig config = config_from(o);
  Workbook wb = load_workbook(o.file);
  GridSnapshot snap = o.at.empty() ? current_snapshot(wb) : reconstruct_at(wb, Checkpoint::parse(o.at));
  auto findings = scan(std::span<const Sheet>(snap.sheets), config);
  out << render_findings(findings, fmt);
  return kExitOk;
}

int cmd_reconstruct(const Options& o, std::ostream& out, std::ostream& err) {
  Workbook wb = load_workbook(o.file);
  GridSnapshot snap;
  if (!o.at.empty()) {
    snap = reconstruct_at(wb, Checkpoint::parse(o.at));
  } else if (wb.recording == RecordingStatus::NoHistoryFound) {
    throw Error(ErrorCode::CheckpointNotFound, "no change history to reconstruct from");
  } else {
    snap = revert_partial(wb);
  }
  std::size_t placeholders = 0;
  for (const auto& s : snap.sheets) {
    for (const auto& row : s.cells.rows()) {
      placeholders += static_cast<std::size_t>(
          std::count_if(row.begin(), row.end(), [](const Cell& c) { return c.unrecoverable; }));
    }
  }
  err << "reconstructed " << snap.applied_count << " of " << wb.changes.size() << " change records";
  if (snap.as_of) err << " as of " << format_timestamp(*snap.as_of);
  err << "\n";
  if (placeholders > 0) err << placeholders << " cells in re-inserted rows/columns are unrecoverable\n";

  if (o.out_path.empty()) {
    for (const auto& s : snap.sheets) out << "# " << s.name << "\n" << snapshot_csv(s);
    return kExitOk;
  }
  fs::path dir(o.out_path);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + dir.string() + ": " + ec.message());
  for (const auto& s : snap.sheets) {
    fs::path target = dir / (safe_file_name(s.name) + ".csv");
    guard_output(target, o.file);
    std::ofstream f(target, std::ios::binary | std::ios::trunc);
    if (!f) throw Error(ErrorCode::IoError, "cannot write " + target.string());
    f << snapshot_csv(s);
    out << target.string() << "\n";
  }
  return kExitOk;
}

int cmd_export(const Options& o, std::ostream& out) {
  Workbook wb = load_workbook(o.file);
  if (o.out_path.empty() || o.out_path == "-") {
    export_changes_file(wb, out);
  } else {
    guard_output(o.out_path, o.file);
    export_changes_file(wb, fs::path(o.out_path));
  }
  return kExitOk;
}

int cmd_verify(const Options& o, std::ostream& out) {
  Workbook wb = load_workbook(o.file);
  out << "change recording: " << to_string(wb.recording) << "\n";
  out << "change records: " << wb.changes.size() << "\n";
  out << "source sha256: " << wb.manifest.source_digest << "\n";
  for (const auto& n : wb.notices) out << "notice: " << n << "\n";
  return wb.recording == RecordingStatus::Enabled ? kExitOk : kExitNoHistory;
}

int cmd_serve(const Options& o, std::ostream& out, std::ostream& err) {
  ServiceOptions so;
  so.root = o.root;
  if (!o.ui.empty()) so.ui_dir = o.ui;
  so.config = config_from(o);
  AuditService service(std::move(so));
  int port = service.bind(o.host, o.port);
  if (port < 0) {
    err << "cannot bind " << o.host << ":" << o.port << "\n";
    return kExitFileError;
  }
  out << "serving " << o.root << " on http://" << o.host << ":" << port << "/" << std::endl;
  service.run();
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Read-only audit of spreadsheet change history", "odsaudit"};
  app.require_subcommand(1);
  Options o;
  app.add_option("--format", o.format, "table, csv or ndjson")
      ->check(CLI::IsMember({"table", "csv", "ndjson"}));
  app.add_option("--config", o.config_path, "check configuration file");

  auto file_arg = [&](CLI::App* sub) {
    sub->add_option("file", o.file, "spreadsheet file")->required();
    sub->fallthrough();
  };

  auto* changes = app.add_subcommand("changes", "list change records");
  file_arg(changes);
  changes->add_option("--filter", o.filters, "filter such as '+kind=row-insert' (repeatable)");

  auto* summary = app.add_subcommand("summary", "count change records");
  file_arg(summary);
  summary->add_option("--filter", o.filters, "filter (repeatable)");

  auto* scan_cmd = app.add_subcommand("scan", "run static checks");
  file_arg(scan_cmd);
  scan_cmd->add_option("--at", o.at, "checkpoint: timestamp, date or record id");

  auto* reconstruct = app.add_subcommand("reconstruct", "rebuild the sheets at a checkpoint");
  file_arg(reconstruct);
  reconstruct->add_option("--at", o.at, "checkpoint (default: before the first change)");
  reconstruct->add_option("--out", o.out_path, "directory for one CSV per sheet");

  auto* exp = app.add_subcommand("export-changes", "write the changes file");
  file_arg(exp);
  exp->add_option("--out", o.out_path, "output path (default: standard output)");

  auto* verify = app.add_subcommand("verify", "check that change recording is on");
  file_arg(verify);

  auto* serve = app.add_subcommand("serve", "run the local HTTP service");
  serve->fallthrough();
  serve->add_option("--root", o.root, "directory whose files may be opened");
  serve->add_option("--host", o.host, "bind address");
  serve->add_option("--port", o.port, "port (0 picks one)");
  serve->add_option("--ui", o.ui, "directory with the UI bundle");

  // Filter texts may start with '-', which the parser would take for a flag.
  std::vector<std::string> joined;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--filter" && i + 1 < args.size()) {
      joined.push_back("--filter=" + args[++i]);
    } else {
      joined.push_back(args[i]);
    }
  }
  std::vector<std::string> reversed(joined.rbegin(), joined.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "odsaudit: " << e.what() << "\n";
    return kExitUsage;
  }

  OutputFormat fmt = *parse_output_format(o.format);
  try {
    if (changes->parsed()) return cmd_changes(o, fmt, out);
    if (summary->parsed()) return cmd_summary(o, fmt, out);
    if (scan_cmd->parsed()) return cmd_scan(o, fmt, out);
    if (reconstruct->parsed()) return cmd_reconstruct(o, out, err);
    if (exp->parsed()) return cmd_export(o, out);
    if (verify->parsed()) return cmd_verify(o, out);
    if (serve->parsed()) return cmd_serve(o, out, err);
  } catch (const Error& e) {
    err << "odsaudit: " << to_string(e.code()) << ": " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "odsaudit: " << e.what() << "\n";
    return kExitFileError;
  }
  return kExitUsage;
}

}  // namespace odsaudit
