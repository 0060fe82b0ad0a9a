#include "odsaudit/service.hpp"

#include "odsaudit/error.hpp"
#include "odsaudit/filter.hpp"
#include "odsaudit/reconstruct.hpp"
#include "odsaudit/report.hpp"
#include "odsaudit/workbook.hpp"

#include "httplib.h"
#include "json.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <random>
#include <shared_mutex>

namespace odsaudit {

using ordered_json = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

constexpr const char* kJson = "application/json";

struct Session {
  fs::path path;
  Workbook workbook;
};

ordered_json envelope() {
  ordered_json j;
  j["schema_version"] = 1;
  return j;
}

void reply(httplib::Response& res, int status, const ordered_json& body) {
  res.status = status;
  res.set_content(body.dump(), kJson);
}

void fail(httplib::Response& res, int status, const std::string& message) {
  ordered_json j = envelope();
  j["error"] = message;
  reply(res, status, j);
}

bool within(const fs::path& root, const fs::path& target) {
  auto r = root.begin(), t = target.begin();
  for (; r != root.end(); ++r, ++t) {
    if (r->empty()) continue;  // trailing separator
    if (t == target.end() || *r != *t) return false;
  }
  return true;
}

std::string random_id() {
  static thread_local std::mt19937_64 rng{std::random_device{}()};
  char buf[33];
  std::snprintf(buf, sizeof buf, "%016llx%016llx", static_cast<unsigned long long>(rng()),
                static_cast<unsigned long long>(rng()));
  return buf;
}

ordered_json content_json(const CellContent& c) {
  ordered_json j;
  switch (c.kind) {
    case ContentKind::Empty: j["kind"] = "empty"; break;
    case ContentKind::Static: j["kind"] = "static"; break;
    case ContentKind::Formula: j["kind"] = "formula"; break;
  }
  if (c.static_value) {
    j["text"] = display_text(*c.static_value);
    j["type"] = to_string(c.static_value->type);
  } else if (c.formula_source) {
    j["text"] = *c.formula_source;
  } else {
    j["text"] = "";
  }
  j["result"] = c.cached_result ? ordered_json(render_result(*c.cached_result)) : ordered_json(nullptr);
  j["rendered"] = render_content(c);
  return j;
}

ordered_json snapshot_json(const GridSnapshot& snap) {
  ordered_json j = envelope();
  j["as_of"] = snap.as_of ? ordered_json(format_timestamp(*snap.as_of)) : ordered_json(nullptr);
  j["applied_count"] = snap.applied_count;
  ordered_json sheets = ordered_json::array();
  for (const auto& s : snap.sheets) {
    ordered_json sj;
    sj["name"] = s.name;
    sj["protected"] = s.is_protected;
    sj["row_count"] = s.cells.row_count();
    sj["column_count"] = s.cells.column_count();
    ordered_json cells = ordered_json::array();
    const auto& rows = s.cells.rows();
    for (std::size_t r = 0; r < rows.size(); ++r) {
      for (std::size_t c = 0; c < rows[r].size(); ++c) {
        const Cell& cell = rows[r][c];
        if (cell.content.is_empty() && !cell.unrecoverable) continue;
        ordered_json cj;
        cj["address"] = to_a1(CellAddress{s.name, static_cast<int>(c), static_cast<int>(r)});
        cj["row"] = r;
        cj["column"] = c;
        cj.update(content_json(cell.content));
        cj["protected"] = cell.is_protected;
        cj["unrecoverable"] = cell.unrecoverable;
        cells.push_back(std::move(cj));
      }
    }
    sj["cells"] = std::move(cells);
    sheets.push_back(std::move(sj));
  }
  j["sheets"] = std::move(sheets);
  return j;
}

}  // namespace

struct AuditService::Impl {
  ServiceOptions options;
  fs::path root;
  httplib::Server server;
  std::shared_mutex mutex;
  std::map<std::string, std::shared_ptr<const Session>> sessions;

  std::shared_ptr<const Session> find(const std::string& id) {
    std::shared_lock lock(mutex);
    auto it = sessions.find(id);
    return it == sessions.end() ? nullptr : it->second;
  }

  // Snapshot at the request's "at" parameter, or the current grid.
  // Returns false after writing an error response.
  bool snapshot_for(const httplib::Request& req, httplib::Response& res, const Session& s,
                    GridSnapshot& out) {
    if (!req.has_param("at") || req.get_param_value("at").empty()) {
      out = current_snapshot(s.workbook);
      return true;
    }
    try {
      out = reconstruct_at(s.workbook, Checkpoint::parse(req.get_param_value("at")));
      return true;
    } catch (const UnreplayableError& e) {
      fail(res, 409, e.what());
    } catch (const Error& e) {
      fail(res, e.code() == ErrorCode::CheckpointNotFound ? 400 : 422, e.what());
    }
    return false;
  }

  void create_session(const httplib::Request& req, httplib::Response& res) {
    std::string requested;
    try {
      auto body = nlohmann::json::parse(req.body);
      requested = body.at("path").get<std::string>();
    } catch (const nlohmann::json::exception&) {
      fail(res, 400, "expected a JSON body {\"path\": ...}");
      return;
    }
    std::error_code ec;
    fs::path p(requested);
    if (p.is_relative()) p = root / p;
    fs::path target = fs::weakly_canonical(p, ec);
    if (ec || !within(root, target) || !fs::is_regular_file(target, ec)) {
      fail(res, 404, "no such file under the service root");
      return;
    }
    auto session = std::make_shared<Session>();
    session->path = target;
    try {
      session->workbook = load_workbook(target);
    } catch (const std::exception& e) {
      fail(res, 422, e.what());
      return;
    }
    std::string id;
    {
      std::unique_lock lock(mutex);
      do {
        id = random_id();
      } while (sessions.contains(id));
      sessions.emplace(id, session);
    }
    ordered_json j = envelope();
    j["session_id"] = id;
    j["summary"] = summary_json(summarize(session->workbook.changes));
    j["recording_enabled"] = session->workbook.recording == RecordingStatus::Enabled;
    j["notices"] = session->workbook.notices;
    reply(res, 201, j);
  }

  void changes(const Session& s, const httplib::Request& req, httplib::Response& res) {
    std::vector<FilterSpec> specs;
    try {
      std::size_t n = req.get_param_value_count("filter");
      for (std::size_t i = 0; i < n; ++i) {
        std::string text = req.get_param_value("filter", i);
        if (text.empty()) continue;
        specs.push_back(parse_filter(text));
      }
    } catch (const Error& e) {
      fail(res, 400, e.what());
      return;
    }
    auto records = apply_filters(specs, s.workbook);
    ordered_json j = envelope();
    ordered_json list = ordered_json::array();
    for (const auto& r : records) {
      ordered_json rj = change_json(r);
      rj["raw"] = ordered_json::parse(change_to_json_line(r));
      list.push_back(std::move(rj));
    }
    j["records"] = std::move(list);
    j["summary"] = summary_json(summarize(records));
    reply(res, 200, j);
  }

  void findings(const Session& s, const httplib::Request& req, httplib::Response& res) {
    GridSnapshot snap;
    if (!snapshot_for(req, res, s, snap)) return;
    auto found = scan(std::span<const Sheet>(snap.sheets), options.config);
    ordered_json j = envelope();
    j["as_of"] = snap.as_of ? ordered_json(format_timestamp(*snap.as_of)) : ordered_json(nullptr);
    j["applied_count"] = snap.applied_count;
    ordered_json list = ordered_json::array();
    for (const auto& f : found) list.push_back(finding_json(f));
    j["findings"] = std::move(list);
    reply(res, 200, j);
  }

  void routes() {
    server.Post("/sessions", [this](const httplib::Request& req, httplib::Response& res) {
      create_session(req, res);
    });
    auto with_session = [this](auto handler) {
      return [this, handler](const httplib::Request& req, httplib::Response& res) {
        auto s = find(req.matches[1]);
        if (!s) {
          fail(res, 404, "unknown session");
          return;
        }
        handler(*s, req, res);
      };
    };
    server.Get(R"(/sessions/([0-9a-f]+)/changes)",
               with_session([this](const Session& s, const httplib::Request& req,
                                   httplib::Response& res) { changes(s, req, res); }));
    server.Get(R"(/sessions/([0-9a-f]+)/findings)",
               with_session([this](const Session& s, const httplib::Request& req,
                                   httplib::Response& res) { findings(s, req, res); }));
    server.Get(R"(/sessions/([0-9a-f]+)/snapshot)",
               with_session([this](const Session& s, const httplib::Request& req,
                                   httplib::Response& res) {
                 GridSnapshot snap;
                 if (snapshot_for(req, res, s, snap)) reply(res, 200, snapshot_json(snap));
               }));
    server.Get(R"(/sessions/([0-9a-f]+)/summary)",
               with_session([](const Session& s, const httplib::Request&, httplib::Response& res) {
                 ordered_json j = envelope();
                 j["summary"] = summary_json(summarize(s.workbook.changes));
                 j["recording_enabled"] = s.workbook.recording == RecordingStatus::Enabled;
                 reply(res, 200, j);
               }));
    if (options.ui_dir) server.set_mount_point("/", options.ui_dir->string());
  }
};

AuditService::AuditService(ServiceOptions options) : impl_(std::make_unique<Impl>()) {
  impl_->options = std::move(options);
  std::error_code ec;
  impl_->root = fs::weakly_canonical(fs::absolute(impl_->options.root), ec);
  if (ec) impl_->root = impl_->options.root;
  impl_->routes();
}

AuditService::~AuditService() { stop(); }

int AuditService::bind(const std::string& host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host);
  return impl_->server.bind_to_port(host, port) ? port : -1;
}

void AuditService::run() { impl_->server.listen_after_bind(); }

void AuditService::stop() {
  if (impl_) impl_->server.stop();
}

void AuditService::wait_until_ready() { impl_->server.wait_until_ready(); }

}  // namespace odsaudit
