#include "doctest.h"

#include "fixtures.hpp"

#include "odsaudit/container.hpp"
#include "odsaudit/service.hpp"

#include "httplib.h"
#include "json.hpp"

#include <thread>

using namespace odsaudit;
using namespace testsupport;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class Running {
 public:
  explicit Running(const fs::path& root) : service_(ServiceOptions{root, std::nullopt, CheckConfig::defaults()}) {
    port_ = service_.bind("127.0.0.1", 0);
    REQUIRE(port_ > 0);
    thread_ = std::thread([this] { service_.run(); });
    service_.wait_until_ready();
  }
  ~Running() {
    service_.stop();
    thread_.join();
  }
  httplib::Client client() const {
    httplib::Client c("127.0.0.1", port_);
    c.set_read_timeout(10);
    return c;
  }

 private:
  AuditService service_;
  int port_ = -1;
  std::thread thread_;
};

std::string q(const std::string& s) { return httplib::detail::encode_query_param(s); }

std::string open_session(httplib::Client& c, const std::string& path) {
  auto res = c.Post("/sessions", json{{"path", path}}.dump(), "application/json");
  REQUIRE(res);
  REQUIRE(res->status == 201);
  auto j = json::parse(res->body);
  CHECK(j.at("schema_version") == 1);
  return j.at("session_id");
}

json get(httplib::Client& c, const std::string& path, int want = 200) {
  auto res = c.Get(path);
  REQUIRE(res);
  CHECK_MESSAGE(res->status == want, path << " -> " << res->status << " " << res->body);
  auto j = json::parse(res->body);
  CHECK(j.at("schema_version") == 1);
  return j;
}

}  // namespace

TEST_SUITE("service") {
  TEST_CASE("session endpoints on the cash-flow fixture") {
    TempDir dir;
    auto file = write_cashflow(dir.path());
    std::string digest = sha256_file(file);
    Running server(dir.path());
    auto c = server.client();

    std::string id = open_session(c, "cashflow.ods");
    CHECK(id.size() == 32);
    CHECK(sha256_file(file) == digest);

    auto all = get(c, "/sessions/" + id + "/changes");
    auto summary = get(c, "/sessions/" + id + "/summary");
    CHECK(all.at("records").size() == 23);
    CHECK(summary.at("summary").at("total") == all.at("records").size());
    CHECK(summary.at("summary").at("total") == all.at("summary").at("total"));
    CHECK(summary.at("recording_enabled") == true);
    CHECK(all.at("records")[0].at("raw").at("id") == all.at("records")[0].at("id"));

    auto some = get(c, "/sessions/" + id + "/changes?filter=" + q("-transition=empty->any") +
                           "&filter=");
    CHECK(some.at("records").size() == 15);
    CHECK(some.at("summary").at("total") == 15);
    auto both = get(c, "/sessions/" + id + "/changes?filter=" + q("+kind=content") +
                           "&filter=" + q("+range=K22:M22"));
    CHECK(both.at("records").size() == 3);
    get(c, "/sessions/" + id + "/changes?filter=" + q("+colour=red"), 400);

    auto findings = get(c, "/sessions/" + id + "/findings?at=" + q("2003-03-28T21:55:00"));
    int sa4 = 0;
    for (const auto& f : findings.at("findings")) {
      if (f.at("check") == "SA4-range-boundary") {
        ++sa4;
        CHECK(f.at("cell") == "N18");
      }
    }
    CHECK(sa4 == 1);
    CHECK(findings.at("applied_count") == 9);

    auto snap = get(c, "/sessions/" + id + "/snapshot?at=ct5");
    CHECK(snap.at("applied_count") == 7);
    bool travel = false;
    for (const auto& cell : snap.at("sheets")[0].at("cells")) {
      if (cell.at("address") == "A17") travel = cell.at("text") == "Travel";
    }
    CHECK_FALSE(travel);
    auto later = get(c, "/sessions/" + id + "/snapshot?at=" + q("2003-03-28T21:55:00"));
    for (const auto& cell : later.at("sheets")[0].at("cells")) {
      if (cell.at("address") == "A17") travel = cell.at("text") == "Travel";
    }
    CHECK(travel);
    get(c, "/sessions/" + id + "/snapshot?at=nope", 400);
    get(c, "/sessions/" + id + "/snapshot");

    get(c, "/sessions/0123456789abcdef0123456789abcdef/changes", 404);
    CHECK(sha256_file(file) == digest);
  }

  TEST_CASE("paths outside the root are refused") {
    TempDir outside;
    auto secret = write_cashflow(outside.path());
    TempDir dir;
    fs::create_directory(dir / "sub");
    write_cashflow(dir / "sub");
    std::error_code ec;
    fs::create_symlink(secret, dir / "link.ods", ec);
    Running server(dir.path());
    auto c = server.client();

    std::vector<std::string> attempts = {
        "../" + outside.path().filename().string() + "/cashflow.ods",
        secret.string(),
        "sub/../../" + outside.path().filename().string() + "/cashflow.ods",
        "sub/../sub/../../etc/passwd",
        "/etc/passwd",
        "sub",
        "missing.ods",
    };
    if (!ec) attempts.push_back("link.ods");
    for (const auto& p : attempts) {
      auto res = c.Post("/sessions", json{{"path", p}}.dump(), "application/json");
      REQUIRE(res);
      CHECK_MESSAGE(res->status == 404, p);
    }
    open_session(c, "sub/cashflow.ods");
    open_session(c, (dir / "sub" / "cashflow.ods").string());

    auto bad = c.Post("/sessions", "not json", "application/json");
    REQUIRE(bad);
    CHECK(bad->status == 400);
    write_file(dir / "junk.ods", {'x'});
    auto junk = c.Post("/sessions", json{{"path", "junk.ods"}}.dump(), "application/json");
    REQUIRE(junk);
    CHECK(junk->status == 422);
  }
}
