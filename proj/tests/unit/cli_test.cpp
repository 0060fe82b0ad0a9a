#include "doctest.h"

#include "fixtures.hpp"

#include "odsaudit/cli.hpp"
#include "odsaudit/container.hpp"

#include "json.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

using namespace odsaudit;
using namespace testsupport;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::size_t lines(const std::string& s) {
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("commands on the cash-flow fixture leave it untouched") {
    TempDir dir;
    std::string file = write_cashflow(dir.path()).string();
    std::string digest = sha256_file(file);
    auto unchanged = [&] { CHECK(sha256_file(file) == digest); };

    auto r = cli({"changes", file});
    CHECK(r.code == kExitOk);
    CHECK(lines(r.out) == 24);
    CHECK(r.out.find("<empty> -> =K8-K18-K20 {$5,150 (currency)}") != std::string::npos);
    unchanged();

    r = cli({"changes", file, "--filter", "+kind=row-insert", "--format", "ndjson"});
    CHECK(r.code == kExitOk);
    CHECK(lines(r.out) == 1);
    CHECK(nlohmann::json::parse(r.out).at("change_details") == "1 row at row 17");
    unchanged();

    r = cli({"--format", "csv", "changes", file, "--filter", "-transition=empty->any"});
    CHECK(r.code == kExitOk);
    CHECK(lines(r.out) == 16);
    unchanged();

    r = cli({"summary", file});
    CHECK(r.code == kExitOk);
    CHECK(r.out.starts_with("23 Change Records between: 2003-03-28 and 2003-03-28\n"));
    unchanged();

    r = cli({"scan", file, "--at", "2003-03-28T21:55:00", "--format", "ndjson"});
    CHECK(r.code == kExitOk);
    CHECK(r.out.find("\"SA4-range-boundary\"") != std::string::npos);
    unchanged();

    r = cli({"verify", file});
    CHECK(r.code == kExitOk);
    CHECK(r.out.find("change recording: enabled") != std::string::npos);
    CHECK(r.out.find("source sha256: " + digest) != std::string::npos);
    unchanged();

    r = cli({"export-changes", file});
    CHECK(r.code == kExitOk);
    CHECK(lines(r.out) == 23);
    unchanged();

    r = cli({"reconstruct", file, "--at", "ct5"});
    CHECK(r.code == kExitOk);
    CHECK(r.out.starts_with("# Cash Flow\n"));
    CHECK(r.err.find("reconstructed 7 of 23") != std::string::npos);
    unchanged();

    auto out_dir = dir / "snap";
    r = cli({"reconstruct", file, "--at", "2003-03-28T21:55:00", "--out", out_dir.string()});
    CHECK(r.code == kExitOk);
    std::string csv = read_text(out_dir / "Cash Flow.csv");
    CHECK(csv.find("Travel,") != std::string::npos);
    CHECK(csv.find("=SUM(E11:E16)") != std::string::npos);
    unchanged();
  }

  TEST_CASE("exit codes") {
    TempDir dir;
    std::string file = write_cashflow(dir.path()).string();
    CHECK(cli({}).code == kExitUsage);
    CHECK(cli({"frobnicate", file}).code == kExitUsage);
    CHECK(cli({"changes"}).code == kExitUsage);
    CHECK(cli({"--format", "xml", "changes", file}).code == kExitUsage);
    CHECK(cli({"changes", (dir / "missing.ods").string()}).code == kExitFileError);
    write_file(dir / "junk.ods", {'n', 'o', 'p', 'e'});
    CHECK(cli({"changes", (dir / "junk.ods").string()}).code == kExitFileError);
    CHECK(cli({"changes", file, "--filter", "+date=2002-01-02..2001-12-01"}).code == kExitInvalidFilter);
    CHECK(cli({"scan", file, "--at", "no-such-id"}).code == kExitCheckpoint);
    CHECK(cli({"export-changes", file, "--out", file}).code == kExitFileError);

    std::ofstream(dir / "bad.conf") << "check.SA99 = on\n";
    CHECK(cli({"--config", (dir / "bad.conf").string(), "scan", file}).code == kExitUsage);
    std::ofstream(dir / "good.conf") << "check.SA4 = off\n";
    auto r = cli({"--config", (dir / "good.conf").string(), "scan", file, "--at", "2003-03-28T21:55:00"});
    CHECK(r.code == kExitOk);
    CHECK(r.out.find("SA4") == std::string::npos);

    write_ods(dir / "plain.ods",
              "<office:document-content xmlns:office=\"urn:oasis:names:tc:opendocument:xmlns:office:1.0\" "
              "xmlns:table=\"urn:oasis:names:tc:opendocument:xmlns:table:1.0\"><office:body>"
              "<office:spreadsheet><table:table table:name=\"S\"/></office:spreadsheet></office:body>"
              "</office:document-content>");
    r = cli({"verify", (dir / "plain.ods").string()});
    CHECK(r.code == kExitNoHistory);
    CHECK(r.out.find("no-history-found") != std::string::npos);
    CHECK(cli({"reconstruct", (dir / "plain.ods").string()}).code == kExitCheckpoint);

    r = cli({"--help"});
    CHECK(r.code == kExitOk);
    CHECK(r.out.find("reconstruct") != std::string::npos);
  }
}
