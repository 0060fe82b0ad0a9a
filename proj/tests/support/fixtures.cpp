#include "fixtures.hpp"

#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace testsupport {

namespace fs = std::filesystem;

fs::path fixture_dir() { return ODSAUDIT_FIXTURE_DIR; }

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TempDir::TempDir() {
  std::random_device rd;
  for (int attempt = 0; attempt < 100; ++attempt) {
    auto candidate = fs::temp_directory_path() / ("odsaudit-test-" + std::to_string(rd()));
    if (fs::create_directory(candidate)) {
      path_ = candidate;
      return;
    }
  }
  throw std::runtime_error("cannot create a temporary directory");
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

std::string cashflow_xml() { return read_text(fixture_dir() / "cashflow" / "content.xml"); }

fs::path write_cashflow(const fs::path& dir) {
  auto path = dir / "cashflow.ods";
  write_ods(path, cashflow_xml());
  return path;
}

}  // namespace testsupport
