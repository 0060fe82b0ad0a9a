#pragma once

#include "zip_writer.hpp"

#include <filesystem>
#include <string>

namespace testsupport {

std::filesystem::path fixture_dir();
std::string read_text(const std::filesystem::path& path);

// Fresh directory removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

// content.xml of the cash-flow fixture.
std::string cashflow_xml();
// Packs the cash-flow fixture into `dir`/cashflow.ods and returns the path.
std::filesystem::path write_cashflow(const std::filesystem::path& dir);

}  // namespace testsupport
