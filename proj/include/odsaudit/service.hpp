#pragma once

#include "odsaudit/analyzer.hpp"

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

namespace odsaudit {

struct ServiceOptions {
  // Only files under this directory may be opened.
  std::filesystem::path root;
  // Static bundle served from "/" when set.
  std::optional<std::filesystem::path> ui_dir;
  CheckConfig config = CheckConfig::defaults();
};

// Read-only HTTP service over audit sessions. Endpoints:
//   POST /sessions {"path": ...}
//   GET  /sessions/{id}/changes?filter=...&filter=...
//   GET  /sessions/{id}/findings?at=...
//   GET  /sessions/{id}/snapshot?at=...
//   GET  /sessions/{id}/summary
// Every JSON body carries "schema_version": 1.
class AuditService {
 public:
  explicit AuditService(ServiceOptions options);
  ~AuditService();
  AuditService(const AuditService&) = delete;
  AuditService& operator=(const AuditService&) = delete;

  // Port 0 picks a free port. Returns the bound port, or -1.
  int bind(const std::string& host, int port);
  // Serves until stop(); call after bind.
  void run();
  void stop();
  // Blocks until the server accepts connections.
  void wait_until_ready();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace odsaudit
