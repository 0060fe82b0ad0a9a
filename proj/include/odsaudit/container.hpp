#pragma once

#include "odsaudit/xml.hpp"

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace odsaudit {

struct ContainerManifest {
  std::vector<std::string> part_names;
  std::string content_part;
  std::optional<std::string> settings_part;
  // Lower-case hex SHA-256 of the input file bytes, taken at open.
  std::string source_digest;

  bool has_part(std::string_view name) const;
};

// Read-only view of an OpenDocument ZIP container. The whole file is read
// once into memory at open; nothing is ever written back or beside it.
// Instances are immutable and safe to share between threads.
class Container {
 public:
  // Throws Error: NotAZipArchive, MissingContentPart, UnreadableEntry,
  // EncryptedContainer, IoError.
  static Container open(const std::filesystem::path& path);
  static Container from_bytes(std::vector<unsigned char> bytes);

  const ContainerManifest& manifest() const { return manifest_; }

  // Decompressed bytes of one entry. Throws UnknownPart / UnreadableEntry.
  std::vector<unsigned char> read_bytes(std::string_view part) const;

  // Parsed XML of one entry. Throws UnknownPart / UnreadableEntry /
  // XmlError (MalformedXml).
  XmlElement read_part(std::string_view part) const;

 private:
  struct Entry {
    std::string name;
    std::uint16_t flags = 0;
    std::uint16_t method = 0;
    std::uint32_t crc = 0;
    std::uint32_t compressed_size = 0;
    std::uint32_t uncompressed_size = 0;
    std::uint32_t local_offset = 0;
  };

  Container() = default;
  void index();
  const Entry& find(std::string_view part) const;

  std::shared_ptr<const std::vector<unsigned char>> data_;
  std::vector<Entry> entries_;
  ContainerManifest manifest_;
};

// Lower-case hex SHA-256.
std::string sha256_hex(std::span<const unsigned char> bytes);
std::string sha256_file(const std::filesystem::path& path);

}  // namespace odsaudit
