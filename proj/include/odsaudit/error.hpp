#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace odsaudit {

enum class ErrorCode {
  NotAZipArchive,
  MissingContentPart,
  UnreadableEntry,
  EncryptedContainer,
  UnknownPart,
  MalformedXml,
  BadCellAddress,
  SyntaxError,
  NotFoldable,
  InvalidFilter,
  CheckpointNotFound,
  UnreplayableRecord,
  InvalidConfig,
  IoError,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Raised by the XML reader; offset is the byte offset within the part.
class XmlError : public Error {
 public:
  XmlError(const std::string& what, std::size_t offset)
      : Error(ErrorCode::MalformedXml, what), offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

class FormulaSyntaxError : public Error {
 public:
  FormulaSyntaxError(std::size_t position, std::string expected,
                     const std::string& what)
      : Error(ErrorCode::SyntaxError, what),
        position_(position),
        expected_(std::move(expected)) {}

  std::size_t position() const noexcept { return position_; }
  const std::string& expected() const noexcept { return expected_; }

 private:
  std::size_t position_;
  std::string expected_;
};

}  // namespace odsaudit
