#include "odsaudit/container.hpp"

#include "odsaudit/error.hpp"

#include <openssl/evp.h>
#include <zlib.h>

#include <algorithm>
#include <fstream>
#include <iterator>

namespace odsaudit {

namespace {

constexpr std::uint32_t kEndOfCentralDir = 0x06054b50;
constexpr std::uint32_t kCentralHeader = 0x02014b50;
constexpr std::uint32_t kLocalHeader = 0x04034b50;

std::uint16_t le16(const std::vector<unsigned char>& d, std::size_t at) {
  return static_cast<std::uint16_t>(d[at] | (d[at + 1] << 8));
}

std::uint32_t le32(const std::vector<unsigned char>& d, std::size_t at) {
  return static_cast<std::uint32_t>(d[at]) |
         (static_cast<std::uint32_t>(d[at + 1]) << 8) |
         (static_cast<std::uint32_t>(d[at + 2]) << 16) |
         (static_cast<std::uint32_t>(d[at + 3]) << 24);
}

[[noreturn]] void not_zip(const std::string& why) {
  throw Error(ErrorCode::NotAZipArchive, "not a ZIP archive: " + why);
}

[[noreturn]] void unreadable(const std::string& part, const std::string& why) {
  throw Error(ErrorCode::UnreadableEntry,
              "unreadable entry '" + part + "': " + why);
}

}  // namespace

bool ContainerManifest::has_part(std::string_view name) const {
  return std::find(part_names.begin(), part_names.end(), name) != part_names.end();
}

std::string sha256_hex(std::span<const unsigned char> bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::IoError, "SHA-256 computation failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 0xf];
  }
  return out;
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::vector<unsigned char> bytes{std::istreambuf_iterator<char>(in), {}};
  return sha256_hex(bytes);
}

Container Container::open(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for reading");
  std::vector<unsigned char> bytes{std::istreambuf_iterator<char>(in), {}};
  if (in.bad()) throw Error(ErrorCode::IoError, "read error on " + path.string());
  return from_bytes(std::move(bytes));
}

Container Container::from_bytes(std::vector<unsigned char> bytes) {
  Container c;
  c.manifest_.source_digest = sha256_hex(bytes);
  c.data_ = std::make_shared<const std::vector<unsigned char>>(std::move(bytes));
  c.index();
  return c;
}

void Container::index() {
  const auto& d = *data_;
  if (d.size() < 22) not_zip("file too short");

  // The end-of-central-directory record sits within the last 64 KiB + 22.
  std::size_t lowest = d.size() > 0xFFFF + 22 ? d.size() - 0xFFFF - 22 : 0;
  std::size_t eocd = std::string::npos;
  for (std::size_t at = d.size() - 22 + 1; at-- > lowest;) {
    if (le32(d, at) == kEndOfCentralDir) {
      eocd = at;
      break;
    }
  }
  if (eocd == std::string::npos) not_zip("no end of central directory");

  std::uint16_t count = le16(d, eocd + 10);
  std::uint32_t dir_size = le32(d, eocd + 12);
  std::uint32_t dir_offset = le32(d, eocd + 16);
  if (dir_offset == 0xFFFFFFFFu) not_zip("ZIP64 archives are not supported");
  if (static_cast<std::size_t>(dir_offset) + dir_size > eocd) not_zip("central directory out of range");

  std::size_t at = dir_offset;
  for (std::uint16_t i = 0; i < count; ++i) {
    if (at + 46 > d.size() || le32(d, at) != kCentralHeader) not_zip("corrupt central directory");
    Entry e;
    e.flags = le16(d, at + 8);
    e.method = le16(d, at + 10);
    e.crc = le32(d, at + 16);
    e.compressed_size = le32(d, at + 20);
    e.uncompressed_size = le32(d, at + 24);
    std::uint16_t name_len = le16(d, at + 28);
    std::uint16_t extra_len = le16(d, at + 30);
    std::uint16_t comment_len = le16(d, at + 32);
    e.local_offset = le32(d, at + 42);
    if (at + 46 + name_len > d.size()) not_zip("corrupt central directory");
    e.name.assign(reinterpret_cast<const char*>(d.data() + at + 46), name_len);
    at += 46u + name_len + extra_len + comment_len;
    manifest_.part_names.push_back(e.name);
    entries_.push_back(std::move(e));
  }

  if (!manifest_.has_part("content.xml")) {
    throw Error(ErrorCode::MissingContentPart, "archive has no content.xml entry");
  }
  manifest_.content_part = "content.xml";
  if (manifest_.has_part("settings.xml")) manifest_.settings_part = "settings.xml";

  if (find("content.xml").flags & 0x1) {
    throw Error(ErrorCode::EncryptedContainer, "content.xml is encrypted");
  }
  // ODF password protection keeps the ZIP entries plain and declares the
  // encryption in the package manifest instead.
  if (manifest_.has_part("META-INF/manifest.xml")) {
    XmlElement m = read_part("META-INF/manifest.xml");
    for (const auto& entry : m.children) {
      if (entry.attribute_or("full-path", "") == manifest_.content_part &&
          entry.child("manifest", "encryption-data") != nullptr) {
        throw Error(ErrorCode::EncryptedContainer,
                    "content.xml is password-encrypted");
      }
    }
  }
}

const Container::Entry& Container::find(std::string_view part) const {
  for (const auto& e : entries_) {
    if (e.name == part) return e;
  }
  throw Error(ErrorCode::UnknownPart, "no such entry: " + std::string(part));
}

std::vector<unsigned char> Container::read_bytes(std::string_view part) const {
  const Entry& e = find(part);
  const auto& d = *data_;
  std::size_t at = e.local_offset;
  if (at + 30 > d.size() || le32(d, at) != kLocalHeader) unreadable(e.name, "bad local header");
  std::size_t start = at + 30 + le16(d, at + 26) + le16(d, at + 28);
  if (start + e.compressed_size > d.size()) unreadable(e.name, "truncated data");
  if (e.flags & 0x1) unreadable(e.name, "entry is encrypted");

  const unsigned char* src = d.data() + start;
  std::vector<unsigned char> out;
  if (e.method == 0) {
    out.assign(src, src + e.compressed_size);
  } else if (e.method == 8) {
    out.resize(e.uncompressed_size);
    z_stream zs{};
    if (inflateInit2(&zs, -MAX_WBITS) != Z_OK) unreadable(e.name, "inflate init failed");
    zs.next_in = const_cast<Bytef*>(src);
    zs.avail_in = e.compressed_size;
    zs.next_out = out.data();
    zs.avail_out = static_cast<uInt>(out.size());
    int rc = inflate(&zs, Z_FINISH);
    inflateEnd(&zs);
    if (rc != Z_STREAM_END || zs.total_out != e.uncompressed_size) {
      unreadable(e.name, "corrupt deflate stream");
    }
  } else {
    unreadable(e.name, "unsupported compression method " + std::to_string(e.method));
  }
  auto crc = crc32(0L, out.data(), static_cast<uInt>(out.size()));
  if (crc != e.crc) unreadable(e.name, "CRC mismatch");
  return out;
}

XmlElement Container::read_part(std::string_view part) const {
  return parse_xml(read_bytes(part));
}

}  // namespace odsaudit
