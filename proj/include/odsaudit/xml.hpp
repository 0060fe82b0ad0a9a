#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace odsaudit {

struct XmlAttribute {
  std::string uri;
  std::string ns;  // normalized namespace family, see XmlElement::ns
  std::string name;
  std::string value;

  bool operator==(const XmlAttribute& o) const {
    return ns == o.ns && name == o.name && value == o.value;
  }
};

// One element of a parsed part. Text is stored ElementTree-style: `text` is
// the character data before the first child, each child's `tail` is the
// character data that follows it.
//
// `uri` is the namespace URI exactly as declared in the part. `ns` is the
// namespace family after normalization: OpenOffice 1.0 and ODF 1.x URIs for
// the same vocabulary both map to one short name ("table", "office", ...).
// Unknown namespaces keep their URI as the family.
struct XmlElement {
  std::string uri;
  std::string ns;
  std::string name;
  std::vector<XmlAttribute> attributes;
  std::vector<XmlElement> children;
  std::string text;
  std::string tail;

  bool is(std::string_view family, std::string_view local) const {
    return ns == family && name == local;
  }

  // Attribute lookup by local name; the same attribute moved between
  // namespaces across format generations (table:value-type vs
  // office:value-type).
  const std::string* attribute(std::string_view local) const;
  std::string attribute_or(std::string_view local, std::string fallback) const;

  const XmlElement* child(std::string_view family, std::string_view local) const;

  // Concatenated character data of the subtree, expanding text:s, text:tab
  // and text:line-break.
  std::string inner_text() const;

  // Structural equality over the normalized vocabulary; URIs are ignored.
  bool operator==(const XmlElement& o) const;
};

// Maps a namespace URI to its family name, or returns the URI unchanged.
std::string namespace_family(std::string_view uri);

// Parses a complete document. Throws XmlError with the byte offset of the
// first error.
XmlElement parse_xml(std::span<const unsigned char> bytes);
XmlElement parse_xml(std::string_view text);

}  // namespace odsaudit
