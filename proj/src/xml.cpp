#include "odsaudit/xml.hpp"

#include "odsaudit/error.hpp"

#include <expat.h>

#include <array>
#include <cstdlib>
#include <memory>
#include <utility>

namespace odsaudit {

namespace {

struct FamilyEntry {
  std::string_view uri;
  std::string_view family;
};

constexpr std::array kFamilies = {
    // ODF 1.x
    FamilyEntry{"urn:oasis:names:tc:opendocument:xmlns:office:1.0", "office"},
    FamilyEntry{"urn:oasis:names:tc:opendocument:xmlns:table:1.0", "table"},
    FamilyEntry{"urn:oasis:names:tc:opendocument:xmlns:text:1.0", "text"},
    FamilyEntry{"urn:oasis:names:tc:opendocument:xmlns:style:1.0", "style"},
    FamilyEntry{"urn:oasis:names:tc:opendocument:xmlns:meta:1.0", "meta"},
    FamilyEntry{"urn:oasis:names:tc:opendocument:xmlns:config:1.0", "config"},
    FamilyEntry{"urn:oasis:names:tc:opendocument:xmlns:datastyle:1.0", "number"},
    FamilyEntry{"urn:oasis:names:tc:opendocument:xmlns:xsl-fo-compatible:1.0", "fo"},
    FamilyEntry{"urn:oasis:names:tc:opendocument:xmlns:manifest:1.0", "manifest"},
    // OpenOffice.org 1.0
    FamilyEntry{"http://openoffice.org/2000/office", "office"},
    FamilyEntry{"http://openoffice.org/2000/table", "table"},
    FamilyEntry{"http://openoffice.org/2000/text", "text"},
    FamilyEntry{"http://openoffice.org/2000/style", "style"},
    FamilyEntry{"http://openoffice.org/2000/meta", "meta"},
    FamilyEntry{"http://openoffice.org/2001/config", "config"},
    FamilyEntry{"http://openoffice.org/2000/datastyle", "number"},
    FamilyEntry{"http://www.w3.org/1999/XSL/Format", "fo"},
    FamilyEntry{"http://openoffice.org/2001/manifest", "manifest"},
    // shared
    FamilyEntry{"http://purl.org/dc/elements/1.1/", "dc"},
    FamilyEntry{"http://www.w3.org/1999/xlink", "xlink"},
};

constexpr char kSeparator = '\x01';

struct Builder {
  std::vector<XmlElement*> stack;
  std::unique_ptr<XmlElement> root;

  static void split(const XML_Char* qualified, std::string& uri, std::string& ns,
                    std::string& local) {
    std::string_view q{qualified};
    auto sep = q.find(kSeparator);
    if (sep == std::string_view::npos) {
      uri.clear();
      ns.clear();
      local = std::string(q);
    } else {
      uri = std::string(q.substr(0, sep));
      ns = namespace_family(uri);
      local = std::string(q.substr(sep + 1));
    }
  }

  static void on_start(void* data, const XML_Char* name, const XML_Char** atts) {
    auto* self = static_cast<Builder*>(data);
    XmlElement element;
    split(name, element.uri, element.ns, element.name);
    for (auto a = atts; *a != nullptr; a += 2) {
      XmlAttribute attr;
      split(a[0], attr.uri, attr.ns, attr.name);
      attr.value = a[1];
      element.attributes.push_back(std::move(attr));
    }
    if (self->stack.empty()) {
      self->root = std::make_unique<XmlElement>(std::move(element));
      self->stack.push_back(self->root.get());
    } else {
      auto& children = self->stack.back()->children;
      children.push_back(std::move(element));
      self->stack.push_back(&children.back());
    }
  }

  static void on_end(void* data, const XML_Char*) {
    static_cast<Builder*>(data)->stack.pop_back();
  }

  static void on_text(void* data, const XML_Char* s, int len) {
    auto* self = static_cast<Builder*>(data);
    if (self->stack.empty()) return;
    XmlElement* top = self->stack.back();
    if (top->children.empty()) {
      top->text.append(s, static_cast<std::size_t>(len));
    } else {
      top->children.back().tail.append(s, static_cast<std::size_t>(len));
    }
  }
};

struct ParserDeleter {
  void operator()(XML_Parser p) const { XML_ParserFree(p); }
};

}  // namespace

std::string namespace_family(std::string_view uri) {
  for (const auto& entry : kFamilies) {
    if (entry.uri == uri) return std::string(entry.family);
  }
  return std::string(uri);
}

const std::string* XmlElement::attribute(std::string_view local) const {
  for (const auto& a : attributes) {
    if (a.name == local) return &a.value;
  }
  return nullptr;
}

std::string XmlElement::attribute_or(std::string_view local,
                                     std::string fallback) const {
  const auto* v = attribute(local);
  return v ? *v : std::move(fallback);
}

const XmlElement* XmlElement::child(std::string_view family,
                                    std::string_view local) const {
  for (const auto& c : children) {
    if (c.is(family, local)) return &c;
  }
  return nullptr;
}

std::string XmlElement::inner_text() const {
  std::string out = text;
  for (const auto& c : children) {
    if (c.is("text", "s")) {
      int count = std::atoi(c.attribute_or("c", "1").c_str());
      out.append(static_cast<std::size_t>(count > 0 ? count : 1), ' ');
    } else if (c.is("text", "tab")) {
      out += '\t';
    } else if (c.is("text", "line-break")) {
      out += '\n';
    } else {
      out += c.inner_text();
    }
    out += c.tail;
  }
  return out;
}

bool XmlElement::operator==(const XmlElement& o) const {
  return ns == o.ns && name == o.name && attributes == o.attributes &&
         text == o.text && tail == o.tail && children == o.children;
}

XmlElement parse_xml(std::span<const unsigned char> bytes) {
  std::unique_ptr<XML_ParserStruct, ParserDeleter> parser{
      XML_ParserCreateNS("UTF-8", kSeparator)};
  if (!parser) throw XmlError("cannot allocate XML parser", 0);
  Builder builder;
  XML_SetUserData(parser.get(), &builder);
  XML_SetElementHandler(parser.get(), &Builder::on_start, &Builder::on_end);
  XML_SetCharacterDataHandler(parser.get(), &Builder::on_text);
  if (XML_Parse(parser.get(), reinterpret_cast<const char*>(bytes.data()),
                static_cast<int>(bytes.size()), XML_TRUE) == XML_STATUS_ERROR) {
    auto offset = XML_GetCurrentByteIndex(parser.get());
    throw XmlError(std::string("malformed XML: ") +
                       XML_ErrorString(XML_GetErrorCode(parser.get())) +
                       " at byte " + std::to_string(offset),
                   offset < 0 ? 0 : static_cast<std::size_t>(offset));
  }
  if (!builder.root) throw XmlError("malformed XML: no root element", 0);
  return std::move(*builder.root);
}

XmlElement parse_xml(std::string_view text) {
  return parse_xml(std::span<const unsigned char>(
      reinterpret_cast<const unsigned char*>(text.data()), text.size()));
}

}  // namespace odsaudit
