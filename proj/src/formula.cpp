#include "odsaudit/formula.hpp"

#include "odsaudit/error.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>
#include <system_error>

namespace odsaudit {

namespace {

bool is_word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '$';
}

std::string upper(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

class Parser {
 public:
  Parser(std::string_view text, std::size_t base, const CellAddress& host)
      : s_(text), base_(base), host_(host) {}

  Node parse_all() {
    Node n = comparison();
    skip_ws();
    if (pos_ != s_.size()) fail("operator or end of formula");
    return n;
  }

 private:
  std::string_view s_;
  std::size_t pos_ = 0;
  std::size_t base_;
  const CellAddress& host_;

  [[noreturn]] void fail(const std::string& expected) const {
    std::size_t where = base_ + pos_;
    throw FormulaSyntaxError(where, expected,
                             "syntax error at position " + std::to_string(where) +
                                 ": expected " + expected);
  }

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  char peek() {
    skip_ws();
    return pos_ < s_.size() ? s_[pos_] : '\0';
  }

  bool eat(std::string_view token) {
    skip_ws();
    if (s_.substr(pos_).starts_with(token)) {
      pos_ += token.size();
      return true;
    }
    return false;
  }

  static Node binary(Op op, Node lhs, Node rhs) {
    Node n;
    n.kind = NodeKind::Binary;
    n.op = op;
    n.children.push_back(std::move(lhs));
    n.children.push_back(std::move(rhs));
    return n;
  }

  Node comparison() {
    Node lhs = concat();
    for (;;) {
      Op op = Op::None;
      if (eat("<>")) op = Op::Ne;
      else if (eat("<=")) op = Op::Le;
      else if (eat(">=")) op = Op::Ge;
      else if (eat("=")) op = Op::Eq;
      else if (eat("<")) op = Op::Lt;
      else if (eat(">")) op = Op::Gt;
      else return lhs;
      lhs = binary(op, std::move(lhs), concat());
    }
  }

  Node concat() {
    Node lhs = additive();
    while (eat("&")) lhs = binary(Op::Concat, std::move(lhs), additive());
    return lhs;
  }

  Node additive() {
    Node lhs = multiplicative();
    for (;;) {
      if (eat("+")) lhs = binary(Op::Add, std::move(lhs), multiplicative());
      else if (eat("-")) lhs = binary(Op::Sub, std::move(lhs), multiplicative());
      else return lhs;
    }
  }

  Node multiplicative() {
    Node lhs = power();
    for (;;) {
      if (eat("*")) lhs = binary(Op::Mul, std::move(lhs), power());
      else if (eat("/")) lhs = binary(Op::Div, std::move(lhs), power());
      else return lhs;
    }
  }

  Node power() {
    Node base = unary();
    if (eat("^")) return binary(Op::Pow, std::move(base), power());
    return base;
  }

  Node unary() {
    Op op = Op::None;
    if (eat("-")) op = Op::Negate;
    else if (eat("+")) op = Op::Plus;
    if (op == Op::None) return postfix();
    Node n;
    n.kind = NodeKind::Unary;
    n.op = op;
    n.children.push_back(unary());
    return n;
  }

  Node postfix() {
    Node a = atom();
    if (eat("%")) {
      Node n;
      n.kind = NodeKind::Percent;
      n.children.push_back(std::move(a));
      return n;
    }
    return a;
  }

  Node atom() {
    char c = peek();
    if (c == '(') {
      ++pos_;
      Node inner = comparison();
      if (!eat(")")) fail("')'");
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '.' && pos_ + 1 < s_.size() &&
         std::isdigit(static_cast<unsigned char>(s_[pos_ + 1])))) {
      return number();
    }
    if (c == '"') return text();
    if (c == '[') return bracket_reference();
    if (c == '#') {
      Node n;
      n.kind = NodeKind::Error;
      n.text = error_literal();
      return n;
    }
    if (c == '\'') return reference_or_range(quoted_reference(host_.sheet));
    if (c == '$' || c == '_' || std::isalpha(static_cast<unsigned char>(c))) return word();
    fail("operand");
  }

  Node number() {
    std::size_t start = pos_;
    auto digits = [&] {
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    };
    digits();
    if (pos_ < s_.size() && s_[pos_] == '.') {
      ++pos_;
      digits();
    }
    if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
      std::size_t save = pos_++;
      if (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-')) ++pos_;
      if (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
        digits();
      } else {
        pos_ = save;
      }
    }
    Node n;
    n.kind = NodeKind::Number;
    auto [ptr, ec] = std::from_chars(s_.data() + start, s_.data() + pos_, n.number);
    if (ec != std::errc{} || ptr != s_.data() + pos_) {
      pos_ = start;
      fail("number");
    }
    return n;
  }

  Node text() {
    ++pos_;  // opening quote
    Node n;
    n.kind = NodeKind::Text;
    for (;;) {
      if (pos_ >= s_.size()) fail("closing '\"'");
      char c = s_[pos_++];
      if (c == '"') {
        if (pos_ < s_.size() && s_[pos_] == '"') {
          n.text += '"';
          ++pos_;
        } else {
          return n;
        }
      } else {
        n.text += c;
      }
    }
  }

  std::string error_literal() {
    std::size_t start = pos_;
    std::size_t end = start + 1;  // past '#'
    while (end < s_.size() &&
           (std::isalnum(static_cast<unsigned char>(s_[end])) || s_[end] == '/')) {
      ++end;
    }
    if (end < s_.size() && (s_[end] == '!' || s_[end] == '?')) ++end;
    // Longest valid prefix, so "#N/A/2" reads as #N/A divided by 2.
    for (; end > start + 1; --end) {
      std::string token(s_.substr(start, end - start));
      if (looks_like_error_token(token)) {
        pos_ = end;
        return token;
      }
    }
    fail("error value");
  }

  std::string quoted_name() {
    ++pos_;  // opening quote
    std::string name;
    for (;;) {
      if (pos_ >= s_.size()) fail("closing \"'\"");
      char c = s_[pos_++];
      if (c == '\'') {
        if (pos_ < s_.size() && s_[pos_] == '\'') {
          name += '\'';
          ++pos_;
        } else {
          return name;
        }
      } else {
        name += c;
      }
    }
  }

  std::string read_word() {
    std::size_t start = pos_;
    while (pos_ < s_.size() && is_word_char(s_[pos_])) ++pos_;
    return std::string(s_.substr(start, pos_ - start));
  }

  // "Sheet1.A1", "$Sheet1.$A$1" or "A1" (sheet from `implicit_sheet`).
  std::optional<Reference> reference_from_word(std::string_view w,
                                               const std::string& implicit_sheet) const {
    Reference r;
    auto dot = w.rfind('.');
    if (dot == std::string_view::npos) {
      auto a = parse_a1(w, implicit_sheet);
      if (!a) return std::nullopt;
      r.address = *a;
      return r;
    }
    std::string_view sheet = w.substr(0, dot);
    if (sheet.starts_with('$')) sheet.remove_prefix(1);
    if (sheet.empty() || sheet.find('$') != std::string_view::npos) return std::nullopt;
    auto a = parse_a1(w.substr(dot + 1), std::string(sheet));
    if (!a) return std::nullopt;
    r.address = *a;
    r.sheet_explicit = true;
    return r;
  }

  // At a quote: 'Sheet'.A1 or 'file:///x.ods'#$Sheet.A1
  Reference quoted_reference(const std::string& implicit_sheet) {
    std::size_t start = pos_;
    std::string quoted = quoted_name();
    std::optional<std::string> external;
    std::string sheet;
    if (pos_ < s_.size() && s_[pos_] == '#') {
      ++pos_;
      external = quoted;
      if (pos_ < s_.size() && s_[pos_] == '$') ++pos_;
      if (pos_ < s_.size() && s_[pos_] == '\'') {
        sheet = quoted_name();
      } else {
        std::size_t ws = pos_;
        while (pos_ < s_.size() && s_[pos_] != '.' && is_word_char(s_[pos_])) ++pos_;
        sheet = std::string(s_.substr(ws, pos_ - ws));
      }
    } else {
      sheet = quoted;
    }
    if (pos_ >= s_.size() || s_[pos_] != '.') fail("'.' after sheet name");
    ++pos_;
    std::string cell = read_word();
    auto a = parse_a1(cell, sheet.empty() ? implicit_sheet : sheet);
    if (!a) {
      pos_ = start;
      fail("cell reference");
    }
    Reference r;
    r.address = *a;
    r.sheet_explicit = !sheet.empty();
    r.external_source = std::move(external);
    return r;
  }

  Node reference_or_range(Reference start) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == ':') {
      ++pos_;
      skip_ws();
      Reference end;
      if (pos_ < s_.size() && s_[pos_] == '\'') {
        end = quoted_reference(start.address.sheet);
      } else {
        std::size_t at = pos_;
        std::string w = read_word();
        auto r = reference_from_word(w, start.address.sheet);
        if (!r) {
          pos_ = at;
          fail("range end reference");
        }
        end = *r;
      }
      Node n;
      n.kind = NodeKind::RangeRef;
      n.ref = std::move(start);
      n.range_end = std::move(end);
      return n;
    }
    Node n;
    n.kind = NodeKind::CellRef;
    n.ref = std::move(start);
    return n;
  }

  Node word() {
    std::size_t start = pos_;
    std::string w = read_word();
    if (peek() == '(') {
      if (w.find('$') != std::string::npos) {
        pos_ = start;
        fail("function name");
      }
      ++pos_;
      Node call;
      call.kind = NodeKind::Call;
      call.text = upper(w);
      if (eat(")")) return call;
      for (;;) {
        call.children.push_back(comparison());
        if (eat(";") || eat(",")) continue;
        if (eat(")")) return call;
        fail("';', ',' or ')'");
      }
    }
    std::string up = upper(w);
    if (up == "TRUE" || up == "FALSE") {
      Node n;
      n.kind = NodeKind::Boolean;
      n.boolean = up == "TRUE";
      return n;
    }
    if (auto r = reference_from_word(w, host_.sheet)) return reference_or_range(*r);
    if (w.find('$') != std::string::npos || w.empty() ||
        std::isdigit(static_cast<unsigned char>(w.front()))) {
      pos_ = start;
      fail("reference or name");
    }
    Node n;
    n.kind = NodeKind::Name;
    n.text = w;
    return n;
  }

  // ODF bracketed reference: [.A1], [$Sheet1.A1:.B2], ['x.ods'#$S.A1], [.#REF!]
  Node bracket_reference() {
    std::size_t open = pos_;
    ++pos_;
    std::size_t close = pos_;
    bool quoted = false;
    while (close < s_.size() && (quoted || s_[close] != ']')) {
      if (s_[close] == '\'') quoted = !quoted;
      ++close;
    }
    if (close >= s_.size()) fail("']'");
    std::string_view inner = s_.substr(pos_, close - pos_);

    // split on ':' outside quotes
    std::size_t colon = std::string_view::npos;
    quoted = false;
    for (std::size_t i = 0; i < inner.size(); ++i) {
      if (inner[i] == '\'') quoted = !quoted;
      if (!quoted && inner[i] == ':') {
        colon = i;
        break;
      }
    }

    auto endpoint = [&](std::string_view part, const std::string& implicit,
                        std::size_t offset) -> std::variant<Reference, std::string> {
      std::size_t p = 0;
      std::optional<std::string> external;
      std::string sheet;
      bool explicit_sheet = false;
      auto read_quoted = [&]() {
        std::string out;
        ++p;
        while (p < part.size()) {
          if (part[p] == '\'') {
            if (p + 1 < part.size() && part[p + 1] == '\'') {
              out += '\'';
              p += 2;
              continue;
            }
            ++p;
            return out;
          }
          out += part[p++];
        }
        pos_ = offset;
        fail("closing \"'\"");
      };
      if (p < part.size() && part[p] == '\'') {
        std::size_t save = p;
        std::string q = read_quoted();
        if (p < part.size() && part[p] == '#') {
          external = q;
          ++p;
        } else {
          p = save;
        }
      }
      if (p < part.size() && part[p] == '$') ++p;
      if (p < part.size() && part[p] == '\'') {
        sheet = read_quoted();
        explicit_sheet = true;
      } else {
        auto dot = part.find('.', p);
        if (dot != std::string_view::npos) {
          sheet = std::string(part.substr(p, dot - p));
          explicit_sheet = !sheet.empty();
          p = dot;
        }
      }
      if (p < part.size() && part[p] == '.') ++p;
      std::string_view cell = part.substr(p);
      if (cell.starts_with('#')) return std::string(cell);
      auto a = parse_a1(cell, explicit_sheet ? sheet : implicit);
      if (!a) {
        pos_ = offset;
        fail("cell reference");
      }
      Reference r;
      r.address = *a;
      r.sheet_explicit = explicit_sheet;
      r.external_source = std::move(external);
      return r;
    };

    auto error_node = [](std::string token) {
      Node n;
      n.kind = NodeKind::Error;
      n.text = looks_like_error_token(token) ? std::move(token) : "#REF!";
      return n;
    };

    auto first = endpoint(inner.substr(0, colon), host_.sheet, open);
    pos_ = close + 1;
    if (auto* err = std::get_if<std::string>(&first)) return error_node(*err);
    Reference start = std::get<Reference>(first);
    if (colon == std::string_view::npos) {
      Node n;
      n.kind = NodeKind::CellRef;
      n.ref = std::move(start);
      return n;
    }
    auto second = endpoint(inner.substr(colon + 1), start.address.sheet, open);
    if (auto* err = std::get_if<std::string>(&second)) return error_node(*err);
    Node n;
    n.kind = NodeKind::RangeRef;
    n.ref = std::move(start);
    n.range_end = std::get<Reference>(second);
    return n;
  }
};

int precedence(const Node& n) {
  switch (n.kind) {
    case NodeKind::Binary:
      switch (n.op) {
        case Op::Eq: case Op::Ne: case Op::Lt: case Op::Le: case Op::Gt: case Op::Ge:
          return 1;
        case Op::Concat: return 2;
        case Op::Add: case Op::Sub: return 3;
        case Op::Mul: case Op::Div: return 4;
        case Op::Pow: return 5;
        default: return 1;
      }
    case NodeKind::Unary: return 6;
    case NodeKind::Percent: return 7;
    default: return 8;
  }
}

constexpr int kPow = 5;
constexpr int kUnary = 6;
constexpr int kAtom = 8;

bool needs_quotes(std::string_view sheet) {
  if (sheet.empty() || std::isdigit(static_cast<unsigned char>(sheet.front()))) return true;
  return !std::all_of(sheet.begin(), sheet.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
  });
}

std::string quote(std::string_view s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') out += '\'';
    out += c;
  }
  return out + "'";
}

std::string sheet_prefix(const Reference& r) {
  std::string out;
  if (r.external_source) out += quote(*r.external_source) + "#";
  if (r.sheet_explicit || r.external_source) {
    out += needs_quotes(r.address.sheet) ? quote(r.address.sheet) : r.address.sheet;
    out += '.';
  }
  return out;
}

using RefPrinter = std::string (*)(const Reference&, const CellAddress&);

std::string a1_ref(const Reference& r, const CellAddress&) {
  return sheet_prefix(r) + to_a1(r.address);
}

std::string r1c1_ref(const Reference& r, const CellAddress& host) {
  const CellAddress& a = r.address;
  std::string out = sheet_prefix(r);
  out += a.row_absolute ? "R" + std::to_string(a.row + 1)
                        : "R[" + std::to_string(a.row - host.row) + "]";
  out += a.col_absolute ? "C" + std::to_string(a.column + 1)
                        : "C[" + std::to_string(a.column - host.column) + "]";
  return out;
}

void print(const Node& n, std::string& out, RefPrinter ref, const CellAddress& host) {
  auto child = [&](const Node& c, bool paren) {
    if (paren) out += '(';
    print(c, out, ref, host);
    if (paren) out += ')';
  };
  switch (n.kind) {
    case NodeKind::Number:
      out += format_number(n.number);
      break;
    case NodeKind::Text:
      out += '"';
      for (char c : n.text) {
        if (c == '"') out += '"';
        out += c;
      }
      out += '"';
      break;
    case NodeKind::Boolean:
      out += n.boolean ? "TRUE" : "FALSE";
      break;
    case NodeKind::Error:
    case NodeKind::Name:
      out += n.text;
      break;
    case NodeKind::CellRef:
      out += ref(n.ref, host);
      break;
    case NodeKind::RangeRef:
      out += ref(n.ref, host);
      out += ':';
      out += ref(n.range_end, host);
      break;
    case NodeKind::Unary:
      out += op_symbol(n.op);
      child(n.children[0], precedence(n.children[0]) < kUnary);
      break;
    case NodeKind::Percent:
      child(n.children[0], precedence(n.children[0]) < kAtom);
      out += '%';
      break;
    case NodeKind::Binary: {
      int p = precedence(n);
      int lp = precedence(n.children[0]);
      int rp = precedence(n.children[1]);
      child(n.children[0], p == kPow ? lp < kUnary : lp < p);
      out += op_symbol(n.op);
      child(n.children[1], rp < p || (rp == p && p != kPow));
      break;
    }
    case NodeKind::Call:
      out += n.text;
      out += '(';
      for (std::size_t i = 0; i < n.children.size(); ++i) {
        if (i) out += ',';
        print(n.children[i], out, ref, host);
      }
      out += ')';
      break;
  }
}

template <typename F>
void walk(const Node& n, F&& f) {
  f(n);
  for (const auto& c : n.children) walk(c, f);
}

}  // namespace

std::string_view op_symbol(Op op) {
  switch (op) {
    case Op::Eq: return "=";
    case Op::Ne: return "<>";
    case Op::Lt: return "<";
    case Op::Le: return "<=";
    case Op::Gt: return ">";
    case Op::Ge: return ">=";
    case Op::Concat: return "&";
    case Op::Add: return "+";
    case Op::Sub: return "-";
    case Op::Mul: return "*";
    case Op::Div: return "/";
    case Op::Pow: return "^";
    case Op::Negate: return "-";
    case Op::Plus: return "+";
    case Op::None: break;
  }
  return "";
}

bool Node::operator==(const Node& o) const {
  return kind == o.kind && op == o.op && number == o.number && boolean == o.boolean &&
         text == o.text && ref == o.ref && range_end == o.range_end &&
         children == o.children;
}

std::string strip_formula_prefix(std::string_view source) {
  std::size_t i = 0;
  while (i < source.size() && std::isalpha(static_cast<unsigned char>(source[i]))) ++i;
  if (i > 0 && i + 1 < source.size() && source[i] == ':' && source[i + 1] == '=') {
    source.remove_prefix(i + 1);
  }
  if (source.starts_with("=>=")) source.remove_prefix(2);
  return std::string(source);
}

FormulaAst parse_formula(std::string_view source, const CellAddress& host) {
  std::string stripped = strip_formula_prefix(source);
  std::size_t base = source.size() - stripped.size();
  if (stripped.empty() || stripped.front() != '=') {
    throw FormulaSyntaxError(base, "'='", "formula must start with '='");
  }
  Parser parser(std::string_view(stripped).substr(1), base + 1, host);
  return FormulaAst{parser.parse_all(), host};
}

std::string print_canonical(const Node& root) {
  std::string out = "=";
  print(root, out, &a1_ref, CellAddress{});
  return out;
}

std::string print_canonical(const FormulaAst& ast) { return print_canonical(ast.root); }

std::string relative_shape(const FormulaAst& ast, const CellAddress& host) {
  std::string out;
  print(ast.root, out, &r1c1_ref, host);
  return out;
}

CellRange normalize_range(const CellAddress& a, const CellAddress& b) {
  CellRange r;
  r.start.sheet = a.sheet;
  r.end.sheet = a.sheet;
  r.start.column = std::min(a.column, b.column);
  r.end.column = std::max(a.column, b.column);
  r.start.row = std::min(a.row, b.row);
  r.end.row = std::max(a.row, b.row);
  return r;
}

std::optional<CellRange> intersect(const CellRange& a, const CellRange& b) {
  if (a.start.sheet != b.start.sheet) return std::nullopt;
  CellRange r = a;
  r.start.column = std::max(a.start.column, b.start.column);
  r.start.row = std::max(a.start.row, b.start.row);
  r.end.column = std::min(a.end.column, b.end.column);
  r.end.row = std::min(a.end.row, b.end.row);
  if (r.start.column > r.end.column || r.start.row > r.end.row) return std::nullopt;
  return r;
}

std::string to_a1(const CellRange& range) {
  return to_a1(range.start) + ":" + to_a1(range.end);
}

std::vector<const Node*> reference_nodes(const Node& root) {
  std::vector<const Node*> out;
  walk(root, [&](const Node& n) {
    if (n.kind == NodeKind::CellRef || n.kind == NodeKind::RangeRef) out.push_back(&n);
  });
  return out;
}

ReferenceSet extract_references(const FormulaAst& ast) {
  ReferenceSet set;
  auto note_external = [&](const Reference& r) {
    if (r.external_source &&
        std::find(set.external_sources.begin(), set.external_sources.end(),
                  *r.external_source) == set.external_sources.end()) {
      set.external_sources.push_back(*r.external_source);
    }
  };
  walk(ast.root, [&](const Node& n) {
    if (n.kind == NodeKind::CellRef) {
      CellAddress a = n.ref.address;
      a.col_absolute = a.row_absolute = false;
      if (std::none_of(set.cells.begin(), set.cells.end(),
                       [&](const CellAddress& c) { return c.same_cell(a); })) {
        set.cells.push_back(a);
      }
      note_external(n.ref);
    } else if (n.kind == NodeKind::RangeRef) {
      CellRange r = normalize_range(n.ref.address, n.range_end.address);
      if (std::find(set.ranges.begin(), set.ranges.end(), r) == set.ranges.end()) {
        set.ranges.push_back(r);
      }
      note_external(n.ref);
    } else if (n.kind == NodeKind::Name) {
      if (std::find(set.names.begin(), set.names.end(), n.text) == set.names.end()) {
        set.names.push_back(n.text);
      }
    }
  });
  return set;
}

std::string_view to_string(ContentClass c) {
  switch (c) {
    case ContentClass::Empty: return "empty";
    case ContentClass::Static: return "static";
    case ContentClass::ConstantFormula: return "constant-formula";
    case ContentClass::ReferencingFormula: return "referencing-formula";
    case ContentClass::UnparsedFormula: return "formula (unparsed)";
  }
  return "empty";
}

ContentClass classify_content(const CellContent& cell, const CellAddress& host) {
  switch (cell.kind) {
    case ContentKind::Empty: return ContentClass::Empty;
    case ContentKind::Static: return ContentClass::Static;
    case ContentKind::Formula: break;
  }
  try {
    auto ast = parse_formula(*cell.formula_source, host);
    return extract_references(ast).empty() ? ContentClass::ConstantFormula
                                           : ContentClass::ReferencingFormula;
  } catch (const FormulaSyntaxError&) {
    return ContentClass::UnparsedFormula;
  }
}

namespace {

// Folding value: exact integers are tracked alongside the double.
struct Value {
  enum class Kind { Number, Text, Boolean, Error } kind = Kind::Number;
  double d = 0;
  bool exact = false;
  long long i = 0;
  std::string s;
  bool b = false;

  static Value integer(long long v) {
    Value x;
    x.d = static_cast<double>(v);
    x.exact = true;
    x.i = v;
    return x;
  }
  static Value real(double v) {
    Value x;
    x.d = v;
    // keep integral doubles exact when they fit
    if (std::isfinite(v) && v == std::floor(v) && std::fabs(v) < 9.0e15) {
      x.exact = true;
      x.i = static_cast<long long>(v);
    }
    return x;
  }
  static Value text(std::string v) {
    Value x;
    x.kind = Kind::Text;
    x.s = std::move(v);
    return x;
  }
  static Value boolean(bool v) {
    Value x;
    x.kind = Kind::Boolean;
    x.b = v;
    return x;
  }
  static Value error(std::string token) {
    Value x;
    x.kind = Kind::Error;
    x.s = std::move(token);
    return x;
  }
};

Value to_number(const Value& v) {
  switch (v.kind) {
    case Value::Kind::Number:
    case Value::Kind::Error:
      return v;
    case Value::Kind::Boolean:
      return Value::integer(v.b ? 1 : 0);
    case Value::Kind::Text: {
      double d = 0;
      auto [ptr, ec] = std::from_chars(v.s.data(), v.s.data() + v.s.size(), d);
      if (v.s.empty() || ec != std::errc{} || ptr != v.s.data() + v.s.size()) {
        return Value::error("#VALUE!");
      }
      return Value::real(d);
    }
  }
  return Value::error("#VALUE!");
}

std::string to_text(const Value& v) {
  switch (v.kind) {
    case Value::Kind::Number: return format_number(v.d);
    case Value::Kind::Boolean: return v.b ? "TRUE" : "FALSE";
    default: return v.s;
  }
}

Value checked(long long a, long long b, Op op) {
  long long r = 0;
  bool overflow = false;
  switch (op) {
    case Op::Add: overflow = __builtin_add_overflow(a, b, &r); break;
    case Op::Sub: overflow = __builtin_sub_overflow(a, b, &r); break;
    case Op::Mul: overflow = __builtin_mul_overflow(a, b, &r); break;
    default: break;
  }
  if (overflow) {
    double x = static_cast<double>(a), y = static_cast<double>(b);
    return Value::real(op == Op::Add ? x + y : op == Op::Sub ? x - y : x * y);
  }
  return Value::integer(r);
}

Value power(const Value& a, const Value& b) {
  if (a.d == 0 && b.d < 0) return Value::error("#DIV/0!");
  if (a.exact && b.exact && b.i >= 0) {
    long long result = 1, base = a.i, e = b.i;
    bool overflow = false;
    while (e > 0 && !overflow) {
      if (e & 1) overflow |= __builtin_mul_overflow(result, base, &result);
      e >>= 1;
      if (e > 0) overflow |= __builtin_mul_overflow(base, base, &base);
    }
    if (!overflow) return Value::integer(result);
  }
  double r = std::pow(a.d, b.d);
  if (!std::isfinite(r)) return Value::error("#NUM!");
  return Value::real(r);
}

int type_rank(const Value& v) {
  switch (v.kind) {
    case Value::Kind::Number: return 0;
    case Value::Kind::Text: return 1;
    default: return 2;
  }
}

Value compare(const Value& a, const Value& b, Op op) {
  int cmp = 0;
  if (type_rank(a) != type_rank(b)) {
    cmp = type_rank(a) < type_rank(b) ? -1 : 1;
  } else if (a.kind == Value::Kind::Number) {
    cmp = a.d < b.d ? -1 : (a.d > b.d ? 1 : 0);
  } else if (a.kind == Value::Kind::Text) {
    std::string x = upper(a.s), y = upper(b.s);
    cmp = x < y ? -1 : (x > y ? 1 : 0);
  } else {
    cmp = static_cast<int>(a.b) - static_cast<int>(b.b);
  }
  switch (op) {
    case Op::Eq: return Value::boolean(cmp == 0);
    case Op::Ne: return Value::boolean(cmp != 0);
    case Op::Lt: return Value::boolean(cmp < 0);
    case Op::Le: return Value::boolean(cmp <= 0);
    case Op::Gt: return Value::boolean(cmp > 0);
    default: return Value::boolean(cmp >= 0);
  }
}

Value fold(const Node& n) {
  switch (n.kind) {
    case NodeKind::Number: return Value::real(n.number);
    case NodeKind::Text: return Value::text(n.text);
    case NodeKind::Boolean: return Value::boolean(n.boolean);
    case NodeKind::Error: return Value::error(n.text);
    case NodeKind::CellRef:
    case NodeKind::RangeRef:
    case NodeKind::Name:
      throw Error(ErrorCode::NotFoldable, "formula has references");
    case NodeKind::Call:
      throw Error(ErrorCode::NotFoldable, "function " + n.text + " is not folded");
    case NodeKind::Unary: {
      Value v = to_number(fold(n.children[0]));
      if (v.kind == Value::Kind::Error || n.op == Op::Plus) return v;
      if (v.exact && v.i != std::numeric_limits<long long>::min()) return Value::integer(-v.i);
      return Value::real(-v.d);
    }
    case NodeKind::Percent: {
      Value v = to_number(fold(n.children[0]));
      if (v.kind == Value::Kind::Error) return v;
      if (v.exact && v.i % 100 == 0) return Value::integer(v.i / 100);
      return Value::real(v.d / 100.0);
    }
    case NodeKind::Binary:
      break;
  }

  Value lhs = fold(n.children[0]);
  Value rhs = fold(n.children[1]);
  if (lhs.kind == Value::Kind::Error) return lhs;
  if (rhs.kind == Value::Kind::Error) return rhs;

  switch (n.op) {
    case Op::Concat:
      return Value::text(to_text(lhs) + to_text(rhs));
    case Op::Eq: case Op::Ne: case Op::Lt: case Op::Le: case Op::Gt: case Op::Ge:
      return compare(lhs, rhs, n.op);
    default:
      break;
  }

  Value a = to_number(lhs), b = to_number(rhs);
  if (a.kind == Value::Kind::Error) return a;
  if (b.kind == Value::Kind::Error) return b;
  switch (n.op) {
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
      if (a.exact && b.exact) return checked(a.i, b.i, n.op);
      return Value::real(n.op == Op::Add ? a.d + b.d : n.op == Op::Sub ? a.d - b.d : a.d * b.d);
    case Op::Div:
      if (b.d == 0) return Value::error("#DIV/0!");
      if (a.exact && b.exact && a.i % b.i == 0) return Value::integer(a.i / b.i);
      return Value::real(a.d / b.d);
    case Op::Pow:
      return power(a, b);
    default:
      return Value::error("#VALUE!");
  }
}

}  // namespace

CachedResult fold_constant(const FormulaAst& ast) {
  Value v = fold(ast.root);
  switch (v.kind) {
    case Value::Kind::Number:
      if (!std::isfinite(v.d)) return ErrorToken{"#NUM!"};
      if (v.exact) {
        StaticValue sv = StaticValue::number(static_cast<double>(v.i));
        sv.lexical = std::to_string(v.i);
        return sv;
      }
      return StaticValue::number(v.d);
    case Value::Kind::Text: return StaticValue::string(v.s);
    case Value::Kind::Boolean: return StaticValue::boolean(v.b);
    case Value::Kind::Error: return ErrorToken{v.s};
  }
  return ErrorToken{"#VALUE!"};
}

}  // namespace odsaudit
