#pragma once

#include "odsaudit/cell.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace odsaudit {

struct Reference {
  CellAddress address;  // sheet is always resolved (explicit or host)
  bool sheet_explicit = false;
  // Source document of an external link, e.g. "file:///x.ods".
  std::optional<std::string> external_source;

  bool operator==(const Reference&) const = default;
};

enum class NodeKind {
  Number,
  Text,
  Boolean,
  Error,       // literal error value such as #REF!
  CellRef,
  RangeRef,
  Name,
  Unary,
  Binary,
  Percent,
  Call,
};

enum class Op {
  None,
  // binary, by ascending precedence group
  Eq, Ne, Lt, Le, Gt, Ge,
  Concat,
  Add, Sub,
  Mul, Div,
  Pow,
  // unary
  Negate, Plus,
};

std::string_view op_symbol(Op op);

// Formula AST node. Operands and call arguments are held by value in
// `children`; ranges store their endpoints in `ref` and `range_end`.
struct Node {
  NodeKind kind = NodeKind::Number;
  Op op = Op::None;
  double number = 0;
  bool boolean = false;
  std::string text;  // text literal, error literal, name, or function name
  Reference ref;
  Reference range_end;
  std::vector<Node> children;

  bool operator==(const Node& o) const;
};

struct FormulaAst {
  Node root;
  CellAddress host;
};

// Strips a stored-formula prefix: a namespace tag ("of:", "oooc:") and the
// legacy "=>" marker, leaving text that starts with "=" (when it did).
std::string strip_formula_prefix(std::string_view source);

// Throws FormulaSyntaxError with the offending offset into `source`.
FormulaAst parse_formula(std::string_view source, const CellAddress& host);

// "=K8-K18-K20"; whitespace and case normalized, minimal parentheses.
std::string print_canonical(const FormulaAst& ast);
std::string print_canonical(const Node& root);

// R1C1-style rendering: relative axes become offsets from `host`, absolute
// axes fixed 1-based coordinates. No leading "=".
std::string relative_shape(const FormulaAst& ast, const CellAddress& host);
inline std::string relative_shape(const FormulaAst& ast) {
  return relative_shape(ast, ast.host);
}

struct CellRange {
  CellAddress start;
  CellAddress end;
  bool operator==(const CellRange&) const = default;

  int width() const { return end.column - start.column + 1; }
  int height() const { return end.row - start.row + 1; }
  bool contains(const CellAddress& a) const {
    return a.sheet == start.sheet && a.column >= start.column &&
           a.column <= end.column && a.row >= start.row && a.row <= end.row;
  }
};

// Orders endpoints so start <= end on each axis; absolute markers are dropped.
CellRange normalize_range(const CellAddress& a, const CellAddress& b);
std::optional<CellRange> intersect(const CellRange& a, const CellRange& b);
std::string to_a1(const CellRange& range);

struct ReferenceSet {
  std::vector<CellAddress> cells;   // distinct targets, absolute markers cleared
  std::vector<CellRange> ranges;    // distinct, normalized
  std::vector<std::string> names;   // distinct
  std::vector<std::string> external_sources;

  bool empty() const { return cells.empty() && ranges.empty() && names.empty(); }
};

ReferenceSet extract_references(const FormulaAst& ast);

// Every cell and range reference node in document order, with multiplicity.
std::vector<const Node*> reference_nodes(const Node& root);

enum class ContentClass {
  Empty,
  Static,
  ConstantFormula,
  ReferencingFormula,
  UnparsedFormula,
};

std::string_view to_string(ContentClass c);

ContentClass classify_content(const CellContent& cell, const CellAddress& host);

// Folds a reference-free, function-free formula. Integer inputs stay exact.
// Division by zero yields an ErrorToken. Throws Error(NotFoldable) for
// function calls, references and names.
CachedResult fold_constant(const FormulaAst& ast);

}  // namespace odsaudit
