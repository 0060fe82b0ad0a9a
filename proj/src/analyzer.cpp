#include "odsaudit/analyzer.hpp"

#include "odsaudit/error.hpp"
#include "odsaudit/formula.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>
#include <tuple>
#include <unordered_map>

namespace odsaudit {

namespace {

struct CheckName {
  CheckId id;
  std::string_view text;
};

constexpr CheckName kCheckNames[] = {
    {CheckId::UnparsableFormula, "SA0-unparsable-formula"},
    {CheckId::ConstantEquation, "SA1-constant-equation"},
    {CheckId::ErrorValue, "SA2-error-value"},
    {CheckId::BlankReference, "SA3-blank-reference"},
    {CheckId::RangeBoundary, "SA4-range-boundary"},
    {CheckId::FillInconsistency, "SA5-fill-inconsistency"},
    {CheckId::DuplicateReference, "SA6-duplicate-reference"},
    {CheckId::OverlappingRanges, "SA7-overlapping-ranges"},
    {CheckId::ProtectionHole, "SA8-protection-hole"},
    {CheckId::LiteralParameter, "SA9-literal-parameter"},
    {CheckId::FunctionCategory, "SA10-function-category"},
    {CheckId::ExternalReference, "SA11-external-reference"},
};

std::string upper(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  while (!s.empty()) {
    auto comma = s.find(',');
    auto item = trim(s.substr(0, comma));
    if (!item.empty()) out.emplace_back(item);
    if (comma == std::string_view::npos) break;
    s.remove_prefix(comma + 1);
  }
  return out;
}

template <typename F>
void walk(const Node& n, F&& f) {
  f(n);
  for (const auto& c : n.children) walk(c, f);
}

bool numeric_content(const CellContent& c) {
  if (c.kind == ContentKind::Static) return c.static_value && is_numeric(c.static_value->type);
  if (c.kind == ContentKind::Formula && c.cached_result) {
    const auto* v = std::get_if<StaticValue>(&*c.cached_result);
    return v && is_numeric(v->type);
  }
  return false;
}

std::string result_text(const CachedResult& r) {
  if (const auto* e = std::get_if<ErrorToken>(&r)) return e->text;
  const auto& v = std::get<StaticValue>(r);
  if (v.type == ValueType::Boolean) return v.lexical == "true" || v.lexical == "TRUE" ? "TRUE" : "FALSE";
  if (v.type == ValueType::String) return "\"" + v.lexical + "\"";
  return v.lexical;
}

bool is_literal_number(const Node& n) {
  if (n.kind == NodeKind::Number) return true;
  if ((n.kind == NodeKind::Unary || n.kind == NodeKind::Percent) && n.children.size() == 1) {
    return is_literal_number(n.children[0]);
  }
  return false;
}

struct FormulaCell {
  int row = 0;
  int column = 0;
  const Cell* cell = nullptr;
  std::optional<FormulaAst> ast;
  std::string parse_error;
  std::string shape;
};

class SheetScanner {
 public:
  SheetScanner(const Sheet& sheet,
               const std::unordered_map<std::string, const Sheet*>& by_name,
               const CheckConfig& config, std::vector<Finding>& out)
      : sheet_(sheet), by_name_(by_name), config_(config), out_(out) {}

  void run() {
    if (config_.enabled(CheckId::ProtectionHole) && config_.require_protection &&
        !sheet_.is_protected) {
      Finding f = make(CheckId::ProtectionHole, Severity::Alert, std::nullopt,
                       "sheet is not protected");
      f.evidence["protected"] = "false";
      out_.push_back(std::move(f));
    }

    sheet_.cells.for_each_nonempty([&](int r, int c, const Cell& cell) {
      if (cell.content.kind != ContentKind::Formula) return;
      FormulaCell fc;
      fc.row = r;
      fc.column = c;
      fc.cell = &cell;
      CellAddress host{sheet_.name, c, r};
      try {
        fc.ast = parse_formula(*cell.content.formula_source, host);
        fc.shape = relative_shape(*fc.ast);
      } catch (const FormulaSyntaxError& e) {
        fc.parse_error = e.what();
      }
      formulas_.push_back(std::move(fc));
    });

    for (const auto& fc : formulas_) check_cell(fc);
    if (config_.enabled(CheckId::FillInconsistency)) check_fill();
  }

 private:
  Finding make(CheckId id, Severity sev, std::optional<CellAddress> cell, std::string message) {
    Finding f;
    f.check = id;
    f.severity = sev;
    f.sheet = sheet_.name;
    f.cell = std::move(cell);
    f.message = std::move(message);
    return f;
  }

  const Sheet* sheet_named(const std::string& name) const {
    auto it = by_name_.find(name);
    return it == by_name_.end() ? nullptr : it->second;
  }

  void emit(bool enabled, Finding f) {
    if (enabled) out_.push_back(std::move(f));
  }

  void check_cell(const FormulaCell& fc) {
    CellAddress host{sheet_.name, fc.column, fc.row};
    const CellContent& content = fc.cell->content;
    const std::string& source = *content.formula_source;

    if (config_.enabled(CheckId::ProtectionHole) && config_.require_protection &&
        sheet_.is_protected && !fc.cell->is_protected) {
      Finding f = make(CheckId::ProtectionHole, Severity::Alert, host,
                       "formula cell is unprotected on a protected sheet");
      f.evidence["formula"] = source;
      out_.push_back(std::move(f));
    }

    // The cached error check needs no parse.
    std::optional<std::string> error_text;
    if (content.cached_result) {
      if (const auto* e = std::get_if<ErrorToken>(&*content.cached_result)) error_text = e->text;
    }

    if (!fc.ast) {
      Finding f = make(CheckId::UnparsableFormula, Severity::Info, host,
                       "formula could not be parsed; formula checks skipped");
      f.evidence["formula"] = source;
      f.evidence["error"] = fc.parse_error;
      emit(config_.enabled(CheckId::UnparsableFormula), std::move(f));
      if (error_text) {
        Finding e = make(CheckId::ErrorValue, Severity::Alert, host,
                         "formula result is the error value " + *error_text);
        e.evidence["formula"] = source;
        e.evidence["result"] = *error_text;
        emit(config_.enabled(CheckId::ErrorValue), std::move(e));
      }
      return;
    }

    const FormulaAst& ast = *fc.ast;
    std::string canonical = print_canonical(ast);
    ReferenceSet refs = extract_references(ast);

    // SA1
    if (refs.empty()) {
      Finding f = make(CheckId::ConstantEquation, Severity::Info, host, "constant formula");
      f.evidence["formula"] = canonical;
      try {
        std::string value = result_text(fold_constant(ast));
        f.message = "constant formula evaluates to " + value;
        f.evidence["value"] = value;
      } catch (const Error&) {
        f.message = "constant formula (not folded)";
      }
      emit(config_.enabled(CheckId::ConstantEquation), std::move(f));
    }

    // SA2
    if (!error_text) {
      walk(ast.root, [&](const Node& n) {
        if (n.kind == NodeKind::Error && !error_text) error_text = n.text;
      });
      if (error_text) {
        Finding f = make(CheckId::ErrorValue, Severity::Alert, host,
                         "formula contains the error value " + *error_text);
        f.evidence["formula"] = canonical;
        f.evidence["result"] = *error_text;
        emit(config_.enabled(CheckId::ErrorValue), std::move(f));
      }
    } else {
      Finding f = make(CheckId::ErrorValue, Severity::Alert, host,
                       "formula result is the error value " + *error_text);
      f.evidence["formula"] = canonical;
      f.evidence["result"] = *error_text;
      emit(config_.enabled(CheckId::ErrorValue), std::move(f));
    }

    // SA3
    if (config_.enabled(CheckId::BlankReference)) {
      std::vector<std::string> blanks;
      walk(ast.root, [&](const Node& n) {
        if (n.kind != NodeKind::CellRef || n.ref.external_source) return;
        const Sheet* target = sheet_named(n.ref.address.sheet);
        if (!target) return;
        if (!target->cells.at(n.ref.address.row, n.ref.address.column).content.is_empty()) return;
        CellAddress a = n.ref.address;
        a.col_absolute = a.row_absolute = false;
        std::string text = (a.sheet == sheet_.name ? "" : a.sheet + ".") + to_a1(a);
        if (std::find(blanks.begin(), blanks.end(), text) == blanks.end()) blanks.push_back(text);
      });
      if (!blanks.empty()) {
        std::string list;
        for (const auto& b : blanks) list += (list.empty() ? "" : ", ") + b;
        Finding f = make(CheckId::BlankReference, Severity::Warn, host,
                         "references blank cell" + std::string(blanks.size() > 1 ? "s " : " ") + list);
        f.evidence["formula"] = canonical;
        f.evidence["blank"] = list;
        out_.push_back(std::move(f));
      }
    }

    // SA4, SA9, SA10 look at calls.
    std::set<std::string> denied_seen;
    walk(ast.root, [&](const Node& n) {
      if (n.kind != NodeKind::Call) return;
      std::string name = upper(n.text);
      if (config_.enabled(CheckId::RangeBoundary) && config_.aggregates.contains(name)) {
        for (const auto& arg : n.children) check_boundary(host, canonical, name, arg);
      }
      if (config_.enabled(CheckId::LiteralParameter)) {
        auto it = config_.reference_expected.find(name);
        if (it != config_.reference_expected.end()) {
          for (int pos : it->second) {
            if (pos < 1 || pos > static_cast<int>(n.children.size())) continue;
            const Node& arg = n.children[static_cast<std::size_t>(pos - 1)];
            if (!is_literal_number(arg)) continue;
            std::string literal = print_canonical(arg).substr(1);  // drop "="
            Finding f = make(CheckId::LiteralParameter, Severity::Warn, host,
                             name + " argument " + std::to_string(pos) + " is the literal " +
                                 literal + " where a cell reference is expected");
            f.evidence["formula"] = canonical;
            f.evidence["function"] = name;
            f.evidence["argument"] = std::to_string(pos);
            f.evidence["literal"] = literal;
            out_.push_back(std::move(f));
          }
        }
      }
      if (config_.enabled(CheckId::FunctionCategory)) {
        auto it = config_.function_category.find(name);
        if (it != config_.function_category.end() && config_.deny_categories.contains(it->second) &&
            denied_seen.insert(name).second) {
          Finding f = make(CheckId::FunctionCategory, Severity::Info, host,
                           name + " is in the " + it->second + " category");
          f.evidence["formula"] = canonical;
          f.evidence["function"] = name;
          f.evidence["category"] = it->second;
          out_.push_back(std::move(f));
        }
      }
    });

    auto nodes = reference_nodes(ast.root);

    // SA6
    if (config_.enabled(CheckId::DuplicateReference)) {
      std::vector<std::pair<const Node*, int>> counts;
      for (const Node* n : nodes) {
        if (n->kind != NodeKind::CellRef) continue;
        auto it = std::find_if(counts.begin(), counts.end(), [&](const auto& p) {
          return p.first->ref.address.same_cell(n->ref.address) &&
                 p.first->ref.external_source == n->ref.external_source;
        });
        if (it == counts.end()) counts.emplace_back(n, 1);
        else ++it->second;
      }
      for (const auto& [n, count] : counts) {
        if (count < 2) continue;
        CellAddress a = n->ref.address;
        a.col_absolute = a.row_absolute = false;
        std::string target = (a.sheet == sheet_.name ? "" : a.sheet + ".") + to_a1(a);
        Finding f = make(CheckId::DuplicateReference, Severity::Info, host,
                         target + " is referenced " + std::to_string(count) + " times");
        f.evidence["formula"] = canonical;
        f.evidence["target"] = target;
        f.evidence["count"] = std::to_string(count);
        out_.push_back(std::move(f));
      }
    }

    // SA7
    if (config_.enabled(CheckId::OverlappingRanges)) {
      std::vector<const Node*> ranges;
      for (const Node* n : nodes) {
        if (n->kind == NodeKind::RangeRef) ranges.push_back(n);
      }
      for (std::size_t i = 0; i < ranges.size(); ++i) {
        for (std::size_t j = i + 1; j < ranges.size(); ++j) {
          if (ranges[i]->ref.external_source != ranges[j]->ref.external_source) continue;
          CellRange a = normalize_range(ranges[i]->ref.address, ranges[i]->range_end.address);
          CellRange b = normalize_range(ranges[j]->ref.address, ranges[j]->range_end.address);
          auto x = intersect(a, b);
          if (!x) continue;
          Finding f = make(CheckId::OverlappingRanges, Severity::Warn, host,
                           "ranges " + to_a1(a) + " and " + to_a1(b) + " overlap at " + to_a1(*x));
          f.evidence["formula"] = canonical;
          f.evidence["first"] = to_a1(a);
          f.evidence["second"] = to_a1(b);
          f.evidence["intersection"] = to_a1(*x);
          out_.push_back(std::move(f));
        }
      }
    }

    // SA11
    if (config_.enabled(CheckId::ExternalReference)) {
      for (const auto& src : refs.external_sources) {
        Finding f = make(CheckId::ExternalReference, Severity::Info, host,
                         "external reference to " + src + " is not analyzed");
        f.evidence["formula"] = canonical;
        f.evidence["source"] = src;
        out_.push_back(std::move(f));
      }
    }
  }

  void check_boundary(const CellAddress& host, const std::string& canonical,
                      const std::string& function, const Node& arg) {
    if (arg.kind != NodeKind::RangeRef || arg.ref.external_source) return;
    CellRange r = normalize_range(arg.ref.address, arg.range_end.address);
    const Sheet* target = sheet_named(r.start.sheet);
    if (!target) return;
    std::vector<CellAddress> beyond;
    if (r.width() == 1 && r.height() >= 2) {
      beyond.push_back({r.start.sheet, r.start.column, r.start.row - 1});
      beyond.push_back({r.start.sheet, r.start.column, r.end.row + 1});
    } else if (r.height() == 1 && r.width() >= 2) {
      beyond.push_back({r.start.sheet, r.start.column - 1, r.start.row});
      beyond.push_back({r.start.sheet, r.end.column + 1, r.start.row});
    }
    for (const auto& b : beyond) {
      if (b.row < 0 || b.column < 0 || b.same_cell(host)) continue;
      if (!numeric_content(target->cells.at(b.row, b.column).content)) continue;
      std::string adjacent = (b.sheet == sheet_.name ? "" : b.sheet + ".") + to_a1(b);
      Finding f = make(CheckId::RangeBoundary, Severity::Warn, host,
                       function + " range " + to_a1(r) + " excludes adjacent value at " + adjacent);
      f.evidence["formula"] = canonical;
      f.evidence["range"] = to_a1(r);
      f.evidence["adjacent"] = adjacent;
      out_.push_back(std::move(f));
    }
  }

  void check_fill() {
    std::map<std::pair<int, int>, const FormulaCell*> at;
    for (const auto& fc : formulas_) {
      if (fc.ast) at[{fc.row, fc.column}] = &fc;
    }
    auto scan_runs = [&](bool horizontal) {
      std::set<std::pair<int, int>> seen;
      for (const auto& [key, fc] : at) {
        if (seen.contains(key)) continue;
        std::pair<int, int> prev = horizontal ? std::pair{key.first, key.second - 1}
                                              : std::pair{key.first - 1, key.second};
        if (at.contains(prev)) continue;  // not the start of a run
        std::vector<const FormulaCell*> run;
        std::pair<int, int> cur = key;
        while (true) {
          auto it = at.find(cur);
          if (it == at.end()) break;
          run.push_back(it->second);
          seen.insert(cur);
          if (horizontal) ++cur.second;
          else ++cur.first;
        }
        if (run.size() < 3) continue;
        std::map<std::string, int> votes;
        for (const auto* c : run) ++votes[c->shape];
        int best = 0, best_count = 0;
        std::string majority;
        for (const auto& [shape, n] : votes) {
          if (n > best) {
            best = n;
            best_count = 1;
            majority = shape;
          } else if (n == best) {
            ++best_count;
          }
        }
        if (best_count != 1) continue;
        CellAddress first{sheet_.name, run.front()->column, run.front()->row};
        CellAddress last{sheet_.name, run.back()->column, run.back()->row};
        std::string run_text = to_a1(first) + ":" + to_a1(last);
        for (const auto* c : run) {
          if (c->shape == majority) continue;
          CellAddress host{sheet_.name, c->column, c->row};
          Finding f = make(CheckId::FillInconsistency, Severity::Warn, host,
                           "formula differs from the majority shape " + majority + " of " +
                               (horizontal ? "row" : "column") + " run " + run_text);
          f.evidence["shape"] = c->shape;
          f.evidence["majority"] = majority;
          f.evidence["run"] = run_text;
          out_.push_back(std::move(f));
        }
      }
    };
    scan_runs(true);
    scan_runs(false);
  }

  const Sheet& sheet_;
  const std::unordered_map<std::string, const Sheet*>& by_name_;
  const CheckConfig& config_;
  std::vector<Finding>& out_;
  std::vector<FormulaCell> formulas_;
};

bool parse_bool(std::string_view v, int line) {
  if (v == "on" || v == "true" || v == "yes" || v == "1") return true;
  if (v == "off" || v == "false" || v == "no" || v == "0") return false;
  throw Error(ErrorCode::InvalidConfig,
              "config line " + std::to_string(line) + ": expected on/off, got '" + std::string(v) + "'");
}

}  // namespace

std::string_view to_string(CheckId id) {
  for (const auto& c : kCheckNames) {
    if (c.id == id) return c.text;
  }
  return "";
}

std::optional<CheckId> parse_check_id(std::string_view text) {
  for (const auto& c : kCheckNames) {
    if (c.text == text) return c.id;
    auto dash = c.text.find('-');
    if (c.text.substr(0, dash) == text) return c.id;
  }
  return std::nullopt;
}

std::string_view to_string(Severity s) {
  switch (s) {
    case Severity::Info: return "info";
    case Severity::Warn: return "warn";
    case Severity::Alert: return "alert";
  }
  return "info";
}

std::optional<Severity> parse_severity(std::string_view text) {
  if (text == "info") return Severity::Info;
  if (text == "warn") return Severity::Warn;
  if (text == "alert") return Severity::Alert;
  return std::nullopt;
}

std::string Finding::location() const {
  return cell ? to_a1(*cell) : sheet;
}

CheckConfig CheckConfig::defaults() {
  CheckConfig c;
  for (const char* f : {"NPV", "PV", "FV", "RATE"}) c.reference_expected[f] = {1};
  for (const char* f : {"SIN", "COS", "TAN", "COT", "SEC", "CSC", "ASIN", "ACOS", "ATAN",
                        "ATAN2", "ACOT", "SINH", "COSH", "TANH", "COTH", "ASINH", "ACOSH",
                        "ATANH", "ACOTH", "RADIANS", "DEGREES"}) {
    c.function_category[f] = "trigonometry";
  }
  c.deny_categories = {"trigonometry"};
  c.aggregates = {"SUM", "AVERAGE", "AVERAGEA", "COUNT", "COUNTA", "MIN", "MAX",
                  "PRODUCT", "SUMSQ", "MEDIAN"};
  return c;
}

CheckConfig parse_check_config(std::string_view text) {
  CheckConfig c = CheckConfig::defaults();
  std::set<std::string> replaced_categories;
  bool replaced_expected = false;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string_view l = raw;
    if (auto hash = l.find('#'); hash != std::string_view::npos) l = l.substr(0, hash);
    l = trim(l);
    if (l.empty()) continue;
    auto eq = l.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorCode::InvalidConfig, "config line " + std::to_string(line) + ": expected key = value");
    }
    std::string_view key = trim(l.substr(0, eq));
    std::string_view value = trim(l.substr(eq + 1));

    if (key.starts_with("check.")) {
      auto id = parse_check_id(key.substr(6));
      if (!id) {
        throw Error(ErrorCode::InvalidConfig, "config line " + std::to_string(line) +
                                                  ": unknown check '" + std::string(key.substr(6)) + "'");
      }
      if (parse_bool(value, line)) c.disabled.erase(*id);
      else c.disabled.insert(*id);
    } else if (key == "require_protection") {
      c.require_protection = parse_bool(value, line);
    } else if (key == "reference_expected") {
      if (!replaced_expected) c.reference_expected.clear();
      replaced_expected = true;
      for (const auto& item : split_list(value)) {
        auto colon = item.find(':');
        std::string name = upper(trim(std::string_view(item).substr(0, colon)));
        auto& positions = c.reference_expected[name];
        if (colon == std::string::npos) {
          positions.insert(1);
          continue;
        }
        std::string_view rest = std::string_view(item).substr(colon + 1);
        while (!rest.empty()) {
          auto next = rest.find(':');
          auto num = trim(rest.substr(0, next));
          int pos = 0;
          auto [p, ec] = std::from_chars(num.data(), num.data() + num.size(), pos);
          if (ec != std::errc() || p != num.data() + num.size() || pos < 1) {
            throw Error(ErrorCode::InvalidConfig, "config line " + std::to_string(line) +
                                                      ": bad argument position in '" + item + "'");
          }
          positions.insert(pos);
          if (next == std::string_view::npos) break;
          rest.remove_prefix(next + 1);
        }
      }
    } else if (key.starts_with("category.")) {
      std::string category(key.substr(9));
      if (replaced_categories.insert(category).second) {
        std::erase_if(c.function_category, [&](const auto& kv) { return kv.second == category; });
      }
      for (const auto& f : split_list(value)) c.function_category[upper(f)] = category;
    } else if (key == "deny_categories") {
      auto list = split_list(value);
      c.deny_categories = {list.begin(), list.end()};
    } else if (key == "aggregates") {
      c.aggregates.clear();
      for (const auto& f : split_list(value)) c.aggregates.insert(upper(f));
    } else {
      throw Error(ErrorCode::InvalidConfig, "config line " + std::to_string(line) +
                                                ": unknown key '" + std::string(key) + "'");
    }
  }
  return c;
}

CheckConfig load_check_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_check_config(text.str());
}

std::vector<Finding> scan(std::span<const Sheet> sheets, const CheckConfig& config) {
  std::unordered_map<std::string, const Sheet*> by_name;
  std::unordered_map<std::string, std::size_t> order;
  for (std::size_t i = 0; i < sheets.size(); ++i) {
    by_name.emplace(sheets[i].name, &sheets[i]);
    order.emplace(sheets[i].name, i);
  }
  std::vector<Finding> out;
  for (const auto& sheet : sheets) SheetScanner(sheet, by_name, config, out).run();

  std::stable_sort(out.begin(), out.end(), [&](const Finding& a, const Finding& b) {
    auto key = [&](const Finding& f) {
      int row = f.cell ? f.cell->row : -1;
      int col = f.cell ? f.cell->column : -1;
      return std::make_tuple(order.at(f.sheet), row, col, static_cast<int>(f.check));
    };
    return key(a) < key(b);
  });
  return out;
}

std::vector<Finding> scan(const Workbook& workbook, const CheckConfig& config) {
  return scan(std::span<const Sheet>(workbook.sheets), config);
}

}  // namespace odsaudit
