#include "dbtalk/parser.hpp"

#include <cctype>
#include <charconv>
#include <cstdlib>
#include <optional>
#include <set>
#include <sstream>

#include "dbtalk/errors.hpp"
#include "dbtalk/units.hpp"

namespace dbtalk {

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::istringstream in{std::string(text)};
  std::string tok;
  while (in >> tok) tokens.push_back(tok);
  return tokens;
}

namespace {

bool is_number_token(const std::string& t) {
  if (t.empty()) return false;
  size_t i = t[0] == '-' ? 1 : 0;
  if (i >= t.size() || !std::isdigit(static_cast<unsigned char>(t[i]))) return false;
  double out;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
  return ec == std::errc() && ptr == t.data() + t.size();
}

double number_of(const std::string& t) {
  double out = 0;
  std::from_chars(t.data(), t.data() + t.size(), out);
  return out;
}

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  return true;
}

bool is_date_token(const std::string& t) {
  return t.size() == 10 && t[4] == '-' && t[7] == '-' && all_digits(t.substr(0, 4)) &&
         all_digits(t.substr(5, 2)) && all_digits(t.substr(8, 2));
}

std::optional<std::string> time_token(const std::string& t) {
  // HH:MM or HH:MM:SS, canonicalized to HH:MM:SS
  if (t.size() == 5 && t[2] == ':' && all_digits(t.substr(0, 2)) && all_digits(t.substr(3, 2)))
    return t + ":00";
  if (t.size() == 8 && t[2] == ':' && t[5] == ':' && all_digits(t.substr(0, 2)) &&
      all_digits(t.substr(3, 2)) && all_digits(t.substr(6, 2)))
    return t;
  return std::nullopt;
}

std::optional<int> placeholder_index(const std::string& t) {
  constexpr std::string_view prefix = "VALUE_";
  if (t.size() <= prefix.size() || t.compare(0, prefix.size(), prefix) != 0) return std::nullopt;
  if (!all_digits(std::string_view(t).substr(prefix.size()))) return std::nullopt;
  return std::atoi(t.c_str() + prefix.size());
}

bool is_table_token(const std::string& t) {
  if (t.size() < 2 || t[0] != '@') return false;
  if (!std::isalpha(static_cast<unsigned char>(t[1])) && t[1] != '_') return false;
  for (size_t i = 2; i < t.size(); ++i)
    if (!std::isalnum(static_cast<unsigned char>(t[i])) && t[i] != '_') return false;
  return true;
}

// Structural keywords may not be used as field names.
const std::set<std::string>& reserved_words() {
  static const std::set<std::string> words = {
      "of",     "sort",   "asc",  "desc", "aggregate", "compute",  "as",
      "join",   "exists", "lookup", "here", "now",     "location", "true",
      "false",  "contains", "in_array", "null",
  };
  return words;
}

bool is_identifier(const std::string& t) {
  if (t.empty() || reserved_words().count(t)) return false;
  if (!std::isalpha(static_cast<unsigned char>(t[0])) && t[0] != '_') return false;
  bool prev_dot = false;
  for (size_t i = 1; i < t.size(); ++i) {
    char c = t[i];
    if (c == '.') {
      if (prev_dot) return false;
      prev_dot = true;
      continue;
    }
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
    prev_dot = false;
  }
  return !prev_dot && placeholder_index(t) == std::nullopt;
}

std::optional<CmpOp> infix_cmp(const std::string& t) {
  if (t == "==") return CmpOp::eq;
  if (t == ">=") return CmpOp::ge;
  if (t == "<=") return CmpOp::le;
  if (t == "=~") return CmpOp::substr;
  return std::nullopt;
}

class Parser {
 public:
  explicit Parser(const std::vector<std::string>& tokens) : toks_(tokens) {}

  AstPtr query_and_end() {
    AstPtr q = query();
    if (pos_ != toks_.size()) fail({"<end>"});
    return q;
  }

  FilterPtr filter_and_end() {
    FilterPtr f = filter();
    if (pos_ != toks_.size()) fail({"<end>"});
    return f;
  }

 private:
  const std::vector<std::string>& toks_;
  size_t pos_ = 0;

  static const std::string& empty_token() {
    static const std::string empty;
    return empty;
  }

  const std::string& peek(size_t ahead = 0) const {
    return pos_ + ahead < toks_.size() ? toks_[pos_ + ahead] : empty_token();
  }

  const std::string& next() {
    if (pos_ >= toks_.size()) fail({"<token>"});
    return toks_[pos_++];
  }

  bool accept(const char* tok) {
    if (peek() == tok) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(const char* tok) {
    if (!accept(tok)) fail({tok});
  }

  [[noreturn]] void fail(std::vector<std::string> expected) const {
    throw SyntaxError(pos_, peek(), std::move(expected));
  }

  // query := join_expr (',' filter)*
  AstPtr query() {
    AstPtr q = join_expr();
    while (accept(",")) q = build::where(std::move(q), filter());
    return q;
  }

  AstPtr join_expr() {
    AstPtr q = postfix_expr();
    while (accept("join")) q = build::join(std::move(q), postfix_expr());
    return q;
  }

  AstPtr postfix_expr() {
    AstPtr q = primary();
    while (peek() == "[") {
      ++pos_;
      Value from = value();
      if (accept(":")) {
        Value to = value();
        expect("]");
        q = build::slice(std::move(q), std::move(from), std::move(to));
      } else {
        expect("]");
        q = build::index(std::move(q), std::move(from));
      }
    }
    return q;
  }

  AstPtr primary() {
    const std::string& t = peek();
    if (is_table_token(t)) {
      ++pos_;
      return build::table(t.substr(1));
    }
    if (accept("(")) {
      AstPtr q = query();
      expect(")");
      return q;
    }
    if (accept("[")) {
      std::vector<std::string> fields;
      fields.push_back(fname());
      while (accept(",")) fields.push_back(fname());
      expect("]");
      expect("of");
      return build::project(std::move(fields), query());
    }
    if (accept("aggregate")) {
      auto op = agg_op_from_string(peek());
      if (!op) fail({"count", "sum", "avg", "min", "max"});
      ++pos_;
      std::optional<std::string> field;
      if (peek() != "of") field = fname();
      expect("of");
      return build::aggregate(*op, std::move(field), query());
    }
    if (accept("compute")) {
      ExprPtr e = expr();
      std::optional<std::string> alias;
      if (accept("as")) alias = fname();
      expect("of");
      return build::compute(std::move(e), std::move(alias), query());
    }
    if (accept("sort")) {
      std::string field = fname();
      SortDir dir;
      if (accept("asc")) dir = SortDir::asc;
      else if (accept("desc")) dir = SortDir::desc;
      else fail({"asc", "desc"});
      expect("of");
      return build::sort(std::move(field), dir, query());
    }
    fail({"@table", "(", "[", "aggregate", "compute", "sort"});
  }

  std::string fname() {
    const std::string& t = peek();
    if (!is_identifier(t)) fail({"field name"});
    ++pos_;
    return t;
  }

  // filter := and_filter ('||' and_filter)*
  FilterPtr filter() {
    FilterPtr f = and_filter();
    while (accept("||")) f = build::f_or(std::move(f), and_filter());
    return f;
  }

  FilterPtr and_filter() {
    FilterPtr f = not_filter();
    while (accept("&&")) f = build::f_and(std::move(f), not_filter());
    return f;
  }

  FilterPtr not_filter() {
    if (accept("!")) return build::f_not(not_filter());
    return atom_filter();
  }

  FilterPtr atom_filter() {
    const std::string& t = peek();
    // bare true/false, unless they open a comparison
    if ((t == "true" || t == "false") && !infix_cmp(peek(1))) {
      ++pos_;
      return t == "true" ? build::f_true() : build::f_false();
    }
    if (t == "(") {
      ++pos_;
      FilterPtr f = filter();
      expect(")");
      return f;
    }
    if (t == "contains" || t == "in_array") {
      CmpOp op = t == "contains" ? CmpOp::contains : CmpOp::in_array;
      ++pos_;
      expect("(");
      Value lhs = value();
      expect(",");
      Value rhs = value();
      expect(")");
      return build::cmp(std::move(lhs), op, std::move(rhs));
    }
    if (t == "exists") {
      ++pos_;
      expect("(");
      // the first top-level comma ends the subquery, so a filtered subquery
      // arrives parenthesized
      AstPtr sub = join_expr();
      expect(",");
      FilterPtr inner = filter();
      expect(")");
      return build::exists(std::move(sub), std::move(inner));
    }
    Value lhs = value();
    auto op = infix_cmp(peek());
    if (!op) fail({"==", ">=", "<=", "=~"});
    ++pos_;
    Value rhs = value();
    return build::cmp(std::move(lhs), *op, std::move(rhs));
  }

  // expr := mul_expr (('+'|'-') mul_expr)*
  ExprPtr expr() {
    ExprPtr e = mul_expr();
    while (true) {
      if (accept("+")) e = build::arith(ArithOp::add, std::move(e), mul_expr());
      else if (accept("-")) e = build::arith(ArithOp::sub, std::move(e), mul_expr());
      else return e;
    }
  }

  ExprPtr mul_expr() {
    ExprPtr e = atom_expr();
    while (true) {
      if (accept("*")) e = build::arith(ArithOp::mul, std::move(e), atom_expr());
      else if (accept("/")) e = build::arith(ArithOp::div, std::move(e), atom_expr());
      else return e;
    }
  }

  ExprPtr atom_expr() {
    const std::string& t = peek();
    if (t == "(") {
      ++pos_;
      ExprPtr e = expr();
      expect(")");
      return e;
    }
    if (t == "distance" && peek(1) == "(") {
      pos_ += 2;
      ExprPtr lhs = expr();
      expect(",");
      ExprPtr rhs = expr();
      expect(")");
      return build::distance(std::move(lhs), std::move(rhs));
    }
    if (auto op = agg_op_from_string(t); op && peek(1) == "(") {
      pos_ += 2;
      std::string field = fname();
      expect(")");
      return build::agg_array(*op, std::move(field));
    }
    return build::val(value());
  }

  Value value() {
    const std::string& t = peek();
    if (t == "here") {
      ++pos_;
      return Value::here();
    }
    if (t == "now") {
      ++pos_;
      return Value::now();
    }
    if (t == "true" || t == "false") {
      ++pos_;
      return Value::boolean(t == "true");
    }
    if (t == "\"") return string_literal();
    if (t == "lookup") {
      ++pos_;
      expect("(");
      LookupRef ref;
      if (auto slot = placeholder_index(peek())) {
        ref.placeholder = *slot;
        ++pos_;
      } else if (peek() == "\"") {
        Value name = string_literal();
        ref.name = std::get<std::string>(name.v);
      } else {
        fail({"\"", "VALUE_k"});
      }
      expect(",");
      if (!is_table_token(peek())) fail({"@table"});
      ref.table = next().substr(1);
      expect(")");
      return Value(std::move(ref));
    }
    if (t == "location") {
      ++pos_;
      expect("(");
      GeoPoint p;
      p.lat = plain_number();
      expect(",");
      p.lon = plain_number();
      expect(")");
      return Value(p);
    }
    if (is_number_token(t)) {
      double n = number_of(t);
      ++pos_;
      if (auto unit = unit_from_token(peek())) {
        const std::string unit_tok = next();
        if (unit->dimension == Dimension::currency)
          return Value(CurrencyVal{unit_to_si(*unit, n)});
        return Value(MeasureVal{unit_to_si(*unit, n), unit->dimension, n, unit_tok});
      }
      return Value::number(n);
    }
    if (is_date_token(t)) {
      ++pos_;
      return Value(DateVal{t});
    }
    if (auto hms = time_token(t)) {
      ++pos_;
      return Value(TimeVal{*hms});
    }
    if (auto slot = placeholder_index(t)) {
      ++pos_;
      return Value(Placeholder{*slot});
    }
    if (t == "null") {
      ++pos_;
      return Value::null();
    }
    if (is_identifier(t)) {
      ++pos_;
      return Value::field(t);
    }
    fail({"value"});
  }

  double plain_number() {
    if (!is_number_token(peek())) fail({"number"});
    return number_of(next());
  }

  Value string_literal() {
    expect("\"");
    std::string content;
    while (true) {
      if (pos_ >= toks_.size()) fail({"\""});
      const std::string& t = next();
      if (t == "\"") break;
      if (!content.empty()) content += ' ';
      content += to_lower(t);
    }
    return Value::string(std::move(content));
  }
};

}  // namespace

AstPtr parse(const std::vector<std::string>& tokens) {
  return Parser(tokens).query_and_end();
}

AstPtr parse(std::string_view text) { return parse(tokenize(text)); }

FilterPtr parse_filter(std::string_view text) {
  auto tokens = tokenize(text);
  return Parser(tokens).filter_and_end();
}

}  // namespace dbtalk
