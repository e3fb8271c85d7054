// Lexer and recursive-descent parser for the model language.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "loopdom/model.hpp"
#include "semantics.hpp"

namespace loopdom {
namespace {

enum class TokKind { Ident, Keyword, Number, Symbol, End };

struct Token {
  TokKind kind = TokKind::End;
  std::string text;  // keywords are upper-cased
  double number = 0.0;
  SourceLoc loc;
};

constexpr std::string_view kKeywords[] = {
    "SPEC", "START", "STOP", "DT",  "CONST", "AUX", "FLOW",   "STOCK",   "IF",   "THEN",
    "ELSE", "AND",   "OR",   "NOT", "MIN",   "MAX", "ABS",    "TIME",    "INFLOW", "OUTFLOW",
};

std::string upper(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

bool is_keyword(const std::string& up) {
  return std::find(std::begin(kKeywords), std::end(kKeywords), up) != std::end(kKeywords);
}

struct SyntaxError {
  SourceLoc loc;
  std::string message;
};

/// Tokenizes one line; comments start at '#'.
std::vector<Token> lex_line(std::string_view line, int line_no) {
  std::vector<Token> out;
  std::size_t i = 0;
  auto loc_at = [&](std::size_t pos) { return SourceLoc{line_no, static_cast<int>(pos) + 1}; };
  while (i < line.size()) {
    const char c = line[i];
    if (c == '#') break;
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    const std::size_t begin = i;
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      while (i < line.size() &&
             (std::isalnum(static_cast<unsigned char>(line[i])) || line[i] == '_'))
        ++i;
      Token t;
      t.text = std::string(line.substr(begin, i - begin));
      const std::string up = upper(t.text);
      if (is_keyword(up)) {
        t.kind = TokKind::Keyword;
        t.text = up;
      } else {
        t.kind = TokKind::Ident;
      }
      t.loc = loc_at(begin);
      out.push_back(std::move(t));
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '.' && i + 1 < line.size() && std::isdigit(static_cast<unsigned char>(line[i + 1])))) {
      while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) ++i;
      if (i < line.size() && line[i] == '.') {
        ++i;
        while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) ++i;
      }
      if (i < line.size() && (line[i] == 'e' || line[i] == 'E')) {
        std::size_t j = i + 1;
        if (j < line.size() && (line[j] == '+' || line[j] == '-')) ++j;
        if (j < line.size() && std::isdigit(static_cast<unsigned char>(line[j]))) {
          i = j;
          while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) ++i;
        }
      }
      Token t;
      t.kind = TokKind::Number;
      t.text = std::string(line.substr(begin, i - begin));
      t.loc = loc_at(begin);
      auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), t.number);
      if (ec != std::errc() || ptr != t.text.data() + t.text.size())
        throw SyntaxError{t.loc, "malformed number '" + t.text + "'"};
      out.push_back(std::move(t));
      continue;
    }
    static constexpr std::string_view two[] = {"<=", ">=", "<>"};
    std::string sym;
    for (auto s : two)
      if (line.substr(i, 2) == s) sym = s;
    if (sym.empty()) {
      if (std::string_view("+-*/()<>=,{}:").find(c) == std::string_view::npos)
        throw SyntaxError{loc_at(begin), std::string("unexpected character '") + c + "'"};
      sym = std::string(1, c);
    }
    i += sym.size();
    out.push_back(Token{TokKind::Symbol, sym, 0.0, loc_at(begin)});
  }
  out.push_back(Token{TokKind::End, "", 0.0, loc_at(line.size())});
  return out;
}

class LineParser {
 public:
  explicit LineParser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

  const Token& peek() const { return toks_[pos_]; }
  bool at_end() const { return peek().kind == TokKind::End; }

  bool is_keyword(std::string_view kw) const {
    return peek().kind == TokKind::Keyword && peek().text == kw;
  }
  bool is_symbol(std::string_view s) const {
    return peek().kind == TokKind::Symbol && peek().text == s;
  }

  Token take() { return toks_[pos_++]; }

  [[noreturn]] void fail(const std::string& expected) const {
    const Token& t = peek();
    const std::string found = t.kind == TokKind::End ? "end of line" : "'" + t.text + "'";
    throw SyntaxError{t.loc, "expected " + expected + ", found " + found};
  }

  Token expect_keyword(std::string_view kw) {
    if (!is_keyword(kw)) fail(std::string(kw));
    return take();
  }
  Token expect_symbol(std::string_view s) {
    if (!is_symbol(s)) fail("'" + std::string(s) + "'");
    return take();
  }
  Token expect_ident() {
    if (peek().kind != TokKind::Ident) fail("identifier");
    return take();
  }
  void expect_end() {
    if (!at_end()) fail("end of line");
  }

  double signed_number() {
    bool neg = false;
    if (is_symbol("-")) {
      take();
      neg = true;
    }
    if (peek().kind != TokKind::Number) fail("number");
    const double v = take().number;
    return neg ? -v : v;
  }

  Expr expr() {
    if (is_keyword("IF")) {
      const SourceLoc loc = take().loc;
      Expr cond = expr();
      expect_keyword("THEN");
      Expr then_branch = expr();
      expect_keyword("ELSE");
      Expr else_branch = expr();
      return Expr::node(Op::If, {std::move(cond), std::move(then_branch), std::move(else_branch)},
                        loc);
    }
    return or_expr();
  }

 private:
  Expr or_expr() {
    Expr lhs = and_expr();
    while (is_keyword("OR")) {
      const SourceLoc loc = take().loc;
      lhs = Expr::node(Op::Or, {std::move(lhs), and_expr()}, loc);
    }
    return lhs;
  }

  Expr and_expr() {
    Expr lhs = cmp_expr();
    while (is_keyword("AND")) {
      const SourceLoc loc = take().loc;
      lhs = Expr::node(Op::And, {std::move(lhs), cmp_expr()}, loc);
    }
    return lhs;
  }

  Expr cmp_expr() {
    Expr lhs = add_expr();
    static constexpr std::pair<std::string_view, Op> ops[] = {
        {"<", Op::Less},       {">", Op::Greater}, {"<=", Op::LessEq},
        {">=", Op::GreaterEq}, {"=", Op::Equal},   {"<>", Op::NotEqual},
    };
    for (auto [sym, op] : ops) {
      if (is_symbol(sym)) {
        const SourceLoc loc = take().loc;
        return Expr::node(op, {std::move(lhs), add_expr()}, loc);
      }
    }
    return lhs;
  }

  Expr add_expr() {
    Expr lhs = mul_expr();
    while (is_symbol("+") || is_symbol("-")) {
      const Token t = take();
      lhs = Expr::node(t.text == "+" ? Op::Add : Op::Sub, {std::move(lhs), mul_expr()}, t.loc);
    }
    return lhs;
  }

  Expr mul_expr() {
    Expr lhs = unary();
    while (is_symbol("*") || is_symbol("/")) {
      const Token t = take();
      lhs = Expr::node(t.text == "*" ? Op::Mul : Op::Div, {std::move(lhs), unary()}, t.loc);
    }
    return lhs;
  }

  Expr unary() {
    if (is_symbol("-")) {
      const SourceLoc loc = take().loc;
      return Expr::node(Op::Negate, {unary()}, loc);
    }
    if (is_keyword("NOT")) {
      const SourceLoc loc = take().loc;
      return Expr::node(Op::Not, {unary()}, loc);
    }
    return primary();
  }

  Expr primary() {
    const Token& t = peek();
    switch (t.kind) {
      case TokKind::Number: {
        Token n = take();
        return Expr::literal(n.number, n.loc);
      }
      case TokKind::Ident: {
        Token n = take();
        return Expr::variable(n.text, n.loc);
      }
      case TokKind::Keyword: {
        if (t.text == "DT") return Expr::builtin(Op::Dt, take().loc);
        if (t.text == "TIME") return Expr::builtin(Op::Time, take().loc);
        if (t.text == "MIN" || t.text == "MAX" || t.text == "ABS") {
          Token fn = take();
          const Op op = fn.text == "MIN" ? Op::Min : fn.text == "MAX" ? Op::Max : Op::Abs;
          expect_symbol("(");
          std::vector<Expr> args;
          args.push_back(expr());
          while (is_symbol(",")) {
            take();
            args.push_back(expr());
          }
          expect_symbol(")");
          if (op == Op::Abs && args.size() != 1)
            throw SyntaxError{fn.loc, "ABS takes exactly one argument"};
          return Expr::node(op, std::move(args), fn.loc);
        }
        break;
      }
      case TokKind::Symbol:
        if (t.text == "(") {
          take();
          Expr inner = expr();
          expect_symbol(")");
          return inner;
        }
        break;
      case TokKind::End:
        break;
    }
    fail("expression");
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

std::vector<std::string> id_list(LineParser& p) {
  std::vector<std::string> ids;
  ids.push_back(p.expect_ident().text);
  while (p.is_symbol(",")) {
    p.take();
    ids.push_back(p.expect_ident().text);
  }
  return ids;
}

}  // namespace

ParseResult parse_model(std::string_view text) {
  ParseResult result;
  std::vector<Variable> vars;
  std::optional<RunSpec> spec;
  SourceLoc spec_loc;

  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    pos = nl + 1;
    ++line_no;

    try {
      LineParser p(lex_line(line, line_no));
      if (p.at_end()) continue;
      const Token head = p.peek();
      if (head.kind != TokKind::Keyword) p.fail("SPEC, CONST, AUX, FLOW or STOCK");

      if (head.text == "SPEC") {
        p.take();
        RunSpec rs;
        p.expect_keyword("START");
        p.expect_symbol("=");
        rs.start = p.signed_number();
        p.expect_keyword("STOP");
        p.expect_symbol("=");
        rs.stop = p.signed_number();
        p.expect_keyword("DT");
        p.expect_symbol("=");
        rs.dt = p.signed_number();
        p.expect_end();
        if (spec) {
          result.diagnostics.push_back({Severity::Error, head.loc, "duplicate SPEC line"});
          continue;
        }
        spec = rs;
        spec_loc = head.loc;
        continue;
      }

      Variable v;
      if (head.text == "CONST") {
        v.kind = VarKind::Const;
      } else if (head.text == "AUX") {
        v.kind = VarKind::Aux;
      } else if (head.text == "FLOW") {
        v.kind = VarKind::Flow;
      } else if (head.text == "STOCK") {
        v.kind = VarKind::Stock;
      } else {
        p.fail("SPEC, CONST, AUX, FLOW or STOCK");
      }
      p.take();
      const Token name = p.expect_ident();
      v.name = name.text;
      v.loc = name.loc;
      p.expect_symbol("=");
      v.expr = p.expr();
      if (v.kind == VarKind::Stock) {
        p.expect_symbol("{");
        if (p.is_keyword("INFLOW")) {
          p.take();
          p.expect_symbol(":");
          v.inflows = id_list(p);
        }
        if (p.is_keyword("OUTFLOW")) {
          p.take();
          p.expect_symbol(":");
          v.outflows = id_list(p);
        }
        p.expect_symbol("}");
      }
      p.expect_end();
      vars.push_back(std::move(v));
    } catch (const SyntaxError& e) {
      result.diagnostics.push_back({Severity::Error, e.loc, e.message});
    }
  }

  // Without a SPEC line the model still parses; it runs over the default
  // 0..1 with DT 1.
  if (!spec) {
    spec.emplace();
  } else if (auto problem = spec->problem(); !problem.empty()) {
    result.diagnostics.push_back({Severity::Error, spec_loc, problem});
  }

  check_semantics(vars, result.diagnostics);

  if (!has_errors(result.diagnostics)) result.model.emplace(std::move(vars), *spec);
  return result;
}

}  // namespace loopdom
