#pragma once

// Recursive-descent parser and checker for MiniC.
//
// Grammar (informal):
//   program   := function+
//   function  := (type | 'void') ident '(' [params | 'void'] ')' block
//   stmt      := type ident ['=' rhs] ';'
//              | ident '=' rhs ';'
//              | ident '(' [args] ')' ';'
//              | 'if' '(' expr ')' body ['else' (if-stmt | body)]
//              | 'while' '(' expr ')' body
//              | 'return' [expr] ';'
//              | 'assert' '(' expr ')' ';'
//              | 'reach_error' '(' ')' ';'
//   rhs       := 'input' '(' ')' | ident '(' [args] ')' | expr
//   type      := int | unsigned [int] | long [long] [int] | unsigned long [long] [int]
//
// `long` is 32 bits under a 32-bit architecture and 64 bits otherwise;
// `long long` is always 64 bits. Calls and input reads only appear as whole
// statements or whole right-hand sides, so expressions are side-effect free.

#include <cctype>
#include <functional>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "smartseed/ast.hpp"

namespace smartseed {

enum class DiagnosticKind { Syntax, Type };

class ParseError : public std::runtime_error {
 public:
  ParseError(DiagnosticKind kind, SourceLoc loc, const std::string& message)
      : std::runtime_error(std::to_string(loc.line) + ":" + std::to_string(loc.col) + ": " + message),
        kind_(kind),
        loc_(loc),
        message_(message) {}

  [[nodiscard]] DiagnosticKind kind() const { return kind_; }
  [[nodiscard]] SourceLoc loc() const { return loc_; }
  [[nodiscard]] const std::string& message() const { return message_; }

 private:
  DiagnosticKind kind_;
  SourceLoc loc_;
  std::string message_;
};

struct ParseOptions {
  int arch_bits = 32;  // width of `long`
};

namespace detail {

enum class Tok { Ident, Number, Punct, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  SourceLoc loc;
};

inline std::vector<Token> lex(std::string_view src) {
  std::vector<Token> out;
  int line = 1;
  int col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n && i < src.size(); ++k, ++i) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  while (i < src.size()) {
    const char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (c == '/' && i + 1 < src.size() && src[i + 1] == '/') {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    if (c == '/' && i + 1 < src.size() && src[i + 1] == '*') {
      const SourceLoc start{line, col};
      advance(2);
      while (i + 1 < src.size() && !(src[i] == '*' && src[i + 1] == '/')) advance(1);
      if (i + 1 >= src.size()) throw ParseError(DiagnosticKind::Syntax, start, "unterminated comment");
      advance(2);
      continue;
    }
    const SourceLoc loc{line, col};
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
      out.push_back({Tok::Ident, std::string(src.substr(i, j - i)), loc});
      advance(j - i);
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])))) ++j;
      out.push_back({Tok::Number, std::string(src.substr(i, j - i)), loc});
      advance(j - i);
      continue;
    }
    static constexpr std::string_view two[] = {"==", "!=", "<=", ">=", "&&", "||", "<<", ">>"};
    bool matched = false;
    for (auto op : two) {
      if (src.substr(i, 2) == op) {
        out.push_back({Tok::Punct, std::string(op), loc});
        advance(2);
        matched = true;
        break;
      }
    }
    if (matched) continue;
    if (std::string_view("+-*/%<>=!~&|^(){},;").find(c) != std::string_view::npos) {
      out.push_back({Tok::Punct, std::string(1, c), loc});
      advance(1);
      continue;
    }
    throw ParseError(DiagnosticKind::Syntax, loc, std::string("unexpected character '") + c + "'");
  }
  out.push_back({Tok::End, "", {line, col}});
  return out;
}

inline const std::set<std::string>& keywords() {
  static const std::set<std::string> kw = {"int",    "unsigned", "signed", "long",  "void",
                                           "if",     "else",     "while",  "return", "assert",
                                           "reach_error", "input"};
  return kw;
}

class Parser {
 public:
  Parser(std::string_view src, ParseOptions opts) : toks_(lex(src)), opts_(opts) {}

  Ast parse_program() {
    Ast ast;
    // Pass 1: signatures, so calls may precede definitions.
    std::size_t save = pos_;
    while (peek().kind != Tok::End) {
      FunctionDef sig = parse_signature();
      if (signatures_.count(sig.name) != 0U) {
        throw ParseError(DiagnosticKind::Type, sig.loc, "duplicate function '" + sig.name + "'");
      }
      signatures_[sig.name] = sig;
      skip_balanced_block();
    }
    pos_ = save;
    while (peek().kind != Tok::End) {
      ast.functions.push_back(parse_function(ast));
    }
    if (ast.find("main") == nullptr) {
      throw ParseError(DiagnosticKind::Type, peek().loc, "missing entry function 'main'");
    }
    const FunctionDef& entry = *ast.find("main");
    if (!entry.params.empty()) {
      throw ParseError(DiagnosticKind::Type, entry.loc, "'main' must not take parameters");
    }
    check_no_recursion(ast);
    return ast;
  }

 private:
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  ParseOptions opts_;
  std::map<std::string, FunctionDef> signatures_;
  std::map<std::string, std::set<std::string>> calls_;

  // per-function state
  FunctionDef* fn_ = nullptr;
  std::vector<std::map<std::string, int>> scopes_;

  const Token& peek(std::size_t ahead = 0) const {
    return toks_[std::min(pos_ + ahead, toks_.size() - 1)];
  }
  const Token& next() {
    const Token& t = toks_[pos_];
    if (pos_ + 1 < toks_.size()) ++pos_;
    return t;
  }
  bool is(std::string_view text, std::size_t ahead = 0) const {
    const Token& t = peek(ahead);
    return (t.kind == Tok::Punct || t.kind == Tok::Ident) && t.text == text;
  }
  bool accept(std::string_view text) {
    if (is(text)) {
      next();
      return true;
    }
    return false;
  }
  [[noreturn]] void syntax(const Token& t, const std::string& msg) const {
    throw ParseError(DiagnosticKind::Syntax, t.loc, msg);
  }
  const Token& expect(std::string_view text) {
    if (!is(text)) {
      const Token& t = peek();
      syntax(t, "expected '" + std::string(text) + "' but found " +
                    (t.kind == Tok::End ? std::string("end of input") : "'" + t.text + "'"));
    }
    return next();
  }
  std::string expect_ident() {
    const Token& t = peek();
    if (t.kind != Tok::Ident || keywords().count(t.text) != 0U) {
      syntax(t, "expected identifier but found " +
                    (t.kind == Tok::End ? std::string("end of input") : "'" + t.text + "'"));
    }
    if (t.text.rfind("__", 0) == 0) syntax(t, "identifiers starting with '__' are reserved");
    return next().text;
  }

  bool at_type() const {
    return is("int") || is("unsigned") || is("signed") || is("long");
  }

  IntType parse_type() {
    const Token& start = peek();
    bool is_unsigned = false;
    bool saw_sign = false;
    if (accept("unsigned")) {
      is_unsigned = true;
      saw_sign = true;
    } else if (accept("signed")) {
      saw_sign = true;
    }
    int longs = 0;
    while (accept("long")) ++longs;
    const bool saw_int = accept("int");
    if (!saw_sign && longs == 0 && !saw_int) syntax(start, "expected a type");
    if (longs > 2) syntax(start, "too many 'long' specifiers");
    int bits = 32;
    if (longs == 1) bits = opts_.arch_bits;
    if (longs == 2) bits = 64;
    return IntType{static_cast<std::uint8_t>(bits), !is_unsigned};
  }

  FunctionDef parse_signature() {
    FunctionDef f;
    f.loc = peek().loc;
    if (accept("void")) {
      f.returns_void = true;
    } else {
      f.return_type = parse_type();
    }
    f.name = expect_ident();
    expect("(");
    if (is("void") && is(")", 1)) {
      next();
    } else if (!is(")")) {
      do {
        Param p;
        p.type = parse_type();
        p.name = expect_ident();
        f.params.push_back(p);
      } while (accept(","));
    }
    expect(")");
    return f;
  }

  void skip_balanced_block() {
    expect("{");
    int depth = 1;
    while (depth > 0) {
      const Token& t = next();
      if (t.kind == Tok::End) syntax(t, "unexpected end of input inside function body");
      if (t.kind == Tok::Punct && t.text == "{") ++depth;
      if (t.kind == Tok::Punct && t.text == "}") --depth;
    }
  }

  FunctionDef parse_function(Ast& ast) {
    FunctionDef f = parse_signature();
    fn_ = &f;
    scopes_.clear();
    scopes_.emplace_back();
    for (auto& p : f.params) {
      if (scopes_.back().count(p.name) != 0U) {
        throw ParseError(DiagnosticKind::Type, f.loc, "duplicate parameter '" + p.name + "'");
      }
      p.slot = static_cast<int>(f.slot_types.size());
      f.slot_types.push_back(p.type);
      scopes_.back()[p.name] = p.slot;
    }
    expect("{");
    while (!is("}")) {
      if (peek().kind == Tok::End) syntax(peek(), "expected '}' before end of input");
      f.body.push_back(parse_stmt(ast));
    }
    expect("}");
    fn_ = nullptr;
    return f;
  }

  int declare(const std::string& name, IntType t, SourceLoc loc) {
    if (scopes_.back().count(name) != 0U) {
      throw ParseError(DiagnosticKind::Type, loc, "redeclaration of '" + name + "'");
    }
    const int slot = static_cast<int>(fn_->slot_types.size());
    fn_->slot_types.push_back(t);
    scopes_.back()[name] = slot;
    return slot;
  }

  int lookup(const std::string& name, SourceLoc loc) const {
    for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it) {
      auto f = it->find(name);
      if (f != it->end()) return f->second;
    }
    throw ParseError(DiagnosticKind::Type, loc, "use of undeclared identifier '" + name + "'");
  }

  std::vector<Stmt> parse_body(Ast& ast) {
    scopes_.emplace_back();
    std::vector<Stmt> out;
    if (accept("{")) {
      while (!is("}")) {
        if (peek().kind == Tok::End) syntax(peek(), "expected '}' before end of input");
        out.push_back(parse_stmt(ast));
      }
      expect("}");
    } else {
      out.push_back(parse_stmt(ast));
    }
    scopes_.pop_back();
    return out;
  }

  // Parses the right-hand side of a declaration or assignment into `s`.
  void parse_rhs(Ast& ast, Stmt& s, IntType target) {
    const Token& t = peek();
    if (is("input") && is("(", 1)) {
      next();
      expect("(");
      expect(")");
      auto e = std::make_shared<Expr>();
      e->kind = ExprKind::Input;
      e->type = target;
      e->loc = t.loc;
      e->site = static_cast<int>(ast.input_sites.size());
      ast.input_sites.push_back(InputSite{e->site, target, t.loc, fn_->name});
      s.expr = e;
      return;
    }
    if (t.kind == Tok::Ident && keywords().count(t.text) == 0U && is("(", 1)) {
      s.kind = StmtKind::Call;
      s.has_target = true;
      parse_call_tail(s);
      const FunctionDef& callee = signatures_.at(s.callee);
      if (callee.returns_void) {
        throw ParseError(DiagnosticKind::Type, t.loc, "void function '" + s.callee + "' used as a value");
      }
      return;
    }
    s.expr = parse_expr();
  }

  void parse_call_tail(Stmt& s) {
    const Token& name = next();
    s.callee = name.text;
    auto sig = signatures_.find(s.callee);
    if (sig == signatures_.end()) {
      throw ParseError(DiagnosticKind::Type, name.loc, "call to undefined function '" + s.callee + "'");
    }
    expect("(");
    if (!is(")")) {
      do {
        s.args.push_back(parse_expr());
      } while (accept(","));
    }
    expect(")");
    if (s.args.size() != sig->second.params.size()) {
      throw ParseError(DiagnosticKind::Type, name.loc,
                       "function '" + s.callee + "' expects " + std::to_string(sig->second.params.size()) +
                           " argument(s), got " + std::to_string(s.args.size()));
    }
    calls_[fn_->name].insert(s.callee);
  }

  Stmt parse_stmt(Ast& ast) {
    const Token& start = peek();
    Stmt s;
    s.loc = start.loc;
    if (at_type()) {
      const IntType t = parse_type();
      const SourceLoc name_loc = peek().loc;
      s.name = expect_ident();
      s.kind = StmtKind::Decl;
      s.var_type = t;
      if (accept("=")) parse_rhs(ast, s, t);
      if (s.kind == StmtKind::Call) s.declares = true;
      // the initializer is resolved before the name comes into scope
      s.slot = declare(s.name, t, name_loc);
      expect(";");
      return s;
    }
    if (is("void")) syntax(start, "'void' is only valid as a return type");
    if (accept("if")) {
      s.kind = StmtKind::If;
      expect("(");
      s.expr = parse_expr();
      expect(")");
      s.body = parse_body(ast);
      if (accept("else")) {
        s.has_else = true;
        if (is("if")) {
          scopes_.emplace_back();
          s.else_body.push_back(parse_stmt(ast));
          scopes_.pop_back();
        } else {
          s.else_body = parse_body(ast);
        }
      }
      return s;
    }
    if (accept("while")) {
      s.kind = StmtKind::While;
      expect("(");
      s.expr = parse_expr();
      expect(")");
      s.body = parse_body(ast);
      return s;
    }
    if (accept("return")) {
      s.kind = StmtKind::Return;
      if (!is(";")) s.expr = parse_expr();
      if (fn_->returns_void && s.expr) {
        throw ParseError(DiagnosticKind::Type, start.loc, "void function '" + fn_->name + "' returns a value");
      }
      if (!fn_->returns_void && !s.expr) {
        throw ParseError(DiagnosticKind::Type, start.loc, "non-void function '" + fn_->name + "' must return a value");
      }
      expect(";");
      return s;
    }
    if (accept("assert")) {
      s.kind = StmtKind::Assert;
      expect("(");
      s.expr = parse_expr();
      expect(")");
      expect(";");
      return s;
    }
    if (accept("reach_error")) {
      s.kind = StmtKind::ErrorReach;
      expect("(");
      expect(")");
      expect(";");
      return s;
    }
    if (start.kind == Tok::Ident && keywords().count(start.text) == 0U) {
      if (is("(", 1)) {
        s.kind = StmtKind::Call;
        parse_call_tail(s);
        expect(";");
        return s;
      }
      s.name = expect_ident();
      s.slot = lookup(s.name, start.loc);
      s.var_type = fn_->slot_types[static_cast<std::size_t>(s.slot)];
      s.kind = StmtKind::Assign;
      expect("=");
      parse_rhs(ast, s, s.var_type);
      expect(";");
      return s;
    }
    if (start.kind == Tok::End) syntax(start, "unexpected end of input");
    syntax(start, "unexpected '" + start.text + "' at start of statement");
  }

  // Precedence climbing over C binary operators.
  static int precedence(const std::string& op) {
    if (op == "||") return 1;
    if (op == "&&") return 2;
    if (op == "|") return 3;
    if (op == "^") return 4;
    if (op == "&") return 5;
    if (op == "==" || op == "!=") return 6;
    if (op == "<" || op == "<=" || op == ">" || op == ">=") return 7;
    if (op == "<<" || op == ">>") return 8;
    if (op == "+" || op == "-") return 9;
    if (op == "*" || op == "/" || op == "%") return 10;
    return -1;
  }

  static BinOp binop_of(const std::string& op) {
    static const std::map<std::string, BinOp> m = {
        {"+", BinOp::Add}, {"-", BinOp::Sub},   {"*", BinOp::Mul},  {"/", BinOp::Div},
        {"%", BinOp::Rem}, {"==", BinOp::Eq},   {"!=", BinOp::Ne},  {"<", BinOp::Lt},
        {"<=", BinOp::Le}, {">", BinOp::Gt},    {">=", BinOp::Ge},  {"&&", BinOp::LAnd},
        {"||", BinOp::LOr}, {"&", BinOp::And},  {"|", BinOp::Or},   {"^", BinOp::Xor},
        {"<<", BinOp::Shl}, {">>", BinOp::Shr}};
    return m.at(op);
  }

  ExprPtr parse_expr(int min_prec = 1) {
    ExprPtr lhs = parse_unary();
    for (;;) {
      const Token& t = peek();
      if (t.kind != Tok::Punct) break;
      const int prec = precedence(t.text);
      if (prec < min_prec) break;
      const std::string op = next().text;
      ExprPtr rhs = parse_expr(prec + 1);
      auto e = std::make_shared<Expr>();
      e->kind = ExprKind::Binary;
      e->loc = t.loc;
      e->bop = binop_of(op);
      e->operand_type = operand_type(e->bop, lhs->type, rhs->type);
      e->type = result_type(e->bop, e->operand_type);
      e->lhs = std::move(lhs);
      e->rhs = std::move(rhs);
      lhs = e;
    }
    return lhs;
  }

  ExprPtr parse_unary() {
    const Token& t = peek();
    if (t.kind == Tok::Punct && (t.text == "-" || t.text == "!" || t.text == "~" || t.text == "+")) {
      next();
      ExprPtr operand = parse_unary();
      if (t.text == "+") return operand;
      auto e = std::make_shared<Expr>();
      e->kind = ExprKind::Unary;
      e->loc = t.loc;
      e->uop = t.text == "-" ? UnOp::Neg : (t.text == "!" ? UnOp::LNot : UnOp::BitNot);
      e->type = e->uop == UnOp::LNot ? kInt : operand->type;
      e->lhs = std::move(operand);
      return e;
    }
    return parse_primary();
  }

  ExprPtr parse_number(const Token& t) {
    std::string text = t.text;
    bool suffix_u = false;
    int suffix_l = 0;
    while (!text.empty() && std::string_view("uUlL").find(text.back()) != std::string_view::npos) {
      const char c = static_cast<char>(std::tolower(static_cast<unsigned char>(text.back())));
      if (c == 'u' && !suffix_u) {
        suffix_u = true;
      } else if (c == 'l' && suffix_l < 2) {
        ++suffix_l;
      } else {
        syntax(t, "invalid integer literal '" + t.text + "'");
      }
      text.pop_back();
    }
    int base = 10;
    std::size_t i = 0;
    if (text.size() > 2 && text[0] == '0' && (text[1] == 'x' || text[1] == 'X')) {
      base = 16;
      i = 2;
    }
    if (i >= text.size()) syntax(t, "invalid integer literal '" + t.text + "'");
    unsigned __int128 v = 0;
    for (; i < text.size(); ++i) {
      const char c = static_cast<char>(std::tolower(static_cast<unsigned char>(text[i])));
      int d = -1;
      if (c >= '0' && c <= '9') d = c - '0';
      if (base == 16 && c >= 'a' && c <= 'f') d = c - 'a' + 10;
      if (d < 0 || d >= base) syntax(t, "invalid integer literal '" + t.text + "'");
      v = v * static_cast<unsigned>(base) + static_cast<unsigned>(d);
      if (v > static_cast<unsigned __int128>(type_max(kULongLong))) syntax(t, "integer literal too large");
    }
    const i128 value = static_cast<i128>(v);
    IntType ty = kULongLong;
    std::vector<IntType> candidates;
    if (suffix_l > 0) {
      candidates = suffix_u ? std::vector<IntType>{kULongLong} : std::vector<IntType>{kLongLong, kULongLong};
    } else if (suffix_u) {
      candidates = {kUInt, kULongLong};
    } else if (base == 16) {
      candidates = {kInt, kUInt, kLongLong, kULongLong};
    } else {
      candidates = {kInt, kLongLong, kULongLong};
    }
    for (IntType c : candidates) {
      if (fits(value, c)) {
        ty = c;
        break;
      }
    }
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::Const;
    e->loc = t.loc;
    e->type = ty;
    e->value = from_math(value, ty);
    return e;
  }

  ExprPtr parse_primary() {
    const Token& t = peek();
    if (t.kind == Tok::Number) {
      next();
      return parse_number(t);
    }
    if (accept("(")) {
      ExprPtr e = parse_expr();
      expect(")");
      return e;
    }
    if (t.kind == Tok::Ident) {
      if (t.text == "input") {
        throw ParseError(DiagnosticKind::Type, t.loc,
                         "input() may only appear as the whole right-hand side of a declaration or assignment");
      }
      if (keywords().count(t.text) != 0U) syntax(t, "unexpected keyword '" + t.text + "' in expression");
      if (is("(", 1)) {
        throw ParseError(DiagnosticKind::Type, t.loc,
                         "call to '" + t.text + "' must be a statement or the whole right-hand side");
      }
      next();
      auto e = std::make_shared<Expr>();
      e->kind = ExprKind::Var;
      e->loc = t.loc;
      e->name = t.text;
      e->slot = lookup(t.text, t.loc);
      e->type = fn_->slot_types[static_cast<std::size_t>(e->slot)];
      return e;
    }
    if (t.kind == Tok::End) syntax(t, "unexpected end of input in expression");
    syntax(t, "unexpected '" + t.text + "' in expression");
  }

  void check_no_recursion(const Ast& ast) {
    // DFS for a cycle in the static call graph.
    std::map<std::string, int> state;
    std::function<void(const std::string&)> visit = [&](const std::string& fn) {
      state[fn] = 1;
      for (const auto& callee : calls_[fn]) {
        if (state[callee] == 1) {
          const FunctionDef* f = ast.find(callee);
          throw ParseError(DiagnosticKind::Type, f ? f->loc : SourceLoc{},
                           "recursion is not supported (cycle through '" + callee + "')");
        }
        if (state[callee] == 0) visit(callee);
      }
      state[fn] = 2;
    };
    for (const auto& f : ast.functions) {
      if (state[f.name] == 0) visit(f.name);
    }
  }
};

}  // namespace detail

/// Parses MiniC source. Throws ParseError on syntax or type errors.
inline Ast parse(std::string_view source, ParseOptions opts = {}) {
  detail::Parser p(source, opts);
  return p.parse_program();
}

}  // namespace smartseed
