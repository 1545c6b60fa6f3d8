#pragma once

// MiniC abstract syntax. Statements are plain values (a program copy is a deep
// copy of its statement trees); expression nodes are immutable and shared.

#include <cstdint>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "smartseed/value.hpp"

namespace smartseed {

struct SourceLoc {
  int line = 0;
  int col = 0;
};

/// Inclusive range of mathematical values.
struct ValueRange {
  i128 lo = 0;
  i128 hi = 0;

  friend constexpr bool operator==(const ValueRange&, const ValueRange&) = default;
};

enum class ExprKind { Const, Var, Input, Unary, Binary };

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
  ExprKind kind = ExprKind::Const;
  IntType type = kInt;  // type of the value this node produces
  SourceLoc loc;

  std::uint64_t value = 0;  // Const: normalized bits

  std::string name;  // Var
  int slot = -1;

  int site = -1;                    // Input
  std::optional<ValueRange> clamp;  // Input, set by lightening

  UnOp uop = UnOp::Neg;  // Unary
  BinOp bop = BinOp::Add;
  IntType operand_type = kInt;  // Binary: both operands are converted to this
  ExprPtr lhs;
  ExprPtr rhs;
};

enum class StmtKind { Decl, Assign, If, While, Call, Return, Assert, ErrorReach, Label };

enum class GoalKind { FunctionEntry, ThenBranch, ElseBranch, LoopBody, ErrorReach };

inline const char* goal_kind_name(GoalKind k) {
  switch (k) {
    case GoalKind::FunctionEntry: return "function-entry";
    case GoalKind::ThenBranch: return "then-branch";
    case GoalKind::ElseBranch: return "else-branch";
    case GoalKind::LoopBody: return "loop-body";
    case GoalKind::ErrorReach: return "error-reach";
  }
  return "?";
}

struct Stmt {
  StmtKind kind = StmtKind::Decl;
  SourceLoc loc;

  // Decl / Assign / Call-with-target
  std::string name;
  int slot = -1;
  IntType var_type = kInt;
  bool declares = false;  // Call: `T x = f(...)`

  ExprPtr expr;  // initializer, assigned value, condition or return value

  std::vector<Stmt> body;       // If: then-arm, While: loop body
  std::vector<Stmt> else_body;  // If
  bool has_else = false;        // If: an else arm exists (written or synthesized)

  std::optional<std::uint32_t> iteration_bound;  // While, set by lightening

  std::string callee;  // Call
  std::vector<ExprPtr> args;
  bool has_target = false;

  int goal = -1;  // Label
  GoalKind goal_kind = GoalKind::FunctionEntry;
};

struct Param {
  std::string name;
  IntType type = kInt;
  int slot = -1;
};

struct FunctionDef {
  std::string name;
  IntType return_type = kInt;
  bool returns_void = false;
  std::vector<Param> params;
  std::vector<Stmt> body;
  std::vector<IntType> slot_types;  // params first, then locals in declaration order
  SourceLoc loc;
};

struct InputSite {
  int id = 0;
  IntType type = kInt;
  SourceLoc loc;
  std::string function;
};

struct Ast {
  std::vector<FunctionDef> functions;
  std::string entry = "main";
  std::vector<InputSite> input_sites;

  [[nodiscard]] const FunctionDef* find(const std::string& fn) const {
    for (const auto& f : functions) {
      if (f.name == fn) return &f;
    }
    return nullptr;
  }
  [[nodiscard]] const FunctionDef& entry_function() const { return *find(entry); }
};

// ---------------------------------------------------------------------------
// Structural equality (ignores source locations).

bool same_structure(const ExprPtr& a, const ExprPtr& b);
bool same_structure(const std::vector<Stmt>& a, const std::vector<Stmt>& b);

inline bool same_structure(const ExprPtr& a, const ExprPtr& b) {
  if (!a || !b) return !a && !b;
  if (a->kind != b->kind || a->type != b->type) return false;
  switch (a->kind) {
    case ExprKind::Const: return a->value == b->value;
    case ExprKind::Var: return a->name == b->name && a->slot == b->slot;
    case ExprKind::Input: return a->site == b->site && a->clamp == b->clamp;
    case ExprKind::Unary: return a->uop == b->uop && same_structure(a->lhs, b->lhs);
    case ExprKind::Binary:
      return a->bop == b->bop && a->operand_type == b->operand_type &&
             same_structure(a->lhs, b->lhs) && same_structure(a->rhs, b->rhs);
  }
  return false;
}

inline bool same_structure(const Stmt& a, const Stmt& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case StmtKind::Decl:
    case StmtKind::Assign:
      return a.name == b.name && a.slot == b.slot && a.var_type == b.var_type &&
             same_structure(a.expr, b.expr);
    case StmtKind::If:
      return a.has_else == b.has_else && same_structure(a.expr, b.expr) &&
             same_structure(a.body, b.body) && same_structure(a.else_body, b.else_body);
    case StmtKind::While:
      return a.iteration_bound == b.iteration_bound && same_structure(a.expr, b.expr) &&
             same_structure(a.body, b.body);
    case StmtKind::Call: {
      if (a.callee != b.callee || a.has_target != b.has_target || a.declares != b.declares ||
          a.slot != b.slot || a.args.size() != b.args.size())
        return false;
      for (std::size_t i = 0; i < a.args.size(); ++i) {
        if (!same_structure(a.args[i], b.args[i])) return false;
      }
      return true;
    }
    case StmtKind::Return:
    case StmtKind::Assert: return same_structure(a.expr, b.expr);
    case StmtKind::ErrorReach: return true;
    case StmtKind::Label: return a.goal == b.goal && a.goal_kind == b.goal_kind;
  }
  return false;
}

inline bool same_structure(const std::vector<Stmt>& a, const std::vector<Stmt>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!same_structure(a[i], b[i])) return false;
  }
  return true;
}

inline bool same_structure(const Ast& a, const Ast& b) {
  if (a.functions.size() != b.functions.size() || a.entry != b.entry ||
      a.input_sites.size() != b.input_sites.size())
    return false;
  for (std::size_t i = 0; i < a.input_sites.size(); ++i) {
    if (a.input_sites[i].id != b.input_sites[i].id || a.input_sites[i].type != b.input_sites[i].type)
      return false;
  }
  for (std::size_t i = 0; i < a.functions.size(); ++i) {
    const auto& f = a.functions[i];
    const auto& g = b.functions[i];
    if (f.name != g.name || f.return_type != g.return_type || f.returns_void != g.returns_void ||
        f.params.size() != g.params.size() || f.slot_types != g.slot_types)
      return false;
    for (std::size_t p = 0; p < f.params.size(); ++p) {
      if (f.params[p].name != g.params[p].name || f.params[p].type != g.params[p].type) return false;
    }
    if (!same_structure(f.body, g.body)) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Pretty printer. Output reparses to a structurally identical Ast; labels and
// lightening annotations are emitted as comments.

namespace detail {

inline std::string const_literal(const Expr& e) {
  std::string s = to_string(math_value(e.value, e.type));
  if (e.type == kUInt) return s + "u";
  if (e.type == kLongLong) return s + "LL";
  if (e.type == kULongLong) return s + "ULL";
  return s;
}

inline void print_expr(std::ostream& os, const Expr& e) {
  switch (e.kind) {
    case ExprKind::Const: os << const_literal(e); break;
    case ExprKind::Var: os << e.name; break;
    case ExprKind::Input:
      os << "input()";
      if (e.clamp) os << " /* clamp [" << to_string(e.clamp->lo) << ", " << to_string(e.clamp->hi) << "] */";
      break;
    case ExprKind::Unary:
      os << op_symbol(e.uop) << "(";
      print_expr(os, *e.lhs);
      os << ")";
      break;
    case ExprKind::Binary:
      os << "(";
      print_expr(os, *e.lhs);
      os << " " << op_symbol(e.bop) << " ";
      print_expr(os, *e.rhs);
      os << ")";
      break;
  }
}

inline void indent(std::ostream& os, int depth) {
  for (int i = 0; i < depth; ++i) os << "  ";
}

inline void print_block(std::ostream& os, const std::vector<Stmt>& body, int depth);

inline void print_stmt(std::ostream& os, const Stmt& s, int depth) {
  indent(os, depth);
  switch (s.kind) {
    case StmtKind::Decl:
      os << type_name(s.var_type) << " " << s.name;
      if (s.expr) {
        os << " = ";
        print_expr(os, *s.expr);
      }
      os << ";\n";
      break;
    case StmtKind::Assign:
      os << s.name << " = ";
      print_expr(os, *s.expr);
      os << ";\n";
      break;
    case StmtKind::If:
      os << "if (";
      print_expr(os, *s.expr);
      os << ") {\n";
      print_block(os, s.body, depth + 1);
      indent(os, depth);
      os << "}";
      if (s.has_else) {
        os << " else {\n";
        print_block(os, s.else_body, depth + 1);
        indent(os, depth);
        os << "}";
      }
      os << "\n";
      break;
    case StmtKind::While:
      os << "while (";
      print_expr(os, *s.expr);
      os << ")";
      if (s.iteration_bound) os << " /* at most " << *s.iteration_bound << " iterations */";
      os << " {\n";
      print_block(os, s.body, depth + 1);
      indent(os, depth);
      os << "}\n";
      break;
    case StmtKind::Call:
      if (s.has_target) {
        if (s.declares) os << type_name(s.var_type) << " ";
        os << s.name << " = ";
      }
      os << s.callee << "(";
      for (std::size_t i = 0; i < s.args.size(); ++i) {
        if (i != 0) os << ", ";
        print_expr(os, *s.args[i]);
      }
      os << ");\n";
      break;
    case StmtKind::Return:
      os << "return";
      if (s.expr) {
        os << " ";
        print_expr(os, *s.expr);
      }
      os << ";\n";
      break;
    case StmtKind::Assert:
      os << "assert(";
      print_expr(os, *s.expr);
      os << ");\n";
      break;
    case StmtKind::ErrorReach: os << "reach_error();\n"; break;
    case StmtKind::Label: os << "// @goal " << s.goal << " " << goal_kind_name(s.goal_kind) << "\n"; break;
  }
}

inline void print_block(std::ostream& os, const std::vector<Stmt>& body, int depth) {
  for (const auto& s : body) print_stmt(os, s, depth);
}

}  // namespace detail

inline void print_program(std::ostream& os, const Ast& ast) {
  bool first = true;
  for (const auto& f : ast.functions) {
    if (!first) os << "\n";
    first = false;
    os << (f.returns_void ? std::string("void") : type_name(f.return_type)) << " " << f.name << "(";
    for (std::size_t i = 0; i < f.params.size(); ++i) {
      if (i != 0) os << ", ";
      os << type_name(f.params[i].type) << " " << f.params[i].name;
    }
    os << ") {\n";
    detail::print_block(os, f.body, 1);
    os << "}\n";
  }
}

inline std::string to_source(const Ast& ast) {
  std::ostringstream os;
  print_program(os, ast);
  return os.str();
}

}  // namespace smartseed
