#pragma once

// Symbolic terms over input variables. Constructors fold constants, so a term
// whose leaves are all constants is always a single Const node.

#include <cstdint>
#include <memory>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "smartseed/ast.hpp"

namespace smartseed {

enum class TermOp { Const, Var, Convert, Unary, Binary };

struct Term;
using TermPtr = std::shared_ptr<const Term>;

struct Term {
  TermOp op = TermOp::Const;
  IntType type = kInt;
  std::uint64_t value = 0;  // Const
  std::uint32_t var = 0;    // Var
  UnOp uop = UnOp::Neg;
  BinOp bop = BinOp::Add;
  TermPtr a;
  TermPtr b;

  [[nodiscard]] bool is_const() const { return op == TermOp::Const; }
  [[nodiscard]] bool is_boolean() const {
    return (op == TermOp::Binary && yields_boolean(bop)) || (op == TermOp::Unary && uop == UnOp::LNot) ||
           (op == TermOp::Const && type == kInt && value <= 1);
  }
};

/// A symbolic input: the n-th dynamic read along a path.
struct SymVar {
  int site = 0;
  IntType type = kInt;
  ValueRange domain;
};

inline TermPtr mk_const(std::uint64_t bits, IntType t) {
  auto n = std::make_shared<Term>();
  n->op = TermOp::Const;
  n->type = t;
  n->value = normalize(bits, t);
  return n;
}

inline TermPtr mk_bool(bool v) { return mk_const(v ? 1 : 0, kInt); }

inline TermPtr mk_var(std::uint32_t id, IntType t) {
  auto n = std::make_shared<Term>();
  n->op = TermOp::Var;
  n->type = t;
  n->var = id;
  return n;
}

inline TermPtr mk_convert(const TermPtr& x, IntType to) {
  if (x->type == to) return x;
  if (x->is_const()) return mk_const(convert(x->value, x->type, to), to);
  auto n = std::make_shared<Term>();
  n->op = TermOp::Convert;
  n->type = to;
  n->a = x;
  return n;
}

inline TermPtr mk_binary(BinOp op, const TermPtr& a, const TermPtr& b);

/// `x != 0` as a boolean term (x itself when it already is one).
inline TermPtr mk_truth(const TermPtr& x) {
  if (x->is_boolean()) return x;
  if (x->is_const()) return mk_bool(truthy(x->value));
  return mk_binary(BinOp::Ne, x, mk_const(0, x->type));
}

inline TermPtr mk_unary(UnOp op, const TermPtr& x) {
  if (op == UnOp::LNot) {
    if (x->is_const()) return mk_bool(!truthy(x->value));
    auto n = std::make_shared<Term>();
    n->op = TermOp::Unary;
    n->uop = op;
    n->type = kInt;
    n->a = x;
    return n;
  }
  if (x->is_const()) return mk_const(apply_unary(op, x->type, x->value), x->type);
  auto n = std::make_shared<Term>();
  n->op = TermOp::Unary;
  n->uop = op;
  n->type = x->type;
  n->a = x;
  return n;
}

/// Operands of arithmetic/comparison ops must already share their operand
/// type; logical ops accept any operand types.
inline TermPtr mk_binary(BinOp op, const TermPtr& a, const TermPtr& b) {
  if (op == BinOp::LAnd) {
    if (a->is_const()) return truthy(a->value) ? mk_truth(b) : mk_bool(false);
    if (b->is_const()) return truthy(b->value) ? mk_truth(a) : mk_bool(false);
  } else if (op == BinOp::LOr) {
    if (a->is_const()) return truthy(a->value) ? mk_bool(true) : mk_truth(b);
    if (b->is_const()) return truthy(b->value) ? mk_bool(true) : mk_truth(a);
  } else if (a->is_const() && b->is_const()) {
    return mk_const(apply_binary(op, a->type, a->value, b->value), result_type(op, a->type));
  }
  auto n = std::make_shared<Term>();
  n->op = TermOp::Binary;
  n->bop = op;
  n->type = is_logical(op) ? kInt : result_type(op, a->type);
  n->a = a;
  n->b = b;
  return n;
}

inline TermPtr mk_not(const TermPtr& x) { return mk_unary(UnOp::LNot, x); }

/// Evaluates under a full assignment (bits per variable id).
inline std::uint64_t eval_term(const Term& t, const std::vector<std::uint64_t>& vals) {
  switch (t.op) {
    case TermOp::Const: return t.value;
    case TermOp::Var: return normalize(vals.at(t.var), t.type);
    case TermOp::Convert: return convert(eval_term(*t.a, vals), t.a->type, t.type);
    case TermOp::Unary: {
      const std::uint64_t x = eval_term(*t.a, vals);
      if (t.uop == UnOp::LNot) return truthy(x) ? 0 : 1;
      return apply_unary(t.uop, t.type, x);
    }
    case TermOp::Binary: {
      const std::uint64_t x = eval_term(*t.a, vals);
      const std::uint64_t y = eval_term(*t.b, vals);
      if (is_logical(t.bop)) return apply_binary(t.bop, kInt, truthy(x) ? 1 : 0, truthy(y) ? 1 : 0);
      return apply_binary(t.bop, t.a->type, x, y);
    }
  }
  return 0;
}

inline void collect_vars(const Term& t, std::vector<bool>& used) {
  if (t.op == TermOp::Var) {
    if (t.var >= used.size()) used.resize(t.var + 1, false);
    used[t.var] = true;
  }
  if (t.a) collect_vars(*t.a, used);
  if (t.b) collect_vars(*t.b, used);
}

inline std::string short_type(IntType t) {
  return std::string(t.is_signed ? "i" : "u") + std::to_string(t.bits);
}

/// Deterministic prefix notation, e.g. `(== v0:i32 62710561)`.
inline void print_term(std::ostream& os, const Term& t) {
  switch (t.op) {
    case TermOp::Const: os << to_string(math_value(t.value, t.type)); break;
    case TermOp::Var: os << "v" << t.var << ":" << short_type(t.type); break;
    case TermOp::Convert:
      os << "(" << short_type(t.type) << " ";
      print_term(os, *t.a);
      os << ")";
      break;
    case TermOp::Unary:
      os << "(" << op_symbol(t.uop) << " ";
      print_term(os, *t.a);
      os << ")";
      break;
    case TermOp::Binary:
      os << "(" << op_symbol(t.bop) << " ";
      print_term(os, *t.a);
      os << " ";
      print_term(os, *t.b);
      os << ")";
      break;
  }
}

inline std::string term_string(const Term& t) {
  std::ostringstream os;
  print_term(os, t);
  return os.str();
}

}  // namespace smartseed
