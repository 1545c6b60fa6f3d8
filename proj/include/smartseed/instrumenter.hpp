#pragma once

// Goal-label injection, input-guard inference and the "lightened" program
// variant used while generating seeds.

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "smartseed/ast.hpp"

namespace smartseed {

struct GoalLabel {
  int id = 0;
  GoalKind kind = GoalKind::FunctionEntry;
  std::string function;
  std::vector<int> path;  // statement indices from the function body down to the label
  int depth = 0;          // filled in by build_graph
};

struct GoalTable {
  std::vector<GoalLabel> goals;
  std::map<int, std::vector<int>> by_block;  // filled in by build_graph

  [[nodiscard]] std::size_t size() const { return goals.size(); }
  [[nodiscard]] int depth(int goal) const { return goals[static_cast<std::size_t>(goal)].depth; }
};

struct LabeledProgram {
  Ast ast;
  GoalTable goals;
};

namespace detail {

class LabelInjector {
 public:
  explicit LabelInjector(GoalTable& table) : table_(table) {}

  void function(FunctionDef& f) {
    fn_ = f.name;
    path_.clear();
    std::vector<Stmt> body;
    body.push_back(make_label(GoalKind::FunctionEntry, 0));
    inject(f.body, body);
    f.body = std::move(body);
  }

 private:
  GoalTable& table_;
  std::string fn_;
  std::vector<int> path_;

  Stmt make_label(GoalKind kind, int index) {
    Stmt s;
    s.kind = StmtKind::Label;
    s.goal = static_cast<int>(table_.goals.size());
    s.goal_kind = kind;
    GoalLabel g;
    g.id = s.goal;
    g.kind = kind;
    g.function = fn_;
    g.path = path_;
    g.path.push_back(index);
    table_.goals.push_back(std::move(g));
    return s;
  }

  // Appends `in` to `out`,
  // placing labels in front of error calls and at the head of every arm.
  void inject(const std::vector<Stmt>& in, std::vector<Stmt>& out) {
    for (const Stmt& original : in) {
      const int index = static_cast<int>(out.size());
      if (original.kind == StmtKind::ErrorReach) {
        out.push_back(make_label(GoalKind::ErrorReach, index));
        out.push_back(original);
        continue;
      }
      Stmt s = original;
      path_.push_back(index);
      if (s.kind == StmtKind::If) {
        s.body = arm(original.body, GoalKind::ThenBranch);
        s.else_body = arm(original.else_body, GoalKind::ElseBranch);
        s.has_else = true;
      } else if (s.kind == StmtKind::While) {
        s.body = arm(original.body, GoalKind::LoopBody);
      }
      path_.pop_back();
      out.push_back(std::move(s));
    }
  }

  std::vector<Stmt> arm(const std::vector<Stmt>& in, GoalKind kind) {
    // Arms are addressed as path element -1 (then/body) or -2 (else).
    path_.push_back(kind == GoalKind::ElseBranch ? -2 : -1);
    std::vector<Stmt> out;
    out.push_back(make_label(kind, 0));
    inject(in, out);
    path_.pop_back();
    return out;
  }
};

}  // namespace detail

/// Injects goal labels in pre-order. Every function gets an entry label, every
/// if a then and an else label (absent else arms become empty blocks), every
/// while a loop-body label and every reach_error() an error-reach label.
inline LabeledProgram inject_labels(const Ast& ast) {
  LabeledProgram out{ast, {}};
  detail::LabelInjector injector(out.goals);
  for (auto& f : out.ast.functions) injector.function(f);
  return out;
}

// ---------------------------------------------------------------------------
// Input-guard inference

struct GuardSource {
  SourceLoc loc;
  std::string text;
};

struct SiteConstraint {
  int site = 0;
  IntType type = kInt;
  ValueRange range;
  bool guarded = false;  // at least one recognized guard narrowed the range
  std::vector<GuardSource> provenance;
};

struct InputConstraints {
  std::vector<SiteConstraint> sites;

  [[nodiscard]] ValueRange range(std::size_t site) const { return sites.at(site).range; }
};

inline ValueRange full_range(IntType t) { return {type_min(t), type_max(t)}; }

namespace detail {

inline bool ends_execution(const std::vector<Stmt>& body) {
  // `return ...;` (in main) or reach-free early exits; labels are ignored.
  for (const Stmt& s : body) {
    if (s.kind == StmtKind::Label) continue;
    return s.kind == StmtKind::Return;
  }
  return false;
}

inline bool arm_is_empty(const std::vector<Stmt>& body) {
  return std::all_of(body.begin(), body.end(), [](const Stmt& s) { return s.kind == StmtKind::Label; });
}

struct Atom {
  int slot;
  BinOp op;  // relation that, when true, exits
  i128 constant;
};

inline BinOp mirror(BinOp op) {
  switch (op) {
    case BinOp::Lt: return BinOp::Gt;
    case BinOp::Le: return BinOp::Ge;
    case BinOp::Gt: return BinOp::Lt;
    case BinOp::Ge: return BinOp::Le;
    default: return op;
  }
}

// Recognizes `x <op> c` / `c <op> x` where the comparison happens in the
// variable's own type and c is representable in it.
inline std::optional<Atom> match_atom(const Expr& e, const std::vector<IntType>& slot_types) {
  if (e.kind != ExprKind::Binary || !is_comparison(e.bop)) return std::nullopt;
  const Expr* var = nullptr;
  const Expr* cst = nullptr;
  BinOp op = e.bop;
  if (e.lhs->kind == ExprKind::Var && e.rhs->kind == ExprKind::Const) {
    var = e.lhs.get();
    cst = e.rhs.get();
  } else if (e.rhs->kind == ExprKind::Var && e.lhs->kind == ExprKind::Const) {
    var = e.rhs.get();
    cst = e.lhs.get();
    op = mirror(op);
  } else if (e.lhs->kind == ExprKind::Var && e.rhs->kind == ExprKind::Unary && e.rhs->uop == UnOp::Neg &&
             e.rhs->lhs->kind == ExprKind::Const) {
    // `x < -5` parses as a negated literal
    var = e.lhs.get();
    cst = e.rhs.get();
  } else {
    return std::nullopt;
  }
  const IntType vt = slot_types[static_cast<std::size_t>(var->slot)];
  if (e.operand_type != vt) return std::nullopt;
  i128 c = 0;
  if (cst->kind == ExprKind::Const) {
    c = math_value(cst->value, cst->type);
  } else {
    c = -math_value(cst->lhs->value, cst->lhs->type);
    if (!fits(c, cst->type)) return std::nullopt;
  }
  if (!fits(c, vt)) return std::nullopt;
  return Atom{var->slot, op, c};
}

// Splits a disjunction of exit conditions into atoms; nullopt if any
// disjunct is not recognizable.
inline bool collect_disjuncts(const Expr& e, std::vector<const Expr*>& out) {
  if (e.kind == ExprKind::Binary && e.bop == BinOp::LOr) {
    return collect_disjuncts(*e.lhs, out) && collect_disjuncts(*e.rhs, out);
  }
  out.push_back(&e);
  return true;
}

// Narrows `r` to the values for which `x op c` is false.
inline ValueRange narrow_to_pass(ValueRange r, BinOp op, i128 c) {
  switch (op) {
    case BinOp::Lt: r.lo = std::max(r.lo, c); break;
    case BinOp::Le: r.lo = std::max(r.lo, c + 1); break;
    case BinOp::Gt: r.hi = std::min(r.hi, c); break;
    case BinOp::Ge: r.hi = std::min(r.hi, c - 1); break;
    case BinOp::Ne:
      r.lo = std::max(r.lo, c);
      r.hi = std::min(r.hi, c);
      break;
    case BinOp::Eq:
      if (r.lo == c) r.lo = c + 1;
      if (r.hi == c) r.hi = c - 1;
      break;
    default: break;
  }
  return r;
}

}  // namespace detail

/// Reads early-exit guards in the entry function's straight-line prefix:
/// `if (x <op> c [|| ...]) return ...;` where x still holds the value read
/// from an input site. Other shapes are skipped; the prefix ends at the first
/// loop, call, non-guard branch or plain return.
inline InputConstraints infer_input_constraints(const Ast& ast) {
  InputConstraints out;
  for (const auto& site : ast.input_sites) {
    out.sites.push_back(SiteConstraint{site.id, site.type, full_range(site.type), false, {}});
  }
  const FunctionDef* entry = ast.find(ast.entry);
  if (entry == nullptr) return out;

  std::map<int, int> slot_site;  // slot -> site it still holds
  for (const Stmt& s : entry->body) {
    if (s.kind == StmtKind::Label) continue;
    if (s.kind == StmtKind::Decl || s.kind == StmtKind::Assign) {
      slot_site.erase(s.slot);
      if (s.expr && s.expr->kind == ExprKind::Input) slot_site[s.slot] = s.expr->site;
      continue;
    }
    if (s.kind == StmtKind::Assert) continue;
    if (s.kind != StmtKind::If) break;
    const bool guard_shape = detail::ends_execution(s.body) && detail::arm_is_empty(s.else_body);
    if (!guard_shape) break;

    std::vector<const Expr*> disjuncts;
    detail::collect_disjuncts(*s.expr, disjuncts);
    std::vector<detail::Atom> atoms;
    bool recognized = true;
    for (const Expr* d : disjuncts) {
      auto atom = detail::match_atom(*d, entry->slot_types);
      if (!atom || slot_site.count(atom->slot) == 0U) {
        recognized = false;
        break;
      }
      atoms.push_back(*atom);
    }
    if (!recognized) continue;  // still a dominating exit; just not readable
    // Apply tentatively: a guard only counts when every disjunct carves off
    // exactly a tail of the current range.
    std::map<int, ValueRange> tentative;
    for (const auto& atom : atoms) {
      const int site = slot_site.at(atom.slot);
      auto it = tentative.find(site);
      const ValueRange before = it != tentative.end() ? it->second : out.sites[static_cast<std::size_t>(site)].range;
      if (atom.op == BinOp::Eq && atom.constant > before.lo && atom.constant < before.hi) {
        recognized = false;
        break;
      }
      const ValueRange after = detail::narrow_to_pass(before, atom.op, atom.constant);
      if (after.lo > after.hi) {
        recognized = false;
        break;
      }
      tentative[site] = after;
    }
    if (!recognized) continue;
    std::ostringstream text;
    detail::print_expr(text, *s.expr);
    for (const auto& [site, range] : tentative) {
      auto& sc = out.sites[static_cast<std::size_t>(site)];
      sc.range = range;
      sc.guarded = true;
      sc.provenance.push_back({s.loc, text.str()});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Lightening

struct LightenOptions {
  std::uint32_t loop_bound = 2;
  ValueRange default_range{-1024, 1024};
  bool bound_loops = true;
  bool clamp_inputs = true;
};

/// Range a lightened read of `site` is clamped into: the inferred range,
/// narrowed further by the default range when the two overlap; the default
/// range (within the type) for unguarded sites.
inline ValueRange lightened_range(const SiteConstraint& sc, ValueRange default_range) {
  const ValueRange type_range = full_range(sc.type);
  const ValueRange base = sc.guarded ? sc.range : type_range;
  ValueRange narrowed{std::max(base.lo, default_range.lo), std::min(base.hi, default_range.hi)};
  if (narrowed.lo <= narrowed.hi) return narrowed;
  return base;
}

namespace detail {

inline void lighten_block(std::vector<Stmt>& body, const LightenOptions& opts,
                          const std::vector<ValueRange>& clamps) {
  for (Stmt& s : body) {
    if (opts.clamp_inputs && (s.kind == StmtKind::Decl || s.kind == StmtKind::Assign) && s.expr &&
        s.expr->kind == ExprKind::Input) {
      auto e = std::make_shared<Expr>(*s.expr);
      e->clamp = clamps[static_cast<std::size_t>(e->site)];
      s.expr = e;
    }
    if (s.kind == StmtKind::While && opts.bound_loops) s.iteration_bound = opts.loop_bound;
    lighten_block(s.body, opts, clamps);
    lighten_block(s.else_body, opts, clamps);
  }
}

}  // namespace detail

/// Bounds every loop to `loop_bound` iterations and clamps every input read.
inline Ast lighten(const Ast& ast, const InputConstraints& constraints, const LightenOptions& opts = {}) {
  std::vector<ValueRange> clamps;
  for (const auto& sc : constraints.sites) clamps.push_back(lightened_range(sc, opts.default_range));
  Ast out = ast;
  for (auto& f : out.functions) detail::lighten_block(f.body, opts, clamps);
  return out;
}

inline Ast lighten(const Ast& ast, const LightenOptions& opts = {}) {
  return lighten(ast, infer_input_constraints(ast), opts);
}

/// Number of labels inject_labels produces for `ast`.
inline std::size_t expected_label_count(const Ast& ast) {
  std::size_t n = ast.functions.size();
  std::function<void(const std::vector<Stmt>&)> walk = [&](const std::vector<Stmt>& body) {
    for (const auto& s : body) {
      if (s.kind == StmtKind::If) n += 2;
      if (s.kind == StmtKind::While) n += 1;
      if (s.kind == StmtKind::ErrorReach) n += 1;
      walk(s.body);
      walk(s.else_body);
    }
  };
  for (const auto& f : ast.functions) walk(f.body);
  return n;
}

}  // namespace smartseed
