#pragma once

// Bounded symbolic execution. Paths are explored depth-first with loops
// unwound at most k times per loop entry; each path carries the conjuncts of
// the branches it took. A path that reaches the target goal is solved and the
// resulting inputs are replayed concretely before they leave this module.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "smartseed/executor.hpp"
#include "smartseed/solver.hpp"

namespace smartseed {

enum class BmcStrategy { Fixed, Incr, Falsi, KInduction };

inline BmcStrategy parse_bmc_strategy(const std::string& s) {
  if (s == "fixed") return BmcStrategy::Fixed;
  if (s == "incr") return BmcStrategy::Incr;
  if (s == "falsi") return BmcStrategy::Falsi;
  if (s == "kinduction") return BmcStrategy::KInduction;
  throw std::invalid_argument("unknown BMC strategy '" + s + "'");
}

inline const char* bmc_strategy_name(BmcStrategy s) {
  switch (s) {
    case BmcStrategy::Fixed: return "fixed";
    case BmcStrategy::Incr: return "incr";
    case BmcStrategy::Falsi: return "falsi";
    case BmcStrategy::KInduction: return "kinduction";
  }
  return "?";
}

struct BmcConfig {
  BmcStrategy strategy = BmcStrategy::Incr;
  std::uint32_t k = 1;
  std::uint32_t k_max = 16;
  std::uint64_t max_paths = 4096;
  std::uint64_t per_goal_budget = 0;  // cost units, 0 = unlimited
  SolveOptions solver;
  std::optional<ValueRange> input_domain;  // restricts every read, as int64 test values
  bool prune = true;                       // drop branches propagation proves infeasible
  std::ostream* dump_pc = nullptr;
};

/// Bounds tried for a config, in order.
inline std::vector<std::uint32_t> bound_schedule(const BmcConfig& cfg) {
  if (cfg.k < 1 || cfg.k_max < cfg.k) throw std::invalid_argument("BMC bounds require 1 <= k <= k_max");
  if (cfg.strategy == BmcStrategy::Fixed) return {cfg.k};
  std::vector<std::uint32_t> out;
  std::uint32_t k = 1;
  while (k < cfg.k_max) {
    out.push_back(k);
    k *= 2;
  }
  out.push_back(cfg.k_max);
  return out;
}

/// Goals a strategy may target at all.
inline bool strategy_targets(BmcStrategy s, GoalKind kind) {
  return s != BmcStrategy::Falsi || kind == GoalKind::ErrorReach;
}

enum class BmcStatus { Found, UnsatAtBound, BudgetExhausted, PathCap };

inline const char* bmc_status_name(BmcStatus s) {
  switch (s) {
    case BmcStatus::Found: return "found";
    case BmcStatus::UnsatAtBound: return "unsat-at-bound";
    case BmcStatus::BudgetExhausted: return "budget-exhausted";
    case BmcStatus::PathCap: return "path-cap";
  }
  return "?";
}

struct Witness {
  TestCase testcase;
  int goal = -1;
  std::uint32_t k_used = 0;
};

struct BmcResult {
  std::optional<Witness> witness;
  BmcStatus status = BmcStatus::UnsatAtBound;
  std::uint64_t cost = 0;
  std::uint64_t paths = 0;
  std::uint64_t validation_failures = 0;
  std::vector<std::uint32_t> bounds_tried;
};

/// One explored path: its condition and the goals it passes, in order.
struct SymbolicPath {
  PathCondition pc;
  std::vector<int> goals;
  bool reached_error = false;
};

struct Unrolling {
  std::vector<SymbolicPath> paths;
  bool incomplete = false;  // path cap hit
};

namespace detail {

/// Symbolic variable domain for a read: the read's int64 test values are
/// modelled by a signed variable of the read's width, so every bit pattern
/// stays reachable and witnesses come back as plain test values.
inline IntType read_var_type(IntType t) { return IntType{t.bits, true}; }

class SymbolicExecutor {
 public:
  // Called for every finished path and for each target hit. Return false to stop.
  using Sink = std::function<bool(const SymbolicPath&)>;

  SymbolicExecutor(const Program& p, std::uint32_t k, std::uint64_t max_paths, bool prune, int target,
                   std::optional<ValueRange> domain)
      : p_(p), k_(k), max_paths_(max_paths), prune_(prune), target_(target), domain_(domain) {}

  /// Explores all paths; returns false when the path cap stopped the search.
  bool explore(const Sink& sink) {
    State init;
    Frame f;
    const FunctionDef& main = p_.ast.entry_function();
    f.fn = &main;
    f.slots.assign(main.slot_types.size(), mk_const(0, kInt));
    for (std::size_t i = 0; i < main.slot_types.size(); ++i) f.slots[i] = mk_const(0, main.slot_types[i]);
    f.cursors.push_back(Cursor{&main.body, 0, nullptr, 0});
    init.frames.push_back(std::move(f));
    work_.push_back(std::move(init));
    while (!work_.empty()) {
      State s = std::move(work_.back());
      work_.pop_back();
      if (!advance(s, sink)) return !capped_;
    }
    return !capped_;
  }

  [[nodiscard]] std::uint64_t paths() const { return paths_; }

 private:
  struct Cursor {
    const std::vector<Stmt>* body = nullptr;  // null for a loop cursor
    std::size_t idx = 0;
    const Stmt* loop = nullptr;
    std::uint32_t iterations = 0;
  };
  struct Frame {
    const FunctionDef* fn = nullptr;
    std::vector<TermPtr> slots;
    std::vector<Cursor> cursors;
    const Stmt* call = nullptr;  // call statement in the caller that created this frame
  };
  struct State {
    std::vector<Frame> frames;
    std::vector<TermPtr> conjuncts;
    std::vector<SymVar> vars;
    std::vector<int> goals;
    std::vector<int> blocks;
    std::vector<bool> seen;
  };

  const Program& p_;
  std::uint32_t k_;
  std::uint64_t max_paths_;
  bool prune_;
  int target_;
  std::optional<ValueRange> domain_;
  std::vector<State> work_;
  std::uint64_t paths_ = 0;
  bool capped_ = false;

  bool feasible(const State& s) const {
    if (!prune_) return true;
    Domains d;
    for (const auto& v : s.vars) d.push_back(v.domain);
    return propagate(s.conjuncts, d, 8);
  }

  static void add(State& s, const TermPtr& c) {
    if (c->is_const() && truthy(c->value)) return;
    s.conjuncts.push_back(c);
  }
  static bool dead(const State& s) {
    return !s.conjuncts.empty() && s.conjuncts.back()->is_const() && !truthy(s.conjuncts.back()->value);
  }

  // Emits a finished path. False when exploration must stop.
  bool finish(State& s, const Sink& sink, bool error) {
    if (paths_ >= max_paths_) {
      capped_ = true;
      return false;
    }
    ++paths_;
    if (target_ >= 0) return true;  // targeted runs only report hits
    return sink(make_path(s, error));
  }

  SymbolicPath make_path(const State& s, bool error) const {
    SymbolicPath out;
    out.pc.conjuncts = s.conjuncts;
    out.pc.vars = s.vars;
    out.pc.target = target_;
    out.pc.path = s.blocks;
    out.goals = s.goals;
    out.reached_error = error;
    return out;
  }

  TermPtr read(State& s, const Expr& e) {
    const IntType t = e.type;
    SymVar v;
    v.site = e.site;
    if (e.clamp) {
      v.type = t;
      v.domain = *e.clamp;
      if (domain_ && t.is_signed) v.domain = interval::meet(v.domain, *domain_);
      if (domain_ && !t.is_signed) v.domain = interval::meet(v.domain, {0, std::max<i128>(domain_->hi, 0)});
      s.vars.push_back(v);
      return mk_var(static_cast<std::uint32_t>(s.vars.size() - 1), t);
    }
    v.type = read_var_type(t);
    v.domain = interval::full(v.type);
    if (domain_) v.domain = interval::meet(v.domain, *domain_);
    s.vars.push_back(v);
    return mk_convert(mk_var(static_cast<std::uint32_t>(s.vars.size() - 1), v.type), t);
  }

  // Division safety conditions are collected under the short-circuit guard
  // that must hold for the division to be evaluated at all.
  TermPtr eval(State& s, const Expr& e, const std::vector<TermPtr>& slots, const TermPtr& guard,
               std::vector<TermPtr>& safety) {
    switch (e.kind) {
      case ExprKind::Const: return mk_const(e.value, e.type);
      case ExprKind::Var: return slots[static_cast<std::size_t>(e.slot)];
      case ExprKind::Input: return read(s, e);
      case ExprKind::Unary: {
        TermPtr a = eval(s, *e.lhs, slots, guard, safety);
        if (e.uop == UnOp::LNot) return mk_not(a);
        return mk_unary(e.uop, mk_convert(a, e.type));
      }
      case ExprKind::Binary: {
        TermPtr a = eval(s, *e.lhs, slots, guard, safety);
        if (e.bop == BinOp::LAnd || e.bop == BinOp::LOr) {
          TermPtr ta = mk_truth(a);
          TermPtr cond = e.bop == BinOp::LAnd ? ta : mk_not(ta);
          TermPtr inner = guard ? mk_binary(BinOp::LAnd, guard, cond) : cond;
          TermPtr b = eval(s, *e.rhs, slots, inner, safety);
          return mk_binary(e.bop, ta, mk_truth(b));
        }
        TermPtr b = eval(s, *e.rhs, slots, guard, safety);
        const IntType ot = e.operand_type;
        TermPtr ca = mk_convert(a, ot);
        TermPtr cb = mk_convert(b, ot);
        if (e.bop == BinOp::Div || e.bop == BinOp::Rem) {
          TermPtr nz = mk_binary(BinOp::Ne, cb, mk_const(0, ot));
          safety.push_back(guard ? mk_binary(BinOp::LOr, mk_not(guard), nz) : nz);
        }
        return mk_binary(e.bop, ca, cb);
      }
    }
    return mk_const(0, kInt);
  }

  TermPtr eval_top(State& s, const Expr& e) {
    std::vector<TermPtr> safety;
    TermPtr v = eval(s, e, s.frames.back().slots, nullptr, safety);
    for (auto& c : safety) add(s, c);
    return v;
  }

  void pass_label(State& s, int goal) {
    if (s.seen.empty()) s.seen.assign(p_.goals.size(), false);
    if (!s.seen[static_cast<std::size_t>(goal)]) {
      s.seen[static_cast<std::size_t>(goal)] = true;
      s.goals.push_back(goal);
      s.blocks.push_back(p_.graph.goal_block[static_cast<std::size_t>(goal)]);
    }
  }

  void fork(State& s, const TermPtr& cond, State& taken, State& other) {
    taken = s;
    add(taken, cond);
    other = std::move(s);
    add(other, mk_not(cond));
  }

  // Runs a state until it forks, ends, or hits the target. False stops exploration.
  bool advance(State& s, const Sink& sink) {
    for (;;) {
      if (dead(s)) return true;
      Frame& fr = s.frames.back();
      if (fr.cursors.empty()) {
        if (!do_return(s, mk_const(0, fr.fn->return_type))) return finish(s, sink, false);
        continue;
      }
      Cursor& cur = fr.cursors.back();
      if (cur.loop != nullptr) {
        const Stmt& loop = *cur.loop;
        if (loop.iteration_bound && cur.iterations >= *loop.iteration_bound) {
          fr.cursors.pop_back();
          continue;
        }
        TermPtr c = mk_truth(eval_top(s, *loop.expr));
        if (dead(s)) return true;
        Frame& f2 = s.frames.back();
        Cursor& c2 = f2.cursors.back();
        if (c2.iterations >= k_) {
          add(s, mk_not(c));
          f2.cursors.pop_back();
          continue;
        }
        if (c->is_const()) {
          if (truthy(c->value)) {
            ++c2.iterations;
            f2.cursors.push_back(Cursor{&loop.body, 0, nullptr, 0});
          } else {
            f2.cursors.pop_back();
          }
          continue;
        }
        State enter;
        State leave;
        fork(s, c, enter, leave);
        leave.frames.back().cursors.pop_back();
        Cursor& ec = enter.frames.back().cursors.back();
        ++ec.iterations;
        enter.frames.back().cursors.push_back(Cursor{&loop.body, 0, nullptr, 0});
        push_feasible(std::move(leave));
        push_feasible(std::move(enter));
        return true;
      }
      if (cur.idx >= cur.body->size()) {
        fr.cursors.pop_back();
        continue;
      }
      const Stmt& st = (*cur.body)[cur.idx++];
      switch (st.kind) {
        case StmtKind::Label:
          pass_label(s, st.goal);
          if (st.goal == target_) {
            if (paths_ >= max_paths_) {
              capped_ = true;
              return false;
            }
            ++paths_;
            return sink(make_path(s, false));
          }
          break;
        case StmtKind::Decl:
        case StmtKind::Assign: {
          TermPtr v = st.expr ? mk_convert(eval_top(s, *st.expr), st.var_type) : mk_const(0, st.var_type);
          s.frames.back().slots[static_cast<std::size_t>(st.slot)] = v;
          break;
        }
        case StmtKind::If: {
          TermPtr c = mk_truth(eval_top(s, *st.expr));
          if (dead(s)) return true;
          if (c->is_const()) {
            s.frames.back().cursors.push_back(Cursor{truthy(c->value) ? &st.body : &st.else_body, 0, nullptr, 0});
            break;
          }
          State then_s;
          State else_s;
          fork(s, c, then_s, else_s);
          then_s.frames.back().cursors.push_back(Cursor{&st.body, 0, nullptr, 0});
          else_s.frames.back().cursors.push_back(Cursor{&st.else_body, 0, nullptr, 0});
          push_feasible(std::move(else_s));
          push_feasible(std::move(then_s));
          return true;
        }
        case StmtKind::While:
          s.frames.back().cursors.push_back(Cursor{nullptr, 0, &st, 0});
          break;
        case StmtKind::Call: {
          const FunctionDef& callee = *p_.ast.find(st.callee);
          Frame nf;
          nf.fn = &callee;
          nf.call = &st;
          nf.slots.resize(callee.slot_types.size());
          for (std::size_t i = 0; i < callee.slot_types.size(); ++i) nf.slots[i] = mk_const(0, callee.slot_types[i]);
          for (std::size_t i = 0; i < st.args.size(); ++i) {
            nf.slots[i] = mk_convert(eval_top(s, *st.args[i]), callee.params[i].type);
          }
          nf.cursors.push_back(Cursor{&callee.body, 0, nullptr, 0});
          s.frames.push_back(std::move(nf));
          break;
        }
        case StmtKind::Return: {
          const IntType rt = s.frames.back().fn->return_type;
          TermPtr v = st.expr ? mk_convert(eval_top(s, *st.expr), rt) : mk_const(0, rt);
          if (dead(s)) return true;
          if (!do_return(s, v)) return finish(s, sink, false);
          break;
        }
        case StmtKind::Assert: {
          // A failing assertion ends the path; only the passing side continues.
          TermPtr c = mk_truth(eval_top(s, *st.expr));
          if (c->is_const()) {
            if (!truthy(c->value)) return finish(s, sink, false);
            break;
          }
          State pass;
          State fail;
          fork(s, c, pass, fail);
          if (feasible(fail) && !finish(fail, sink, false)) return false;
          push_feasible(std::move(pass));
          return true;
        }
        case StmtKind::ErrorReach: return finish(s, sink, true);
      }
    }
  }

  void push_feasible(State&& s) {
    if (dead(s) || !feasible(s)) return;
    work_.push_back(std::move(s));
  }

  // Pops the current frame and delivers `v` to the caller; false when main returned.
  static bool do_return(State& s, const TermPtr& v) {
    Frame done = std::move(s.frames.back());
    s.frames.pop_back();
    if (s.frames.empty()) return false;
    const Stmt* call = done.call;
    if (call != nullptr && call->has_target) {
      s.frames.back().slots[static_cast<std::size_t>(call->slot)] = mk_convert(v, call->var_type);
    }
    return true;
  }
};

}  // namespace detail

/// All paths through the program with loops unwound at most k times. Only
/// constant conditions are folded; no feasibility pruning.
inline Unrolling unroll(const Program& p, std::uint32_t k, std::uint64_t max_paths = 4096) {
  if (k < 1) throw std::invalid_argument("unwind bound must be >= 1");
  Unrolling out;
  detail::SymbolicExecutor ex(p, k, max_paths, false, -1, std::nullopt);
  out.incomplete = !ex.explore([&](const SymbolicPath& path) {
    out.paths.push_back(path);
    return true;
  });
  return out;
}

/// Prints a path condition in prefix notation, one conjunct per line.
inline void dump_path_condition(std::ostream& os, const PathCondition& pc) {
  os << "pc target=" << pc.target << " vars=" << pc.vars.size() << " path=";
  for (std::size_t i = 0; i < pc.path.size(); ++i) os << (i ? "," : "") << pc.path[i];
  os << "\n";
  for (std::size_t i = 0; i < pc.vars.size(); ++i) {
    os << "  var v" << i << " site=" << pc.vars[i].site << " " << short_type(pc.vars[i].type) << " ["
       << to_string(pc.vars[i].domain.lo) << "," << to_string(pc.vars[i].domain.hi) << "]\n";
  }
  for (const auto& c : pc.conjuncts) {
    os << "  ";
    print_term(os, *c);
    os << "\n";
  }
}

/// Searches for inputs covering `goal`. `covered` is the caller's snapshot of
/// covered goals; asking for a covered goal is a caller bug.
inline BmcResult reach_goal(const Program& p, int goal, const BmcConfig& cfg, const std::vector<bool>& covered) {
  if (goal < 0 || static_cast<std::size_t>(goal) >= p.goals.size()) throw std::out_of_range("goal id");
  if (static_cast<std::size_t>(goal) < covered.size() && covered[static_cast<std::size_t>(goal)]) {
    throw std::invalid_argument("goal " + std::to_string(goal) + " is already covered");
  }
  BmcResult res;
  bool any_incomplete = false;
  bool any_cap = false;
  const auto over_budget = [&] { return cfg.per_goal_budget != 0 && res.cost >= cfg.per_goal_budget; };
  for (std::uint32_t k : bound_schedule(cfg)) {
    if (over_budget()) {
      any_incomplete = true;
      break;
    }
    ++res.cost;
    res.bounds_tried.push_back(k);
    detail::SymbolicExecutor ex(p, k, cfg.max_paths, cfg.prune, goal, cfg.input_domain);
    const bool done = ex.explore([&](const SymbolicPath& path) {
      if (cfg.dump_pc != nullptr) dump_path_condition(*cfg.dump_pc, path.pc);
      const SolveResult sr = solve(path.pc, cfg.solver);
      if (sr.status == SolveStatus::Incomplete) any_incomplete = true;
      if (sr.status != SolveStatus::Sat) return !over_budget();
      TestCase tc;
      tc.origin = Origin::Bmc;
      for (std::size_t i = 0; i < path.pc.vars.size(); ++i) {
        tc.inputs.push_back(to_input(sr.assignment[i], path.pc.vars[i].type));
      }
      ++res.cost;
      const ExecutionTrace tr = run(p, tc);
      if (std::find(tr.covered.begin(), tr.covered.end(), goal) == tr.covered.end()) {
        ++res.validation_failures;
        return !over_budget();
      }
      res.witness = Witness{std::move(tc), goal, k};
      return false;
    });
    res.paths += ex.paths();
    if (res.witness) {
      res.status = BmcStatus::Found;
      return res;
    }
    if (!done) any_cap = true;
  }
  if (any_cap) {
    res.status = BmcStatus::PathCap;
  } else if (any_incomplete) {
    res.status = BmcStatus::BudgetExhausted;
  } else {
    res.status = BmcStatus::UnsatAtBound;
  }
  return res;
}

}  // namespace smartseed
