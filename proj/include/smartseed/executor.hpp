#pragma once

// Concrete interpreter for labeled MiniC programs. Its traces are the ground
// truth every engine and every coverage claim is checked against.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "smartseed/reachability.hpp"

namespace smartseed {

enum class Origin { Fuzzer, Selective, Bmc, SeedPhase, Corpus };

inline const char* origin_name(Origin o) {
  switch (o) {
    case Origin::Fuzzer: return "fuzzer";
    case Origin::Selective: return "selective";
    case Origin::Bmc: return "bmc";
    case Origin::SeedPhase: return "seed-phase";
    case Origin::Corpus: return "corpus";
  }
  return "?";
}

using TestId = std::uint64_t;

struct TestCase {
  std::vector<std::int64_t> inputs;
  Origin origin = Origin::Corpus;
  TestId id = 0;
};

enum class EndReason { NormalExit, AssertionFailure, ErrorReached, Trap, StepLimit };

inline const char* end_reason_name(EndReason r) {
  switch (r) {
    case EndReason::NormalExit: return "normal-exit";
    case EndReason::AssertionFailure: return "assertion-failure";
    case EndReason::ErrorReached: return "error-reached";
    case EndReason::Trap: return "trap";
    case EndReason::StepLimit: return "step-limit";
  }
  return "?";
}

enum class TrapKind { None, DivisionByZero };

struct ExecutionTrace {
  std::vector<int> covered;  // first-hit order, no duplicates
  int max_depth = -1;        // -1 when nothing was covered
  EndReason end = EndReason::NormalExit;
  int error_goal = -1;       // ErrorReached: the error-reach label just passed
  TrapKind trap = TrapKind::None;
  SourceLoc where{};         // assertion or trap location
  bool input_exhausted = false;  // a read found no value left and used 0
  std::size_t inputs_consumed = 0;
  std::uint64_t steps = 0;
  std::int64_t exit_value = 0;

  friend bool operator==(const ExecutionTrace& a, const ExecutionTrace& b) {
    return a.covered == b.covered && a.max_depth == b.max_depth && a.end == b.end &&
           a.error_goal == b.error_goal && a.trap == b.trap && a.where.line == b.where.line &&
           a.where.col == b.where.col && a.input_exhausted == b.input_exhausted &&
           a.inputs_consumed == b.inputs_consumed && a.steps == b.steps && a.exit_value == b.exit_value;
  }
};

inline constexpr std::uint64_t kDefaultStepLimit = 10'000;

namespace detail {

class Interpreter {
 public:
  Interpreter(const Ast& ast, const GoalTable& goals, const TestCase& tc, std::uint64_t step_limit)
      : ast_(ast), goals_(goals), tc_(tc), step_limit_(step_limit), seen_(goals.size(), false) {}

  ExecutionTrace run() {
    const FunctionDef& main = ast_.entry_function();
    std::uint64_t ret = 0;
    if (call(main, {}, ret)) {
      trace_.end = EndReason::NormalExit;
      trace_.exit_value = to_input(ret, main.return_type);
    }
    for (int g : trace_.covered) trace_.max_depth = std::max(trace_.max_depth, goals_.depth(g));
    return trace_;
  }

 private:
  enum class Flow { Next, Return, Halt };

  struct Frame {
    std::vector<std::uint64_t> slots;
    std::uint64_t ret = 0;
    IntType ret_type = kInt;
  };

  const Ast& ast_;
  const GoalTable& goals_;
  const TestCase& tc_;
  std::uint64_t step_limit_;
  std::vector<bool> seen_;
  ExecutionTrace trace_;
  int last_label_ = -1;

  bool step() {
    if (++trace_.steps > step_limit_) {
      trace_.steps = step_limit_;
      trace_.end = EndReason::StepLimit;
      return false;
    }
    return true;
  }

  // Returns false when the program halted inside the callee.
  bool call(const FunctionDef& f, const std::vector<std::uint64_t>& args, std::uint64_t& ret) {
    Frame frame;
    frame.slots.assign(f.slot_types.size(), 0);
    frame.ret_type = f.return_type;
    for (std::size_t i = 0; i < args.size(); ++i) frame.slots[i] = args[i];
    const Flow flow = exec(f.body, frame);
    if (flow == Flow::Halt) return false;
    ret = flow == Flow::Return ? frame.ret : 0;
    return true;
  }

  std::uint64_t read_input(const Expr& e) {
    const IntType t = e.type;
    std::uint64_t bits = 0;
    if (trace_.inputs_consumed < tc_.inputs.size()) {
      bits = input_bits(tc_.inputs[trace_.inputs_consumed], t);
    } else {
      trace_.input_exhausted = true;
    }
    ++trace_.inputs_consumed;
    if (e.clamp) {
      const i128 v = std::clamp(math_value(bits, t), e.clamp->lo, e.clamp->hi);
      bits = from_math(v, t);
    }
    return bits;
  }

  // nullopt: division by zero (trace already marked).
  std::optional<std::uint64_t> eval(const Expr& e, const Frame& fr) {
    switch (e.kind) {
      case ExprKind::Const: return e.value;
      case ExprKind::Var: return fr.slots[static_cast<std::size_t>(e.slot)];
      case ExprKind::Input: return read_input(e);
      case ExprKind::Unary: {
        auto a = eval(*e.lhs, fr);
        if (!a) return std::nullopt;
        if (e.uop == UnOp::LNot) return truthy(*a) ? 0 : 1;
        return apply_unary(e.uop, e.type, *a);
      }
      case ExprKind::Binary: {
        auto a = eval(*e.lhs, fr);
        if (!a) return std::nullopt;
        if (e.bop == BinOp::LAnd && !truthy(*a)) return 0;
        if (e.bop == BinOp::LOr && truthy(*a)) return 1;
        auto b = eval(*e.rhs, fr);
        if (!b) return std::nullopt;
        const IntType ot = e.operand_type;
        const std::uint64_t ca = is_logical(e.bop) ? (truthy(*a) ? 1 : 0) : convert(*a, e.lhs->type, ot);
        const std::uint64_t cb = is_logical(e.bop) ? (truthy(*b) ? 1 : 0) : convert(*b, e.rhs->type, ot);
        if ((e.bop == BinOp::Div || e.bop == BinOp::Rem) && cb == 0) {
          trace_.end = EndReason::Trap;
          trace_.trap = TrapKind::DivisionByZero;
          trace_.where = e.loc;
          return std::nullopt;
        }
        return apply_binary(e.bop, ot, ca, cb);
      }
    }
    return 0;
  }

  Flow exec(const std::vector<Stmt>& body, Frame& fr) {
    for (const Stmt& s : body) {
      if (s.kind == StmtKind::Label) {
        last_label_ = s.goal;
        if (!seen_[static_cast<std::size_t>(s.goal)]) {
          seen_[static_cast<std::size_t>(s.goal)] = true;
          trace_.covered.push_back(s.goal);
        }
        continue;
      }
      if (!step()) return Flow::Halt;
      switch (s.kind) {
        case StmtKind::Decl:
        case StmtKind::Assign: {
          std::uint64_t v = 0;
          if (s.expr) {
            auto r = eval(*s.expr, fr);
            if (!r) return Flow::Halt;
            v = convert(*r, s.expr->type, s.var_type);
          }
          fr.slots[static_cast<std::size_t>(s.slot)] = v;
          break;
        }
        case StmtKind::If: {
          auto c = eval(*s.expr, fr);
          if (!c) return Flow::Halt;
          const Flow f = exec(truthy(*c) ? s.body : s.else_body, fr);
          if (f != Flow::Next) return f;
          break;
        }
        case StmtKind::While: {
          std::uint32_t iterations = 0;
          for (;;) {
            if (s.iteration_bound && iterations >= *s.iteration_bound) break;
            auto c = eval(*s.expr, fr);
            if (!c) return Flow::Halt;
            if (!truthy(*c)) break;
            ++iterations;
            const Flow f = exec(s.body, fr);
            if (f != Flow::Next) return f;
            if (!step()) return Flow::Halt;
          }
          break;
        }
        case StmtKind::Call: {
          const FunctionDef& callee = *ast_.find(s.callee);
          std::vector<std::uint64_t> args;
          for (std::size_t i = 0; i < s.args.size(); ++i) {
            auto a = eval(*s.args[i], fr);
            if (!a) return Flow::Halt;
            args.push_back(convert(*a, s.args[i]->type, callee.params[i].type));
          }
          std::uint64_t ret = 0;
          if (!call(callee, args, ret)) return Flow::Halt;
          if (s.has_target) {
            fr.slots[static_cast<std::size_t>(s.slot)] = convert(ret, callee.return_type, s.var_type);
          }
          break;
        }
        case StmtKind::Return: {
          if (s.expr) {
            auto r = eval(*s.expr, fr);
            if (!r) return Flow::Halt;
            fr.ret = convert(*r, s.expr->type, fr.ret_type);
          }
          return Flow::Return;
        }
        case StmtKind::Assert: {
          auto c = eval(*s.expr, fr);
          if (!c) return Flow::Halt;
          if (!truthy(*c)) {
            trace_.end = EndReason::AssertionFailure;
            trace_.where = s.loc;
            return Flow::Halt;
          }
          break;
        }
        case StmtKind::ErrorReach:
          trace_.end = EndReason::ErrorReached;
          trace_.error_goal = last_label_;
          trace_.where = s.loc;
          return Flow::Halt;
        case StmtKind::Label: break;
      }
    }
    return Flow::Next;
  }

};

}  // namespace detail

/// Runs `tc` on a labeled program. Abnormal ends are trace outcomes, never errors.
inline ExecutionTrace run(const Ast& labeled, const GoalTable& goals, const TestCase& tc,
                          std::uint64_t step_limit = kDefaultStepLimit) {
  return detail::Interpreter(labeled, goals, tc, step_limit).run();
}

inline ExecutionTrace run(const Program& p, const TestCase& tc, std::uint64_t step_limit = kDefaultStepLimit) {
  return run(p.ast, p.goals, tc, step_limit);
}

struct CoverageSummary {
  std::vector<int> covered;                 // ascending goal ids
  std::map<int, TestId> first_covering;    // goal -> first test (suite order) covering it

  friend bool operator==(const CoverageSummary&, const CoverageSummary&) = default;
};

inline CoverageSummary replay_suite(const Program& p, const std::vector<TestCase>& suite,
                                    std::uint64_t step_limit = kDefaultStepLimit) {
  CoverageSummary out;
  for (const auto& tc : suite) {
    const ExecutionTrace t = run(p, tc, step_limit);
    for (int g : t.covered) out.first_covering.emplace(g, tc.id);
  }
  for (const auto& [g, id] : out.first_covering) out.covered.push_back(g);
  return out;
}

}  // namespace smartseed
