#pragma once

// Control-flow / reachability graph over basic blocks of a labeled program,
// goal depths and goal ranking.
//
// Depth counts goal-bearing blocks: an edge into a block that holds at least
// one goal costs 1, an edge into a goal-free block (joins, loop headers, call
// continuations) costs 0. Along any executed path the depth of successive
// goal blocks then grows by at most one, so a deep goal is never covered
// without covering a goal at every shallower depth first.

#include <algorithm>
#include <deque>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <tuple>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "smartseed/instrumenter.hpp"

namespace smartseed {

enum class EdgeKind { Fallthrough, Then, Else, LoopBack, LoopExit, Call, Return };

inline const char* edge_kind_name(EdgeKind k) {
  switch (k) {
    case EdgeKind::Fallthrough: return "fallthrough";
    case EdgeKind::Then: return "then";
    case EdgeKind::Else: return "else";
    case EdgeKind::LoopBack: return "loop-back";
    case EdgeKind::LoopExit: return "loop-exit";
    case EdgeKind::Call: return "call";
    case EdgeKind::Return: return "return";
  }
  return "?";
}

struct BasicBlock {
  int id = 0;
  std::string function;
  std::vector<StmtKind> statements;
  std::vector<int> goals;
  int depth = 0;
  bool reachable = true;
};

struct Edge {
  int from = 0;
  int to = 0;
  EdgeKind kind = EdgeKind::Fallthrough;

  friend bool operator==(const Edge&, const Edge&) = default;
};

inline bool is_forward(EdgeKind k) { return k != EdgeKind::LoopBack; }

struct ReachabilityGraph {
  std::vector<BasicBlock> blocks;
  std::vector<Edge> edges;
  int entry = 0;
  std::vector<int> goal_block;  // goal id -> block id

  [[nodiscard]] std::vector<std::vector<int>> successors(bool forward_only) const {
    std::vector<std::vector<int>> out(blocks.size());
    for (const auto& e : edges) {
      if (!forward_only || is_forward(e.kind)) out[static_cast<std::size_t>(e.from)].push_back(e.to);
    }
    return out;
  }

  /// Blocks from which `target` is reachable over forward edges (including itself).
  [[nodiscard]] std::vector<bool> ancestors_of(int target) const {
    std::vector<std::vector<int>> pred(blocks.size());
    for (const auto& e : edges) {
      if (is_forward(e.kind)) pred[static_cast<std::size_t>(e.to)].push_back(e.from);
    }
    std::vector<bool> seen(blocks.size(), false);
    std::deque<int> work{target};
    seen[static_cast<std::size_t>(target)] = true;
    while (!work.empty()) {
      const int b = work.front();
      work.pop_front();
      for (int p : pred[static_cast<std::size_t>(b)]) {
        if (!seen[static_cast<std::size_t>(p)]) {
          seen[static_cast<std::size_t>(p)] = true;
          work.push_back(p);
        }
      }
    }
    return seen;
  }
};

namespace detail {

class GraphBuilder {
 public:
  GraphBuilder(const Ast& ast, ReachabilityGraph& g, std::size_t goal_count) : ast_(ast), g_(g) {
    g_.goal_block.assign(goal_count, -1);
  }

  void build() {
    std::vector<const FunctionDef*> order;
    order.push_back(ast_.find(ast_.entry));
    for (const auto& f : ast_.functions) {
      if (f.name != ast_.entry) order.push_back(&f);
    }
    for (const auto* f : order) entry_of_[f->name] = new_block(f->name);
    for (const auto* f : order) {
      fn_ = f->name;
      const int end = block(f->body, entry_of_[f->name]);
      if (end >= 0) returns_[fn_].push_back(end);
    }
    for (const auto& [callee, cont] : continuations_) {
      for (int r : returns_[callee]) g_.edges.push_back({r, cont, EdgeKind::Return});
    }
    g_.entry = entry_of_[ast_.entry];
  }

 private:
  const Ast& ast_;
  ReachabilityGraph& g_;
  std::string fn_;
  std::map<std::string, int> entry_of_;
  std::map<std::string, std::vector<int>> returns_;
  std::vector<std::pair<std::string, int>> continuations_;

  int new_block(const std::string& fn) {
    BasicBlock b;
    b.id = static_cast<int>(g_.blocks.size());
    b.function = fn;
    g_.blocks.push_back(b);
    return b.id;
  }

  BasicBlock& at(int id) { return g_.blocks[static_cast<std::size_t>(id)]; }

  // Returns the open block after `body`, or -1 when control cannot fall out.
  int block(const std::vector<Stmt>& body, int cur) {
    for (const Stmt& s : body) {
      if (cur < 0) cur = new_block(fn_);  // dead code after a return
      switch (s.kind) {
        case StmtKind::Label:
          at(cur).goals.push_back(s.goal);
          g_.goal_block[static_cast<std::size_t>(s.goal)] = cur;
          break;
        case StmtKind::Decl:
        case StmtKind::Assign:
        case StmtKind::Assert: at(cur).statements.push_back(s.kind); break;
        case StmtKind::ErrorReach:
          at(cur).statements.push_back(s.kind);
          cur = -1;
          break;
        case StmtKind::Return:
          at(cur).statements.push_back(s.kind);
          returns_[fn_].push_back(cur);
          cur = -1;
          break;
        case StmtKind::Call: {
          at(cur).statements.push_back(s.kind);
          g_.edges.push_back({cur, entry_of_.at(s.callee), EdgeKind::Call});
          const int cont = new_block(fn_);
          continuations_.emplace_back(s.callee, cont);
          cur = cont;
          break;
        }
        case StmtKind::If: {
          at(cur).statements.push_back(s.kind);
          const int then_b = new_block(fn_);
          g_.edges.push_back({cur, then_b, EdgeKind::Then});
          const int then_end = block(s.body, then_b);
          const int else_b = new_block(fn_);
          g_.edges.push_back({cur, else_b, EdgeKind::Else});
          const int else_end = block(s.else_body, else_b);
          if (then_end < 0 && else_end < 0) {
            cur = -1;
          } else {
            const int join = new_block(fn_);
            if (then_end >= 0) g_.edges.push_back({then_end, join, EdgeKind::Fallthrough});
            if (else_end >= 0) g_.edges.push_back({else_end, join, EdgeKind::Fallthrough});
            cur = join;
          }
          break;
        }
        case StmtKind::While: {
          const int header = new_block(fn_);
          g_.edges.push_back({cur, header, EdgeKind::Fallthrough});
          at(header).statements.push_back(s.kind);
          const int body_b = new_block(fn_);
          g_.edges.push_back({header, body_b, EdgeKind::Then});
          const int body_end = block(s.body, body_b);
          if (body_end >= 0) g_.edges.push_back({body_end, header, EdgeKind::LoopBack});
          const int exit_b = new_block(fn_);
          g_.edges.push_back({header, exit_b, EdgeKind::LoopExit});
          cur = exit_b;
          break;
        }
      }
    }
    return cur;
  }
};

}  // namespace detail

/// Builds the graph for a labeled program and writes goal depths and the
/// block assignment back into `goals`.
inline ReachabilityGraph build_graph(const Ast& ast, GoalTable& goals) {
  ReachabilityGraph g;
  detail::GraphBuilder(ast, g, goals.size()).build();

  // 0-1 BFS over forward edges.
  constexpr int kUnset = std::numeric_limits<int>::max();
  std::vector<int> dist(g.blocks.size(), kUnset);
  const auto succ = g.successors(true);
  std::deque<int> work;
  dist[static_cast<std::size_t>(g.entry)] = 0;
  work.push_back(g.entry);
  while (!work.empty()) {
    const int b = work.front();
    work.pop_front();
    for (int s : succ[static_cast<std::size_t>(b)]) {
      const int w = g.blocks[static_cast<std::size_t>(s)].goals.empty() ? 0 : 1;
      const int nd = dist[static_cast<std::size_t>(b)] + w;
      if (nd < dist[static_cast<std::size_t>(s)]) {
        dist[static_cast<std::size_t>(s)] = nd;
        if (w == 0) {
          work.push_front(s);
        } else {
          work.push_back(s);
        }
      }
    }
  }
  int max_depth = 0;
  for (int d : dist) {
    if (d != kUnset) max_depth = std::max(max_depth, d);
  }
  for (auto& b : g.blocks) {
    const int d = dist[static_cast<std::size_t>(b.id)];
    b.reachable = d != kUnset;
    b.depth = b.reachable ? d : max_depth + 1;
  }
  goals.by_block.clear();
  for (auto& goal : goals.goals) {
    const int blk = g.goal_block[static_cast<std::size_t>(goal.id)];
    if (blk < 0) throw std::logic_error("goal without block");
    goal.depth = g.blocks[static_cast<std::size_t>(blk)].depth;
    goals.by_block[blk].push_back(goal.id);
  }
  return g;
}

/// Sorted `from to kind` edge lines followed by `goal <id> <block>` lines.
inline void dump_graph(std::ostream& os, const ReachabilityGraph& g) {
  std::vector<Edge> edges = g.edges;
  std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
    return std::tie(a.from, a.to, a.kind) < std::tie(b.from, b.to, b.kind);
  });
  for (const auto& e : edges) os << e.from << " " << e.to << " " << edge_kind_name(e.kind) << "\n";
  for (std::size_t i = 0; i < g.goal_block.size(); ++i) os << "goal " << i << " " << g.goal_block[i] << "\n";
}

// ---------------------------------------------------------------------------
// Ranking

enum class RankStrategy { DeepFirst, KindWeighted };

inline RankStrategy parse_rank_strategy(const std::string& name) {
  if (name == "deep-first") return RankStrategy::DeepFirst;
  if (name == "kind-weighted") return RankStrategy::KindWeighted;
  throw std::invalid_argument("unknown goal-ranking strategy '" + name + "'");
}

inline const char* rank_strategy_name(RankStrategy s) {
  return s == RankStrategy::DeepFirst ? "deep-first" : "kind-weighted";
}

struct GoalRanking {
  std::vector<int> order;
  RankStrategy strategy = RankStrategy::DeepFirst;
};

inline int kind_priority(GoalKind k) {
  switch (k) {
    case GoalKind::ErrorReach: return 3;
    case GoalKind::ThenBranch:
    case GoalKind::ElseBranch: return 2;
    case GoalKind::LoopBody: return 1;
    case GoalKind::FunctionEntry: return 0;
  }
  return 0;
}

inline GoalRanking rank_goals(const GoalTable& goals, RankStrategy strategy) {
  GoalRanking r;
  r.strategy = strategy;
  for (const auto& g : goals.goals) r.order.push_back(g.id);
  std::sort(r.order.begin(), r.order.end(), [&](int a, int b) {
    const auto& ga = goals.goals[static_cast<std::size_t>(a)];
    const auto& gb = goals.goals[static_cast<std::size_t>(b)];
    if (strategy == RankStrategy::KindWeighted && kind_priority(ga.kind) != kind_priority(gb.kind)) {
      return kind_priority(ga.kind) > kind_priority(gb.kind);
    }
    if (ga.depth != gb.depth) return ga.depth > gb.depth;
    return a < b;
  });
  return r;
}

inline GoalRanking rank_goals(const GoalTable& goals, const std::string& strategy) {
  return rank_goals(goals, parse_rank_strategy(strategy));
}

// ---------------------------------------------------------------------------

/// A labeled program with its graph; the unit every engine works on.
struct Program {
  Ast ast;
  GoalTable goals;
  ReachabilityGraph graph;
};

inline Program prepare(const Ast& parsed) {
  LabeledProgram lp = inject_labels(parsed);
  Program p{std::move(lp.ast), std::move(lp.goals), {}};
  p.graph = build_graph(p.ast, p.goals);
  return p;
}

/// Same goals and graph, different statements (e.g. a lightened variant).
inline Program with_ast(const Program& base, Ast ast) {
  return Program{std::move(ast), base.goals, base.graph};
}

}  // namespace smartseed
