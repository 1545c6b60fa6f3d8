#include <gtest/gtest.h>

#include <map>
#include <set>
#include <sstream>

#include "helpers.hpp"

using namespace smartseed;
using testing_helpers::program;

namespace {

// Depth oracle over the textual dump: blocks holding goals cost 1 to enter,
// others 0; loop-back edges are ignored. Bellman-Ford style relaxation.
std::map<int, int> depths_from_dump(const std::string& dump, int entry_goal) {
  std::vector<std::tuple<int, int, std::string>> edges;
  std::map<int, int> goal_block;
  std::istringstream in(dump);
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string first;
    ls >> first;
    if (first == "goal") {
      int g = 0;
      int b = 0;
      ls >> g >> b;
      goal_block[g] = b;
    } else {
      int to = 0;
      std::string kind;
      ls >> to >> kind;
      edges.emplace_back(std::stoi(first), to, kind);
    }
  }
  std::set<int> goal_blocks;
  for (const auto& [g, b] : goal_block) goal_blocks.insert(b);
  std::map<int, int> dist{{goal_block.at(entry_goal), 0}};
  for (bool changed = true; changed;) {
    changed = false;
    for (const auto& [from, to, kind] : edges) {
      if (kind == "loop-back" || !dist.count(from)) continue;
      const int nd = dist[from] + (goal_blocks.count(to) ? 1 : 0);
      if (!dist.count(to) || nd < dist[to]) {
        dist[to] = nd;
        changed = true;
      }
    }
  }
  std::map<int, int> out;
  for (const auto& [g, b] : goal_block) out[g] = dist.count(b) ? dist[b] : -1;
  return out;
}

int entry_goal(const Program& p) {
  for (const auto& g : p.goals.goals) {
    if (g.kind == GoalKind::FunctionEntry && g.function == p.ast.entry) return g.id;
  }
  return -1;
}

}  // namespace

TEST(Reachability, StraightLineMain) {
  const Program p = program("int main(){ int x = 1; x = x + 1; return x; }");
  EXPECT_EQ(p.graph.blocks.size(), 1U);
  ASSERT_EQ(p.goals.size(), 1U);
  EXPECT_EQ(p.goals.depth(0), 0);
  EXPECT_EQ(p.graph.blocks[static_cast<std::size_t>(p.graph.entry)].depth, 0);
}

TEST(Reachability, NestedIfIsDeeper) {
  const Program p = program("int main(){ int x = input(); if (x > 0) { if (x > 5) { x = 1; } } return x; }");
  ASSERT_EQ(p.goals.goals[1].kind, GoalKind::ThenBranch);
  ASSERT_EQ(p.goals.goals[2].kind, GoalKind::ThenBranch);
  EXPECT_GT(p.goals.depth(2), p.goals.depth(1));
}

TEST(Reachability, DepthsMatchOracleOnCorpus) {
  for (const auto& f : corpus_files(SMARTSEED_CORPUS_DIR)) {
    const Program p = prepare(parse(read_text_file(f)));
    std::ostringstream dump;
    dump_graph(dump, p.graph);
    const auto oracle = depths_from_dump(dump.str(), entry_goal(p));
    for (const auto& g : p.goals.goals) {
      if (oracle.at(g.id) >= 0) {
        EXPECT_EQ(g.depth, oracle.at(g.id)) << f << " goal " << g.id;
      }
    }
  }
}

TEST(Reachability, DiamondDepths) {
  const Program p = testing_helpers::corpus_program("diamond.mc");
  // entry; a<b then/else; a+b==3 then/else
  EXPECT_EQ(p.goals.depth(0), 0);
  EXPECT_EQ(p.goals.depth(1), 1);
  EXPECT_EQ(p.goals.depth(2), 1);
  EXPECT_EQ(p.goals.depth(3), 2);
  EXPECT_EQ(p.goals.depth(4), 2);
}

TEST(Reachability, GraphInvariants) {
  for (const auto& f : corpus_files(SMARTSEED_CORPUS_DIR)) {
    const Program p = prepare(parse(read_text_file(f)));
    const auto& g = p.graph;
    std::map<int, int> seen;
    for (const auto& [blk, ids] : p.goals.by_block) {
      for (int id : ids) ++seen[id];
    }
    for (const auto& goal : p.goals.goals) EXPECT_EQ(seen[goal.id], 1) << f;
    for (const auto& e : g.edges) {
      if (!is_forward(e.kind)) continue;
      const auto& from = g.blocks[static_cast<std::size_t>(e.from)];
      const auto& to = g.blocks[static_cast<std::size_t>(e.to)];
      if (from.reachable) {
        EXPECT_LE(to.depth, from.depth + 1) << f;
      }
    }
  }
}

TEST(Ranking, DeepFirst) {
  const Program p = program("int main(){ int x = input(); if (x > 0) { if (x > 5) { if (x > 9) { x = 1; } } } return x; }");
  const auto r = rank_goals(p.goals, "deep-first");
  ASSERT_EQ(r.order.size(), p.goals.size());
  for (std::size_t i = 1; i < r.order.size(); ++i) {
    const int a = r.order[i - 1];
    const int b = r.order[i];
    EXPECT_TRUE(p.goals.depth(a) > p.goals.depth(b) || (p.goals.depth(a) == p.goals.depth(b) && a < b));
  }
  EXPECT_EQ(r.order.back(), 0);
}

TEST(Ranking, KindWeightedPrefersBranchesOverLoops) {
  GoalTable t;
  t.goals = {GoalLabel{0, GoalKind::FunctionEntry, "main", {}, 0}, GoalLabel{1, GoalKind::LoopBody, "main", {}, 5},
             GoalLabel{2, GoalKind::ThenBranch, "main", {}, 2}, GoalLabel{3, GoalKind::ElseBranch, "main", {}, 2},
             GoalLabel{4, GoalKind::ErrorReach, "main", {}, 1}};
  EXPECT_EQ(rank_goals(t, RankStrategy::KindWeighted).order, (std::vector<int>{4, 2, 3, 1, 0}));
  EXPECT_EQ(rank_goals(t, RankStrategy::DeepFirst).order, (std::vector<int>{1, 2, 3, 4, 0}));
  EXPECT_THROW(rank_goals(t, "widest"), std::invalid_argument);
}
