#include <gtest/gtest.h>

#include <deque>
#include <random>

#include "helpers.hpp"

using namespace smartseed;
using testing_helpers::program;
using testing_helpers::tc;

TEST(Executor, EmptyMain) {
  const Program p = program("int main(){ return 0; }");
  const ExecutionTrace t = run(p, tc({42}));
  EXPECT_EQ(t.covered, std::vector<int>{0});
  EXPECT_EQ(t.end, EndReason::NormalExit);
  EXPECT_EQ(t.max_depth, 0);
}

TEST(Executor, EqualityBranch) {
  const Program p = program("int main(){ int x = input(); if (x == 5) { return 1; } return 0; }");
  const ExecutionTrace t = run(p, tc({5}));
  EXPECT_EQ(t.covered, (std::vector<int>{0, 1}));
  EXPECT_EQ(t.exit_value, 1);
  EXPECT_EQ(run(p, tc({4})).covered, (std::vector<int>{0, 2}));
}

TEST(Executor, AbnormalEnds) {
  const Program div = program("int main(){ int a = input(); int b = input(); return a / b; }");
  const ExecutionTrace t = run(div, tc({7, 0}));
  EXPECT_EQ(t.end, EndReason::Trap);
  EXPECT_EQ(t.trap, TrapKind::DivisionByZero);
  EXPECT_EQ(t.where.line, 1);
  EXPECT_EQ(run(div, tc({7, 2})).exit_value, 3);
  EXPECT_EQ(run(div, tc({-7, 2})).exit_value, -3);

  const Program as = program("int main(){ int a = input(); assert(a != 3); return 0; }");
  EXPECT_EQ(run(as, tc({3})).end, EndReason::AssertionFailure);
  EXPECT_EQ(run(as, tc({4})).end, EndReason::NormalExit);

  const Program err = program("int main(){ int a = input(); if (a > 2) { reach_error(); } return 0; }");
  const ExecutionTrace e = run(err, tc({3}));
  EXPECT_EQ(e.end, EndReason::ErrorReached);
  EXPECT_EQ(err.goals.goals[static_cast<std::size_t>(e.error_goal)].kind, GoalKind::ErrorReach);
  EXPECT_EQ(e.covered.back(), e.error_goal);

  const Program loop = program("int main(){ int i = 0; while (1) { i = i + 1; } return i; }");
  const ExecutionTrace l = run(loop, tc({}), 500);
  EXPECT_EQ(l.end, EndReason::StepLimit);
  EXPECT_LE(l.steps, 501U);
}

TEST(Executor, InputExhaustionReadsZero) {
  const Program p = program("int main(){ int a = input(); int b = input(); return a + b + 1; }");
  const ExecutionTrace t = run(p, tc({4}));
  EXPECT_TRUE(t.input_exhausted);
  EXPECT_EQ(t.exit_value, 5);
  EXPECT_EQ(t.inputs_consumed, 2U);  // reads executed, the zero-filled one included
  EXPECT_FALSE(run(p, tc({4, 1, 9})).input_exhausted);  // excess ignored
}

TEST(Executor, ValuesAreReducedToTheReadType) {
  const Program p = program("int main(){ unsigned u = input(); if (u > 4000000000u) { return 1; } return 0; }");
  EXPECT_EQ(run(p, tc({-1})).exit_value, 1);
  EXPECT_EQ(run(p, tc({4294967295LL})).exit_value, 1);
  EXPECT_EQ(run(p, tc({7})).exit_value, 0);
}

TEST(Executor, DeterministicAndConsistent) {
  std::mt19937_64 rng(1);
  for (const auto& f : corpus_files(SMARTSEED_CORPUS_DIR)) {
    const Program p = prepare(parse(read_text_file(f)));
    for (int i = 0; i < 100; ++i) {
      TestCase t;
      for (std::size_t j = 0; j < p.ast.input_sites.size(); ++j) {
        t.inputs.push_back(static_cast<std::int64_t>(rng() % 33) - 16);
      }
      const ExecutionTrace a = run(p, t);
      EXPECT_EQ(a, run(p, t)) << f;
      std::set<int> unique(a.covered.begin(), a.covered.end());
      EXPECT_EQ(unique.size(), a.covered.size());
      int md = -1;
      for (int g : a.covered) md = std::max(md, p.goals.depth(g));
      EXPECT_EQ(a.max_depth, md);
    }
  }
}

TEST(Executor, CoveredGoalsFollowGraphEdges) {
  std::mt19937_64 rng(2);
  for (const auto& f : corpus_files(SMARTSEED_CORPUS_DIR)) {
    const Program p = prepare(parse(read_text_file(f)));
    const auto succ = p.graph.successors(false);
    const auto reach = [&](int from, int to) {
      std::vector<bool> seen(p.graph.blocks.size(), false);
      std::deque<int> work{from};
      seen[static_cast<std::size_t>(from)] = true;
      while (!work.empty()) {
        const int b = work.front();
        work.pop_front();
        if (b == to) return true;
        for (int s : succ[static_cast<std::size_t>(b)]) {
          if (!seen[static_cast<std::size_t>(s)]) {
            seen[static_cast<std::size_t>(s)] = true;
            work.push_back(s);
          }
        }
      }
      return false;
    };
    for (int i = 0; i < 50; ++i) {
      TestCase t;
      for (std::size_t j = 0; j < p.ast.input_sites.size(); ++j) {
        t.inputs.push_back(static_cast<std::int64_t>(rng() % 33) - 16);
      }
      const auto covered = run(p, t).covered;
      for (std::size_t k = 1; k < covered.size(); ++k) {
        EXPECT_TRUE(reach(p.graph.goal_block[static_cast<std::size_t>(covered[k - 1])],
                          p.graph.goal_block[static_cast<std::size_t>(covered[k])]))
            << f;
      }
    }
  }
}

TEST(ReplaySuite, Examples) {
  const Program p = program("int main(){ int x = input(); if (x == 5) { return 1; } return 0; }");
  EXPECT_TRUE(replay_suite(p, {}).covered.empty());
  TestCase a = tc({5});
  a.id = 9;
  const CoverageSummary s = replay_suite(p, {a});
  EXPECT_EQ(s.covered, (std::vector<int>{0, 1}));
  EXPECT_EQ(s.first_covering.at(0), 9U);
  EXPECT_EQ(s.first_covering.at(1), 9U);
  TestCase b = tc({4});
  b.id = 10;
  const CoverageSummary s2 = replay_suite(p, {a, b});
  EXPECT_EQ(s2.covered, (std::vector<int>{0, 1, 2}));
  EXPECT_EQ(s2.first_covering.at(0), 9U);
  EXPECT_EQ(s2.first_covering.at(2), 10U);
}

TEST(ReplaySuite, EqualsUnionOfRuns) {
  std::mt19937_64 rng(4);
  for (const auto& f : corpus_files(SMARTSEED_CORPUS_DIR)) {
    const Program p = prepare(parse(read_text_file(f)));
    std::vector<TestCase> suite;
    std::set<int> expected;
    for (int i = 0; i < 20; ++i) {
      TestCase t;
      t.id = static_cast<TestId>(i + 1);
      for (std::size_t j = 0; j < p.ast.input_sites.size(); ++j) {
        t.inputs.push_back(static_cast<std::int64_t>(rng() % 17) - 8);
      }
      for (int g : run(p, t).covered) expected.insert(g);
      suite.push_back(t);
    }
    const CoverageSummary s = replay_suite(p, suite);
    EXPECT_EQ(s.covered, std::vector<int>(expected.begin(), expected.end())) << f;
  }
}
