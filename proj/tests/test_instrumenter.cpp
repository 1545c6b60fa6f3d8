#include <gtest/gtest.h>

#include <random>
#include <set>
#include <sstream>

#include "helpers.hpp"

using namespace smartseed;
using testing_helpers::program;
using testing_helpers::tc;

namespace {

// Independent count straight from the source text: one label per function,
// two per `if`, one per `while`, one per `reach_error`.
std::size_t count_tokens(const std::string& src, const std::string& word) {
  std::size_t n = 0;
  for (std::size_t pos = 0; (pos = src.find(word, pos)) != std::string::npos; pos += word.size()) {
    const bool left = pos == 0 || !(std::isalnum(static_cast<unsigned char>(src[pos - 1])) || src[pos - 1] == '_');
    const std::size_t end = pos + word.size();
    const bool right = end >= src.size() || !(std::isalnum(static_cast<unsigned char>(src[end])) || src[end] == '_');
    if (left && right) ++n;
  }
  return n;
}

}  // namespace

TEST(Instrumenter, OneFunctionOneIf) {
  const Program p = program("int main(){ int x = input(); if (x > 0) { x = 1; } return x; }");
  EXPECT_EQ(p.goals.size(), 3U);
  EXPECT_EQ(p.goals.goals[0].kind, GoalKind::FunctionEntry);
  EXPECT_EQ(p.goals.goals[1].kind, GoalKind::ThenBranch);
  EXPECT_EQ(p.goals.goals[2].kind, GoalKind::ElseBranch);
}

TEST(Instrumenter, TwoFunctionsTwoIfsOneWhile) {
  const Program p = program(R"(
    void f(int v) { if (v > 0) { return; } }
    int main() { int i = 0; while (i < 3) { i = i + 1; } if (i == 3) { f(i); } return 0; })");
  EXPECT_EQ(p.goals.size(), 7U);
}

TEST(Instrumenter, IdsAreDenseAndPreOrder) {
  const Program p = program(R"(
    int main() {
      int x = input();
      if (x > 0) { if (x > 5) { x = 1; } } else { while (x < 0) { x = x + 1; } }
      reach_error();
      return 0;
    })");
  const std::vector<GoalKind> expected{GoalKind::FunctionEntry, GoalKind::ThenBranch, GoalKind::ThenBranch,
                                       GoalKind::ElseBranch,    GoalKind::ElseBranch, GoalKind::LoopBody,
                                       GoalKind::ErrorReach};
  ASSERT_EQ(p.goals.size(), expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i) {
    EXPECT_EQ(p.goals.goals[i].id, static_cast<int>(i));
    EXPECT_EQ(p.goals.goals[i].kind, expected[i]) << i;
  }
}

TEST(Instrumenter, CorpusLabelCountsMatchManifestAndRule) {
  const auto manifest = read_manifest(std::string(SMARTSEED_CORPUS_DIR) + "/manifest.json");
  for (const auto& f : corpus_files(SMARTSEED_CORPUS_DIR)) {
    const std::string src = read_text_file(f);
    const Ast ast = parse(src);
    const Program p = prepare(ast);
    const std::size_t by_text = ast.functions.size() + 2 * count_tokens(src, "if") + count_tokens(src, "while") +
                                count_tokens(src, "reach_error");
    EXPECT_EQ(p.goals.size(), by_text) << f;
    EXPECT_EQ(p.goals.size(), expected_label_count(ast)) << f;
    ASSERT_TRUE(manifest.count(f.filename().string())) << f;
    EXPECT_EQ(p.goals.size(), manifest.at(f.filename().string()).labels) << f;
  }
}

TEST(Instrumenter, LabelsAreSemanticallyTransparent) {
  std::mt19937_64 rng(3);
  for (const auto& f : corpus_files(SMARTSEED_CORPUS_DIR)) {
    const Ast plain = parse(read_text_file(f));
    const Program labeled = prepare(plain);
    const GoalTable none;
    for (int i = 0; i < 200; ++i) {
      TestCase t;
      for (std::size_t j = 0; j < plain.input_sites.size(); ++j) {
        t.inputs.push_back(static_cast<std::int64_t>(rng() % 41) - 20);
      }
      const ExecutionTrace a = run(plain, none, t);
      const ExecutionTrace b = run(labeled, t);
      EXPECT_EQ(a.end, b.end) << f;
      EXPECT_EQ(a.exit_value, b.exit_value) << f;
      EXPECT_TRUE(a.covered.empty());
    }
  }
}

TEST(Lighten, InfiniteLoopExitsAfterBound) {
  const Program p = program("int main(){ int n = 0; while (1) { n = n + 1; } return n; }");
  const Ast light = lighten(p.ast, LightenOptions{2, {-1024, 1024}, true, true});
  const ExecutionTrace t = run(light, p.goals, tc({}));
  EXPECT_EQ(t.end, EndReason::NormalExit);
  EXPECT_EQ(t.exit_value, 2);
  EXPECT_EQ(run(p, tc({})).end, EndReason::StepLimit);
}

TEST(Lighten, InferredIntervalTakesPrecedence) {
  const Program p = program(R"(
    int main() { int x = input(); if (x < 0) { return 1; } if (x > 100) { return 1; } return x; })");
  const InputConstraints c = infer_input_constraints(p.ast);
  ASSERT_EQ(c.sites.size(), 1U);
  EXPECT_EQ(c.range(0).lo, 0);
  EXPECT_EQ(c.range(0).hi, 100);
  const ValueRange clamp = lightened_range(c.sites[0], {-1024, 1024});
  EXPECT_EQ(clamp.lo, 0);
  EXPECT_EQ(clamp.hi, 100);
  const Ast light = lighten(p.ast, c);
  EXPECT_EQ(run(light, p.goals, tc({5000})).exit_value, 100);
  EXPECT_EQ(run(light, p.goals, tc({-7})).exit_value, 0);
}

TEST(Lighten, UnguardedSiteUsesDefaultRange) {
  const Program p = program("int main(){ int x = input(); return x; }");
  const Ast light = lighten(p.ast);
  EXPECT_EQ(run(light, p.goals, tc({1 << 20})).exit_value, 1024);
  EXPECT_EQ(run(light, p.goals, tc({-(1 << 20)})).exit_value, -1024);
}

TEST(Lighten, GuardedInputNeverTakesValidationExit) {
  // Goals 1 and 3 are the then-arms of the two early-return guards.
  const Program p = testing_helpers::corpus_program("guarded_input.mc");
  ASSERT_EQ(p.goals.goals[1].kind, GoalKind::ThenBranch);
  ASSERT_EQ(p.goals.goals[3].kind, GoalKind::ThenBranch);
  const Ast light = lighten(p.ast);
  std::mt19937_64 rng(11);
  for (int i = 0; i < 1000; ++i) {
    const TestCase t = tc({static_cast<std::int32_t>(rng()), static_cast<std::int32_t>(rng())});
    const ExecutionTrace tr = run(light, p.goals, t);
    for (int g : tr.covered) EXPECT_TRUE(g != 1 && g != 3) << t.inputs[0] << "," << t.inputs[1];
  }
}

TEST(Lighten, SubsumptionWithinBounds) {
  // Inputs inside the clamp ranges and loops within the bound: identical coverage.
  std::mt19937_64 rng(5);
  for (const char* name : {"nested.mc", "loop_sum.mc", "diamond.mc", "calls.mc"}) {
    const Program p = testing_helpers::corpus_program(name);
    const Ast light = lighten(p.ast);
    for (int i = 0; i < 300; ++i) {
      TestCase t;
      for (std::size_t j = 0; j < p.ast.input_sites.size(); ++j) {
        t.inputs.push_back(static_cast<std::int64_t>(rng() % 5) - 2);
      }
      EXPECT_EQ(run(light, p.goals, t).covered, run(p, t).covered) << name;
    }
  }
}

TEST(InputConstraints, ExamplesFromDirectGuards) {
  const Program p = program(R"(
    int main() { int x = input(); if (x < 0) { return 1; } if (x > 99) { return 1; } return 0; })");
  const auto c = infer_input_constraints(p.ast);
  EXPECT_EQ(c.range(0).lo, 0);
  EXPECT_EQ(c.range(0).hi, 99);
  EXPECT_TRUE(c.sites[0].guarded);
  EXPECT_EQ(c.sites[0].provenance.size(), 2U);
}

TEST(InputConstraints, NoGuardsGiveFullRange) {
  const auto c = infer_input_constraints(program("int main(){ int x = input(); unsigned u = input(); return 0; }").ast);
  EXPECT_EQ(c.range(0).lo, type_min(kInt));
  EXPECT_EQ(c.range(0).hi, type_max(kInt));
  EXPECT_EQ(c.range(1).lo, 0);
  EXPECT_EQ(c.range(1).hi, type_max(kUInt));
}

TEST(InputConstraints, NonlinearGuardIgnored) {
  const auto c = infer_input_constraints(
      program("int main(){ int x = input(); if (x*x > 50) { return 1; } return 0; }").ast);
  EXPECT_FALSE(c.sites[0].guarded);
  EXPECT_EQ(c.range(0).lo, type_min(kInt));
}

// Random guard programs: values inside the inferred interval never take a
// recognized guard's exit. Guard g sits on line 3+g and returns g+1.
TEST(InputConstraints, SoundnessOnRandomGuardPrograms) {
  std::mt19937_64 rng(99);
  const char* ops[] = {"<", "<=", ">", ">=", "==", "!="};
  int recognized_total = 0;
  for (int prog = 0; prog < 200; ++prog) {
    std::ostringstream src;
    src << "int main() {\n  int x = input();\n";
    const int guards = 1 + static_cast<int>(rng() % 3);
    for (int g = 0; g < guards; ++g) {
      const int c = static_cast<int>(rng() % 41) - 20;
      src << "  if (x " << ops[rng() % 6] << " " << c;
      if (rng() % 2) src << " || x " << ops[rng() % 6] << " " << (static_cast<int>(rng() % 41) - 20);
      src << ") { return " << (g + 1) << "; }\n";
    }
    src << "  return 0;\n}\n";
    const Program p = program(src.str());
    const auto c = infer_input_constraints(p.ast);
    const ValueRange r = c.range(0);
    ASSERT_LE(r.lo, r.hi) << src.str();
    std::set<std::int64_t> recognized;
    for (const auto& g : c.sites[0].provenance) recognized.insert(g.loc.line - 2);
    recognized_total += static_cast<int>(recognized.size());
    for (std::int64_t v : {static_cast<std::int64_t>(type_min(kInt)), static_cast<std::int64_t>(type_max(kInt))}) {
      if (v >= r.lo && v <= r.hi) {
        EXPECT_EQ(recognized.count(run(p, tc({v})).exit_value), 0U) << src.str();
      }
    }
    for (int v = -30; v <= 30; ++v) {
      if (v < r.lo || v > r.hi) continue;
      EXPECT_EQ(recognized.count(run(p, tc({v})).exit_value), 0U) << src.str() << " v=" << v;
    }
  }
  EXPECT_GT(recognized_total, 100);
}
