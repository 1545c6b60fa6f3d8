#include <gtest/gtest.h>

#include <random>

#include "helpers.hpp"

using namespace smartseed;
using testing_helpers::corpus_path;

TEST(Value, WrappingArithmeticMatchesFixedWidthIntegers) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 2000; ++i) {
    const auto a = static_cast<std::int32_t>(rng());
    const auto b = static_cast<std::int32_t>(rng());
    const auto ua = static_cast<std::uint32_t>(a);
    const auto ub = static_cast<std::uint32_t>(b);
    const auto bits = [](std::int32_t v) { return normalize(static_cast<std::uint64_t>(static_cast<std::int64_t>(v)), kInt); };
    EXPECT_EQ(apply_binary(BinOp::Add, kInt, bits(a), bits(b)), std::uint64_t{ua + ub});
    EXPECT_EQ(apply_binary(BinOp::Sub, kInt, bits(a), bits(b)), std::uint64_t{ua - ub});
    EXPECT_EQ(apply_binary(BinOp::Mul, kInt, bits(a), bits(b)), std::uint64_t{ua * ub});
    EXPECT_EQ(apply_binary(BinOp::Xor, kInt, bits(a), bits(b)), std::uint64_t{ua ^ ub});
    EXPECT_EQ(apply_binary(BinOp::Lt, kInt, bits(a), bits(b)), a < b ? 1U : 0U);
    EXPECT_EQ(apply_binary(BinOp::Lt, kUInt, ua, ub), ua < ub ? 1U : 0U);
    if (b != 0 && !(a == INT32_MIN && b == -1)) {
      EXPECT_EQ(to_input(apply_binary(BinOp::Div, kInt, bits(a), bits(b)), kInt), a / b);
      EXPECT_EQ(to_input(apply_binary(BinOp::Rem, kInt, bits(a), bits(b)), kInt), a % b);
    }
  }
}

TEST(Value, InputBitsRoundTrip) {
  for (std::int64_t v : {0LL, 1LL, -1LL, 2147483647LL, -2147483648LL}) {
    EXPECT_EQ(to_input(input_bits(v, kInt), kInt), v);
  }
  EXPECT_EQ(to_input(input_bits(-1, kUInt), kUInt), 4294967295LL);
  EXPECT_EQ(convert(normalize(static_cast<std::uint64_t>(-1), kInt), kInt, kLongLong), ~std::uint64_t{0});
  EXPECT_EQ(convert(0xFFFFFFFFULL, kUInt, kLongLong), 0xFFFFFFFFULL);
}

TEST(Parser, MinimalProgram) {
  const Ast ast = parse("int main(){ return 0; }");
  ASSERT_EQ(ast.functions.size(), 1U);
  EXPECT_TRUE(ast.input_sites.empty());
}

TEST(Parser, SingleInputSite) {
  const Ast ast = parse("int main(){ int x = input(); if (x > 0) { } return 0; }");
  ASSERT_EQ(ast.input_sites.size(), 1U);
  EXPECT_EQ(ast.input_sites[0].id, 0);
  EXPECT_EQ(ast.input_sites[0].type.bits, 32);
  EXPECT_TRUE(ast.input_sites[0].type.is_signed);
}

TEST(Parser, InputWidthFollowsTargetTypeAndArchitecture) {
  const char* src = "int main(){ long a = input(); unsigned long long b = input(); unsigned c = input(); return 0; }";
  const Ast a32 = parse(src, ParseOptions{32});
  const Ast a64 = parse(src, ParseOptions{64});
  EXPECT_EQ(a32.input_sites[0].type.bits, 32);
  EXPECT_EQ(a64.input_sites[0].type.bits, 64);
  EXPECT_EQ(a32.input_sites[1].type, kULongLong);
  EXPECT_EQ(a32.input_sites[2].type, kUInt);
}

TEST(Parser, InputSitesAreDenseInSourceOrder) {
  const Ast ast = parse(R"(
    int f(int v) { int w = input(); return v + w; }
    int main() { int a = input(); int b = f(a); if (b > 0) { b = input(); } return b; })");
  ASSERT_EQ(ast.input_sites.size(), 3U);
  for (std::size_t i = 0; i < ast.input_sites.size(); ++i) EXPECT_EQ(ast.input_sites[i].id, static_cast<int>(i));
  EXPECT_EQ(ast.input_sites[0].function, "f");
}

namespace {

ParseError parse_error(const std::string& src) {
  try {
    parse(src);
  } catch (const ParseError& e) {
    return e;
  }
  ADD_FAILURE() << "no error for: " << src;
  return ParseError(DiagnosticKind::Syntax, {}, "");
}

}  // namespace

TEST(Parser, UndeclaredVariableIsATypeErrorNamingIt) {
  const ParseError e = parse_error("int main(){ if (x) {} }");
  EXPECT_EQ(e.kind(), DiagnosticKind::Type);
  EXPECT_NE(e.message().find("x"), std::string::npos);
  EXPECT_EQ(e.loc().line, 1);
}

TEST(Parser, Diagnostics) {
  EXPECT_EQ(parse_error("int main(){ return 0 }").kind(), DiagnosticKind::Syntax);
  EXPECT_EQ(parse_error("int f(){ return 0; }").kind(), DiagnosticKind::Type);  // missing entry
  EXPECT_EQ(parse_error("int main(){ return 0; } int main(){ return 1; }").kind(), DiagnosticKind::Type);
  EXPECT_EQ(parse_error("int f(int n){ return f(n); } int main(){ return f(1); }").kind(), DiagnosticKind::Type);
  EXPECT_EQ(parse_error("int main(){ int x = 1 + input(); return x; }").kind(), DiagnosticKind::Type);
}

TEST(Parser, ErrorLocationIsLineAndColumn) {
  const ParseError e = parse_error("int main() {\n  int x = 1;\n  y = 2;\n  return x;\n}");
  EXPECT_EQ(e.loc().line, 3);
  EXPECT_EQ(e.loc().col, 3);
  EXPECT_EQ(std::string(e.what()).rfind("3:3: ", 0), 0U);
}

TEST(Parser, CorpusRoundTripsThroughPrettyPrinter) {
  for (const auto& f : corpus_files(SMARTSEED_CORPUS_DIR)) {
    const Ast a = parse(read_text_file(f));
    const Ast b = parse(to_source(a));
    EXPECT_TRUE(same_structure(a, b)) << f;
    ASSERT_EQ(a.input_sites.size(), b.input_sites.size()) << f;
    for (std::size_t i = 0; i < a.input_sites.size(); ++i) EXPECT_EQ(a.input_sites[i].id, static_cast<int>(i));
  }
}
