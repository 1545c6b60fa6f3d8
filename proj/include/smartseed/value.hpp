#pragma once

// Fixed-width integer semantics shared by the interpreter, the symbolic
// executor and the constraint solver. Every runtime value is carried as raw
// two's-complement bits in a uint64_t, normalized (masked) to its type width.

#include <cstdint>
#include <string>

namespace smartseed {

using i128 = __int128;

struct IntType {
  std::uint8_t bits = 32;
  bool is_signed = true;

  friend constexpr bool operator==(IntType, IntType) = default;
};

inline constexpr IntType kInt{32, true};
inline constexpr IntType kUInt{32, false};
inline constexpr IntType kLongLong{64, true};
inline constexpr IntType kULongLong{64, false};

constexpr std::uint64_t type_mask(IntType t) {
  return t.bits == 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << t.bits) - 1);
}

constexpr std::uint64_t normalize(std::uint64_t raw, IntType t) { return raw & type_mask(t); }

constexpr i128 type_min(IntType t) {
  return t.is_signed ? -(i128{1} << (t.bits - 1)) : i128{0};
}

constexpr i128 type_max(IntType t) {
  return t.is_signed ? (i128{1} << (t.bits - 1)) - 1 : (i128{1} << t.bits) - 1;
}

/// Mathematical value of `bits` read as type `t`.
constexpr i128 math_value(std::uint64_t bits, IntType t) {
  bits = normalize(bits, t);
  if (t.is_signed && ((bits >> (t.bits - 1)) & 1U)) {
    return static_cast<i128>(bits) - (i128{1} << t.bits);
  }
  return static_cast<i128>(bits);
}

/// Wraps an arbitrary mathematical value into `t` (two's complement).
constexpr std::uint64_t from_math(i128 v, IntType t) {
  return normalize(static_cast<std::uint64_t>(static_cast<unsigned __int128>(v)), t);
}

constexpr std::uint64_t convert(std::uint64_t bits, IntType from, IntType to) {
  return from_math(math_value(bits, from), to);
}

constexpr bool fits(i128 v, IntType t) { return v >= type_min(t) && v <= type_max(t); }

/// C usual arithmetic conversions restricted to the four MiniC integer types
/// (all of which are at least as wide as int, so no promotion step exists).
constexpr IntType common_type(IntType a, IntType b) {
  if (a.bits != b.bits) return a.bits > b.bits ? a : b;
  return IntType{a.bits, a.is_signed && b.is_signed};
}

enum class UnOp { Neg, LNot, BitNot };

enum class BinOp { Add, Sub, Mul, Div, Rem, Eq, Ne, Lt, Le, Gt, Ge, LAnd, LOr, And, Or, Xor, Shl, Shr };

constexpr bool is_comparison(BinOp op) {
  return op == BinOp::Eq || op == BinOp::Ne || op == BinOp::Lt || op == BinOp::Le ||
         op == BinOp::Gt || op == BinOp::Ge;
}

constexpr bool is_logical(BinOp op) { return op == BinOp::LAnd || op == BinOp::LOr; }

constexpr bool is_shift(BinOp op) { return op == BinOp::Shl || op == BinOp::Shr; }

constexpr bool yields_boolean(BinOp op) { return is_comparison(op) || is_logical(op); }

/// Type in which the operands of `op` are evaluated.
constexpr IntType operand_type(BinOp op, IntType lhs, IntType rhs) {
  if (is_logical(op)) return kInt;
  if (is_shift(op)) return lhs;
  return common_type(lhs, rhs);
}

constexpr IntType result_type(BinOp op, IntType operand) {
  return yields_boolean(op) ? kInt : operand;
}

constexpr bool truthy(std::uint64_t bits) { return bits != 0; }

constexpr std::uint64_t apply_unary(UnOp op, IntType t, std::uint64_t a) {
  switch (op) {
    case UnOp::Neg: return normalize(~a + 1, t);
    case UnOp::BitNot: return normalize(~a, t);
    case UnOp::LNot: return a == 0 ? 1 : 0;
  }
  return 0;
}

/// Applies `op` to operands already converted to `t`. Division and modulo by
/// zero return 0; callers treat a zero divisor as a trap before getting here.
constexpr std::uint64_t apply_binary(BinOp op, IntType t, std::uint64_t a, std::uint64_t b) {
  a = normalize(a, t);
  b = normalize(b, t);
  switch (op) {
    case BinOp::Add: return normalize(a + b, t);
    case BinOp::Sub: return normalize(a - b, t);
    case BinOp::Mul: return normalize(a * b, t);
    case BinOp::Div:
      if (b == 0) return 0;
      return from_math(math_value(a, t) / math_value(b, t), t);
    case BinOp::Rem:
      if (b == 0) return 0;
      return from_math(math_value(a, t) % math_value(b, t), t);
    case BinOp::Eq: return a == b ? 1 : 0;
    case BinOp::Ne: return a != b ? 1 : 0;
    case BinOp::Lt: return math_value(a, t) < math_value(b, t) ? 1 : 0;
    case BinOp::Le: return math_value(a, t) <= math_value(b, t) ? 1 : 0;
    case BinOp::Gt: return math_value(a, t) > math_value(b, t) ? 1 : 0;
    case BinOp::Ge: return math_value(a, t) >= math_value(b, t) ? 1 : 0;
    case BinOp::LAnd: return (a != 0 && b != 0) ? 1 : 0;
    case BinOp::LOr: return (a != 0 || b != 0) ? 1 : 0;
    case BinOp::And: return a & b;
    case BinOp::Or: return a | b;
    case BinOp::Xor: return a ^ b;
    case BinOp::Shl: return normalize(a << (b & (t.bits - 1U)), t);
    case BinOp::Shr: {
      const unsigned count = static_cast<unsigned>(b & (t.bits - 1U));
      if (t.is_signed) return from_math(math_value(a, t) >> count, t);
      return a >> count;
    }
  }
  return 0;
}

/// Bits of an int64 test-case value as seen by a read of type `t`.
constexpr std::uint64_t input_bits(std::int64_t v, IntType t) {
  return normalize(static_cast<std::uint64_t>(v), t);
}

/// Inverse of input_bits: the canonical int64 spelling of a value of type `t`.
/// Unsigned 64-bit values above INT64_MAX come back negative and re-read
/// to the same bits.
constexpr std::int64_t to_input(std::uint64_t bits, IntType t) {
  const i128 m = math_value(bits, t);
  return static_cast<std::int64_t>(static_cast<std::uint64_t>(static_cast<unsigned __int128>(m)));
}

inline std::string type_name(IntType t) {
  if (t == kInt) return "int";
  if (t == kUInt) return "unsigned int";
  if (t == kLongLong) return "long long";
  return "unsigned long long";
}

inline std::string to_string(i128 v) {
  if (v == 0) return "0";
  const bool neg = v < 0;
  unsigned __int128 u = neg ? static_cast<unsigned __int128>(-(v + 1)) + 1 : static_cast<unsigned __int128>(v);
  std::string out;
  while (u != 0) {
    out.insert(out.begin(), static_cast<char>('0' + static_cast<int>(u % 10)));
    u /= 10;
  }
  if (neg) out.insert(out.begin(), '-');
  return out;
}

inline const char* op_symbol(BinOp op) {
  switch (op) {
    case BinOp::Add: return "+";
    case BinOp::Sub: return "-";
    case BinOp::Mul: return "*";
    case BinOp::Div: return "/";
    case BinOp::Rem: return "%";
    case BinOp::Eq: return "==";
    case BinOp::Ne: return "!=";
    case BinOp::Lt: return "<";
    case BinOp::Le: return "<=";
    case BinOp::Gt: return ">";
    case BinOp::Ge: return ">=";
    case BinOp::LAnd: return "&&";
    case BinOp::LOr: return "||";
    case BinOp::And: return "&";
    case BinOp::Or: return "|";
    case BinOp::Xor: return "^";
    case BinOp::Shl: return "<<";
    case BinOp::Shr: return ">>";
  }
  return "?";
}

inline const char* op_symbol(UnOp op) {
  switch (op) {
    case UnOp::Neg: return "-";
    case UnOp::LNot: return "!";
    case UnOp::BitNot: return "~";
  }
  return "?";
}

}  // namespace smartseed
