#pragma once

// Decision procedure for path conditions: interval constraint propagation to a
// fixpoint, then backtracking enumeration over the narrowed domains.
//
// Intervals hold mathematical values of each node's type. Forward evaluation
// only produces a narrow interval when the unwrapped result provably fits the
// type; anything that might wrap widens to the full type range, which keeps
// propagation sound under two's-complement semantics. Backward narrowing is
// applied only through nodes whose forward result did not wrap.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <vector>

#include "smartseed/term.hpp"

namespace smartseed {

struct PathCondition {
  std::vector<TermPtr> conjuncts;
  std::vector<SymVar> vars;
  int target = -1;
  std::vector<int> path;  // blocks of the goals passed, in order
};

enum class SolveStatus { Sat, Unsat, Incomplete };

inline const char* solve_status_name(SolveStatus s) {
  switch (s) {
    case SolveStatus::Sat: return "sat";
    case SolveStatus::Unsat: return "unsat";
    case SolveStatus::Incomplete: return "incomplete";
  }
  return "?";
}

struct SolveOptions {
  std::uint64_t domain_bound = 1U << 16;  // probes per variable per search node
  std::uint64_t probe_budget = 1U << 22;  // probes per solve call
};

struct SolveResult {
  SolveStatus status = SolveStatus::Unsat;
  std::vector<std::uint64_t> assignment;  // bits per variable, when Sat
  std::uint64_t probes = 0;
};

using Domains = std::vector<ValueRange>;

namespace interval {

inline ValueRange full(IntType t) { return {type_min(t), type_max(t)}; }
inline bool singleton(const ValueRange& r) { return r.lo == r.hi; }
inline bool empty(const ValueRange& r) { return r.lo > r.hi; }
inline bool within(const ValueRange& r, IntType t) { return r.lo >= type_min(t) && r.hi <= type_max(t); }
inline ValueRange meet(const ValueRange& a, const ValueRange& b) {
  return {std::max(a.lo, b.lo), std::min(a.hi, b.hi)};
}
inline bool contains(const ValueRange& r, i128 v) { return r.lo <= v && v <= r.hi; }
inline i128 abs128(i128 v) { return v < 0 ? -v : v; }

inline ValueRange fit_or_full(ValueRange r, IntType t) { return within(r, t) ? r : full(t); }

// Floor/ceil division for i128 with positive or negative divisor.
inline i128 floor_div(i128 a, i128 b) {
  i128 q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}
inline i128 ceil_div(i128 a, i128 b) {
  i128 q = a / b;
  if ((a % b != 0) && ((a < 0) == (b < 0))) ++q;
  return q;
}

inline constexpr i128 kMulLimit = i128{1} << 63;

inline std::optional<ValueRange> exact_add(const ValueRange& a, const ValueRange& b, IntType t) {
  ValueRange r{a.lo + b.lo, a.hi + b.hi};
  if (!within(r, t)) return std::nullopt;
  return r;
}
inline std::optional<ValueRange> exact_sub(const ValueRange& a, const ValueRange& b, IntType t) {
  ValueRange r{a.lo - b.hi, a.hi - b.lo};
  if (!within(r, t)) return std::nullopt;
  return r;
}
inline std::optional<ValueRange> exact_mul(const ValueRange& a, const ValueRange& b, IntType t) {
  for (i128 v : {a.lo, a.hi, b.lo, b.hi}) {
    if (abs128(v) >= kMulLimit) return std::nullopt;
  }
  const i128 c[] = {a.lo * b.lo, a.lo * b.hi, a.hi * b.lo, a.hi * b.hi};
  ValueRange r{*std::min_element(std::begin(c), std::end(c)), *std::max_element(std::begin(c), std::end(c))};
  if (!within(r, t)) return std::nullopt;
  return r;
}

/// Hull of the values x in type `t` with x == v (mod 2^bits) for some v in `r`.
inline ValueRange wrap_hull(const ValueRange& r, IntType t) {
  const i128 m = i128{1} << t.bits;
  std::optional<ValueRange> hull;
  for (i128 shift : {-m, i128{0}, m}) {
    const ValueRange piece = meet({r.lo + shift, r.hi + shift}, full(t));
    if (empty(piece)) continue;
    hull = hull ? ValueRange{std::min(hull->lo, piece.lo), std::max(hull->hi, piece.hi)} : piece;
  }
  return hull.value_or(ValueRange{1, 0});
}

/// Inverse of an odd number modulo 2^bits.
inline std::uint64_t odd_inverse(std::uint64_t c, IntType t) {
  std::uint64_t x = c;  // Newton iteration, correct to 3 bits at start
  for (int i = 0; i < 6; ++i) x *= 2 - c * x;
  return normalize(x, t);
}

inline i128 low_mask_above(i128 v) {
  // smallest 2^k - 1 >= v, for v >= 0
  i128 m = 0;
  while (m < v) m = m * 2 + 1;
  return m;
}

inline ValueRange truth_of(const ValueRange& r) {
  if (r.lo == 0 && r.hi == 0) return {0, 0};
  if (!contains(r, 0)) return {1, 1};
  return {0, 1};
}

inline ValueRange forward(const Term& t, const Domains& d);

inline ValueRange forward_binary(const Term& t, const Domains& d) {
  const ValueRange ra = forward(*t.a, d);
  const ValueRange rb = forward(*t.b, d);
  if (t.bop == BinOp::LAnd || t.bop == BinOp::LOr) {
    const ValueRange ta = truth_of(ra);
    const ValueRange tb = truth_of(rb);
    if (t.bop == BinOp::LAnd) {
      if (ta.hi == 0 || tb.hi == 0) return {0, 0};
      if (ta.lo == 1 && tb.lo == 1) return {1, 1};
    } else {
      if (ta.lo == 1 || tb.lo == 1) return {1, 1};
      if (ta.hi == 0 && tb.hi == 0) return {0, 0};
    }
    return {0, 1};
  }
  const IntType ot = t.a->type;
  if (singleton(ra) && singleton(rb)) {
    if ((t.bop == BinOp::Div || t.bop == BinOp::Rem) && rb.lo == 0) return {0, 0};
    const std::uint64_t v = apply_binary(t.bop, ot, from_math(ra.lo, ot), from_math(rb.lo, ot));
    const i128 m = math_value(v, t.type);
    return {m, m};
  }
  switch (t.bop) {
    case BinOp::Add: return exact_add(ra, rb, ot).value_or(full(ot));
    case BinOp::Sub: return exact_sub(ra, rb, ot).value_or(full(ot));
    case BinOp::Mul: return exact_mul(ra, rb, ot).value_or(full(ot));
    case BinOp::Div: {
      if (contains(rb, 0) || (rb.lo < 0 && rb.hi > 0)) return full(ot);
      const i128 c[] = {ra.lo / rb.lo, ra.lo / rb.hi, ra.hi / rb.lo, ra.hi / rb.hi};
      ValueRange r{*std::min_element(std::begin(c), std::end(c)), *std::max_element(std::begin(c), std::end(c))};
      return fit_or_full(r, ot);
    }
    case BinOp::Rem: {
      if (!singleton(rb) || rb.lo == 0) return full(ot);
      const i128 m = abs128(rb.lo) - 1;
      if (ra.lo >= 0) return {0, std::min(ra.hi, m)};
      if (ra.hi <= 0) return {std::max(ra.lo, -m), 0};
      return {-m, m};
    }
    case BinOp::And:
      if (ra.lo >= 0 && rb.lo >= 0) return {0, std::min(ra.hi, rb.hi)};
      return full(ot);
    case BinOp::Or:
    case BinOp::Xor:
      if (ra.lo >= 0 && rb.lo >= 0) return fit_or_full({0, low_mask_above(std::max(ra.hi, rb.hi))}, ot);
      return full(ot);
    case BinOp::Shr:
      if (ra.lo >= 0) return {0, ra.hi};
      return full(ot);
    case BinOp::Shl: return full(ot);
    case BinOp::Lt:
      if (ra.hi < rb.lo) return {1, 1};
      if (ra.lo >= rb.hi) return {0, 0};
      return {0, 1};
    case BinOp::Le:
      if (ra.hi <= rb.lo) return {1, 1};
      if (ra.lo > rb.hi) return {0, 0};
      return {0, 1};
    case BinOp::Gt:
      if (ra.lo > rb.hi) return {1, 1};
      if (ra.hi <= rb.lo) return {0, 0};
      return {0, 1};
    case BinOp::Ge:
      if (ra.lo >= rb.hi) return {1, 1};
      if (ra.hi < rb.lo) return {0, 0};
      return {0, 1};
    case BinOp::Eq:
      if (empty(meet(ra, rb))) return {0, 0};
      return {0, 1};
    case BinOp::Ne:
      if (empty(meet(ra, rb))) return {1, 1};
      return {0, 1};
    default: return full(t.type);
  }
}

inline ValueRange forward(const Term& t, const Domains& d) {
  switch (t.op) {
    case TermOp::Const: {
      const i128 m = math_value(t.value, t.type);
      return {m, m};
    }
    case TermOp::Var: return d.at(t.var);
    case TermOp::Convert: {
      const ValueRange r = forward(*t.a, d);
      if (within(r, t.type)) return r;
      if (t.a->type.is_signed && !t.type.is_signed && t.type.bits >= t.a->type.bits && r.hi < 0) {
        return {r.lo + (i128{1} << t.type.bits), r.hi + (i128{1} << t.type.bits)};
      }
      if (singleton(r)) {
        const i128 m = math_value(from_math(r.lo, t.type), t.type);
        return {m, m};
      }
      return full(t.type);
    }
    case TermOp::Unary: {
      const ValueRange r = forward(*t.a, d);
      if (t.uop == UnOp::LNot) {
        const ValueRange tr = truth_of(r);
        return {1 - tr.hi, 1 - tr.lo};
      }
      if (singleton(r)) {
        const i128 m = math_value(apply_unary(t.uop, t.type, from_math(r.lo, t.type)), t.type);
        return {m, m};
      }
      if (t.uop == UnOp::Neg) return fit_or_full({-r.hi, -r.lo}, t.type);
      if (t.type.is_signed) return fit_or_full({-r.hi - 1, -r.lo - 1}, t.type);
      return fit_or_full({type_max(t.type) - r.hi, type_max(t.type) - r.lo}, t.type);
    }
    case TermOp::Binary: return forward_binary(t, d);
  }
  return full(t.type);
}

class Reviser {
 public:
  explicit Reviser(Domains& d) : d_(d) {}

  bool value(const Term& t, ValueRange req) {
    const ValueRange r = forward(t, d_);
    const ValueRange nr = meet(r, req);
    if (empty(nr)) return false;
    if (nr == r) return true;
    switch (t.op) {
      case TermOp::Const: return true;
      case TermOp::Var: {
        auto& dom = d_.at(t.var);
        dom = meet(dom, nr);
        return !empty(dom);
      }
      case TermOp::Convert: {
        const ValueRange ra = forward(*t.a, d_);
        if (within(ra, t.type)) return value(*t.a, nr);
        const IntType from = t.a->type;
        if (from.is_signed && !t.type.is_signed && t.type.bits >= from.bits) {
          const i128 m = i128{1} << t.type.bits;
          if (nr.hi <= type_max(from)) return value(*t.a, {nr.lo, nr.hi});
          if (nr.lo >= m + type_min(from)) return value(*t.a, {nr.lo - m, nr.hi - m});
        }
        return true;
      }
      case TermOp::Unary: return unary(t, nr);
      case TermOp::Binary: return binary(t, nr);
    }
    return true;
  }

  bool truth(const Term& t, bool want) {
    if (!want) return value(t, {0, 0});
    if (t.is_boolean()) return value(t, {1, 1});
    const ValueRange r = forward(t, d_);
    if (r.lo == 0 && r.hi == 0) return false;
    if (r.lo == 0) return value(t, {1, r.hi});
    if (r.hi == 0) return value(t, {r.lo, -1});
    return true;
  }

 private:
  Domains& d_;

  bool unary(const Term& t, const ValueRange& nr) {
    if (t.uop == UnOp::LNot) {
      if (nr.lo == 1) return truth(*t.a, false);
      if (nr.hi == 0) return truth(*t.a, true);
      return true;
    }
    const ValueRange ra = forward(*t.a, d_);
    if (t.uop == UnOp::Neg) {
      if (!within({-ra.hi, -ra.lo}, t.type)) return true;
      return value(*t.a, {-nr.hi, -nr.lo});
    }
    if (t.type.is_signed && within({-ra.hi - 1, -ra.lo - 1}, t.type)) {
      return value(*t.a, {-nr.hi - 1, -nr.lo - 1});
    }
    return true;
  }

  static BinOp negate(BinOp op) {
    switch (op) {
      case BinOp::Lt: return BinOp::Ge;
      case BinOp::Le: return BinOp::Gt;
      case BinOp::Gt: return BinOp::Le;
      case BinOp::Ge: return BinOp::Lt;
      case BinOp::Eq: return BinOp::Ne;
      case BinOp::Ne: return BinOp::Eq;
      default: return op;
    }
  }

  bool relation(BinOp op, const Term& a, const Term& b) {
    const IntType ot = a.type;
    const i128 lo = type_min(ot);
    const i128 hi = type_max(ot);
    ValueRange ra = forward(a, d_);
    ValueRange rb = forward(b, d_);
    switch (op) {
      case BinOp::Lt:
        if (!value(a, {lo, rb.hi - 1})) return false;
        ra = forward(a, d_);
        return value(b, {ra.lo + 1, hi});
      case BinOp::Le:
        if (!value(a, {lo, rb.hi})) return false;
        ra = forward(a, d_);
        return value(b, {ra.lo, hi});
      case BinOp::Gt:
        if (!value(a, {rb.lo + 1, hi})) return false;
        ra = forward(a, d_);
        return value(b, {lo, ra.hi - 1});
      case BinOp::Ge:
        if (!value(a, {rb.lo, hi})) return false;
        ra = forward(a, d_);
        return value(b, {lo, ra.hi});
      case BinOp::Eq:
        if (!value(a, rb)) return false;
        ra = forward(a, d_);
        return value(b, ra);
      case BinOp::Ne:
        if (singleton(rb)) {
          if (ra.lo == rb.lo && !value(a, {ra.lo + 1, ra.hi})) return false;
          ra = forward(a, d_);
          if (ra.hi == rb.lo && !value(a, {ra.lo, ra.hi - 1})) return false;
        }
        ra = forward(a, d_);
        if (singleton(ra)) {
          if (rb.lo == ra.lo && !value(b, {rb.lo + 1, rb.hi})) return false;
          rb = forward(b, d_);
          if (rb.hi == ra.lo && !value(b, {rb.lo, rb.hi - 1})) return false;
        }
        return true;
      default: return true;
    }
  }

  static std::optional<ValueRange> divide_range(const ValueRange& nr, i128 c) {
    if (c > 0) return ValueRange{ceil_div(nr.lo, c), floor_div(nr.hi, c)};
    if (c < 0) return ValueRange{ceil_div(nr.hi, c), floor_div(nr.lo, c)};
    return std::nullopt;
  }

  bool binary(const Term& t, const ValueRange& nr) {
    const Term& a = *t.a;
    const Term& b = *t.b;
    if (t.bop == BinOp::LAnd || t.bop == BinOp::LOr) {
      const ValueRange ta = truth_of(forward(a, d_));
      const ValueRange tb = truth_of(forward(b, d_));
      const bool want = nr.lo == 1;
      if (!singleton(nr)) return true;
      if (t.bop == BinOp::LAnd) {
        if (want) return truth(a, true) && truth(b, true);
        if (tb.lo == 1) return truth(a, false);
        if (ta.lo == 1) return truth(b, false);
        return true;
      }
      if (!want) return truth(a, false) && truth(b, false);
      if (tb.hi == 0) return truth(a, true);
      if (ta.hi == 0) return truth(b, true);
      return true;
    }
    if (is_comparison(t.bop)) {
      if (nr.lo == 1) return relation(t.bop, a, b);
      if (nr.hi == 0) return relation(negate(t.bop), a, b);
      return true;
    }
    const IntType ot = a.type;
    ValueRange ra = forward(a, d_);
    ValueRange rb = forward(b, d_);
    switch (t.bop) {
      case BinOp::Add:
        if (!exact_add(ra, rb, ot)) {
          if (singleton(rb)) return value(a, wrap_hull({nr.lo - rb.lo, nr.hi - rb.lo}, ot));
          if (singleton(ra)) return value(b, wrap_hull({nr.lo - ra.lo, nr.hi - ra.lo}, ot));
          return true;
        }
        if (!value(a, {nr.lo - rb.hi, nr.hi - rb.lo})) return false;
        ra = forward(a, d_);
        return value(b, {nr.lo - ra.hi, nr.hi - ra.lo});
      case BinOp::Sub:
        if (!exact_sub(ra, rb, ot)) {
          if (singleton(rb)) return value(a, wrap_hull({nr.lo + rb.lo, nr.hi + rb.lo}, ot));
          if (singleton(ra)) return value(b, wrap_hull({ra.lo - nr.hi, ra.lo - nr.lo}, ot));
          return true;
        }
        if (!value(a, {nr.lo + rb.lo, nr.hi + rb.hi})) return false;
        ra = forward(a, d_);
        return value(b, {ra.lo - nr.hi, ra.hi - nr.lo});
      case BinOp::Mul: {
        if (!exact_mul(ra, rb, ot)) {
          if (!singleton(nr)) return true;
          const Term* var = singleton(rb) ? &a : (singleton(ra) ? &b : nullptr);
          const std::uint64_t c = from_math(singleton(rb) ? rb.lo : ra.lo, ot);
          if (var == nullptr || (c & 1U) == 0) return true;
          const i128 x = math_value(normalize(from_math(nr.lo, ot) * odd_inverse(c, ot), ot), ot);
          return value(*var, {x, x});
        }
        if (singleton(rb)) {
          if (auto q = divide_range(nr, rb.lo); q && !value(a, *q)) return false;
        }
        ra = forward(a, d_);
        if (singleton(ra)) {
          if (auto q = divide_range(nr, ra.lo); q && !value(b, *q)) return false;
        }
        return true;
      }
      case BinOp::Xor:
        if (!singleton(nr)) return true;
        if (singleton(rb)) {
          const i128 v = math_value(from_math(nr.lo, ot) ^ from_math(rb.lo, ot), ot);
          if (!value(a, {v, v})) return false;
        }
        ra = forward(a, d_);
        if (singleton(ra)) {
          const i128 v = math_value(from_math(nr.lo, ot) ^ from_math(ra.lo, ot), ot);
          return value(b, {v, v});
        }
        return true;
      default: return true;
    }
  }
};

}  // namespace interval

/// Narrows `domains` until no conjunct changes them. False when some
/// conjunct provably cannot hold.
inline bool propagate(const std::vector<TermPtr>& conjuncts, Domains& domains, int max_rounds = 64) {
  interval::Reviser rev(domains);
  for (int round = 0; round < max_rounds; ++round) {
    const Domains before = domains;
    for (const auto& c : conjuncts) {
      if (!rev.truth(*c, true)) return false;
    }
    if (domains == before) break;
  }
  return true;
}

/// Candidate values in probe order: endpoints, 0, 1, -1, then an outward
/// sweep from the in-range point closest to 0.
class ProbeSequence {
 public:
  explicit ProbeSequence(ValueRange r) : r_(r) {
    for (i128 v : {r.lo, r.hi, i128{0}, i128{1}, i128{-1}}) {
      if (interval::contains(r, v) && std::find(special_.begin(), special_.end(), v) == special_.end()) {
        special_.push_back(v);
      }
    }
    center_ = std::clamp(i128{0}, r.lo, r.hi);
  }

  std::optional<i128> next() {
    if (special_pos_ < special_.size()) return special_[special_pos_++];
    for (;;) {
      const bool up_ok = center_ + offset_ <= r_.hi;
      const bool down_ok = center_ - offset_ >= r_.lo;
      if (!up_ok && !down_ok) return std::nullopt;
      i128 v = 0;
      bool have = false;
      if (!down_side_) {
        down_side_ = true;
        if (up_ok) {
          v = center_ + offset_;
          have = true;
        }
        if (offset_ == 0) {
          down_side_ = false;
          ++offset_;
        }
      } else {
        down_side_ = false;
        if (down_ok) {
          v = center_ - offset_;
          have = true;
        }
        ++offset_;
      }
      if (have && std::find(special_.begin(), special_.end(), v) == special_.end()) return v;
    }
  }

 private:
  ValueRange r_;
  std::vector<i128> special_;
  std::size_t special_pos_ = 0;
  i128 center_ = 0;
  i128 offset_ = 0;
  bool down_side_ = false;
};

namespace detail {

class Search {
 public:
  Search(const PathCondition& pc, const SolveOptions& opts) : pc_(pc), opts_(opts) {
    std::vector<bool> used(pc.vars.size(), false);
    for (const auto& c : pc.conjuncts) collect_vars(*c, used);
    for (std::size_t i = 0; i < pc.vars.size(); ++i) {
      if (used[i]) constrained_.push_back(static_cast<std::uint32_t>(i));
    }
  }

  SolveResult run() {
    Domains d;
    for (const auto& v : pc_.vars) d.push_back(interval::meet(v.domain, interval::full(v.type)));
    SolveResult res;
    for (const auto& r : d) {
      if (interval::empty(r)) return res;
    }
    auto found = dfs(std::move(d));
    res.probes = probes_;
    if (found) {
      res.status = SolveStatus::Sat;
      res.assignment = std::move(*found);
    } else {
      res.status = incomplete_ ? SolveStatus::Incomplete : SolveStatus::Unsat;
    }
    return res;
  }

 private:
  const PathCondition& pc_;
  SolveOptions opts_;
  std::vector<std::uint32_t> constrained_;
  std::uint64_t probes_ = 0;
  bool incomplete_ = false;
  bool aborted_ = false;

  std::optional<std::vector<std::uint64_t>> finish(const Domains& d) {
    std::vector<std::uint64_t> bits(pc_.vars.size(), 0);
    for (std::size_t i = 0; i < pc_.vars.size(); ++i) {
      const i128 v = interval::singleton(d[i]) ? d[i].lo : std::clamp(i128{0}, d[i].lo, d[i].hi);
      bits[i] = from_math(v, pc_.vars[i].type);
    }
    for (const auto& c : pc_.conjuncts) {
      if (!truthy(eval_term(*c, bits))) return std::nullopt;
    }
    return bits;
  }

  std::optional<std::vector<std::uint64_t>> dfs(Domains d) {
    if (!propagate(pc_.conjuncts, d)) return std::nullopt;
    std::optional<std::uint32_t> pick;
    i128 best = 0;
    for (std::uint32_t v : constrained_) {
      const ValueRange& r = d[v];
      if (interval::singleton(r)) continue;
      const i128 width = r.hi - r.lo;
      if (!pick || width < best) {
        pick = v;
        best = width;
      }
    }
    if (!pick) return finish(d);
    ProbeSequence seq(d[*pick]);
    std::uint64_t tried = 0;
    while (auto val = seq.next()) {
      if (tried == opts_.domain_bound) {
        incomplete_ = true;
        break;
      }
      if (probes_ >= opts_.probe_budget) {
        incomplete_ = true;
        aborted_ = true;
        return std::nullopt;
      }
      ++tried;
      ++probes_;
      Domains child = d;
      child[*pick] = {*val, *val};
      if (auto r = dfs(std::move(child))) return r;
      if (aborted_) return std::nullopt;
    }
    return std::nullopt;
  }
};

}  // namespace detail

inline SolveResult solve(const PathCondition& pc, const SolveOptions& opts = {}) {
  return detail::Search(pc, opts).run();
}

/// True when every conjunct evaluates to non-zero under `bits`.
inline bool satisfies(const PathCondition& pc, const std::vector<std::uint64_t>& bits) {
  for (const auto& c : pc.conjuncts) {
    if (!truthy(eval_term(*c, bits))) return false;
  }
  return true;
}

}  // namespace smartseed
