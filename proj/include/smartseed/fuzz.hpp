#pragma once

// Grey-box mutation fuzzer and selective (structured-random) fuzzer.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <random>
#include <utility>
#include <vector>

#include "smartseed/executor.hpp"

namespace smartseed {

/// Portable generator: mt19937_64 output is fixed by the standard; the
/// distributions are not, so ranges are drawn with our own rejection sampling.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next() { return eng_(); }

  /// Uniform in [0, n), n >= 1.
  std::uint64_t below(std::uint64_t n) {
    if ((n & (n - 1)) == 0) return eng_() & (n - 1);
    const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % n);
    for (;;) {
      const std::uint64_t x = eng_();
      if (x < limit) return x % n;
    }
  }

  /// Uniform in [lo, hi]; the span may be up to 2^64.
  i128 uniform(i128 lo, i128 hi) {
    const i128 span = hi - lo + 1;
    if (span > static_cast<i128>(UINT64_MAX)) return lo + static_cast<i128>(eng_());
    return lo + static_cast<i128>(below(static_cast<std::uint64_t>(span)));
  }

  bool coin() { return (eng_() >> 63) != 0; }

 private:
  std::mt19937_64 eng_;
};

struct ImpactScore {
  std::uint64_t unique_labels = 0;
  int max_depth = -1;

  friend bool operator==(const ImpactScore&, const ImpactScore&) = default;
};

/// Impact ordering: more unique labels first, then deeper, then older test.
inline bool impact_before(const ImpactScore& a, TestId ida, const ImpactScore& b, TestId idb) {
  if (a.unique_labels != b.unique_labels) return a.unique_labels > b.unique_labels;
  if (a.max_depth != b.max_depth) return a.max_depth > b.max_depth;
  return ida < idb;
}

struct Seed {
  TestCase testcase;
  ImpactScore impact;
  std::optional<int> incomplete_for;  // target goal, for incomplete seeds
};

struct SeedCorpus {
  std::vector<Seed> seeds;

  /// Adds unless an identical input vector is present.
  bool add(Seed s) {
    for (const auto& x : seeds) {
      if (x.testcase.inputs == s.testcase.inputs) return false;
    }
    seeds.push_back(std::move(s));
    return true;
  }
  [[nodiscard]] bool empty() const { return seeds.empty(); }
  [[nodiscard]] std::size_t size() const { return seeds.size(); }
};

enum class MutationOp { BitFlip, ByteFlip, Arith, Interesting, Splice, Resize };

inline constexpr MutationOp kMutationOps[] = {MutationOp::BitFlip, MutationOp::ByteFlip,    MutationOp::Arith,
                                              MutationOp::Interesting, MutationOp::Splice, MutationOp::Resize};

inline const char* mutation_op_name(MutationOp op) {
  switch (op) {
    case MutationOp::BitFlip: return "bit-flip";
    case MutationOp::ByteFlip: return "byte-flip";
    case MutationOp::Arith: return "arith";
    case MutationOp::Interesting: return "interesting";
    case MutationOp::Splice: return "splice";
    case MutationOp::Resize: return "resize";
  }
  return "?";
}

/// Per-position typing and value hints for mutation.
struct MutationContext {
  std::vector<IntType> position_types;      // by input position; the last entry repeats
  std::vector<ValueRange> inferred;         // inferred interval per position, same convention
  std::optional<ValueRange> domain;         // campaign restriction on test values
  std::size_t max_length = 64;

  [[nodiscard]] IntType type_at(std::size_t pos) const {
    if (position_types.empty()) return kInt;
    return position_types[std::min(pos, position_types.size() - 1)];
  }
  [[nodiscard]] std::optional<ValueRange> inferred_at(std::size_t pos) const {
    if (inferred.empty()) return std::nullopt;
    return inferred[std::min(pos, inferred.size() - 1)];
  }
  [[nodiscard]] std::int64_t restrict(std::int64_t v) const {
    if (!domain) return v;
    return static_cast<std::int64_t>(std::clamp<i128>(v, domain->lo, domain->hi));
  }
};

/// Context from a program's input sites and inferred constraints.
inline MutationContext make_mutation_context(const Ast& ast, const InputConstraints& constraints,
                                             std::optional<ValueRange> domain) {
  MutationContext ctx;
  for (const auto& site : ast.input_sites) ctx.position_types.push_back(site.type);
  for (const auto& sc : constraints.sites) ctx.inferred.push_back(sc.range);
  ctx.domain = domain;
  return ctx;
}

inline std::int64_t add_wrapping(std::int64_t v, std::int64_t delta, IntType t) {
  return to_input(normalize(input_bits(v, t) + static_cast<std::uint64_t>(delta), t), t);
}

/// prefix of `a` up to `cut`, then the rest of `b` from `cut` on.
inline std::vector<std::int64_t> splice(const std::vector<std::int64_t>& a, const std::vector<std::int64_t>& b,
                                        std::size_t cut) {
  std::vector<std::int64_t> out(a.begin(), a.begin() + static_cast<std::ptrdiff_t>(std::min(cut, a.size())));
  if (cut < b.size()) out.insert(out.end(), b.begin() + static_cast<std::ptrdiff_t>(cut), b.end());
  return out;
}

inline std::vector<std::int64_t> interesting_values(IntType t, std::optional<ValueRange> inferred) {
  std::vector<i128> raw{0, 1, -1, type_min(t), type_max(t)};
  if (inferred) {
    raw.push_back(inferred->lo);
    raw.push_back(inferred->hi);
  }
  std::vector<std::int64_t> out;
  for (i128 x : raw) out.push_back(to_input(from_math(x, t), t));
  return out;
}

/// Applies one mutation; `partner` is the splice donor.
inline TestCase mutate(const TestCase& seed, MutationOp op, Rng& rng, const MutationContext& ctx,
                       const TestCase* partner = nullptr) {
  TestCase out;
  out.origin = Origin::Fuzzer;
  out.inputs = seed.inputs;
  auto& v = out.inputs;
  if (v.empty() && op != MutationOp::Splice) op = MutationOp::Resize;
  const std::size_t pos = v.empty() ? 0 : rng.below(v.size());
  const IntType t = ctx.type_at(pos);
  switch (op) {
    case MutationOp::BitFlip: {
      const std::uint64_t bit = std::uint64_t{1} << rng.below(t.bits);
      v[pos] = to_input(input_bits(v[pos], t) ^ bit, t);
      break;
    }
    case MutationOp::ByteFlip: {
      const std::uint64_t byte = std::uint64_t{0xFF} << (8 * rng.below(t.bits / 8));
      v[pos] = to_input(input_bits(v[pos], t) ^ byte, t);
      break;
    }
    case MutationOp::Arith: {
      const auto delta = static_cast<std::int64_t>(1 + rng.below(35));
      v[pos] = add_wrapping(v[pos], rng.coin() ? delta : -delta, t);
      break;
    }
    case MutationOp::Interesting: {
      const auto vals = interesting_values(t, ctx.inferred_at(pos));
      v[pos] = vals[rng.below(vals.size())];
      break;
    }
    case MutationOp::Splice: {
      const std::vector<std::int64_t>& donor = partner ? partner->inputs : seed.inputs;
      const std::size_t cut = rng.below(std::max(v.size(), donor.size()) + 1);
      v = splice(v, donor, cut);
      break;
    }
    case MutationOp::Resize:
      if (!v.empty() && (v.size() >= ctx.max_length || rng.coin())) {
        v.pop_back();
      } else {
        const IntType nt = ctx.type_at(v.size());
        const auto vals = interesting_values(nt, ctx.inferred_at(v.size()));
        v.push_back(vals[rng.below(vals.size())]);
      }
      break;
  }
  for (auto& x : v) x = ctx.restrict(x);
  return out;
}

/// Splits `budget` executions over seeds in proportion to
/// (1 + unique labels) * (1 + max depth), largest remainder first, every seed
/// at least 1. With fewer executions than seeds, the first `budget` seeds get one.
inline std::vector<std::uint64_t> schedule_energy(const std::vector<ImpactScore>& scores, std::uint64_t budget) {
  const std::size_t n = scores.size();
  std::vector<std::uint64_t> energy(n, 0);
  if (n == 0) return energy;
  if (budget < n) {
    for (std::size_t i = 0; i < budget; ++i) energy[i] = 1;
    return energy;
  }
  std::vector<std::uint64_t> w(n);
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = (1 + scores[i].unique_labels) * static_cast<std::uint64_t>(1 + std::max(scores[i].max_depth, 0));
    total += w[i];
  }
  std::vector<std::pair<std::uint64_t, std::size_t>> rem;
  std::uint64_t given = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto q = static_cast<unsigned __int128>(budget) * w[i];
    energy[i] = static_cast<std::uint64_t>(q / total);
    rem.emplace_back(static_cast<std::uint64_t>(q % total), i);
    given += energy[i];
  }
  std::stable_sort(rem.begin(), rem.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t j = 0; given < budget; ++j, ++given) ++energy[rem[j].second];
  for (std::size_t i = 0; i < n; ++i) {
    if (energy[i] > 0) continue;
    const auto largest = std::max_element(energy.begin(), energy.end());
    --*largest;
    energy[i] = 1;
  }
  return energy;
}

/// Where fuzzers report executions. Implementations merge atomically and
/// return the goals whose covered flag flipped.
class CoverageHandle {
 public:
  virtual ~CoverageHandle() = default;
  virtual TestId next_id() = 0;
  virtual std::vector<int> report(const TestCase& tc, const ExecutionTrace& trace) = 0;
};

struct Finding {
  TestCase testcase;
  ExecutionTrace trace;
  std::vector<int> new_goals;
};

/// Runs exactly `budget` mutated tests; returns those that increased coverage.
inline std::vector<Finding> fuzz_round(const Program& p, const SeedCorpus& corpus, std::uint64_t budget,
                                       CoverageHandle& coverage, Rng& rng, const MutationContext& ctx) {
  std::vector<Finding> out;
  SeedCorpus local = corpus;
  if (local.empty()) local.add(Seed{});
  std::vector<ImpactScore> scores;
  for (const auto& s : local.seeds) scores.push_back(s.impact);
  const auto energy = schedule_energy(scores, budget);
  for (std::size_t i = 0; i < local.seeds.size(); ++i) {
    for (std::uint64_t e = 0; e < energy[i]; ++e) {
      const MutationOp op = kMutationOps[rng.below(std::size(kMutationOps))];
      const TestCase& partner = local.seeds[rng.below(local.seeds.size())].testcase;
      TestCase tc = mutate(local.seeds[i].testcase, op, rng, ctx, &partner);
      tc.origin = Origin::Fuzzer;
      tc.id = coverage.next_id();
      ExecutionTrace trace = run(p, tc);
      auto delta = coverage.report(tc, trace);
      if (!delta.empty()) out.push_back(Finding{std::move(tc), std::move(trace), std::move(delta)});
    }
  }
  return out;
}

/// Interval a selective draw for `pos` comes from, as test values.
inline ValueRange selective_range(const InputConstraints& constraints, const std::vector<IntType>& types,
                                  std::size_t pos, std::optional<ValueRange> domain) {
  IntType t = kInt;
  if (!types.empty()) t = types[std::min(pos, types.size() - 1)];
  ValueRange r = full_range(t);
  if (pos < constraints.sites.size()) r = constraints.sites[pos].range;
  if (domain) {
    const ValueRange m{std::max(r.lo, domain->lo), std::min(r.hi, domain->hi)};
    if (m.lo <= m.hi) r = m;
  }
  return r;
}

/// A fresh test of exactly `n_inputs` values, each uniform over its interval.
inline TestCase selective_generate(std::size_t n_inputs, const InputConstraints& constraints,
                                   const std::vector<IntType>& types, Rng& rng,
                                   std::optional<ValueRange> domain = std::nullopt) {
  TestCase tc;
  tc.origin = Origin::Selective;
  for (std::size_t i = 0; i < n_inputs; ++i) {
    IntType t = kInt;
    if (!types.empty()) t = types[std::min(i, types.size() - 1)];
    const ValueRange r = selective_range(constraints, types, i, domain);
    tc.inputs.push_back(to_input(from_math(rng.uniform(r.lo, r.hi), t), t));
  }
  return tc;
}

}  // namespace smartseed
