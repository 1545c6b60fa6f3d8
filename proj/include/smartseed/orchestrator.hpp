#pragma once

// Two-phase campaign: seed generation on a lightened program, then
// reachability on the original program with all engines reporting through
// one Tracer. Engines take turns in a fixed round-robin, so a campaign is a
// pure function of (program, config).

#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "smartseed/bmc.hpp"
#include "smartseed/fuzz.hpp"
#include "smartseed/tracer.hpp"

namespace smartseed {

enum class PropertyKind { CoverageBranches, CoverageError };

inline const char* property_kind_name(PropertyKind k) {
  return k == PropertyKind::CoverageBranches ? "coverage-branches" : "coverage-error";
}

struct CampaignConfig {
  std::uint64_t budget_execs = 20000;
  double budget_secs = 0;  // 0: no wall-clock cap
  double seed_phase_fraction = 0.1;
  double fuzzer_fraction = 0.5;
  double bmc_fraction = 0.4;
  double selective_fraction = 0.1;
  bool fuzzer_only = false;  // BMC's share goes to the mutation fuzzer
  RankStrategy ranking = RankStrategy::DeepFirst;
  BmcConfig bmc;
  std::uint64_t rng_seed = 1;
  LightenOptions lighten;
  PropertyKind property = PropertyKind::CoverageBranches;
  std::optional<ValueRange> input_domain;
  std::uint64_t fuzz_chunk = 256;
  std::uint64_t selective_chunk = 32;
  std::size_t seed_capacity = kDefaultSeedCapacity;
  std::ostream* log = nullptr;

  void validate() const {
    const auto in_open_unit = [](double f) { return f > 0.0 && f < 1.0; };
    if (!in_open_unit(seed_phase_fraction)) throw std::invalid_argument("seed phase fraction must be in (0,1)");
    if (!in_open_unit(fuzzer_fraction) || !in_open_unit(bmc_fraction) || !in_open_unit(selective_fraction)) {
      throw std::invalid_argument("engine fractions must be in (0,1)");
    }
    if (std::abs(fuzzer_fraction + bmc_fraction + selective_fraction - 1.0) > 1e-9) {
      throw std::invalid_argument("engine fractions must sum to 1");
    }
    if (budget_execs == 0) throw std::invalid_argument("execution budget must be positive");
    if (input_domain && input_domain->lo > input_domain->hi) throw std::invalid_argument("empty input domain");
    (void)bound_schedule(bmc);
  }
};

struct EngineBudget {
  std::uint64_t fuzzer = 0;
  std::uint64_t bmc = 0;
  std::uint64_t selective = 0;
};

/// Splits a phase budget by the engine fractions; the remainder goes to the
/// selective fuzzer so the parts add up exactly.
inline EngineBudget split_budget(std::uint64_t total, const CampaignConfig& cfg) {
  EngineBudget b;
  b.fuzzer = static_cast<std::uint64_t>(std::floor(static_cast<double>(total) * cfg.fuzzer_fraction));
  b.bmc = static_cast<std::uint64_t>(std::floor(static_cast<double>(total) * cfg.bmc_fraction));
  b.selective = total - b.fuzzer - b.bmc;
  if (cfg.fuzzer_only) {
    b.fuzzer += b.bmc;
    b.bmc = 0;
  }
  return b;
}

struct PhaseStats {
  std::uint64_t fuzzer_execs = 0;
  std::uint64_t selective_execs = 0;
  std::uint64_t bmc_cost = 0;
  std::uint64_t bmc_calls = 0;
  std::uint64_t bmc_witnesses = 0;
  std::uint64_t witness_failures = 0;  // witnesses that failed replay
  std::uint64_t incomplete_seeds = 0;
  std::size_t covered = 0;
  bool time_capped = false;
};

struct TestSuite {
  std::vector<TestCase> tests;
  std::vector<std::vector<int>> test_goals;  // goals each test covers, ascending
  std::vector<int> covered_goals;            // ascending
  std::size_t total_goals = 0;
  PhaseStats phase1;
  PhaseStats phase2;
  std::vector<Witness> witnesses;       // phase 2, validated on the original program
  std::vector<Witness> seed_witnesses;  // phase 1, validated on the loop-bounded variant
  std::string coverage_report;

  [[nodiscard]] double coverage() const {
    return total_goals == 0 ? 1.0 : static_cast<double>(covered_goals.size()) / static_cast<double>(total_goals);
  }
};

namespace detail {

class Clock {
 public:
  explicit Clock(double secs) : secs_(secs), start_(std::chrono::steady_clock::now()) {}
  [[nodiscard]] bool expired() const {
    if (secs_ <= 0) return false;
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count() >= secs_;
  }

 private:
  double secs_;
  std::chrono::steady_clock::time_point start_;
};

inline void log_round(const CampaignConfig& cfg, int phase, const char* engine, std::uint64_t execs,
                      std::size_t covered, std::size_t total) {
  if (cfg.log == nullptr) return;
  *cfg.log << "phase=" << phase << " engine=" << engine << " execs=" << execs << " covered=" << covered << "/"
           << total << "\n";
}

/// Goals the campaign works toward under its property and BMC strategy, in rank order.
inline std::vector<int> target_order(const Program& p, const CampaignConfig& cfg, bool for_bmc) {
  std::vector<int> out;
  for (int g : rank_goals(p.goals, cfg.ranking).order) {
    const GoalKind kind = p.goals.goals[static_cast<std::size_t>(g)].kind;
    if (cfg.property == PropertyKind::CoverageError && kind != GoalKind::ErrorReach) continue;
    if (for_bmc && !strategy_targets(cfg.bmc.strategy, kind)) continue;
    out.push_back(g);
  }
  return out;
}

inline bool error_covered(const Program& p, const Tracer& t) {
  const auto flags = t.covered_flags();
  for (std::size_t g = 0; g < flags.size(); ++g) {
    if (flags[g] && p.goals.goals[g].kind == GoalKind::ErrorReach) return true;
  }
  return false;
}

/// Shared engine loop of both phases.
class EngineLoop {
 public:
  EngineLoop(const Program& run_on, const Program& bmc_on, const CampaignConfig& cfg, Tracer& tracer, int phase,
             EngineBudget budget, std::uint64_t rng_seed, const InputConstraints& constraints, PhaseStats& stats,
             std::vector<Witness>& witnesses, const Clock& clock)
      : p_(run_on),
        bmc_p_(bmc_on),
        cfg_(cfg),
        tracer_(tracer),
        phase_(phase),
        budget_(budget),
        fuzz_rng_(rng_seed),
        sel_rng_(rng_seed ^ 0x9E3779B97F4A7C15ULL),
        constraints_(constraints),
        stats_(stats),
        witnesses_(witnesses),
        clock_(clock) {
    ctx_ = make_mutation_context(p_.ast, constraints_, cfg_.input_domain);
    targets_ = target_order(p_, cfg_, false);
    bmc_targets_ = target_order(p_, cfg_, true);
    for (const auto& s : p_.ast.input_sites) site_types_.push_back(s.type);
  }

  /// Runs one test outside the engines (seed replay); charged to the fuzzer share.
  TestId execute(TestCase tc, Origin origin) {
    tc.origin = origin;
    tc.id = tracer_.next_id();
    const ExecutionTrace tr = run(p_, tc);
    tracer_.report(tc, tr);
    ++stats_.fuzzer_execs;
    return tc.id;
  }

  [[nodiscard]] std::uint64_t fuzz_left() const { return budget_.fuzzer - std::min(budget_.fuzzer, stats_.fuzzer_execs); }

  void run_rounds() {
    while (!finished()) {
      bool progress = false;
      if (bmc_step()) progress = true;
      if (finished()) break;
      if (fuzz_step()) progress = true;
      if (finished()) break;
      if (selective_step()) progress = true;
      if (!progress) break;
    }
    stats_.covered = tracer_.covered_count();
  }

 private:
  const Program& p_;
  const Program& bmc_p_;
  const CampaignConfig& cfg_;
  Tracer& tracer_;
  int phase_;
  EngineBudget budget_;
  Rng fuzz_rng_;
  Rng sel_rng_;
  const InputConstraints& constraints_;
  PhaseStats& stats_;
  std::vector<Witness>& witnesses_;
  const Clock& clock_;
  MutationContext ctx_;
  std::vector<int> targets_;
  std::vector<int> bmc_targets_;
  std::vector<IntType> site_types_;

  bool finished() {
    if (clock_.expired()) {
      stats_.time_capped = true;
      return true;
    }
    if (cfg_.property == PropertyKind::CoverageError && error_covered(p_, tracer_)) return true;
    for (int g : targets_) {
      if (!tracer_.is_covered(g)) return false;
    }
    return true;
  }

  bool bmc_step() {
    if (stats_.bmc_cost >= budget_.bmc) return false;
    const auto goal = tracer_.next_goal_for_bmc(bmc_targets_);
    if (!goal) return false;
    BmcConfig bc = cfg_.bmc;
    bc.input_domain = cfg_.input_domain;
    const std::uint64_t left = budget_.bmc - stats_.bmc_cost;
    bc.per_goal_budget = bc.per_goal_budget == 0 ? left : std::min(bc.per_goal_budget, left);
    const BmcResult r = reach_goal(bmc_p_, *goal, bc, tracer_.covered_flags());
    ++stats_.bmc_calls;
    stats_.bmc_cost += r.cost;
    stats_.witness_failures += r.validation_failures;
    if (r.witness) {
      ++stats_.bmc_witnesses;
      witnesses_.push_back(*r.witness);
      TestCase tc = r.witness->testcase;
      tc.id = tracer_.next_id();
      const ExecutionTrace tr = run(p_, tc);
      tracer_.report(tc, tr);
      tracer_.inject(Seed{tc, {}, std::nullopt});
      // a witness that misses under clamping is still a seed, but retrying is pointless
      tracer_.release_goal(*goal, !tracer_.is_covered(*goal));
    } else {
      tracer_.release_goal(*goal, true);
      if (auto seed = tracer_.promote_incomplete_seed(*goal)) {
        tracer_.inject(*seed);
        ++stats_.incomplete_seeds;
      }
    }
    log_round(cfg_, phase_, "bmc", r.cost, tracer_.covered_count(), tracer_.goal_count());
    return true;
  }

  bool fuzz_step() {
    const std::uint64_t n = std::min(cfg_.fuzz_chunk, fuzz_left());
    if (n == 0) return false;
    SeedCorpus corpus;
    for (const auto& s : tracer_.seed_store()) corpus.add(s);
    fuzz_round(p_, corpus, n, tracer_, fuzz_rng_, ctx_);
    stats_.fuzzer_execs += n;
    log_round(cfg_, phase_, "fuzzer", n, tracer_.covered_count(), tracer_.goal_count());
    return true;
  }

  bool selective_step() {
    const std::uint64_t left = budget_.selective - std::min(budget_.selective, stats_.selective_execs);
    const std::uint64_t n = std::min(cfg_.selective_chunk, left);
    if (n == 0) return false;
    for (std::uint64_t i = 0; i < n; ++i) {
      TestCase tc = selective_generate(p_.ast.input_sites.size(), constraints_, site_types_, sel_rng_,
                                       cfg_.input_domain);
      tc.id = tracer_.next_id();
      const ExecutionTrace tr = run(p_, tc);
      tracer_.report(tc, tr);
    }
    stats_.selective_execs += n;
    log_round(cfg_, phase_, "selective", n, tracer_.covered_count(), tracer_.goal_count());
    return true;
  }
};

}  // namespace detail

struct SeedPhaseResult {
  std::vector<Seed> seeds;
  PhaseStats stats;
  std::vector<Witness> witnesses;
};

inline std::uint64_t seed_phase_budget(const CampaignConfig& cfg) {
  return static_cast<std::uint64_t>(std::floor(static_cast<double>(cfg.budget_execs) * cfg.seed_phase_fraction));
}

/// Phase-1 BMC works on loops bounded like the lightened program but without
/// clamped reads, so narrow default ranges cannot hide guard values.
inline Program seed_phase_bmc_program(const Program& p, const InputConstraints& constraints,
                                      LightenOptions opts) {
  opts.clamp_inputs = false;
  return with_ast(p, lighten(p.ast, constraints, opts));
}

/// Phase 1: short run on the lightened program; its coverage is discarded,
/// only the selected seeds survive.
inline SeedPhaseResult seed_generation_phase(const Program& p, const CampaignConfig& cfg) {
  SeedPhaseResult out;
  const InputConstraints constraints = infer_input_constraints(p.ast);
  const Program light = with_ast(p, lighten(p.ast, constraints, cfg.lighten));
  const Program bmc_variant = seed_phase_bmc_program(p, constraints, cfg.lighten);
  Tracer tracer(light, cfg.seed_capacity);
  const detail::Clock clock(cfg.budget_secs * cfg.seed_phase_fraction);
  detail::EngineLoop loop(light, bmc_variant, cfg, tracer, 1, split_budget(seed_phase_budget(cfg), cfg),
                          cfg.rng_seed, constraints, out.stats, out.witnesses, clock);
  if (loop.fuzz_left() > 0) loop.execute(TestCase{}, Origin::SeedPhase);
  loop.run_rounds();
  out.seeds = tracer.select_seeds(tracer.retained_tests(), cfg.seed_capacity);
  for (const auto& w : out.witnesses) {
    const bool dup = std::any_of(out.seeds.begin(), out.seeds.end(),
                                 [&](const Seed& s) { return s.testcase.inputs == w.testcase.inputs; });
    if (!dup) out.seeds.push_back(Seed{w.testcase, {}, std::nullopt});
  }
  if (out.seeds.empty() && cfg.log != nullptr) *cfg.log << "warning: seed phase produced no seeds\n";
  return out;
}

/// Greedy set cover: repeatedly the test adding most uncovered goals, ties by
/// impact ordering.
struct RecordedTest {
  TestCase testcase;
  std::vector<int> goals;
  ImpactScore impact;
};

inline std::vector<std::size_t> minimize_suite(const std::vector<RecordedTest>& recorded) {
  std::set<int> left;
  for (const auto& t : recorded) left.insert(t.goals.begin(), t.goals.end());
  std::vector<std::size_t> chosen;
  std::vector<bool> used(recorded.size(), false);
  while (!left.empty()) {
    std::optional<std::size_t> best;
    std::size_t best_gain = 0;
    for (std::size_t i = 0; i < recorded.size(); ++i) {
      if (used[i]) continue;
      std::size_t gain = 0;
      for (int g : recorded[i].goals) gain += left.count(g);
      if (gain == 0) continue;
      const bool better =
          !best || gain > best_gain ||
          (gain == best_gain && impact_before(recorded[i].impact, recorded[i].testcase.id, recorded[*best].impact,
                                              recorded[*best].testcase.id));
      if (better) {
        best = i;
        best_gain = gain;
      }
    }
    used[*best] = true;
    chosen.push_back(*best);
    for (int g : recorded[*best].goals) left.erase(g);
  }
  return chosen;
}

/// Phase 2 on the original program, seeded with phase-1 output.
inline TestSuite reachability_phase(const Program& p, const CampaignConfig& cfg, const std::vector<Seed>& seeds) {
  TestSuite suite;
  suite.total_goals = p.goals.size();
  const InputConstraints constraints = infer_input_constraints(p.ast);
  Tracer tracer(p, cfg.seed_capacity);
  const detail::Clock clock(cfg.budget_secs * (1.0 - cfg.seed_phase_fraction));
  detail::EngineLoop loop(p, p, cfg, tracer, 2, split_budget(cfg.budget_execs - seed_phase_budget(cfg), cfg),
                          cfg.rng_seed + 0x632BE59BD9B4E019ULL, constraints, suite.phase2, suite.witnesses, clock);
  std::uint64_t replayed = 0;
  for (const auto& s : seeds) {
    if (loop.fuzz_left() == 0) break;
    const TestId id = loop.execute(s.testcase, Origin::SeedPhase);
    if (auto tc = tracer.test(id)) {
      tracer.inject(Seed{*tc, tracer.impact(id), std::nullopt});
    } else {
      TestCase copy = s.testcase;
      copy.id = id;
      copy.origin = Origin::SeedPhase;
      tracer.inject(Seed{copy, {}, std::nullopt});
    }
    ++replayed;
  }
  if (seeds.empty() && loop.fuzz_left() > 0) {
    loop.execute(TestCase{}, Origin::Corpus);
    ++replayed;
  }
  detail::log_round(cfg, 2, "seed-replay", replayed, tracer.covered_count(), tracer.goal_count());
  loop.run_rounds();

  std::vector<RecordedTest> recorded;
  for (TestId id : tracer.retained_tests()) {
    recorded.push_back(RecordedTest{*tracer.test(id), tracer.goals_of(id), tracer.impact(id)});
  }
  for (std::size_t i : minimize_suite(recorded)) {
    auto goals = recorded[i].goals;
    std::sort(goals.begin(), goals.end());
    suite.tests.push_back(recorded[i].testcase);
    suite.test_goals.push_back(std::move(goals));
  }
  const auto flags = tracer.covered_flags();
  for (std::size_t g = 0; g < flags.size(); ++g) {
    if (flags[g]) suite.covered_goals.push_back(static_cast<int>(g));
  }
  std::ostringstream report;
  tracer.write_report(report);
  suite.coverage_report = report.str();
  return suite;
}

/// Both phases.
inline TestSuite run_campaign(const Program& p, const CampaignConfig& cfg) {
  cfg.validate();
  SeedPhaseResult seeds = seed_generation_phase(p, cfg);
  TestSuite suite = reachability_phase(p, cfg, seeds.seeds);
  suite.phase1 = seeds.stats;
  suite.seed_witnesses = std::move(seeds.witnesses);
  return suite;
}

}  // namespace smartseed
