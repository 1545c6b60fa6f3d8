#pragma once

// Shared coverage and seed store. Every engine reports through one Tracer;
// all operations serialize on a single mutex.

#include <algorithm>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "smartseed/fuzz.hpp"

namespace smartseed {

inline constexpr std::size_t kMaxCoveringTests = 8;
inline constexpr std::size_t kDefaultSeedCapacity = 64;

struct GoalRecord {
  bool covered = false;
  TestId first_test = 0;
  std::vector<TestId> covering_tests;  // first kMaxCoveringTests, in record order
};

class Tracer : public CoverageHandle {
 public:
  explicit Tracer(const Program& p, std::size_t seed_capacity = kDefaultSeedCapacity, TestId first_id = 1)
      : p_(p), goals_(p.goals.size()), capacity_(seed_capacity), next_id_(first_id), claimed_(p.goals.size(), false),
        exhausted_(p.goals.size(), false) {}

  TestId next_id() override {
    std::lock_guard lock(mu_);
    return next_id_++;
  }

  /// Merges a trace; returns exactly the goals whose covered flag flipped.
  std::vector<int> record(const TestCase& tc, const ExecutionTrace& trace) {
    std::lock_guard lock(mu_);
    return record_locked(tc, trace);
  }

  /// record() followed by maybe_promote() for coverage-increasing tests.
  std::vector<int> report(const TestCase& tc, const ExecutionTrace& trace) override {
    std::lock_guard lock(mu_);
    auto delta = record_locked(tc, trace);
    if (!delta.empty()) promote_locked(tc);
    return delta;
  }

  ImpactScore impact(TestId id) const {
    std::lock_guard lock(mu_);
    return impact_locked(id);
  }

  /// Top `n` candidates by impact ordering.
  std::vector<Seed> select_seeds(const std::vector<TestId>& candidates, std::size_t n) const {
    std::lock_guard lock(mu_);
    std::vector<Seed> all;
    for (TestId id : candidates) {
      const auto it = tests_.find(id);
      if (it == tests_.end()) continue;
      all.push_back(Seed{it->second.testcase, impact_locked(id), std::nullopt});
    }
    sort_seeds(all);
    if (all.size() > n) all.resize(n);
    return all;
  }

  /// Admits `tc` iff the store has room or its impact strictly exceeds the
  /// store minimum. True when the store changed.
  bool maybe_promote(const TestCase& tc) {
    std::lock_guard lock(mu_);
    return promote_locked(tc);
  }

  /// Inserts a seed regardless of impact (phase-1 seeds, incomplete seeds).
  void inject(const Seed& s) {
    std::lock_guard lock(mu_);
    for (const auto& x : store_) {
      if (x.testcase.inputs == s.testcase.inputs) return;
    }
    store_.push_back(s);
    rescore_locked();
    if (store_.size() > capacity_) store_.resize(capacity_);
    ++generation_;
  }

  /// Highest-ranked goal neither covered, claimed nor exhausted; claims it.
  std::optional<int> next_goal_for_bmc(const std::vector<int>& ranking) {
    std::lock_guard lock(mu_);
    for (int g : ranking) {
      const auto i = static_cast<std::size_t>(g);
      if (goals_[i].covered || claimed_[i] || exhausted_[i]) continue;
      claimed_[i] = true;
      return g;
    }
    return std::nullopt;
  }

  /// Ends a claim; an exhausted goal is never handed out again.
  void release_goal(int g, bool exhausted) {
    std::lock_guard lock(mu_);
    claimed_[static_cast<std::size_t>(g)] = false;
    if (exhausted) exhausted_[static_cast<std::size_t>(g)] = true;
  }

  /// First test covering the deepest covered goal on a forward path toward
  /// `target`, tagged as an incomplete seed for it.
  std::optional<Seed> promote_incomplete_seed(int target) const {
    std::lock_guard lock(mu_);
    const int target_block = p_.graph.goal_block.at(static_cast<std::size_t>(target));
    const auto on_path = p_.graph.ancestors_of(target_block);
    std::optional<int> best;
    for (std::size_t g = 0; g < goals_.size(); ++g) {
      if (static_cast<int>(g) == target || !goals_[g].covered) continue;
      if (!on_path[static_cast<std::size_t>(p_.graph.goal_block[g])]) continue;
      if (!best || p_.goals.depth(static_cast<int>(g)) > p_.goals.depth(*best)) best = static_cast<int>(g);
    }
    if (!best) return std::nullopt;
    const TestId id = goals_[static_cast<std::size_t>(*best)].first_test;
    return Seed{tests_.at(id).testcase, impact_locked(id), target};
  }

  std::vector<Seed> seed_store() const {
    std::lock_guard lock(mu_);
    return store_;
  }
  std::uint64_t generation() const {
    std::lock_guard lock(mu_);
    return generation_;
  }
  std::size_t capacity() const { return capacity_; }

  std::vector<GoalRecord> coverage() const {
    std::lock_guard lock(mu_);
    return goals_;
  }
  std::vector<bool> covered_flags() const {
    std::lock_guard lock(mu_);
    std::vector<bool> out;
    for (const auto& g : goals_) out.push_back(g.covered);
    return out;
  }
  std::size_t covered_count() const {
    std::lock_guard lock(mu_);
    return covered_;
  }
  bool is_covered(int g) const {
    std::lock_guard lock(mu_);
    return goals_.at(static_cast<std::size_t>(g)).covered;
  }
  std::size_t goal_count() const { return goals_.size(); }

  /// Ids of retained tests, ascending.
  std::vector<TestId> retained_tests() const {
    std::lock_guard lock(mu_);
    std::vector<TestId> out;
    for (const auto& [id, t] : tests_) out.push_back(id);
    return out;
  }
  std::optional<TestCase> test(TestId id) const {
    std::lock_guard lock(mu_);
    const auto it = tests_.find(id);
    if (it == tests_.end()) return std::nullopt;
    return it->second.testcase;
  }
  std::vector<int> goals_of(TestId id) const {
    std::lock_guard lock(mu_);
    return tests_.at(id).goals;
  }

  /// Per-goal status, first covering test and the seed store, one item per line.
  void write_report(std::ostream& os) const {
    std::lock_guard lock(mu_);
    os << "goals " << covered_ << "/" << goals_.size() << "\n";
    for (std::size_t g = 0; g < goals_.size(); ++g) {
      const auto& gl = p_.goals.goals[g];
      os << "goal " << g << " " << goal_kind_name(gl.kind) << " depth=" << gl.depth << " "
         << (goals_[g].covered ? "covered first=" + std::to_string(goals_[g].first_test) : std::string("uncovered"))
         << "\n";
    }
    for (std::size_t i = 0; i < store_.size(); ++i) {
      const auto& s = store_[i];
      os << "seed " << i << " id=" << s.testcase.id << " unique=" << s.impact.unique_labels
         << " depth=" << s.impact.max_depth << " inputs=";
      for (std::size_t j = 0; j < s.testcase.inputs.size(); ++j) os << (j ? "," : "") << s.testcase.inputs[j];
      os << "\n";
    }
  }

  static void sort_seeds(std::vector<Seed>& v) {
    std::sort(v.begin(), v.end(), [](const Seed& a, const Seed& b) {
      return impact_before(a.impact, a.testcase.id, b.impact, b.testcase.id);
    });
  }

 private:
  struct Retained {
    TestCase testcase;
    std::vector<int> goals;
    int max_depth = -1;
  };

  const Program& p_;
  mutable std::mutex mu_;
  std::vector<GoalRecord> goals_;
  std::size_t covered_ = 0;
  std::map<TestId, Retained> tests_;
  std::vector<Seed> store_;
  std::size_t capacity_;
  std::uint64_t generation_ = 0;
  TestId next_id_;
  std::vector<bool> claimed_;
  std::vector<bool> exhausted_;

  std::vector<int> record_locked(const TestCase& tc, const ExecutionTrace& trace) {
    std::vector<int> delta;
    bool retain = false;
    for (int g : trace.covered) {
      auto& rec = goals_.at(static_cast<std::size_t>(g));
      if (!rec.covered) {
        rec.covered = true;
        rec.first_test = tc.id;
        ++covered_;
        delta.push_back(g);
      }
      if (rec.covering_tests.size() < kMaxCoveringTests &&
          std::find(rec.covering_tests.begin(), rec.covering_tests.end(), tc.id) == rec.covering_tests.end()) {
        rec.covering_tests.push_back(tc.id);
        retain = true;
      }
    }
    if (retain) {
      auto& r = tests_[tc.id];
      r.testcase = tc;
      for (int g : trace.covered) {
        if (std::find(r.goals.begin(), r.goals.end(), g) == r.goals.end()) r.goals.push_back(g);
      }
      r.max_depth = -1;
      for (int g : r.goals) r.max_depth = std::max(r.max_depth, p_.goals.depth(g));
    }
    if (!store_.empty()) rescore_locked();
    return delta;
  }

  ImpactScore impact_locked(TestId id) const {
    const auto it = tests_.find(id);
    if (it == tests_.end()) throw std::out_of_range("unknown test id " + std::to_string(id));
    ImpactScore s;
    s.max_depth = it->second.max_depth;
    for (int g : it->second.goals) {
      const auto& ct = goals_[static_cast<std::size_t>(g)].covering_tests;
      if (ct.size() == 1 && ct[0] == id) ++s.unique_labels;
    }
    return s;
  }

  void rescore_locked() {
    for (auto& s : store_) {
      if (tests_.count(s.testcase.id) != 0) s.impact = impact_locked(s.testcase.id);
    }
    sort_seeds(store_);
  }

  bool promote_locked(const TestCase& tc) {
    if (tests_.count(tc.id) == 0) return false;
    for (const auto& x : store_) {
      if (x.testcase.inputs == tc.inputs) return false;
    }
    rescore_locked();
    Seed s{tc, impact_locked(tc.id), std::nullopt};
    if (store_.size() >= capacity_) {
      if (capacity_ == 0) return false;
      const ImpactScore& min = store_.back().impact;
      const bool exceeds = s.impact.unique_labels > min.unique_labels ||
                           (s.impact.unique_labels == min.unique_labels && s.impact.max_depth > min.max_depth);
      if (!exceeds) return false;
      store_.pop_back();
    }
    store_.push_back(std::move(s));
    sort_seeds(store_);
    ++generation_;
    return true;
  }
};

}  // namespace smartseed
