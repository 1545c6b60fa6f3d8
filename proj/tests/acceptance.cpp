// Acceptance run: one PASS/FAIL line per criterion, exit status 1 on any FAIL.

#include <chrono>
#include <filesystem>
#include <algorithm>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include <unistd.h>

#include "smartseed.hpp"
#include "tracer_fixtures.hpp"

using namespace smartseed;
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kBudget = 10000;

struct Entry {
  std::string name;
  ManifestEntry manifest;
  Ast parsed;
  Program program;
};

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;
  void fail(const std::string& why) {
    pass = false;
    notes.push_back(why);
  }
};

// Every campaign the acceptance run performs, kept for the witness and replay checks.
struct CampaignRecord {
  const Entry* entry;
  std::string label;
  CampaignConfig cfg;
  TestSuite suite;
};

std::vector<CampaignRecord> g_campaigns;

double since(std::chrono::steady_clock::time_point t) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

const TestSuite& campaign(const Entry& e, const std::string& label, const CampaignConfig& cfg) {
  g_campaigns.push_back(CampaignRecord{&e, label, cfg, run_campaign(e.program, cfg)});
  return g_campaigns.back().suite;
}

CampaignConfig config(bool fuzzer_only) {
  CampaignConfig c;
  c.budget_execs = kBudget;
  c.rng_seed = 1;
  c.fuzzer_only = fuzzer_only;
  return c;
}

std::string join(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return "{" + s + "}";
}

// Union of goals covered by every input tuple in [lo,hi]^n.
std::vector<int> brute_force(const Program& p, std::size_t n, std::int64_t lo, std::int64_t hi) {
  std::set<int> covered;
  TestCase tc;
  tc.inputs.assign(n, lo);
  for (;;) {
    for (int g : run(p, tc).covered) covered.insert(g);
    std::size_t i = 0;
    while (i < n && tc.inputs[i] == hi) tc.inputs[i++] = lo;
    if (i == n) break;
    ++tc.inputs[i];
  }
  return {covered.begin(), covered.end()};
}

bool covers(const std::vector<int>& goals, int g) { return std::binary_search(goals.begin(), goals.end(), g); }

void report(int n, const std::string& what, const Outcome& o, double secs) {
  std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << n << ": " << what << " (" << std::fixed
            << std::setprecision(1) << secs << "s)";
  for (const auto& note : o.notes) std::cout << "\n    " << note;
  std::cout << std::endl;
}


Outcome oracle_equivalence(const std::vector<Entry>& corpus) {
  Outcome o;
  int checked = 0;
  for (const auto& e : corpus) {
    const std::size_t sites = e.parsed.input_sites.size();
    if (!e.manifest.oracle || sites > 3) continue;
    ++checked;
    const auto oracle = brute_force(e.program, sites, -8, 8);
    CampaignConfig c = config(false);
    c.input_domain = ValueRange{-8, 8};
    const auto& got = campaign(e, "domain[-8,8]", c).covered_goals;
    if (got != oracle) o.fail(e.name + ": campaign " + join(got) + " oracle " + join(oracle));
  }
  if (checked == 0) o.fail("no oracle programs");
  o.notes.insert(o.notes.begin(), std::to_string(checked) + " programs compared");
  return o;
}

Outcome guard_penetration(const std::vector<Entry>& corpus) {
  Outcome o;
  const auto start = std::chrono::steady_clock::now();
  int programs = 0;
  std::size_t guarded = 0;
  std::size_t fuzz_hits = 0;
  std::size_t hybrid_hits = 0;
  for (const auto& e : corpus) {
    if (e.manifest.guarded.empty()) continue;
    ++programs;
    const auto& fuzz = campaign(e, "fuzzer-only", config(true)).covered_goals;
    const auto& hybrid = campaign(e, "hybrid", config(false)).covered_goals;
    for (int g : e.manifest.guarded) {
      ++guarded;
      if (covers(fuzz, g)) {
        ++fuzz_hits;
        o.fail(e.name + ": fuzzer-only covered guarded goal " + std::to_string(g));
      }
      if (covers(hybrid, g)) {
        ++hybrid_hits;
      } else {
        o.fail(e.name + ": hybrid missed guarded goal " + std::to_string(g));
      }
    }
  }
  if (programs < 5) o.fail("only " + std::to_string(programs) + " guard programs");
  const double secs = since(start);
  if (secs >= 30.0) o.fail("took " + std::to_string(secs) + "s, limit 30s");
  o.notes.insert(o.notes.begin(), std::to_string(programs) + " programs, " + std::to_string(guarded) +
                                      " guarded goals: fuzzer-only " + std::to_string(fuzz_hits) + ", hybrid " +
                                      std::to_string(hybrid_hits));
  return o;
}

Outcome hybrid_dominance(const std::vector<Entry>& corpus) {
  Outcome o;
  for (const auto& e : corpus) {
    const TestSuite* fuzz = nullptr;
    const TestSuite* hybrid = nullptr;
    for (const auto& r : g_campaigns) {
      if (r.entry != &e) continue;
      if (r.label == "fuzzer-only") fuzz = &r.suite;
      if (r.label == "hybrid") hybrid = &r.suite;
    }
    if (fuzz == nullptr) fuzz = &campaign(e, "fuzzer-only", config(true));
    if (hybrid == nullptr) hybrid = &campaign(e, "hybrid", config(false));
    const auto f = fuzz->covered_goals.size();
    const auto h = hybrid->covered_goals.size();
    std::ostringstream line;
    line << e.name << " hybrid " << h << "/" << e.program.goals.size() << " fuzzer-only " << f;
    if (h < f) {
      o.fail(line.str());
    } else {
      o.notes.push_back(line.str());
    }
  }
  return o;
}

Outcome fixtures() {
  Outcome o;
  const auto expect = [&](bool ok, const std::string& what) {
    if (!ok) o.fail(what);
  };
  const Program p = prepare(parse(kTracerFixtureProgram));
  const auto test = [](std::int64_t x, TestId id) {
    TestCase t;
    t.inputs = {x};
    t.id = id;
    return t;
  };
  {
    Tracer t(p);
    const std::vector<std::vector<int>> deltas{{0, 1, 2}, {}, {3}, {4}};
    const std::vector<std::int64_t> xs{7, 9, 3, 0};
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const TestCase c = test(xs[i], i + 1);
      expect(t.record(c, run(p, c)) == deltas[i], "impact scenario delta " + std::to_string(i + 1));
    }
    const std::vector<ImpactScore> table{{0, 2}, {0, 2}, {1, 2}, {1, 1}};
    for (std::size_t i = 0; i < table.size(); ++i) {
      expect(t.impact(i + 1) == table[i], "impact of test " + std::to_string(i + 1));
    }
    std::vector<TestId> picked;
    for (const auto& s : t.select_seeds({1, 2, 3, 4}, 3)) picked.push_back(s.testcase.id);
    expect(picked == std::vector<TestId>{3, 4, 1}, "select_seeds order");
  }
  {
    Tracer t(p, 2);
    const auto ids = [&] {
      std::vector<TestId> v;
      for (const auto& s : t.seed_store()) v.push_back(s.testcase.id);
      return v;
    };
    const auto event = [&](std::int64_t x, TestId id) {
      const TestCase c = test(x, id);
      t.record(c, run(p, c));
      return t.maybe_promote(c);
    };
    expect(event(7, 1) && ids() == std::vector<TestId>{1}, "maybe_promote e1");
    expect(event(9, 2) && ids() == std::vector<TestId>{1, 2}, "maybe_promote e2");
    expect(event(3, 3) && ids() == std::vector<TestId>{3, 1}, "maybe_promote e3");
    expect(!t.maybe_promote(test(9, 2)) && t.generation() == 3, "maybe_promote e4");
    expect(event(0, 4) && ids() == std::vector<TestId>{3, 4}, "maybe_promote e5");
    expect(event(-3, 5) && ids() == std::vector<TestId>{3, 5} && t.generation() == 5, "maybe_promote e6");
  }
  {
    const Program d = prepare(parse(read_text_file(std::string(SMARTSEED_CORPUS_DIR) + "/diamond.mc")));
    Tracer t(d);
    expect(!t.promote_incomplete_seed(3), "incomplete seed with nothing covered");
    TestCase a;
    a.inputs = {0, 1};
    a.id = 1;
    TestCase b;
    b.inputs = {5, 0};
    b.id = 2;
    t.record(a, run(d, a));
    t.record(b, run(d, b));
    const auto s = t.promote_incomplete_seed(3);
    expect(s && s->testcase.id == 1 && s->incomplete_for == 3, "promote_incomplete_seed diamond");
  }
  return o;
}

// Files of a directory tree, relative path -> bytes.
std::map<std::string, std::string> snapshot(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = read_text_file(e.path());
  }
  return out;
}

Outcome determinism(const fs::path& scratch, std::vector<std::pair<fs::path, CorpusReport>>& runs) {
  Outcome o;
  CorpusOptions opts;
  opts.campaign = config(false);
  opts.property_text = read_text_file(std::string(SMARTSEED_PROPS_DIR) + "/coverage-branches.prp");
  opts.reproducible = true;
  std::vector<std::string> texts;
  for (const char* run_name : {"run-a", "run-b"}) {
    opts.out = scratch / run_name;
    CorpusReport r = run_corpus(SMARTSEED_CORPUS_DIR, opts);
    std::ostringstream text;
    r.write(text, true);
    texts.push_back(text.str());
    if (!r.ok()) o.fail(std::string(run_name) + " has manifest mismatches");
    runs.emplace_back(*opts.out, std::move(r));
  }
  if (texts[0] != texts[1]) o.fail("reports differ");
  const auto a = snapshot(runs[0].first);
  const auto b = snapshot(runs[1].first);
  if (a != b) o.fail("suite directories differ");
  o.notes.push_back(std::to_string(a.size()) + " files compared, report " + std::to_string(texts[0].size()) + " bytes");
  return o;
}

Outcome label_counts(const std::vector<Entry>& corpus, const std::map<std::string, ManifestEntry>& manifest) {
  Outcome o;
  for (const auto& e : corpus) {
    const std::size_t n = e.program.goals.size();
    if (n != expected_label_count(e.parsed)) o.fail(e.name + ": closed-form count differs");
    if (n != e.manifest.labels) o.fail(e.name + ": manifest says " + std::to_string(e.manifest.labels));
  }
  if (manifest.size() != corpus.size()) o.fail("manifest and corpus sizes differ");
  o.notes.push_back(std::to_string(corpus.size()) + " programs");
  return o;
}

Outcome witness_soundness() {
  Outcome o;
  std::size_t phase1 = 0;
  std::size_t phase2 = 0;
  for (const auto& r : g_campaigns) {
    const Program& p = r.entry->program;
    const auto check = [&](const Program& on, const Witness& w, const char* phase) {
      const auto covered = run(on, w.testcase).covered;
      if (std::find(covered.begin(), covered.end(), w.goal) == covered.end()) {
        o.fail(r.entry->name + " " + r.label + " " + phase + " witness for goal " + std::to_string(w.goal));
      }
    };
    for (const auto& w : r.suite.witnesses) {
      check(p, w, "phase-2");
      ++phase2;
    }
    const Program variant = seed_phase_bmc_program(p, infer_input_constraints(p.ast), r.cfg.lighten);
    for (const auto& w : r.suite.seed_witnesses) {
      check(variant, w, "phase-1");
      ++phase1;
    }
    const auto failures = r.suite.phase1.witness_failures + r.suite.phase2.witness_failures;
    if (failures != 0) o.fail(r.entry->name + " " + r.label + ": " + std::to_string(failures) + " discarded witnesses");
  }
  o.notes.push_back(std::to_string(phase1 + phase2) + " witnesses replayed (" + std::to_string(phase1) +
                    " seed phase, " + std::to_string(phase2) + " reachability phase) over " +
                    std::to_string(g_campaigns.size()) + " campaigns");
  if (phase1 + phase2 == 0) o.fail("no witnesses produced");
  return o;
}

Outcome suite_validity(const std::vector<Entry>& corpus,
                       const std::vector<std::pair<fs::path, CorpusReport>>& corpus_runs) {
  Outcome o;
  std::size_t suites = 0;
  for (const auto& r : g_campaigns) {
    ++suites;
    if (replay_suite(r.entry->program, r.suite.tests).covered != r.suite.covered_goals) {
      o.fail(r.entry->name + " " + r.label + ": replay differs");
    }
  }
  for (const auto& [dir, report] : corpus_runs) {
    for (const auto& entry : report.entries) {
      const auto it = std::find_if(corpus.begin(), corpus.end(), [&](const Entry& e) { return e.name == entry.name; });
      if (it == corpus.end() || !entry.suite) continue;
      ++suites;
      const SuiteOnDisk disk = read_suite(dir / fs::path(entry.name).stem());
      const auto replay = replay_suite(it->program, disk.tests).covered;
      if (replay != entry.suite->covered_goals || replay.size() != entry.covered) {
        o.fail(entry.name + " (" + dir.filename().string() + "): on-disk suite replays to " + join(replay));
      }
    }
  }
  o.notes.push_back(std::to_string(suites) + " suites replayed");
  return o;
}

}  // namespace

int main() {
  const fs::path corpus_dir = SMARTSEED_CORPUS_DIR;
  const auto manifest = read_manifest(corpus_dir / "manifest.json");
  std::vector<Entry> corpus;
  for (const auto& f : corpus_files(corpus_dir)) {
    Entry e;
    e.name = f.filename().string();
    const auto it = manifest.find(e.name);
    if (it != manifest.end()) e.manifest = it->second;
    e.parsed = parse(read_text_file(f));
    e.program = prepare(e.parsed);
    corpus.push_back(std::move(e));
  }
  g_campaigns.reserve(256);

  const fs::path scratch = fs::temp_directory_path() / ("smartseed-acceptance-" + std::to_string(::getpid()));
  fs::remove_all(scratch);

  bool all = true;
  const auto step = [&](int n, const std::string& what, const std::function<Outcome()>& fn) {
    const auto start = std::chrono::steady_clock::now();
    const Outcome o = fn();
    report(n, what, o, since(start));
    all = all && o.pass;
  };

  std::vector<std::pair<fs::path, CorpusReport>> corpus_runs;
  step(1, "oracle coverage equivalence on [-8,8]", [&] { return oracle_equivalence(corpus); });
  step(3, "guard penetration at 10000 executions under 30s", [&] { return guard_penetration(corpus); });
  step(4, "hybrid dominance at 10000 executions", [&] { return hybrid_dominance(corpus); });
  step(5, "impact and seed-store fixtures", [] { return fixtures(); });
  step(6, "byte-identical determinism", [&] { return determinism(scratch, corpus_runs); });
  step(7, "label counting rule and manifest counts", [&] { return label_counts(corpus, manifest); });
  step(2, "witness soundness", [] { return witness_soundness(); });
  step(8, "suite replay validity", [&] { return suite_validity(corpus, corpus_runs); });

  fs::remove_all(scratch);
  std::cout << (all ? "ALL PASS" : "SOME FAIL") << std::endl;
  return all ? 0 : 1;
}
