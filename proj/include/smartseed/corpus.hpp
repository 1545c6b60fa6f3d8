#pragma once

// Benchmark runner: one campaign per `.mc` file of a directory, checked
// against `manifest.json`:
//
//   {"programs": [{"file": "x.mc", "labels": 5, "expected_uncovered": [4],
//                  "oracle": true, "guarded": [2]}]}
//
// `oracle` marks programs eligible for exhaustive small-domain comparison,
// `guarded` lists goals behind guards random mutation is not expected to pass.

#include <algorithm>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <iomanip>
#include <map>
#include <nlohmann/json.hpp>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "smartseed/parser.hpp"
#include "smartseed/suite_io.hpp"

namespace smartseed {

struct ManifestEntry {
  std::string file;
  std::size_t labels = 0;
  std::vector<int> expected_uncovered;
  bool oracle = false;
  std::vector<int> guarded;
};

inline std::map<std::string, ManifestEntry> read_manifest(const std::filesystem::path& path) {
  const auto j = nlohmann::json::parse(read_text_file(path));
  std::map<std::string, ManifestEntry> out;
  for (const auto& p : j.at("programs")) {
    ManifestEntry e;
    e.file = p.at("file").get<std::string>();
    e.labels = p.at("labels").get<std::size_t>();
    e.expected_uncovered = p.value("expected_uncovered", std::vector<int>{});
    e.oracle = p.value("oracle", false);
    e.guarded = p.value("guarded", std::vector<int>{});
    out[e.file] = e;
  }
  return out;
}

/// Corpus programs in name order.
inline std::vector<std::filesystem::path> corpus_files(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> out;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".mc") out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

struct CorpusOptions {
  CampaignConfig campaign;
  int arch_bits = 32;
  std::optional<std::filesystem::path> out;  // suites go to <out>/<stem>/
  std::string property_text;
  bool reproducible = false;
};

struct CorpusEntryResult {
  std::string name;
  std::size_t goals = 0;
  std::size_t covered = 0;
  std::uint64_t execs = 0;
  double wall_secs = 0;
  std::vector<std::string> mismatches;
  std::optional<TestSuite> suite;
};

struct CorpusReport {
  std::vector<CorpusEntryResult> entries;

  [[nodiscard]] bool ok() const {
    return std::all_of(entries.begin(), entries.end(), [](const auto& e) { return e.mismatches.empty(); });
  }

  /// One line per program: name, goals, covered, execs, wall time, status.
  void write(std::ostream& os, bool reproducible) const {
    for (const auto& e : entries) {
      os << e.name << " goals=" << e.goals << " covered=" << e.covered << " execs=" << e.execs << " wall=";
      if (reproducible) {
        os << "-";
      } else {
        os << std::fixed << std::setprecision(3) << e.wall_secs << std::defaultfloat;
      }
      os << " status=" << (e.mismatches.empty() ? "ok" : "mismatch");
      for (const auto& m : e.mismatches) os << " [" << m << "]";
      os << "\n";
    }
  }
};

inline std::uint64_t total_execs(const TestSuite& s) {
  std::uint64_t n = 0;
  for (const PhaseStats* p : {&s.phase1, &s.phase2}) n += p->fuzzer_execs + p->selective_execs + p->bmc_cost;
  return n;
}

inline CorpusEntryResult run_corpus_program(const std::filesystem::path& file, const ManifestEntry* manifest,
                                            const CorpusOptions& opts) {
  CorpusEntryResult r;
  r.name = file.filename().string();
  const auto start = std::chrono::steady_clock::now();
  Ast parsed;
  try {
    parsed = parse(read_text_file(file), ParseOptions{opts.arch_bits});
  } catch (const ParseError& e) {
    r.mismatches.push_back(std::string("parse error ") + e.what());
    return r;
  }
  const Program p = prepare(parsed);
  r.goals = p.goals.size();
  if (manifest == nullptr) {
    r.mismatches.push_back("not in manifest");
  } else {
    if (manifest->labels != p.goals.size()) {
      r.mismatches.push_back("labels " + std::to_string(p.goals.size()) + " != manifest " +
                             std::to_string(manifest->labels));
    }
  }
  if (expected_label_count(parsed) != p.goals.size()) r.mismatches.push_back("label count rule violated");
  TestSuite suite = run_campaign(p, opts.campaign);
  r.covered = suite.covered_goals.size();
  r.execs = total_execs(suite);
  if (manifest != nullptr) {
    for (int g : manifest->expected_uncovered) {
      if (std::binary_search(suite.covered_goals.begin(), suite.covered_goals.end(), g)) {
        r.mismatches.push_back("expected-uncovered goal " + std::to_string(g) + " covered");
      }
    }
  }
  if (opts.out) {
    SuiteMetadata meta;
    meta.program_file = r.name;
    meta.property = opts.property_text;
    meta.arch_bits = opts.arch_bits;
    meta.creation_time = utc_timestamp(opts.reproducible ? 0 : std::time(nullptr));
    write_suite(suite.tests, meta, *opts.out / file.stem());
  }
  r.suite = std::move(suite);
  r.wall_secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

/// Runs every program of `dir`; manifest entries without a file are mismatches too.
inline CorpusReport run_corpus(const std::filesystem::path& dir, const CorpusOptions& opts) {
  CorpusReport report;
  const auto files = corpus_files(dir);
  std::map<std::string, ManifestEntry> manifest;
  const auto manifest_path = dir / "manifest.json";
  if (std::filesystem::exists(manifest_path)) manifest = read_manifest(manifest_path);
  for (const auto& f : files) {
    const auto it = manifest.find(f.filename().string());
    report.entries.push_back(run_corpus_program(f, it == manifest.end() ? nullptr : &it->second, opts));
  }
  for (const auto& [name, entry] : manifest) {
    const bool present = std::any_of(files.begin(), files.end(), [&](const auto& f) { return f.filename() == name; });
    if (!present) {
      CorpusEntryResult r;
      r.name = name;
      r.mismatches.push_back("listed in manifest but missing");
      report.entries.push_back(std::move(r));
    }
  }
  return report;
}

}  // namespace smartseed
