#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>

#include "smartseed.hpp"

namespace fs = std::filesystem;
using namespace smartseed;

namespace {

constexpr int kExitBadArgs = 2;
constexpr int kExitParse = 3;
constexpr int kExitOutput = 4;

std::optional<ValueRange> parse_domain(const std::string& text) {
  const auto colon = text.find(':', 1);
  if (colon == std::string::npos) throw std::invalid_argument("expected LO:HI");
  const long long lo = std::stoll(text.substr(0, colon));
  const long long hi = std::stoll(text.substr(colon + 1));
  if (lo > hi) throw std::invalid_argument("empty input domain");
  return ValueRange{lo, hi};
}

void print_trace(std::ostream& os, const Program& p, const TestSuite& suite) {
  for (std::size_t i = 0; i < suite.tests.size(); ++i) {
    const auto& tc = suite.tests[i];
    const ExecutionTrace t = run(p, tc);
    os << "test " << (i + 1) << " origin=" << origin_name(tc.origin) << " inputs=";
    for (std::size_t j = 0; j < tc.inputs.size(); ++j) os << (j ? "," : "") << tc.inputs[j];
    os << " end=" << end_reason_name(t.end) << " covered=";
    for (std::size_t j = 0; j < t.covered.size(); ++j) os << (j ? "," : "") << t.covered[j];
    os << " depth=" << t.max_depth << (t.input_exhausted ? " input-exhausted" : "") << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hybrid test generator for MiniC programs"};
  app.set_help_flag("-h,--help", "Print this help message and exit");

  int arch = 32;
  std::string property_file;
  std::string strategy = "incr";
  std::string path;
  std::uint64_t budget_execs = 20000;
  double budget_secs = 0;
  std::uint64_t rng_seed = 1;
  std::string out_dir = "./test-suite";
  std::string goal_strategy = "deep-first";
  std::string domain_text;
  bool reproducible = false;
  bool fuzzer_only = false;
  std::string coverage_report;
  bool want_graph = false;
  bool dump_labeled = false;
  bool trace = false;
  bool dump_pc = false;
  std::uint32_t k = 1;
  std::uint32_t k_max = 16;

  app.add_option("-a", arch, "Architecture: width of long")->check(CLI::IsMember({32, 64}));
  app.add_option("-p", property_file, "Property file")->required();
  app.add_option("-s", strategy, "BMC strategy")->check(CLI::IsMember({"kinduction", "falsi", "incr", "fixed"}));
  app.add_option("path", path, "Program file or corpus directory")->required();
  app.add_option("--budget-execs", budget_execs, "Execution budget")->check(CLI::PositiveNumber);
  app.add_option("--budget-secs", budget_secs, "Wall-clock cap in seconds, 0 for none")->check(CLI::NonNegativeNumber);
  app.add_option("--rng-seed", rng_seed, "Random seed");
  app.add_option("--out", out_dir, "Output directory");
  app.add_option("--strategy-goals", goal_strategy, "Goal ranking")
      ->check(CLI::IsMember({"deep-first", "kind-weighted"}));
  app.add_option("--input-domain", domain_text, "Restrict every input value to LO:HI");
  app.add_option("--bmc-k", k, "Unwind bound for the fixed strategy")->check(CLI::PositiveNumber);
  app.add_option("--bmc-k-max", k_max, "Largest unwind bound for incr/falsi")->check(CLI::PositiveNumber);
  app.add_flag("--reproducible", reproducible, "Pin creation time and omit wall time");
  app.add_flag("--fuzzer-only", fuzzer_only, "Disable the BMC engine");
  app.add_option("--coverage-report", coverage_report, "Write per-goal coverage and seed store");
  app.add_flag("--dump-graph", want_graph, "Print the reachability graph and exit");
  app.add_flag("--dump-labeled", dump_labeled, "Print the labeled program and exit");
  app.add_flag("--trace", trace, "Print the execution of every emitted test");
  app.add_flag("--dump-pc", dump_pc, "Print path conditions handed to the solver");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitBadArgs;
  }

  PropertySpec prop;
  try {
    prop = read_property_file(property_file);
  } catch (const std::exception& e) {
    std::cerr << property_file << ": " << e.what() << "\n" << app.help();
    return kExitBadArgs;
  }

  CampaignConfig cfg;
  cfg.budget_execs = budget_execs;
  cfg.budget_secs = budget_secs;
  cfg.rng_seed = rng_seed;
  cfg.fuzzer_only = fuzzer_only;
  cfg.property = prop.kind;
  cfg.ranking = parse_rank_strategy(goal_strategy);
  cfg.bmc.strategy = parse_bmc_strategy(strategy);
  cfg.bmc.k = k;
  cfg.bmc.k_max = std::max(k, k_max);
  cfg.log = &std::cerr;
  if (cfg.bmc.strategy == BmcStrategy::KInduction) {
    std::cerr << "warning: strategy kinduction is run as incr\n";
    cfg.bmc.strategy = BmcStrategy::Incr;
  }
  if (dump_pc) cfg.bmc.dump_pc = &std::cerr;
  try {
    if (!domain_text.empty()) cfg.input_domain = parse_domain(domain_text);
    cfg.validate();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBadArgs;
  }

  if (fs::is_directory(path)) {
    CorpusOptions opts;
    opts.campaign = cfg;
    opts.campaign.log = nullptr;
    opts.arch_bits = arch;
    opts.out = out_dir;
    opts.property_text = prop.text;
    opts.reproducible = reproducible;
    CorpusReport report;
    try {
      report = run_corpus(path, opts);
    } catch (const SuiteIoError& e) {
      std::cerr << "error: " << e.what() << "\n";
      return kExitOutput;
    } catch (const std::exception& e) {
      std::cerr << path << ": " << e.what() << "\n";
      return kExitBadArgs;
    }
    report.write(std::cout, reproducible);
    return report.ok() ? 0 : 1;
  }

  std::string source;
  try {
    source = read_text_file(path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBadArgs;
  }
  Ast parsed;
  try {
    parsed = parse(source, ParseOptions{arch});
  } catch (const ParseError& e) {
    std::cerr << path << ":" << e.what() << "\n";
    return kExitParse;
  }
  const Program p = prepare(parsed);

  if (dump_labeled) {
    print_program(std::cout, p.ast);
    return 0;
  }
  if (want_graph) {
    dump_graph(std::cout, p.graph);
    return 0;
  }

  const auto start = std::chrono::steady_clock::now();
  const TestSuite suite = run_campaign(p, cfg);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  SuiteMetadata meta;
  meta.program_file = fs::path(path).filename().string();
  meta.property = prop.text;
  meta.arch_bits = arch;
  meta.creation_time = utc_timestamp(reproducible ? 0 : std::time(nullptr));
  try {
    write_suite(suite.tests, meta, out_dir);
    if (!coverage_report.empty()) {
      std::ofstream rep(coverage_report, std::ios::binary | std::ios::trunc);
      if (!rep) throw SuiteIoError("cannot write " + coverage_report);
      rep << suite.coverage_report;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitOutput;
  }
  if (trace) print_trace(std::cout, p, suite);
  std::cout << "covered=" << suite.covered_goals.size() << "/" << suite.total_goals << " tests=" << suite.tests.size()
            << " execs=" << total_execs(suite) << " witnesses=" << suite.witnesses.size() + suite.seed_witnesses.size()
            << " wall=";
  if (reproducible) {
    std::cout << "-";
  } else {
    std::cout << std::fixed << std::setprecision(3) << wall;
  }
  std::cout << "\n";
  return 0;
}
