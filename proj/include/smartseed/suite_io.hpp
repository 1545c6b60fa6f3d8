#pragma once

// On-disk test suites and property files.
//
//   <dir>/metadata.xml      producer, program file, property, creation time, architecture
//   <dir>/testcase-<n>.xml  one <input> element per value, decimal, n dense from 1

#include <ctime>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "smartseed/orchestrator.hpp"

namespace smartseed {

inline constexpr const char* kProducer = "smartseed 1.0";

class SuiteIoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PropertySpec {
  PropertyKind kind = PropertyKind::CoverageBranches;
  std::string text;
};

/// Exactly one of the two coverage properties must appear.
inline PropertySpec parse_property(const std::string& text) {
  const bool branches = text.find("@DECISIONEDGE") != std::string::npos;
  const bool error = text.find("@CALL(reach_error)") != std::string::npos;
  if (branches == error) throw std::invalid_argument("property must name exactly one of @DECISIONEDGE, @CALL(reach_error)");
  return PropertySpec{branches ? PropertyKind::CoverageBranches : PropertyKind::CoverageError, text};
}

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SuiteIoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline PropertySpec read_property_file(const std::filesystem::path& path) {
  return parse_property(read_text_file(path));
}

struct SuiteMetadata {
  std::string producer = kProducer;
  std::string program_file;
  std::string property;
  std::string creation_time;  // ISO-8601 UTC
  int arch_bits = 32;
};

inline std::string utc_timestamp(std::time_t t) {
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

inline std::string xml_unescape(const std::string& s) {
  std::string out = s;
  for (const auto& [from, to] : {std::pair<std::string, std::string>{"&lt;", "<"}, {"&gt;", ">"}, {"&quot;", "\""},
                                 {"&amp;", "&"}}) {
    for (std::size_t pos = 0; (pos = out.find(from, pos)) != std::string::npos; pos += to.size()) {
      out.replace(pos, from.size(), to);
    }
  }
  return out;
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::string metadata_xml(const SuiteMetadata& m) {
  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"no\"?>\n"
     << "<test-metadata>\n"
     << "  <sourcecodelang>MiniC</sourcecodelang>\n"
     << "  <producer>" << xml_escape(m.producer) << "</producer>\n"
     << "  <specification>" << xml_escape(trim(m.property)) << "</specification>\n"
     << "  <programfile>" << xml_escape(m.program_file) << "</programfile>\n"
     << "  <entryfunction>main</entryfunction>\n"
     << "  <architecture>" << m.arch_bits << "bit</architecture>\n"
     << "  <creationtime>" << xml_escape(m.creation_time) << "</creationtime>\n"
     << "</test-metadata>\n";
  return os.str();
}

inline std::string testcase_xml(const TestCase& tc) {
  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"no\"?>\n<testcase>\n";
  for (std::int64_t v : tc.inputs) os << "  <input>" << v << "</input>\n";
  os << "</testcase>\n";
  return os.str();
}

namespace detail {

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw SuiteIoError("cannot write " + path.string());
  out << text;
  if (!out) throw SuiteIoError("cannot write " + path.string());
}

inline bool is_testcase_file(const std::filesystem::path& p) {
  static const std::regex re(R"(testcase-[0-9]+\.xml)");
  return std::regex_match(p.filename().string(), re);
}

}  // namespace detail

/// Writes metadata and one file per test; stale testcase files are removed
/// so the directory holds exactly this suite.
inline void write_suite(const std::vector<TestCase>& tests, const SuiteMetadata& meta,
                        const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) throw SuiteIoError("cannot create output directory " + dir.string());
  for (const auto& entry : std::filesystem::directory_iterator(dir, ec)) {
    if (entry.is_regular_file() && detail::is_testcase_file(entry.path())) std::filesystem::remove(entry.path(), ec);
  }
  detail::write_file(dir / "metadata.xml", metadata_xml(meta));
  for (std::size_t i = 0; i < tests.size(); ++i) {
    detail::write_file(dir / ("testcase-" + std::to_string(i + 1) + ".xml"), testcase_xml(tests[i]));
  }
}

inline TestCase parse_testcase_xml(const std::string& text) {
  if (text.find("<testcase>") == std::string::npos || text.find("</testcase>") == std::string::npos) {
    throw SuiteIoError("not a testcase document");
  }
  static const std::regex input_re(R"(<input>\s*(-?[0-9]+)\s*</input>)");
  TestCase tc;
  tc.origin = Origin::Corpus;
  for (auto it = std::sregex_iterator(text.begin(), text.end(), input_re); it != std::sregex_iterator(); ++it) {
    tc.inputs.push_back(std::stoll((*it)[1].str()));
  }
  return tc;
}

inline std::string xml_field(const std::string& text, const std::string& tag) {
  const std::string open = "<" + tag + ">";
  const std::string close = "</" + tag + ">";
  const auto b = text.find(open);
  const auto e = text.find(close);
  if (b == std::string::npos || e == std::string::npos || e < b) return "";
  return xml_unescape(text.substr(b + open.size(), e - b - open.size()));
}

inline SuiteMetadata parse_metadata_xml(const std::string& text) {
  if (text.find("<test-metadata>") == std::string::npos) throw SuiteIoError("not a metadata document");
  SuiteMetadata m;
  m.producer = xml_field(text, "producer");
  m.program_file = xml_field(text, "programfile");
  m.property = xml_field(text, "specification");
  m.creation_time = xml_field(text, "creationtime");
  m.arch_bits = std::stoi(xml_field(text, "architecture"));
  return m;
}

struct SuiteOnDisk {
  SuiteMetadata metadata;
  std::vector<TestCase> tests;
};

/// Reads testcase-1.xml, testcase-2.xml, ... until the first gap.
inline SuiteOnDisk read_suite(const std::filesystem::path& dir) {
  SuiteOnDisk out;
  out.metadata = parse_metadata_xml(read_text_file(dir / "metadata.xml"));
  for (std::size_t n = 1;; ++n) {
    const auto path = dir / ("testcase-" + std::to_string(n) + ".xml");
    if (!std::filesystem::exists(path)) break;
    TestCase tc = parse_testcase_xml(read_text_file(path));
    tc.id = n;
    out.tests.push_back(std::move(tc));
  }
  return out;
}

}  // namespace smartseed
