#pragma once

#include <string>

#include "smartseed.hpp"

namespace testing_helpers {

inline smartseed::Program program(const std::string& src, int arch = 32) {
  return smartseed::prepare(smartseed::parse(src, smartseed::ParseOptions{arch}));
}

inline std::string corpus_path(const std::string& name) { return std::string(SMARTSEED_CORPUS_DIR) + "/" + name; }

inline smartseed::Program corpus_program(const std::string& name) {
  return program(smartseed::read_text_file(corpus_path(name)));
}

inline smartseed::TestCase tc(std::vector<std::int64_t> inputs) {
  smartseed::TestCase t;
  t.inputs = std::move(inputs);
  return t;
}

}  // namespace testing_helpers
