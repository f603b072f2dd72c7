// Helpers for loading JSON fixtures shipped with the test suite.
#ifndef TIPS_TESTUTIL_FIXTURES_HPP
#define TIPS_TESTUTIL_FIXTURES_HPP 1

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "tips/io.hpp"

namespace tips::testutil {

inline std::string fixture_path(const std::string& name) {
  return std::string(TIPS_FIXTURES_DIR) + "/" + name;
}

inline std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);
  std::ostringstream out;
  out << f.rdbuf();
  return out.str();
}

inline std::string fixture_text(const std::string& name) { return slurp(fixture_path(name)); }

inline TaskSystem load_fixture(const std::string& name) {
  return load_task_system(fixture_text(name));
}

}  // namespace tips::testutil

#endif
