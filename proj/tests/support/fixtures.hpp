#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "gorisk/parser.hpp"

namespace gorisk::testkit {

inline std::string fixture_path(const std::string& name) {
  return std::string(GORISK_FIXTURES) + "/" + name + "/" + name + ".gm";
}

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline GoalModel load_fixture(const std::string& name) {
  auto parsed = parse(read_text(fixture_path(name)));
  if (!parsed.ok()) {
    std::string msg = name + " fixture does not parse:";
    for (const auto& d : parsed.diagnostics()) msg += "\n  " + format_diagnostic(d);
    throw std::runtime_error(msg);
  }
  return parsed.value();
}

// Two OR obstacles share leaf L; each obstructs one leaf goal under an AND
// parent. Analytic propagation treats the two paths as independent (0.25),
// while the true probability that G holds is P(L absent) = 0.5.
inline GoalModel shared_leaf_witness() {
  auto parsed = parse(R"(model "witness"
goal G { refine and { G1, G2 } }
goal G1 { }
goal G2 { }
obstacle A { refine or { L } }
obstacle B { refine or { L } }
obstacle L { probability: 0.5 }
obstructs A -> G1
obstructs B -> G2
)");
  return parsed.value();
}

}  // namespace gorisk::testkit
