#pragma once
//
// The acceptance suite: one function per criterion, each printing a single
// pass/fail line. Tolerances are pinned here, not configurable.
//

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace cq::accept {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

std::vector<CriterionResult> run_all(std::uint64_t seed, std::ostream& os);

bool all_pass(const std::vector<CriterionResult>& results);

}  // namespace cq::accept
