#include <cstdlib>
#include <iostream>

#include "coarsequant/acceptance.hpp"
#include "coarsequant/common.hpp"

int main(int argc, char** argv) {
  std::uint64_t seed = 12345;
  if (argc > 1) seed = std::strtoull(argv[1], nullptr, 10);
  if (const char* env = std::getenv("COARSEQUANT_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) cq::set_default_threads(n);
  }
  auto results = cq::accept::run_all(seed, std::cout);
  const bool ok = cq::accept::all_pass(results);
  std::cout << (ok ? "acceptance: all criteria pass\n"
                   : "acceptance: FAILURES present\n");
  return ok ? 0 : 1;
}
