// Dedicated acceptance runner: one pass/fail line per criterion, nonzero
// exit on any failure.

#include <cstring>
#include <iostream>

#include "pdopt/acceptance.hpp"

int main(int argc, char** argv) {
  auto level = pdopt::acceptance::Level::fast;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--level") == 0 && i + 1 < argc) {
      if (std::strcmp(argv[i + 1], "full") == 0)
        level = pdopt::acceptance::Level::full;
      ++i;
    }
  }
  const auto results = pdopt::acceptance::run_all(level);
  const bool ok = pdopt::acceptance::print_report(results, std::cout);
  return ok ? 0 : 2;
}
