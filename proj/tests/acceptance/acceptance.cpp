// Prints one PASS/FAIL line per acceptance criterion. With --criterion N only
// that criterion runs; the exit status reflects the criteria run.

#include <cstdlib>
#include <cstring>
#include <iostream>
#include <string>
#include <vector>

#include "srcid/verify.hpp"

int main(int argc, char** argv) {
  std::vector<int> ids;
  srcid::VerifyOptions options;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) {
      ids.push_back(std::atoi(argv[++i]));
    } else if (std::strcmp(argv[i], "--seed") == 0 && i + 1 < argc) {
      options.seed = std::strtoull(argv[++i], nullptr, 10);
    } else {
      std::cerr << "usage: acceptance [--criterion N]... [--seed S]\n";
      return 2;
    }
  }
  if (ids.empty())
    for (int k = 1; k <= srcid::kCriterionCount; ++k) ids.push_back(k);
  int failed = 0;
  for (int id : ids) {
    try {
      const auto r = srcid::check_criterion(id, options);
      std::cout << srcid::format_result(r) << std::endl;
      failed += r.passed ? 0 : 1;
    } catch (const std::exception& e) {
      std::cout << "[FAIL] criterion " << id << ": " << e.what() << std::endl;
      ++failed;
    }
  }
  return failed == 0 ? 0 : 1;
}
