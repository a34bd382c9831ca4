// Acceptance run: one line per criterion, exit status 0 iff all pass.

#include <iostream>

#include "bornopp/bornopp.hpp"
#include "bornopp/harness.hpp"

using namespace bornopp::harness;

int main(int argc, char** argv) {
  std::vector<std::pair<std::string, std::string>> plan = {
      {"C1", "thm1"},  {"C2", "thm4"},         {"C3", "berry"},       {"C4", "prop3"},      {"C5", "prop5"},
      {"C6", "examples"}, {"C7", "identities"}, {"C8", "semiclassics"}, {"C9", "determinism"}};
  if (argc > 1) {
    std::vector<std::pair<std::string, std::string>> only;
    for (const auto& p : plan)
      for (int a = 1; a < argc; ++a)
        if (p.first == argv[a] || p.second == argv[a]) only.push_back(p);
    plan = only;
  }
  bool all = true;
  for (const auto& [id, suite] : plan) {
    SuiteReport r;
    try {
      r = run_suite(suite);
    } catch (const std::exception& e) {
      std::cout << "FAIL " << id << " (" << suite << "): " << e.what() << std::endl;
      all = false;
      continue;
    }
    std::string detail;
    for (const auto& c : r.criteria)
      if (!c.passed || detail.size() < 400)
        detail += std::string(detail.empty() ? "" : "; ") + (c.passed ? "" : "FAILED ") + c.description + " [" +
                  c.detail + "]";
    std::cout << (r.passed ? "PASS " : "FAIL ") << id << " (" << suite << "): " << detail << std::endl;
    all = all && r.passed;
  }
  std::cout << (all ? "all criteria passed" : "some criteria failed") << std::endl;
  return all ? 0 : 1;
}
