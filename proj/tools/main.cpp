#include <cstdio>
#include <string>
#include <vector>

#include "eigenshift/cli_reporting.hpp"
#include "eigenshift/errors.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  for (const std::string& a : args) {
    if (a == "--help" || a == "-h") {
      std::fputs(eigenshift::usage_text().c_str(), stdout);
      return 0;
    }
  }
  if (args.empty()) {
    std::fputs(eigenshift::usage_text().c_str(), stderr);
    return 2;
  }
  try {
    return eigenshift::run(eigenshift::parse_invocation(args));
  } catch (const eigenshift::UsageError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return 2;
  }
}
