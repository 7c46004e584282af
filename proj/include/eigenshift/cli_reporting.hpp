#pragma once

#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace eigenshift {

// Parsed command line. `options` holds flag values keyed by the flag name
// without its leading dashes; `config_path` mirrors --spec or --config when
// one of those was given.
struct Invocation {
  std::string subcommand;
  std::map<std::string, std::string> options;
  std::optional<std::string> config_path;
};

// Parses argv without the program name, e.g. {"bounds", "--matrix",
// "a.json", "--S", "1,2"}. Exactly one subcommand (bounds, quantities,
// contour-check, ensemble, experiment) must lead; `experiment` accepts an
// optional `run` verb after it. Every flag takes exactly one value.
// Unknown subcommands, unknown or repeated flags, and flags missing their
// value raise UsageError naming the offending token.
//
// Index sets on the command line are 1-based to match the usual way
// eigenvalues are numbered in print: --S 1,2 selects the two largest
// eigenvalues. They are converted to the library's 0-based convention
// during dispatch, never stored.
Invocation parse_invocation(const std::vector<std::string>& args);

// Dispatches the invocation, printing a human-readable table to `table`
// (stdout by default) and writing JSON or report files when --out names a
// destination. The table is a pure function of the inputs and the seed;
// when a subcommand draws randomness and --seed was omitted, the generated
// seed is printed so the run can be replayed exactly.
//
// Returns the process exit code: 0 when the requested checks pass (or the
// command is purely informational), 1 when a check fails, 2 on usage or
// I/O errors. Errors are reported on stderr, never in the table.
int run(const Invocation& inv, std::ostream& table = std::cout);

// The --help text; shared by the binary and the tests.
std::string usage_text();

}  // namespace eigenshift
