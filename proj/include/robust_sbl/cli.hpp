#ifndef ROBUST_SBL_CLI_HPP
#define ROBUST_SBL_CLI_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace robust_sbl {

/// Entry point behind the `robust-sbl` executable. `args` excludes the program
/// name. Reports go to --output when given, otherwise to `out`; diagnostics
/// go to `err`. Returns 0 iff no error record was emitted.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Worker count for bench: hardware concurrency capped by ROBUST_SBL_THREADS.
int thread_budget();

}  // namespace robust_sbl

#endif  // ROBUST_SBL_CLI_HPP
