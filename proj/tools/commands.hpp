#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "config.hpp"
#include "lirlab/error.hpp"

namespace lirlab::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitVerification = 1,
  kExitConfig = 2,
  kExitIo = 3,
  kExitUpstream = 4,
};

int exit_code_for(ErrorCode code) noexcept;

/// Entry point behind the executable. `args` excludes the program name.
/// Errors are reported as one line "error: <Code>: <message>" on `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
        const EnvLookup& env = process_env());

int cmd_curate(const Settings& s, std::ostream& out, std::ostream& err, const EnvLookup& env);
int cmd_verify_bounds(const Settings& s, std::ostream& out);
int cmd_collapse_lab(const Settings& s, std::ostream& out);
int cmd_eval(const Settings& s, std::ostream& out);
int cmd_bench(const Settings& s, std::ostream& out);
int cmd_synth(const Settings& s, std::ostream& out);

}  // namespace lirlab::cli
