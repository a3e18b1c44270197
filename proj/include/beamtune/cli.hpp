#pragma once

#include <iosfwd>

namespace beamtune {

// Full command-line surface.  Subcommands: gen-data, train, decode, tune,
// evaluate, sweep-beam, sweep-gamma, demo-label-bias, demo-budget, config.
// Options start from --config (or the built-in defaults) and are overridden
// by explicit flags; --workers falls back to the BEAMTUNE_WORKERS
// environment variable.  Reports go to `out`; failures print one
// "error: ..." line to `err` and return a nonzero exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out,
            std::ostream& err);

}  // namespace beamtune
