#pragma once

// Batch driver: subcommands with JSON run configs, deterministic output
// directories, CSV/JSON artifacts, and machine-readable pass/fail reports.

#include <string>
#include <vector>

namespace asympheat::cli {

// Exit code 0: run completed and every asserted check passed. 1: a check
// failed or the run aborted. 2: malformed usage or config (the diagnostic
// names the offending field by its dotted path).
int run(const std::vector<std::string>& args);

} // namespace asympheat::cli
