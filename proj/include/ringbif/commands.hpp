#pragma once

// The five workflows behind the command-line tool.  Each command reads a
// validated RunConfig, writes its tables/branch files under cfg.out, prints
// a short summary to the stream, and returns the process exit code:
// 0 success, 2 domain error (bad physical setup, collision, missing event),
// 3 verification failure.  Malformed configs never reach these functions;
// load_config reports them with exit code 1 in the driver.

#include <ostream>
#include <string>

#include "ringbif/config.hpp"

namespace ringbif {

int cmd_ring(const RunConfig& cfg, std::ostream& os);
int cmd_equilibria(const RunConfig& cfg, std::ostream& os);
int cmd_scan(const RunConfig& cfg, std::ostream& os);
int cmd_continue(const RunConfig& cfg, std::ostream& os);
int cmd_verify(const RunConfig& cfg, std::ostream& os);

// Dispatch by command name with uniform error mapping.
int run_command(const std::string& name, const RunConfig& cfg, std::ostream& os);

}  // namespace ringbif
