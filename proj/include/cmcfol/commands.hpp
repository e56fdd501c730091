#pragma once

// Subcommand drivers; exit codes: 0 ok, 1 config error, 2 non-convergence or
// partial result, 3 verification failure.

#include "cmcfol/run_config.hpp"

namespace cmcfol::cli {

int cmd_solve(const RunConfig& config);
int cmd_foliate(const RunConfig& config);
int cmd_verify(const RunConfig& config);
int cmd_probe(const RunConfig& config);

}  // namespace cmcfol::cli
