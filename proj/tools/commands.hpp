#pragma once

#include "config.hpp"

#include <string>

namespace womble::cli {

int cmd_fit(RunConfig& config);
int cmd_predict(RunConfig& config);
int cmd_diagnose(RunConfig& config);
int cmd_simulate(RunConfig& config);

/// manifest.json in the output directory: command, version, seed, the
/// resolved configuration and its hash, and the files written.
void write_manifest(const std::string& dir, const std::string& command, const RunConfig& config,
                    std::vector<std::string> outputs);

}  // namespace womble::cli
