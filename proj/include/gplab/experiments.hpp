#pragma once

#include "gplab/config.hpp"
#include "gplab/report.hpp"

namespace gplab {

// Runs one experiment and returns its report; wall-clock is filled in, files
// are not written (see write_report). Checkpoint files, when requested, go to
// <outdir>/<experiment>-<timestamp>-checkpoints.
ExperimentReport run_experiment(const ExperimentConfig& config);

}  // namespace gplab
