#pragma once

#include <string>

#include "gpsphs/pipeline.hpp"
#include "gpsphs/simulate.hpp"

namespace gpsphs {

/// Formats a double with 17 significant digits (lossless round-trip).
std::string format_number(double v);

/// Dataset CSV: header `trajectory_id,t,x1,...,xn,s`, '.' decimal separator,
/// one row per sample.
void write_dataset_csv(const TrajectoryDataset& dataset, const std::string& path);

/// Parse errors name the offending line. The expected state dimension is
/// inferred from the header.
TrajectoryDataset read_dataset_csv(const std::string& path);

/// Rollout CSV: header `t,x1,...,xn,mode,H,supply`.
void write_rollout_csv(const Rollout& rollout, const std::string& path);
Rollout read_rollout_csv(const std::string& path);

}  // namespace gpsphs
