#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "c2rec/metrics.hpp"
#include "c2rec/training.hpp"

namespace c2rec {

using Json = nlohmann::ordered_json;

Json report_json(const MetricReport& report);

// mean and std per (k, metric) across seed runs of the same protocol
Json aggregate_json(const std::vector<MetricReport>& runs, const std::vector<std::uint64_t>& seeds);

Json loss_json(const LossBreakdown& loss);
Json epoch_json(const EpochStats& stats);

void write_json_file(const Json& j, const std::string& path);
Json read_json_file(const std::string& path);

// Run manifest: command, config snapshot, seeds, input/output paths, written
// before any heavy work starts.
void write_manifest(const std::string& out_dir, const std::string& command, const Json& config,
                    const std::vector<std::string>& inputs,
                    const std::vector<std::string>& outputs);

}  // namespace c2rec
