#include "c2rec/reports.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>

namespace c2rec {

namespace {

const char* section_name(SplitSection s) {
    switch (s) {
        case SplitSection::Train: return "train";
        case SplitSection::Val: return "val";
        case SplitSection::Test: return "test";
    }
    return "?";
}

}  // namespace

Json report_json(const MetricReport& report) {
    Json j;
    j["channel"] = channel_name(report.channel);
    j["protocol"] = candidate_mode_name(report.candidate_mode);
    j["split"] = section_name(report.section);
    j["k"] = report.k_values;
    j["hr"] = report.hr;
    j["ndcg"] = report.ndcg;
    j["n_users"] = report.n_users;
    return j;
}

Json aggregate_json(const std::vector<MetricReport>& runs,
                    const std::vector<std::uint64_t>& seeds) {
    if (runs.empty()) throw Error("aggregate_json: no runs");
    Json j;
    j["channel"] = channel_name(runs.front().channel);
    j["protocol"] = candidate_mode_name(runs.front().candidate_mode);
    j["split"] = section_name(runs.front().section);
    j["k"] = runs.front().k_values;
    j["seeds"] = seeds;
    j["n_users"] = runs.front().n_users;

    Json mean, stddev;
    for (const char* metric : {"hr", "ndcg"}) {
        std::vector<double> means, stds;
        for (std::size_t i = 0; i < runs.front().k_values.size(); ++i) {
            std::vector<double> xs;
            for (const auto& run : runs) {
                xs.push_back(std::string(metric) == "hr" ? run.hr[i] : run.ndcg[i]);
            }
            const auto ms = mean_std(xs);
            means.push_back(ms.mean);
            stds.push_back(ms.stddev);
        }
        mean[metric] = means;
        stddev[metric] = stds;
    }
    j["mean"] = mean;
    j["std"] = stddev;
    return j;
}

Json loss_json(const LossBreakdown& loss) {
    Json j;
    j["l_on"] = loss.l_on;
    j["l_off"] = loss.l_off;
    j["l_cls"] = loss.l_cls;
    j["l_attn"] = loss.l_attn;
    j["total"] = loss.total;
    return j;
}

Json epoch_json(const EpochStats& stats) {
    Json j;
    j["epoch"] = stats.epoch;
    j["loss"] = loss_json(stats.loss);
    j["val_ndcg10_off"] = stats.val_ndcg10[idx(Channel::Off)];
    j["val_ndcg10_on"] = stats.val_ndcg10[idx(Channel::On)];
    j["selection_score"] = stats.selection_score;
    return j;
}

void write_json_file(const Json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write file: " + path);
    out << j.dump(2) << '\n';
    if (!out) throw Error("write failed: " + path);
}

Json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open file: " + path);
    return Json::parse(in);
}

void write_manifest(const std::string& out_dir, const std::string& command, const Json& config,
                    const std::vector<std::string>& inputs,
                    const std::vector<std::string>& outputs) {
    std::filesystem::create_directories(out_dir);
    Json j;
    j["version"] = kVersion;
    j["command"] = command;
    j["config"] = config;
    j["inputs"] = inputs;
    j["outputs"] = outputs;
    const auto now = std::chrono::system_clock::now();
    j["timestamp_unix"] =
        std::chrono::duration_cast<std::chrono::seconds>(now.time_since_epoch()).count();
    write_json_file(j, out_dir + "/manifest.json");
}

}  // namespace c2rec
