// Command-line front door: reproducible generate / split / train / evaluate
// pipelines plus the probe, ablation, and grid-search experiment drivers.
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "c2rec/bpr.hpp"
#include "c2rec/checkpoint.hpp"
#include "c2rec/interactions.hpp"
#include "c2rec/metrics.hpp"
#include "c2rec/model.hpp"
#include "c2rec/reports.hpp"
#include "c2rec/split.hpp"
#include "c2rec/synthgen.hpp"
#include "c2rec/training.hpp"

namespace {

using namespace c2rec;

struct ModelFlags {
    int d = 128;
    int d_prime = 64;
    int clf_hidden = 64;
    double lambda_cls = 0.1;
    double lambda_attn = 0.1;
    std::string variant = "full";

    ModelConfig to_config() const {
        ModelConfig config;
        config.d = d;
        config.d_prime = d_prime;
        config.clf_hidden = clf_hidden;
        config.lambda_cls = lambda_cls;
        config.lambda_attn = lambda_attn;
        config.variant = parse_variant(variant);
        config.validate();
        return config;
    }
};

struct TrainFlags {
    int epochs = 200;
    int batch_size = 1024;
    double lr = 1e-3;
    int patience = 20;
    std::uint64_t seed = 0;

    TrainConfig to_config() const {
        TrainConfig config;
        config.epochs = epochs;
        config.batch_size = batch_size;
        config.learning_rate = lr;
        config.patience = patience;
        config.seed = seed;
        config.validate();
        return config;
    }
};

void add_model_flags(CLI::App* cmd, ModelFlags& flags) {
    cmd->add_option("--d", flags.d, "embedding dimension");
    cmd->add_option("--d-prime", flags.d_prime, "attention projection dimension");
    cmd->add_option("--clf-hidden", flags.clf_hidden, "classifier hidden width");
    cmd->add_option("--lambda-cls", flags.lambda_cls, "classification loss weight");
    cmd->add_option("--lambda-attn", flags.lambda_attn, "attention loss weight");
    cmd->add_option("--variant", flags.variant,
                    "full | no-classification | no-attention | no-attention-loss | no-separation");
}

void add_train_flags(CLI::App* cmd, TrainFlags& flags) {
    cmd->add_option("--epochs", flags.epochs, "maximum training epochs");
    cmd->add_option("--batch-size", flags.batch_size, "mini-batch size");
    cmd->add_option("--lr", flags.lr, "Adam learning rate");
    cmd->add_option("--patience", flags.patience, "early-stopping patience");
    cmd->add_option("--seed", flags.seed, "random seed");
}

Json model_flags_json(const ModelFlags& flags) {
    Json j;
    j["d"] = flags.d;
    j["d_prime"] = flags.d_prime;
    j["clf_hidden"] = flags.clf_hidden;
    j["lambda_cls"] = flags.lambda_cls;
    j["lambda_attn"] = flags.lambda_attn;
    j["variant"] = flags.variant;
    return j;
}

Json train_flags_json(const TrainFlags& flags) {
    Json j;
    j["epochs"] = flags.epochs;
    j["batch_size"] = flags.batch_size;
    j["lr"] = flags.lr;
    j["patience"] = flags.patience;
    j["seed"] = flags.seed;
    return j;
}

Json stats_json(const StatsReport& report) {
    auto channel = [](const ChannelStats& s) {
        Json j;
        j["users"] = s.users;
        j["items"] = s.items;
        j["interactions"] = s.interactions;
        j["sparsity"] = s.sparsity;
        return j;
    };
    Json j;
    j["off"] = channel(report.off);
    j["on"] = channel(report.on);
    j["user_overlap"] = report.user_overlap;
    j["item_overlap"] = report.item_overlap;
    j["total_triples"] = report.total_triples;
    return j;
}

const char* regime_name(ProbeRegime regime) {
    return regime == ProbeRegime::SelfMatch ? "self-match" : "cross-match";
}

MetricReport evaluate_model(const Parameters& params, const DatasetBundle& bundle, Channel channel,
                            const std::vector<int>& ks, CandidateMode mode, SplitSection section,
                            UserFilter filter, int threads) {
    EvalProtocol protocol;
    protocol.k_values = ks;
    protocol.candidate_mode = mode;
    protocol.channel = channel;
    const ScorerFactory factory = [&params] {
        // each thread gets its own scorer; the per-user cache is not shared
        auto scorer = std::make_shared<ModelScorer>(params);
        return ScorerFn(
            [scorer](int u, int v, Channel c) { return (*scorer)(u, v, c); });
    };
    return evaluate_parallel(factory, bundle, protocol, filter, section, threads);
}

int cmd_generate(const GenConfig& config, const std::string& out_dir) {
    Json snapshot;
    snapshot["n_users"] = config.n_users;
    snapshot["n_items"] = config.n_items;
    snapshot["latent_dim"] = config.latent_dim;
    snapshot["gamma"] = config.gamma;
    snapshot["overlap_user_frac"] = config.overlap_user_frac;
    snapshot["overlap_item_frac"] = config.overlap_item_frac;
    snapshot["min_interactions"] = config.min_interactions;
    snapshot["max_interactions"] = config.max_interactions;
    snapshot["dup_prob"] = config.dup_prob;
    snapshot["seed"] = config.seed;
    write_manifest(out_dir, "generate", snapshot, {},
                   {out_dir + "/interactions.csv", out_dir + "/groundtruth.bin",
                    out_dir + "/stats.json"});

    const auto result = generate(config);
    save_interactions(result.store, out_dir + "/interactions.csv");
    save_ground_truth(result.truth, out_dir + "/groundtruth.bin");
    const auto report = stats(result.store);
    write_json_file(stats_json(report), out_dir + "/stats.json");
    std::printf("generated %d users, %d items, %lld triples (off %lld / on %lld)\n",
                result.store.n_users(), result.store.n_items(),
                static_cast<long long>(result.store.n_triples()),
                static_cast<long long>(report.off.interactions),
                static_cast<long long>(report.on.interactions));
    return 0;
}

int cmd_stats(const std::string& data, const std::string& out_path) {
    const auto store = load_interactions(data);
    const auto report = stats(store);
    const auto j = stats_json(report);
    if (!out_path.empty()) write_json_file(j, out_path);
    std::printf("%s\n", j.dump(2).c_str());
    return 0;
}

int cmd_split(const std::string& data, const std::string& out_dir, std::uint64_t seed,
              int negatives) {
    Json snapshot;
    snapshot["seed"] = seed;
    snapshot["negatives_per_positive"] = negatives;
    write_manifest(out_dir, "split", snapshot, {data},
                   {out_dir + "/train.csv", out_dir + "/val_off.csv", out_dir + "/val_on.csv",
                    out_dir + "/test_off.csv", out_dir + "/test_on.csv", out_dir + "/meta.json"});

    const auto store = load_interactions(data);
    auto bundle = split(store, seed);
    const auto positives = bundle.train.size();
    bundle = sample_negatives(std::move(bundle), store, negatives, seed);
    write_split_dir(bundle, out_dir);
    std::printf("split: %zu positives, %zu negatives, warnings %d\n", positives,
                bundle.train.size() - positives, bundle.negative_warnings);
    if (bundle.negative_warnings > 0) {
        log_info(std::to_string(bundle.negative_warnings) +
                 " positives received fewer than the requested negatives");
    }
    return 0;
}

int cmd_train(const std::string& splits, const std::string& out_dir, const ModelFlags& model_flags,
              const TrainFlags& train_flags) {
    write_manifest(out_dir, "train",
                   Json{{"model", model_flags_json(model_flags)},
                        {"train", train_flags_json(train_flags)},
                        {"splits", splits}},
                   {splits}, {out_dir + "/checkpoint.bin", out_dir + "/train_log.jsonl"});

    const auto bundle = read_split_dir(splits);
    const auto result = train(bundle, model_flags.to_config(), train_flags.to_config());

    std::ofstream log(out_dir + "/train_log.jsonl");
    if (!log) throw Error("cannot write " + out_dir + "/train_log.jsonl");
    for (const auto& epoch : result.history) log << epoch_json(epoch).dump() << '\n';

    save_checkpoint(result.best_params, bundle.user_ids, bundle.item_ids,
                    out_dir + "/checkpoint.bin");
    std::printf("trained %d epochs, best epoch %d, selection score %.6f\n", result.last_epoch,
                result.best_epoch,
                result.history[static_cast<std::size_t>(result.best_epoch - 1)].selection_score);
    return 0;
}

// manifests for file-valued outputs sit next to the file; the report body
// itself stays path-free so reruns compare byte for byte
void write_file_manifest(const std::string& out_path, const std::string& command,
                         const Json& config, const std::vector<std::string>& inputs) {
    const auto dir = std::filesystem::path(out_path).parent_path();
    Json j;
    j["version"] = kVersion;
    j["command"] = command;
    j["config"] = config;
    j["inputs"] = inputs;
    j["outputs"] = {out_path};
    const auto now = std::chrono::system_clock::now();
    j["timestamp_unix"] =
        std::chrono::duration_cast<std::chrono::seconds>(now.time_since_epoch()).count();
    if (!dir.empty()) std::filesystem::create_directories(dir);
    write_json_file(j, out_path + ".manifest.json");
}

int cmd_evaluate(const std::string& splits, const std::string& checkpoint,
                 const std::string& out_path, std::vector<int> ks, const std::string& mode_token,
                 const std::string& section_token, int threads) {
    std::sort(ks.begin(), ks.end());
    const auto mode = parse_candidate_mode(mode_token);
    SplitSection section;
    if (section_token == "test") {
        section = SplitSection::Test;
    } else if (section_token == "val") {
        section = SplitSection::Val;
    } else {
        throw Error("unknown split '" + section_token + "' (expected test or val)");
    }
    write_file_manifest(out_path, "evaluate",
                        Json{{"k", ks},
                             {"candidate_mode", mode_token},
                             {"split", section_token},
                             {"threads", threads}},
                        {splits, checkpoint});

    const auto bundle = read_split_dir(splits);
    auto ckpt = load_checkpoint(checkpoint);
    if (ckpt.user_ids != bundle.user_ids || ckpt.item_ids != bundle.item_ids) {
        throw Error("checkpoint vocabulary does not match the split directory");
    }

    Json out;
    out["command"] = "evaluate";
    Json reports = Json::array();
    for (Channel c : kChannels) {
        const auto report = evaluate_model(ckpt.params, bundle, c, ks, mode, section,
                                           UserFilter::All, threads);
        reports.push_back(report_json(report));
    }
    out["reports"] = reports;
    write_json_file(out, out_path);
    std::printf("%s\n", out.dump(2).c_str());
    return 0;
}

int cmd_probe(const std::string& splits, const std::string& out_path, std::vector<int> ks,
              const std::vector<std::uint64_t>& seeds, const BprConfig& base) {
    std::sort(ks.begin(), ks.end());
    write_file_manifest(out_path, "probe",
                        Json{{"k", ks},
                             {"seeds", seeds},
                             {"bpr_d", base.d},
                             {"bpr_epochs", base.epochs},
                             {"bpr_lr", base.learning_rate},
                             {"bpr_reg", base.reg}},
                        {splits});
    const auto bundle = read_split_dir(splits);

    // rows x seeds, sharing the two per-channel models within each seed
    std::vector<std::vector<ProbeRow>> per_seed;
    for (std::uint64_t seed : seeds) {
        BprConfig config = base;
        config.seed = seed;
        per_seed.push_back(run_probe_rows(bundle, config, ks));
    }

    Json rows = Json::array();
    for (std::size_t row = 0; row < per_seed.front().size(); ++row) {
        Json entry;
        entry["regime"] = regime_name(per_seed.front()[row].regime);
        entry["candidates"] = candidate_mode_name(per_seed.front()[row].candidate_mode);
        for (Channel c : kChannels) {
            std::vector<MetricReport> runs;
            for (const auto& rows_of_seed : per_seed) {
                runs.push_back(rows_of_seed[row].by_channel[idx(c)]);
            }
            entry[channel_name(c)] = aggregate_json(runs, seeds);
        }
        rows.push_back(entry);
    }
    Json out;
    out["command"] = "probe";
    out["bpr"] = Json{{"d", base.d},
                      {"epochs", base.epochs},
                      {"lr", base.learning_rate},
                      {"reg", base.reg}};
    out["rows"] = rows;
    write_json_file(out, out_path);
    std::printf("%s\n", out.dump(2).c_str());
    return 0;
}

int cmd_ablate(const std::string& splits, const std::string& out_path, std::vector<int> ks,
               const std::vector<std::uint64_t>& seeds, const ModelFlags& model_flags,
               const TrainFlags& train_flags, const std::string& mode_token, int threads) {
    std::sort(ks.begin(), ks.end());
    const auto mode = parse_candidate_mode(mode_token);
    write_file_manifest(out_path, "ablate",
                        Json{{"k", ks},
                             {"seeds", seeds},
                             {"candidate_mode", mode_token},
                             {"model", model_flags_json(model_flags)},
                             {"train", train_flags_json(train_flags)}},
                        {splits});
    const auto bundle = read_split_dir(splits);

    Json rows = Json::array();
    for (Variant variant : all_variants()) {
        ModelFlags flags = model_flags;
        flags.variant = variant_name(variant);
        const ModelConfig model_config = flags.to_config();

        std::array<std::vector<MetricReport>, 2> runs;
        std::vector<int> best_epochs;
        for (std::uint64_t seed : seeds) {
            TrainFlags tf = train_flags;
            tf.seed = seed;
            const auto result = train(bundle, model_config, tf.to_config());
            best_epochs.push_back(result.best_epoch);
            for (Channel c : kChannels) {
                runs[idx(c)].push_back(evaluate_model(result.best_params, bundle, c, ks, mode,
                                                      SplitSection::Test, UserFilter::All,
                                                      threads));
            }
        }
        for (Channel c : kChannels) {
            Json entry;
            entry["variant"] = variant_name(variant);
            entry["channel"] = channel_name(c);
            entry["metrics"] = aggregate_json(runs[idx(c)], seeds);
            entry["best_epochs"] = best_epochs;
            rows.push_back(entry);
        }
        log_info(std::string("ablation variant done: ") + variant_name(variant));
    }
    Json out;
    out["command"] = "ablate";
    out["model"] = model_flags_json(model_flags);
    out["train"] = train_flags_json(train_flags);
    out["rows"] = rows;
    write_json_file(out, out_path);
    std::printf("ablation report written to %s (%zu rows)\n", out_path.c_str(), rows.size());
    return 0;
}

int cmd_gridsearch(const std::string& splits, const std::string& out_path, const SearchGrid& grid,
                   const std::vector<std::uint64_t>& seeds, const ModelFlags& model_flags,
                   const TrainFlags& train_flags) {
    write_file_manifest(out_path, "gridsearch",
                        Json{{"seeds", seeds},
                             {"grid_d_prime", grid.d_prime},
                             {"grid_clf_hidden", grid.clf_hidden},
                             {"grid_lr", grid.learning_rate},
                             {"grid_lambda_cls", grid.lambda_cls},
                             {"grid_lambda_attn", grid.lambda_attn},
                             {"model", model_flags_json(model_flags)},
                             {"train", train_flags_json(train_flags)}},
                        {splits});
    const auto bundle = read_split_dir(splits);
    const auto result = grid_search(bundle, grid, model_flags.to_config(),
                                    train_flags.to_config(), seeds);

    auto point_json = [](const GridPoint& point) {
        Json j;
        j["d_prime"] = point.model.d_prime;
        j["clf_hidden"] = point.model.clf_hidden;
        j["lr"] = point.train.learning_rate;
        j["lambda_cls"] = point.model.lambda_cls;
        j["lambda_attn"] = point.model.lambda_attn;
        j["val_score"] = point.val_score;
        j["best_epoch"] = point.best_epoch;
        return j;
    };
    Json out;
    out["command"] = "gridsearch";
    out["combinations"] = grid.combinations();
    out["best"] = point_json(result.best);
    Json table = Json::array();
    for (const auto& point : result.table) table.push_back(point_json(point));
    out["table"] = table;
    out["seed_scores"] = result.seed_scores;
    out["score_mean"] = result.score_summary.mean;
    out["score_std"] = result.score_summary.stddev;
    write_json_file(out, out_path);
    std::printf("grid search over %zu combinations, best val score %.6f\n", result.table.size(),
                result.best.val_score);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"c2rec: cross-channel retail recommendation experiments"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kVersion));

    // generate
    GenConfig gen_config;
    std::string gen_out;
    auto* generate_cmd = app.add_subcommand("generate", "emit a synthetic interaction dataset");
    generate_cmd->add_option("--out", gen_out, "output directory")->required();
    generate_cmd->add_option("--n-users", gen_config.n_users);
    generate_cmd->add_option("--n-items", gen_config.n_items);
    generate_cmd->add_option("--latent-dim", gen_config.latent_dim);
    generate_cmd->add_option("--gamma", gen_config.gamma, "channel divergence strength");
    generate_cmd->add_option("--overlap-user-frac", gen_config.overlap_user_frac);
    generate_cmd->add_option("--overlap-item-frac", gen_config.overlap_item_frac);
    generate_cmd->add_option("--min-interactions", gen_config.min_interactions);
    generate_cmd->add_option("--max-interactions", gen_config.max_interactions);
    generate_cmd->add_option("--dup-prob", gen_config.dup_prob);
    generate_cmd->add_option("--seed", gen_config.seed);

    // stats
    std::string stats_data, stats_out;
    auto* stats_cmd = app.add_subcommand("stats", "per-channel dataset statistics");
    stats_cmd->add_option("--data", stats_data, "interactions csv")->required();
    stats_cmd->add_option("--out", stats_out, "optional json output path");

    // split
    std::string split_data, split_out;
    std::uint64_t split_seed = 0;
    int split_negatives = 10;
    auto* split_cmd = app.add_subcommand("split", "6:2:2 split plus negative sampling");
    split_cmd->add_option("--data", split_data, "interactions csv")->required();
    split_cmd->add_option("--out", split_out, "output directory")->required();
    split_cmd->add_option("--seed", split_seed);
    split_cmd->add_option("--negatives", split_negatives, "negatives per positive");

    // train
    std::string train_splits, train_out;
    ModelFlags train_model;
    TrainFlags train_train;
    auto* train_cmd = app.add_subcommand("train", "train the recommendation model");
    train_cmd->add_option("--splits", train_splits, "split directory")->required();
    train_cmd->add_option("--out", train_out, "output directory")->required();
    add_model_flags(train_cmd, train_model);
    add_train_flags(train_cmd, train_train);

    // evaluate
    std::string eval_splits, eval_checkpoint, eval_out = "report.json";
    std::vector<int> eval_ks{5, 10};
    std::string eval_mode = "without-purchased", eval_section = "test";
    int eval_threads = 1;
    auto* eval_cmd = app.add_subcommand("evaluate", "rank and score a trained checkpoint");
    eval_cmd->add_option("--splits", eval_splits, "split directory")->required();
    eval_cmd->add_option("--checkpoint", eval_checkpoint)->required();
    eval_cmd->add_option("--out", eval_out, "report path");
    eval_cmd->add_option("--k", eval_ks, "list depths")->delimiter(',');
    eval_cmd->add_option("--candidate-mode", eval_mode,
                         "without-purchased | with-purchased");
    eval_cmd->add_option("--split", eval_section, "test | val");
    eval_cmd->add_option("--threads", eval_threads, "parallel evaluation threads");

    // probe
    std::string probe_splits, probe_out = "probe.json";
    std::vector<int> probe_ks{5};
    std::vector<std::uint64_t> probe_seeds{1, 2, 3};
    BprConfig probe_bpr;
    auto* probe_cmd = app.add_subcommand("probe", "self-match vs cross-match BPR table");
    probe_cmd->add_option("--splits", probe_splits, "split directory")->required();
    probe_cmd->add_option("--out", probe_out, "report path");
    probe_cmd->add_option("--k", probe_ks, "list depths")->delimiter(',');
    probe_cmd->add_option("--seeds", probe_seeds, "seeds")->delimiter(',');
    probe_cmd->add_option("--bpr-d", probe_bpr.d);
    probe_cmd->add_option("--bpr-epochs", probe_bpr.epochs);
    probe_cmd->add_option("--bpr-lr", probe_bpr.learning_rate);
    probe_cmd->add_option("--bpr-reg", probe_bpr.reg);

    // ablate
    std::string ablate_splits, ablate_out = "ablation.json";
    std::vector<int> ablate_ks{5, 10};
    std::vector<std::uint64_t> ablate_seeds{1, 2, 3};
    std::string ablate_mode = "without-purchased";
    int ablate_threads = 1;
    ModelFlags ablate_model;
    TrainFlags ablate_train;
    auto* ablate_cmd = app.add_subcommand("ablate", "train and score every model variant");
    ablate_cmd->add_option("--splits", ablate_splits, "split directory")->required();
    ablate_cmd->add_option("--out", ablate_out, "report path");
    ablate_cmd->add_option("--k", ablate_ks, "list depths")->delimiter(',');
    ablate_cmd->add_option("--seeds", ablate_seeds, "seeds")->delimiter(',');
    ablate_cmd->add_option("--candidate-mode", ablate_mode);
    ablate_cmd->add_option("--threads", ablate_threads);
    add_model_flags(ablate_cmd, ablate_model);
    add_train_flags(ablate_cmd, ablate_train);

    // gridsearch
    std::string grid_splits, grid_out = "gridsearch.json";
    std::vector<std::uint64_t> grid_seeds{1, 2, 3, 4, 5};
    SearchGrid grid;
    ModelFlags grid_model;
    TrainFlags grid_train;
    auto* grid_cmd = app.add_subcommand("gridsearch", "hyperparameter grid search");
    grid_cmd->add_option("--splits", grid_splits, "split directory")->required();
    grid_cmd->add_option("--out", grid_out, "report path");
    grid_cmd->add_option("--seeds", grid_seeds, "seeds (first one searches)")->delimiter(',');
    grid_cmd->add_option("--grid-d-prime", grid.d_prime)->delimiter(',');
    grid_cmd->add_option("--grid-clf-hidden", grid.clf_hidden)->delimiter(',');
    grid_cmd->add_option("--grid-lr", grid.learning_rate)->delimiter(',');
    grid_cmd->add_option("--grid-lambda-cls", grid.lambda_cls)->delimiter(',');
    grid_cmd->add_option("--grid-lambda-attn", grid.lambda_attn)->delimiter(',');
    add_model_flags(grid_cmd, grid_model);
    add_train_flags(grid_cmd, grid_train);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (generate_cmd->parsed()) return cmd_generate(gen_config, gen_out);
        if (stats_cmd->parsed()) return cmd_stats(stats_data, stats_out);
        if (split_cmd->parsed()) return cmd_split(split_data, split_out, split_seed, split_negatives);
        if (train_cmd->parsed()) return cmd_train(train_splits, train_out, train_model, train_train);
        if (eval_cmd->parsed()) {
            return cmd_evaluate(eval_splits, eval_checkpoint, eval_out, eval_ks, eval_mode,
                                eval_section, eval_threads);
        }
        if (probe_cmd->parsed()) {
            return cmd_probe(probe_splits, probe_out, probe_ks, probe_seeds, probe_bpr);
        }
        if (ablate_cmd->parsed()) {
            return cmd_ablate(ablate_splits, ablate_out, ablate_ks, ablate_seeds, ablate_model,
                              ablate_train, ablate_mode, ablate_threads);
        }
        if (grid_cmd->parsed()) {
            return cmd_gridsearch(grid_splits, grid_out, grid, grid_seeds, grid_model, grid_train);
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
