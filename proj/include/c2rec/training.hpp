#pragma once

#include <cstdint>
#include <vector>

#include "c2rec/adam.hpp"
#include "c2rec/metrics.hpp"
#include "c2rec/model.hpp"
#include "c2rec/split.hpp"

namespace c2rec {

struct TrainConfig {
    int epochs = 200;
    int batch_size = 1024;
    double learning_rate = 1e-3;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    int patience = 20;
    std::uint64_t seed = 0;
    int negatives_per_positive = 10;  // applied when the caller builds the bundle

    void validate() const;
};

struct EpochStats {
    int epoch = 0;  // 1-based
    LossBreakdown loss;                    // mean over the epoch's batches
    std::array<double, 2> val_ndcg10{0.0, 0.0};  // by Channel
    double selection_score = 0.0;          // mean of the channels with val users
};

struct TrainResult {
    Parameters best_params;
    int best_epoch = 0;
    int last_epoch = 0;
    std::vector<EpochStats> history;
};

// Mini-batch Adam over the bundle's train examples; model selection on
// validation NDCG@10 (mean over channels), early stopping after `patience`
// epochs without improvement. Fully deterministic under fixed seeds.
TrainResult train(const DatasetBundle& bundle, const ModelConfig& model_config,
                  const TrainConfig& train_config);

struct SearchGrid {
    std::vector<int> d_prime{64, 128, 256};
    std::vector<int> clf_hidden{64, 128};
    std::vector<double> learning_rate{1e-4, 5e-4, 1e-3};
    std::vector<double> lambda_cls{0.1, 0.3, 0.5};
    std::vector<double> lambda_attn{0.01, 0.05, 0.1, 0.3, 0.5};

    std::size_t combinations() const {
        return d_prime.size() * clf_hidden.size() * learning_rate.size() * lambda_cls.size() *
               lambda_attn.size();
    }
};

struct GridPoint {
    ModelConfig model;
    TrainConfig train;
    double val_score = 0.0;
    int best_epoch = 0;
};

struct GridSearchResult {
    GridPoint best;
    std::vector<GridPoint> table;        // one entry per combination, search seed
    std::vector<double> seed_scores;     // winner re-run across all seeds
    MeanStd score_summary;
};

// Searches with the first seed, then re-runs the winner across all seeds.
GridSearchResult grid_search(const DatasetBundle& bundle, const SearchGrid& grid,
                             const ModelConfig& base_model, const TrainConfig& base_train,
                             const std::vector<std::uint64_t>& seeds);

}  // namespace c2rec
