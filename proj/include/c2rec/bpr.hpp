#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "c2rec/interactions.hpp"
#include "c2rec/metrics.hpp"
#include "c2rec/split.hpp"

namespace c2rec {

struct BprConfig {
    int d = 64;
    int epochs = 50;
    double learning_rate = 0.01;
    double reg = 1e-4;
    std::uint64_t seed = 0;
};

struct BprParams {
    Mat user_factors;  // |U| x d
    Mat item_factors;  // |V| x d
};

// Pairwise ranking SGD over (user, pos, sampled neg) triples.
BprParams bpr_train(const std::vector<std::pair<int, int>>& positives, int n_users, int n_items,
                    const BprConfig& config);

double bpr_score(const BprParams& params, int user, int item);

ScorerFn bpr_scorer(const BprParams& params);  // channel argument ignored

// Positive train pairs carrying a label for the given channel; both-channel
// pairs appear in each channel's list.
std::vector<std::pair<int, int>> train_positives(const DatasetBundle& bundle, Channel c);
std::vector<std::pair<int, int>> train_positives_merged(const DatasetBundle& bundle);

enum class ProbeRegime { SelfMatch, CrossMatch };

// Trains one BPR per channel and evaluates overlapping users on each target
// channel's test ground truth; CrossMatch scores the target channel with the
// other channel's model. Reports indexed by target Channel.
std::array<MetricReport, 2> probe_experiment(const InteractionStore& store,
                                             const DatasetBundle& bundle, ProbeRegime regime,
                                             CandidateMode candidate_mode,
                                             const BprConfig& config,
                                             const std::vector<int>& k_values);

struct ProbeRow {
    ProbeRegime regime;
    CandidateMode candidate_mode;
    std::array<MetricReport, 2> by_channel;  // by target channel
};

// The three probe rows (self w/o purchased, cross w/o, cross w/) sharing one
// pair of per-channel models per call.
std::vector<ProbeRow> run_probe_rows(const DatasetBundle& bundle, const BprConfig& config,
                                     const std::vector<int>& k_values);

}  // namespace c2rec
