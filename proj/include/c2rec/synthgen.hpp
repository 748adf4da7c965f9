#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "c2rec/interactions.hpp"

namespace c2rec {

struct GenConfig {
    int n_users = 600;
    int n_items = 300;
    int latent_dim = 8;
    double gamma = 1.0;  // channel-divergence strength
    double overlap_user_frac = 0.3;
    double overlap_item_frac = 0.5;
    int min_interactions = 20;  // per active (user, channel)
    int max_interactions = 40;
    double dup_prob = 0.2;  // chance an overlapping user's draw fires on the other channel too
    std::uint64_t seed = 0;

    void validate() const;
};

// Planted preference structure behind the generated interactions. The
// affinity of user u for item v in channel c is
//   shared_factors[u] . item_factors[v] + gamma * channel_offsets[c][u] . item_factors[v]
// Shared taste and channel offsets occupy complementary coordinate subspaces
// and items alternate between them, so whether an item's appeal is shared or
// channel-specific depends on the item.
struct GroundTruth {
    int latent_dim = 0;
    double gamma = 0.0;
    Mat shared_factors;                  // |U| x f
    std::array<Mat, 2> channel_offsets;  // |U| x f, by Channel
    Mat item_factors;                    // |V| x f

    double affinity(int user, int item, Channel c) const;
};

struct GenCounters {
    std::array<std::int64_t, 2> interactions{0, 0};  // unique triples per channel
    std::array<int, 2> users{0, 0};
    std::array<int, 2> items{0, 0};
    int user_overlap = 0;
    int item_overlap = 0;
    std::int64_t duplicates_suppressed = 0;  // mirror draws that already existed
};

struct GenResult {
    InteractionStore store;
    GroundTruth truth;
    GenCounters counters;
};

GenResult generate(const GenConfig& config);

// Exact top-k of the planted affinity, ties broken by ascending item id.
std::vector<int> oracle_topk(const GroundTruth& truth, int user, Channel c, int k);

}  // namespace c2rec
