#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "c2rec/interactions.hpp"

namespace c2rec {

struct TrainingExample {
    int user = 0;
    int item = 0;
    std::uint8_t label_off = 0;    // 1 iff the pair occurred offline
    std::uint8_t label_on = 0;     // 1 iff the pair occurred online
    std::uint8_t specificity = 0;  // 1 = channel-exclusive, 0 = both channels; positives only
    bool is_positive = false;
};

enum class SplitSection { Train, Val, Test };

using GroundTruthMap = std::map<int, std::vector<int>>;  // user -> sorted item ids

struct DatasetBundle {
    std::vector<TrainingExample> train;  // positives first, then appended negatives
    std::array<GroundTruthMap, 2> val_gt, test_gt;      // indexed by Channel
    std::array<GroundTruthMap, 2> train_items;          // per (user, channel), sorted
    std::vector<std::string> user_ids, item_ids;        // dense index -> raw id
    std::vector<int> overlapping_users;                 // sorted
    int negatives_per_positive = 0;
    int negative_warnings = 0;  // positives that received fewer negatives than requested

    int n_users() const { return static_cast<int>(user_ids.size()); }
    int n_items() const { return static_cast<int>(item_ids.size()); }
    const GroundTruthMap& gt(SplitSection s, Channel c) const {
        return s == SplitSection::Val ? val_gt[idx(c)] : test_gt[idx(c)];
    }
    const std::vector<int>& train_items_of(int user, Channel c) const;
};

// 6:2:2 per-user split. Each user's eligible units (channel-exclusive triples
// plus both-channel pairs, one unit per pair) are shuffled and cut with
// n_val = n_test = floor(0.2 n); the remainder stays in train. Both-channel
// pairs landing in val/test alternate between the channels' ground truths,
// offline first.
DatasetBundle split(const InteractionStore& store, std::uint64_t seed);

// Appends per_positive negatives per positive train example, drawn uniformly
// without replacement (within one positive) from items the user purchased in
// neither channel.
DatasetBundle sample_negatives(DatasetBundle bundle, const InteractionStore& store,
                               int per_positive, std::uint64_t seed);

// Split directory layout: train.csv, val_off.csv, val_on.csv, test_off.csv,
// test_on.csv plus meta.json (vocab + overlap bookkeeping).
void write_split_dir(const DatasetBundle& bundle, const std::string& dir);
DatasetBundle read_split_dir(const std::string& dir);

}  // namespace c2rec
