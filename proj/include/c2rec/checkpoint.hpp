#pragma once

#include <string>
#include <vector>

#include "c2rec/model.hpp"
#include "c2rec/synthgen.hpp"

namespace c2rec {

struct Checkpoint {
    Parameters params;
    std::vector<std::string> user_ids, item_ids;
};

// Versioned binary: magic "C2RECv1", config block, vocab maps, then each
// tensor as (name, shape, row-major 32-bit little-endian floats).
void save_checkpoint(const Parameters& params, const std::vector<std::string>& user_ids,
                     const std::vector<std::string>& item_ids, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);  // validates shapes against the config

// Ground-truth sidecar for synthetic datasets; same tensor framing.
void save_ground_truth(const GroundTruth& truth, const std::string& path);
GroundTruth load_ground_truth(const std::string& path);

}  // namespace c2rec
