#pragma once

#include <functional>
#include <vector>

#include "c2rec/split.hpp"

namespace c2rec {

enum class CandidateMode { WithoutPurchased, WithPurchased };
enum class UserFilter { All, OverlappingOnly };

const char* candidate_mode_name(CandidateMode m);
CandidateMode parse_candidate_mode(const std::string& token);

struct EvalProtocol {
    std::vector<int> k_values{5, 10};  // ascending, each >= 1
    CandidateMode candidate_mode = CandidateMode::WithoutPurchased;
    Channel channel = Channel::Off;
    void validate() const;
};

struct MetricReport {
    Channel channel = Channel::Off;
    CandidateMode candidate_mode = CandidateMode::WithoutPurchased;
    SplitSection section = SplitSection::Test;
    std::vector<int> k_values;
    std::vector<double> hr, ndcg;  // aligned with k_values
    int n_users = 0;

    double hr_at(int k) const;
    double ndcg_at(int k) const;
};

using ScorerFn = std::function<double(int user, int item, Channel channel)>;
using ScorerFactory = std::function<ScorerFn()>;

// All items minus (for WithoutPurchased) the user's train items in the
// protocol channel, ordered by score descending with ties broken by ascending
// item id. Returns the top max(k_values).
std::vector<int> rank_items(const ScorerFn& scorer, int user, const EvalProtocol& protocol,
                            const DatasetBundle& bundle);

// hits / min(k, |gt|); gt must be sorted
double hr_at_k(const std::vector<int>& ranked, const std::vector<int>& gt, int k);
// DCG over hits with 1/log2(rank+1) gains, IDCG truncated at min(k, |gt|)
double ndcg_at_k(const std::vector<int>& ranked, const std::vector<int>& gt, int k);

MetricReport evaluate(const ScorerFn& scorer, const DatasetBundle& bundle,
                      const EvalProtocol& protocol, UserFilter filter, SplitSection section);

// Deterministic parallel evaluation: users are partitioned into blocks, each
// thread scores with its own ScorerFn, per-user results are reduced in user
// order regardless of thread count.
MetricReport evaluate_parallel(const ScorerFactory& make_scorer, const DatasetBundle& bundle,
                               const EvalProtocol& protocol, UserFilter filter,
                               SplitSection section, int threads);

struct MeanStd {
    double mean = 0.0;
    double stddev = 0.0;
};
MeanStd mean_std(const std::vector<double>& xs);

}  // namespace c2rec
