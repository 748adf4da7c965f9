#include "c2rec/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

namespace c2rec {

namespace {
const std::vector<int> kNoFilter;
}

const char* candidate_mode_name(CandidateMode m) {
    return m == CandidateMode::WithoutPurchased ? "without-purchased" : "with-purchased";
}

CandidateMode parse_candidate_mode(const std::string& token) {
    if (token == "without-purchased") return CandidateMode::WithoutPurchased;
    if (token == "with-purchased") return CandidateMode::WithPurchased;
    throw Error("unknown candidate mode '" + token +
                "' (expected without-purchased or with-purchased)");
}

void EvalProtocol::validate() const {
    if (k_values.empty()) throw Error("protocol needs at least one k");
    int prev = 0;
    for (int k : k_values) {
        if (k < 1) throw Error("k values must be >= 1");
        if (k <= prev) throw Error("k values must be strictly ascending");
        prev = k;
    }
}

double MetricReport::hr_at(int k) const {
    for (std::size_t i = 0; i < k_values.size(); ++i) {
        if (k_values[i] == k) return hr[i];
    }
    throw Error("report has no k=" + std::to_string(k));
}

double MetricReport::ndcg_at(int k) const {
    for (std::size_t i = 0; i < k_values.size(); ++i) {
        if (k_values[i] == k) return ndcg[i];
    }
    throw Error("report has no k=" + std::to_string(k));
}

std::vector<int> rank_items(const ScorerFn& scorer, int user, const EvalProtocol& protocol,
                            const DatasetBundle& bundle) {
    protocol.validate();
    const int n_items = bundle.n_items();
    const auto& filtered = protocol.candidate_mode == CandidateMode::WithoutPurchased
                               ? bundle.train_items_of(user, protocol.channel)
                               : kNoFilter;

    std::vector<std::pair<double, int>> scored;
    scored.reserve(static_cast<std::size_t>(n_items));
    for (int v = 0; v < n_items; ++v) {
        if (std::binary_search(filtered.begin(), filtered.end(), v)) continue;
        scored.emplace_back(scorer(user, v, protocol.channel), v);
    }
    if (scored.empty()) throw Error("rank_items: empty candidate set for user");

    const auto depth =
        std::min(scored.size(), static_cast<std::size_t>(protocol.k_values.back()));
    auto better = [](const std::pair<double, int>& a, const std::pair<double, int>& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    };
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(depth),
                      scored.end(), better);

    std::vector<int> ranked(depth);
    for (std::size_t i = 0; i < depth; ++i) ranked[i] = scored[i].second;
    return ranked;
}

double hr_at_k(const std::vector<int>& ranked, const std::vector<int>& gt, int k) {
    if (k < 1) throw Error("hr_at_k: k must be >= 1");
    if (gt.empty()) throw Error("hr_at_k: empty ground truth");
    const auto depth = std::min<std::size_t>(static_cast<std::size_t>(k), ranked.size());
    int hits = 0;
    for (std::size_t i = 0; i < depth; ++i) {
        if (std::binary_search(gt.begin(), gt.end(), ranked[i])) ++hits;
    }
    const auto denom = std::min<std::size_t>(static_cast<std::size_t>(k), gt.size());
    return static_cast<double>(hits) / static_cast<double>(denom);
}

double ndcg_at_k(const std::vector<int>& ranked, const std::vector<int>& gt, int k) {
    if (k < 1) throw Error("ndcg_at_k: k must be >= 1");
    if (gt.empty()) throw Error("ndcg_at_k: empty ground truth");
    const auto depth = std::min<std::size_t>(static_cast<std::size_t>(k), ranked.size());
    double dcg = 0.0;
    for (std::size_t i = 0; i < depth; ++i) {
        if (std::binary_search(gt.begin(), gt.end(), ranked[i])) {
            dcg += 1.0 / std::log2(static_cast<double>(i) + 2.0);
        }
    }
    const auto ideal = std::min<std::size_t>(static_cast<std::size_t>(k), gt.size());
    double idcg = 0.0;
    for (std::size_t i = 0; i < ideal; ++i) idcg += 1.0 / std::log2(static_cast<double>(i) + 2.0);
    return dcg / idcg;
}

namespace {

std::vector<int> evaluable_users(const DatasetBundle& bundle, const EvalProtocol& protocol,
                                 UserFilter filter, SplitSection section) {
    std::vector<int> users;
    for (const auto& [user, items] : bundle.gt(section, protocol.channel)) {
        if (items.empty()) continue;
        if (filter == UserFilter::OverlappingOnly &&
            !std::binary_search(bundle.overlapping_users.begin(),
                                bundle.overlapping_users.end(), user)) {
            continue;
        }
        users.push_back(user);
    }
    return users;
}

struct UserMetrics {
    std::vector<double> hr, ndcg;
};

UserMetrics eval_user(const ScorerFn& scorer, int user, const DatasetBundle& bundle,
                      const EvalProtocol& protocol, SplitSection section) {
    const auto& gt = bundle.gt(section, protocol.channel).at(user);
    const auto ranked = rank_items(scorer, user, protocol, bundle);
    UserMetrics m;
    for (int k : protocol.k_values) {
        m.hr.push_back(hr_at_k(ranked, gt, k));
        m.ndcg.push_back(ndcg_at_k(ranked, gt, k));
    }
    return m;
}

MetricReport reduce(const std::vector<UserMetrics>& per_user, const EvalProtocol& protocol,
                    SplitSection section) {
    MetricReport report;
    report.channel = protocol.channel;
    report.candidate_mode = protocol.candidate_mode;
    report.section = section;
    report.k_values = protocol.k_values;
    report.hr.assign(protocol.k_values.size(), 0.0);
    report.ndcg.assign(protocol.k_values.size(), 0.0);
    for (const auto& m : per_user) {
        for (std::size_t i = 0; i < m.hr.size(); ++i) {
            report.hr[i] += m.hr[i];
            report.ndcg[i] += m.ndcg[i];
        }
    }
    report.n_users = static_cast<int>(per_user.size());
    const double n = static_cast<double>(per_user.size());
    for (std::size_t i = 0; i < report.hr.size(); ++i) {
        report.hr[i] /= n;
        report.ndcg[i] /= n;
    }
    return report;
}

}  // namespace

MetricReport evaluate(const ScorerFn& scorer, const DatasetBundle& bundle,
                      const EvalProtocol& protocol, UserFilter filter, SplitSection section) {
    protocol.validate();
    const auto users = evaluable_users(bundle, protocol, filter, section);
    if (users.empty()) throw Error("evaluate: no evaluable users");
    std::vector<UserMetrics> per_user;
    per_user.reserve(users.size());
    for (int user : users) per_user.push_back(eval_user(scorer, user, bundle, protocol, section));
    return reduce(per_user, protocol, section);
}

MetricReport evaluate_parallel(const ScorerFactory& make_scorer, const DatasetBundle& bundle,
                               const EvalProtocol& protocol, UserFilter filter,
                               SplitSection section, int threads) {
    protocol.validate();
    if (threads <= 1) return evaluate(make_scorer(), bundle, protocol, filter, section);
    const auto users = evaluable_users(bundle, protocol, filter, section);
    if (users.empty()) throw Error("evaluate: no evaluable users");

    std::vector<UserMetrics> per_user(users.size());
    std::vector<std::thread> pool;
    const auto n_threads = std::min<std::size_t>(static_cast<std::size_t>(threads), users.size());
    std::vector<std::exception_ptr> errors(n_threads);
    for (std::size_t t = 0; t < n_threads; ++t) {
        pool.emplace_back([&, t] {
            try {
                const ScorerFn scorer = make_scorer();
                for (std::size_t i = t; i < users.size(); i += n_threads) {
                    per_user[i] = eval_user(scorer, users[i], bundle, protocol, section);
                }
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return reduce(per_user, protocol, section);
}

MeanStd mean_std(const std::vector<double>& xs) {
    MeanStd out;
    if (xs.empty()) return out;
    for (double x : xs) out.mean += x;
    out.mean /= static_cast<double>(xs.size());
    double ss = 0.0;
    for (double x : xs) ss += (x - out.mean) * (x - out.mean);
    out.stddev = std::sqrt(ss / static_cast<double>(xs.size()));
    return out;
}

}  // namespace c2rec
