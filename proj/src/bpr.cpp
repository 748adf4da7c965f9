#include "c2rec/bpr.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace c2rec {

BprParams bpr_train(const std::vector<std::pair<int, int>>& positives, int n_users, int n_items,
                    const BprConfig& config) {
    if (positives.empty()) throw Error("bpr_train: no positive pairs");
    if (config.d < 1 || config.epochs < 0) throw Error("bpr_train: bad config");

    Rng rng(config.seed);
    BprParams params;
    params.user_factors = Mat(static_cast<std::size_t>(n_users), static_cast<std::size_t>(config.d));
    params.item_factors = Mat(static_cast<std::size_t>(n_items), static_cast<std::size_t>(config.d));
    const double bound = 1.0 / std::sqrt(static_cast<double>(config.d));
    for (double& x : params.user_factors.a) x = rng.uniform(-bound, bound);
    for (double& x : params.item_factors.a) x = rng.uniform(-bound, bound);

    std::vector<std::unordered_set<int>> owned(static_cast<std::size_t>(n_users));
    for (const auto& [u, v] : positives) owned[static_cast<std::size_t>(u)].insert(v);

    const auto d = static_cast<std::size_t>(config.d);
    std::vector<std::size_t> order(positives.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::vector<double> pu(d), qi(d), qj(d);

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        rng.shuffle(order);
        for (std::size_t o : order) {
            const auto [u, i] = positives[o];
            const auto& user_owned = owned[static_cast<std::size_t>(u)];
            if (static_cast<int>(user_owned.size()) >= n_items) continue;  // nothing to contrast
            int j = static_cast<int>(rng.below(static_cast<std::uint64_t>(n_items)));
            while (user_owned.count(j) != 0) {
                j = static_cast<int>(rng.below(static_cast<std::uint64_t>(n_items)));
            }

            double* pu_row = params.user_factors.row(static_cast<std::size_t>(u));
            double* qi_row = params.item_factors.row(static_cast<std::size_t>(i));
            double* qj_row = params.item_factors.row(static_cast<std::size_t>(j));
            std::copy(pu_row, pu_row + d, pu.begin());
            std::copy(qi_row, qi_row + d, qi.begin());
            std::copy(qj_row, qj_row + d, qj.begin());

            double diff = 0.0;
            for (std::size_t x = 0; x < d; ++x) diff += pu[x] * (qi[x] - qj[x]);
            const double slope = sigmoid(-diff);  // -dloss/ddiff for loss = -ln sigmoid(diff)

            const double lr = config.learning_rate;
            const double reg = config.reg;
            for (std::size_t x = 0; x < d; ++x) {
                pu_row[x] += lr * (slope * (qi[x] - qj[x]) - reg * pu[x]);
                qi_row[x] += lr * (slope * pu[x] - reg * qi[x]);
                qj_row[x] += lr * (-slope * pu[x] - reg * qj[x]);
            }
        }
    }
    return params;
}

double bpr_score(const BprParams& params, int user, int item) {
    if (user < 0 || static_cast<std::size_t>(user) >= params.user_factors.rows) {
        throw Error("bpr_score: user id out of range");
    }
    if (item < 0 || static_cast<std::size_t>(item) >= params.item_factors.rows) {
        throw Error("bpr_score: item id out of range");
    }
    return dot({params.user_factors.row(static_cast<std::size_t>(user)),
                params.user_factors.cols},
               {params.item_factors.row(static_cast<std::size_t>(item)),
                params.item_factors.cols});
}

ScorerFn bpr_scorer(const BprParams& params) {
    return [&params](int user, int item, Channel) { return bpr_score(params, user, item); };
}

std::vector<std::pair<int, int>> train_positives(const DatasetBundle& bundle, Channel c) {
    std::vector<std::pair<int, int>> pairs;
    for (const auto& ex : bundle.train) {
        if (!ex.is_positive) continue;
        const bool labeled = c == Channel::Off ? ex.label_off != 0 : ex.label_on != 0;
        if (labeled) pairs.emplace_back(ex.user, ex.item);
    }
    return pairs;
}

std::vector<std::pair<int, int>> train_positives_merged(const DatasetBundle& bundle) {
    std::vector<std::pair<int, int>> pairs;
    for (const auto& ex : bundle.train) {
        if (ex.is_positive) pairs.emplace_back(ex.user, ex.item);
    }
    return pairs;
}

namespace {

std::array<MetricReport, 2> probe_with_models(const std::array<BprParams, 2>& models,
                                              const DatasetBundle& bundle, ProbeRegime regime,
                                              CandidateMode candidate_mode,
                                              const std::vector<int>& k_values) {
    std::array<MetricReport, 2> reports;
    for (Channel target : kChannels) {
        const Channel source = regime == ProbeRegime::SelfMatch ? target : other(target);
        EvalProtocol protocol;
        protocol.k_values = k_values;
        protocol.candidate_mode = candidate_mode;
        protocol.channel = target;
        reports[idx(target)] = evaluate(bpr_scorer(models[idx(source)]), bundle, protocol,
                                        UserFilter::OverlappingOnly, SplitSection::Test);
    }
    return reports;
}

std::array<BprParams, 2> train_channel_models(const DatasetBundle& bundle,
                                              const BprConfig& config) {
    std::array<BprParams, 2> models;
    for (Channel c : kChannels) {
        models[idx(c)] =
            bpr_train(train_positives(bundle, c), bundle.n_users(), bundle.n_items(), config);
    }
    return models;
}

}  // namespace

std::array<MetricReport, 2> probe_experiment(const InteractionStore& store,
                                             const DatasetBundle& bundle, ProbeRegime regime,
                                             CandidateMode candidate_mode,
                                             const BprConfig& config,
                                             const std::vector<int>& k_values) {
    if (store.overlapping_users().empty()) throw Error("probe: no overlapping users");
    return probe_with_models(train_channel_models(bundle, config), bundle, regime, candidate_mode,
                             k_values);
}

std::vector<ProbeRow> run_probe_rows(const DatasetBundle& bundle, const BprConfig& config,
                                     const std::vector<int>& k_values) {
    if (bundle.overlapping_users.empty()) throw Error("probe: no overlapping users");
    const auto models = train_channel_models(bundle, config);
    std::vector<ProbeRow> rows;
    rows.push_back({ProbeRegime::SelfMatch, CandidateMode::WithoutPurchased,
                    probe_with_models(models, bundle, ProbeRegime::SelfMatch,
                                      CandidateMode::WithoutPurchased, k_values)});
    rows.push_back({ProbeRegime::CrossMatch, CandidateMode::WithoutPurchased,
                    probe_with_models(models, bundle, ProbeRegime::CrossMatch,
                                      CandidateMode::WithoutPurchased, k_values)});
    rows.push_back({ProbeRegime::CrossMatch, CandidateMode::WithPurchased,
                    probe_with_models(models, bundle, ProbeRegime::CrossMatch,
                                      CandidateMode::WithPurchased, k_values)});
    return rows;
}

}  // namespace c2rec
