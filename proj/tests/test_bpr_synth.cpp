#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "c2rec/bpr.hpp"
#include "c2rec/split.hpp"
#include "c2rec/synthgen.hpp"

using namespace c2rec;

namespace {

// Spearman rank correlation between two score vectors (no ties expected)
double spearman(const std::vector<double>& a, const std::vector<double>& b) {
    const auto n = a.size();
    auto ranks = [n](const std::vector<double>& xs) {
        std::vector<std::size_t> order(n);
        for (std::size_t i = 0; i < n; ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&xs](std::size_t x, std::size_t y) {
            return xs[x] < xs[y];
        });
        std::vector<double> rank(n);
        for (std::size_t i = 0; i < n; ++i) rank[order[i]] = static_cast<double>(i);
        return rank;
    };
    const auto ra = ranks(a);
    const auto rb = ranks(b);
    double d2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) d2 += (ra[i] - rb[i]) * (ra[i] - rb[i]);
    const double nn = static_cast<double>(n);
    return 1.0 - 6.0 * d2 / (nn * (nn * nn - 1.0));
}

}  // namespace

TEST_CASE("bpr pairwise loss and slope at zero score difference") {
    CHECK(-std::log(sigmoid(0.0)) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    // d(-ln sigmoid(delta))/d(delta) = sigmoid(delta) - 1
    CHECK(sigmoid(0.0) - 1.0 == doctest::Approx(-0.5).epsilon(1e-12));
}

TEST_CASE("bpr scores are plain dot products") {
    BprParams params;
    params.user_factors = Mat(2, 3);
    params.item_factors = Mat(2, 3);
    CHECK(bpr_score(params, 0, 0) == 0.0);

    params.user_factors.at(0, 0) = 1.0;  // orthogonal unit vectors
    params.item_factors.at(0, 1) = 1.0;
    CHECK(bpr_score(params, 0, 0) == 0.0);

    Rng rng(6);
    for (double& x : params.user_factors.a) x = rng.uniform(-1, 1);
    for (double& x : params.item_factors.a) x = rng.uniform(-1, 1);
    double want = 0.0;
    for (int j = 0; j < 3; ++j) want += params.user_factors.at(1, j) * params.item_factors.at(0, j);
    CHECK(bpr_score(params, 1, 0) == doctest::Approx(want).epsilon(1e-15));
}

TEST_CASE("bpr learns a dominant item on a toy problem") {
    // item 0 is purchased by everyone, items 1-3 by nobody
    const std::vector<std::pair<int, int>> positives{{0, 0}, {1, 0}, {2, 0}};
    BprConfig config;
    config.d = 8;
    config.epochs = 200;
    config.learning_rate = 0.05;
    config.seed = 3;
    const auto params = bpr_train(positives, 3, 4, config);
    for (int u = 0; u < 3; ++u) {
        int best = 0;
        for (int v = 1; v < 4; ++v) {
            if (bpr_score(params, u, v) > bpr_score(params, u, best)) best = v;
        }
        CHECK(best == 0);
    }
}

TEST_CASE("bpr training is deterministic under a fixed seed") {
    const std::vector<std::pair<int, int>> positives{{0, 1}, {1, 2}, {2, 0}, {0, 3}};
    BprConfig config;
    config.epochs = 5;
    config.seed = 11;
    const auto a = bpr_train(positives, 3, 4, config);
    const auto b = bpr_train(positives, 3, 4, config);
    CHECK(a.user_factors.a == b.user_factors.a);
    CHECK(a.item_factors.a == b.item_factors.a);
}

TEST_CASE("generator is deterministic and matches its own counters") {
    GenConfig config;
    config.n_users = 80;
    config.n_items = 60;
    config.min_interactions = 4;
    config.max_interactions = 12;
    config.dup_prob = 0.3;
    config.seed = 42;

    const auto a = generate(config);
    const auto b = generate(config);
    REQUIRE(a.store.n_triples() == b.store.n_triples());
    for (std::size_t i = 0; i < a.store.triples().size(); ++i) {
        CHECK(a.store.triples()[i].user == b.store.triples()[i].user);
        CHECK(a.store.triples()[i].item == b.store.triples()[i].item);
        CHECK(a.store.triples()[i].channel == b.store.triples()[i].channel);
    }

    const auto report = stats(a.store);
    CHECK(report.off.interactions == a.counters.interactions[idx(Channel::Off)]);
    CHECK(report.on.interactions == a.counters.interactions[idx(Channel::On)]);
    CHECK(report.off.users == a.counters.users[idx(Channel::Off)]);
    CHECK(report.on.users == a.counters.users[idx(Channel::On)]);
    CHECK(report.off.items == a.counters.items[idx(Channel::Off)]);
    CHECK(report.on.items == a.counters.items[idx(Channel::On)]);
    CHECK(report.user_overlap == a.counters.user_overlap);
    CHECK(report.item_overlap == a.counters.item_overlap);
}

TEST_CASE("full overlap with certain duplication mirrors every pair") {
    GenConfig config;
    config.n_users = 30;
    config.n_items = 40;
    config.gamma = 0.0;
    config.overlap_user_frac = 1.0;
    config.overlap_item_frac = 1.0;
    config.dup_prob = 1.0;
    config.min_interactions = 3;
    config.max_interactions = 8;
    config.seed = 8;
    const auto gen = generate(config);
    for (int u = 0; u < gen.store.n_users(); ++u) {
        CHECK(gen.store.items_of(u, Channel::Off) == gen.store.items_of(u, Channel::On));
    }
}

TEST_CASE("zero overlap fraction yields disjoint user sets") {
    GenConfig config;
    config.n_users = 50;
    config.n_items = 60;
    config.overlap_user_frac = 0.0;
    config.min_interactions = 2;
    config.max_interactions = 6;
    config.seed = 13;
    const auto gen = generate(config);
    CHECK(gen.store.overlapping_users().empty());
}

TEST_CASE("infeasible draw counts are rejected") {
    GenConfig config;
    config.n_items = 10;
    config.overlap_item_frac = 0.5;  // per-channel pools smaller than the draws
    config.min_interactions = 9;
    config.max_interactions = 9;
    CHECK_THROWS_AS(generate(config), Error);
}

TEST_CASE("gamma drives the divergence between channel rankings") {
    auto mean_rank_correlation = [](double gamma) {
        GenConfig config;
        config.n_users = 40;
        config.n_items = 50;
        config.gamma = gamma;
        config.overlap_user_frac = 1.0;
        config.min_interactions = 2;
        config.max_interactions = 4;
        config.seed = 55;
        const auto gen = generate(config);
        double sum = 0.0;
        for (int u = 0; u < config.n_users; ++u) {
            std::vector<double> off, on;
            for (int v = 0; v < config.n_items; ++v) {
                off.push_back(gen.truth.affinity(u, v, Channel::Off));
                on.push_back(gen.truth.affinity(u, v, Channel::On));
            }
            sum += spearman(off, on);
        }
        return sum / config.n_users;
    };
    const double with_divergence = mean_rank_correlation(3.0);
    const double without = mean_rank_correlation(0.0);
    CHECK(without == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(with_divergence < without - 0.3);
}

TEST_CASE("oracle_topk equals a brute-force sort") {
    GenConfig config;
    config.n_users = 10;
    config.n_items = 25;
    config.gamma = 2.0;
    config.min_interactions = 2;
    config.max_interactions = 6;
    config.seed = 70;
    const auto gen = generate(config);

    for (int u = 0; u < 5; ++u) {
        for (Channel c : kChannels) {
            const auto full = oracle_topk(gen.truth, u, c, config.n_items);
            CHECK(static_cast<int>(full.size()) == config.n_items);
            for (std::size_t i = 1; i < full.size(); ++i) {
                const double prev = gen.truth.affinity(u, full[i - 1], c);
                const double cur = gen.truth.affinity(u, full[i], c);
                CHECK(prev >= cur);
            }
            const auto top3 = oracle_topk(gen.truth, u, c, 3);
            CHECK(std::vector<int>(full.begin(), full.begin() + 3) == top3);
        }
    }

    // gamma = 0 makes the channels indistinguishable
    GenConfig same = config;
    same.gamma = 0.0;
    const auto flat = generate(same);
    for (int u = 0; u < 5; ++u) {
        CHECK(oracle_topk(flat.truth, u, Channel::Off, 10) ==
              oracle_topk(flat.truth, u, Channel::On, 10));
    }
}

TEST_CASE("self-match probe equals a per-channel evaluation by definition") {
    GenConfig config;
    config.n_users = 100;
    config.n_items = 60;
    config.gamma = 2.0;
    config.min_interactions = 8;
    config.max_interactions = 16;
    config.seed = 91;
    const auto gen = generate(config);
    const auto bundle = split(gen.store, 14);

    BprConfig bpr_config;
    bpr_config.epochs = 12;
    bpr_config.seed = 5;
    const auto reports = probe_experiment(gen.store, bundle, ProbeRegime::SelfMatch,
                                          CandidateMode::WithoutPurchased, bpr_config, {5});

    for (Channel c : kChannels) {
        const auto params =
            bpr_train(train_positives(bundle, c), bundle.n_users(), bundle.n_items(), bpr_config);
        EvalProtocol protocol;
        protocol.k_values = {5};
        protocol.channel = c;
        const auto direct = evaluate(bpr_scorer(params), bundle, protocol,
                                     UserFilter::OverlappingOnly, SplitSection::Test);
        CHECK(reports[idx(c)].hr == direct.hr);
        CHECK(reports[idx(c)].ndcg == direct.ndcg);
        CHECK(reports[idx(c)].n_users == direct.n_users);
    }
}

TEST_CASE("identical channel preferences make cross-match comparable to self-match") {
    std::vector<double> gaps;
    for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
        GenConfig config;
        config.n_users = 150;
        config.n_items = 80;
        config.gamma = 0.0;
        config.overlap_user_frac = 0.4;
        config.min_interactions = 10;
        config.max_interactions = 20;
        config.seed = seed;
        const auto gen = generate(config);
        const auto bundle = split(gen.store, seed);
        BprConfig bpr_config;
        bpr_config.epochs = 20;
        bpr_config.seed = seed;
        const auto rows = run_probe_rows(bundle, bpr_config, {5});
        for (Channel c : kChannels) {
            gaps.push_back(rows[0].by_channel[idx(c)].ndcg_at(5) -
                           rows[1].by_channel[idx(c)].ndcg_at(5));
        }
    }
    double mean_gap = 0.0;
    for (double g : gaps) mean_gap += g;
    mean_gap /= static_cast<double>(gaps.size());
    CHECK(std::abs(mean_gap) < 0.08);
}

TEST_CASE("integration regime scores are channel-independent") {
    GenConfig config;
    config.n_users = 80;
    config.n_items = 50;
    config.min_interactions = 4;
    config.max_interactions = 10;
    config.seed = 12;
    const auto gen = generate(config);
    const auto bundle = split(gen.store, 9);

    BprConfig bpr_config;
    bpr_config.epochs = 8;
    const auto merged = bpr_train(train_positives_merged(bundle), bundle.n_users(),
                                  bundle.n_items(), bpr_config);
    const auto fn = bpr_scorer(merged);
    for (int u = 0; u < 20; ++u) {
        for (int v = 0; v < 20; ++v) {
            CHECK(fn(u, v, Channel::Off) == fn(u, v, Channel::On));
        }
    }
}

TEST_CASE("with indistinguishable channels a merged model recovers the planted signal") {
    // gamma = 0: one global preference structure, so BPR trained on the union
    // should be about as good as the per-channel models
    std::vector<double> merged_scores, per_channel_scores;
    for (std::uint64_t seed : {3ULL, 4ULL}) {
        GenConfig config;
        config.n_users = 200;
        config.n_items = 90;
        config.gamma = 0.0;
        config.overlap_user_frac = 0.5;
        config.min_interactions = 8;
        config.max_interactions = 16;
        config.seed = seed;
        const auto gen = generate(config);
        const auto bundle = split(gen.store, seed);

        BprConfig bpr_config;
        bpr_config.epochs = 25;
        bpr_config.seed = seed;
        const auto merged = bpr_train(train_positives_merged(bundle), bundle.n_users(),
                                      bundle.n_items(), bpr_config);
        for (Channel c : kChannels) {
            const auto per_channel = bpr_train(train_positives(bundle, c), bundle.n_users(),
                                               bundle.n_items(), bpr_config);
            EvalProtocol protocol;
            protocol.k_values = {10};
            protocol.channel = c;
            merged_scores.push_back(evaluate(bpr_scorer(merged), bundle, protocol,
                                             UserFilter::All, SplitSection::Test)
                                        .ndcg_at(10));
            per_channel_scores.push_back(evaluate(bpr_scorer(per_channel), bundle, protocol,
                                                  UserFilter::All, SplitSection::Test)
                                             .ndcg_at(10));
        }
    }
    double merged_mean = 0.0, per_channel_mean = 0.0;
    for (double x : merged_scores) merged_mean += x / merged_scores.size();
    for (double x : per_channel_scores) per_channel_mean += x / per_channel_scores.size();
    CHECK(merged_mean > 0.05);
    CHECK(std::abs(merged_mean - per_channel_mean) < 0.05);
}

TEST_CASE("probe requires overlapping users") {
    GenConfig config;
    config.n_users = 40;
    config.n_items = 40;
    config.overlap_user_frac = 0.0;
    config.min_interactions = 3;
    config.max_interactions = 6;
    config.seed = 2;
    const auto gen = generate(config);
    const auto bundle = split(gen.store, 2);
    BprConfig bpr_config;
    bpr_config.epochs = 2;
    CHECK_THROWS_AS(probe_experiment(gen.store, bundle, ProbeRegime::SelfMatch,
                                     CandidateMode::WithoutPurchased, bpr_config, {5}),
                    Error);
    CHECK_THROWS_AS(run_probe_rows(bundle, bpr_config, {5}), Error);
}
