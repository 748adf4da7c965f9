#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "c2rec/metrics.hpp"

using namespace c2rec;

namespace {

// reference implementations: full sort, literal formulas
double ref_hr(const std::vector<int>& ranked, const std::set<int>& gt, int k) {
    int hits = 0;
    for (int i = 0; i < std::min<int>(k, static_cast<int>(ranked.size())); ++i) {
        if (gt.count(ranked[static_cast<std::size_t>(i)]) != 0) ++hits;
    }
    return static_cast<double>(hits) /
           static_cast<double>(std::min<std::size_t>(static_cast<std::size_t>(k), gt.size()));
}

double ref_ndcg(const std::vector<int>& ranked, const std::set<int>& gt, int k) {
    double dcg = 0.0;
    for (int i = 0; i < std::min<int>(k, static_cast<int>(ranked.size())); ++i) {
        if (gt.count(ranked[static_cast<std::size_t>(i)]) != 0) {
            dcg += std::log(2.0) / std::log(static_cast<double>(i) + 2.0);
        }
    }
    double idcg = 0.0;
    const auto ideal = std::min<std::size_t>(static_cast<std::size_t>(k), gt.size());
    for (std::size_t i = 0; i < ideal; ++i) {
        idcg += std::log(2.0) / std::log(static_cast<double>(i) + 2.0);
    }
    return dcg / idcg;
}

DatasetBundle tiny_bundle(int n_items, const std::vector<int>& gt_items,
                          const std::vector<int>& train_items, Channel c = Channel::Off) {
    DatasetBundle bundle;
    bundle.user_ids = {"u0"};
    for (int v = 0; v < n_items; ++v) bundle.item_ids.push_back("i" + std::to_string(v));
    auto sorted_gt = gt_items;
    std::sort(sorted_gt.begin(), sorted_gt.end());
    bundle.test_gt[idx(c)][0] = sorted_gt;
    auto sorted_train = train_items;
    std::sort(sorted_train.begin(), sorted_train.end());
    if (!sorted_train.empty()) bundle.train_items[idx(c)][0] = sorted_train;
    return bundle;
}

}  // namespace

TEST_CASE("rank_items sorts by score with index tie-break") {
    const auto bundle = tiny_bundle(5, {0}, {});
    EvalProtocol protocol;
    protocol.k_values = {5};
    const ScorerFn negated_index = [](int, int item, Channel) {
        return -static_cast<double>(item);
    };
    CHECK(rank_items(negated_index, 0, protocol, bundle) == std::vector<int>{0, 1, 2, 3, 4});

    const ScorerFn constant = [](int, int, Channel) { return 1.0; };
    CHECK(rank_items(constant, 0, protocol, bundle) == std::vector<int>{0, 1, 2, 3, 4});
}

TEST_CASE("rank_items drops the user's train items without purchased") {
    const auto bundle = tiny_bundle(5, {0}, {2});
    EvalProtocol protocol;
    protocol.k_values = {5};
    const ScorerFn constant = [](int, int, Channel) { return 0.0; };
    const auto ranked = rank_items(constant, 0, protocol, bundle);
    CHECK(ranked == std::vector<int>{0, 1, 3, 4});

    protocol.candidate_mode = CandidateMode::WithPurchased;
    CHECK(rank_items(constant, 0, protocol, bundle).size() == 5);
}

TEST_CASE("rank_items equals a full-sort reference on random scorers") {
    Rng rng(17);
    for (int trial = 0; trial < 50; ++trial) {
        const int n_items = 20;
        std::vector<double> scores(n_items);
        for (double& s : scores) s = rng.uniform(-1.0, 1.0);
        const auto bundle = tiny_bundle(n_items, {0}, {});
        EvalProtocol protocol;
        protocol.k_values = {7};
        const ScorerFn fn = [&scores](int, int item, Channel) {
            return scores[static_cast<std::size_t>(item)];
        };
        const auto got = rank_items(fn, 0, protocol, bundle);

        std::vector<int> want(n_items);
        for (int v = 0; v < n_items; ++v) want[static_cast<std::size_t>(v)] = v;
        std::sort(want.begin(), want.end(), [&](int a, int b) {
            const double sa = scores[static_cast<std::size_t>(a)];
            const double sb = scores[static_cast<std::size_t>(b)];
            if (sa != sb) return sa > sb;
            return a < b;
        });
        want.resize(7);
        CHECK(got == want);
    }
}

TEST_CASE("hit ratio closed-form examples") {
    CHECK(hr_at_k({7, 1, 2, 3, 4}, {7}, 5) == doctest::Approx(1.0));
    CHECK(hr_at_k({1, 2, 3, 4, 5, 7}, {7}, 5) == doctest::Approx(0.0));
    // three ground-truth items, hits at ranks 1 and 4
    CHECK(hr_at_k({10, 1, 2, 11, 3}, {10, 11, 12}, 5) == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("ndcg closed-form examples") {
    CHECK(ndcg_at_k({5, 1, 2}, {5}, 3) == doctest::Approx(1.0));
    CHECK(ndcg_at_k({1, 2, 5}, {5}, 3) == doctest::Approx(0.5).epsilon(1e-12));

    // hits at ranks 1 and 4 of three ground-truth items
    const double dcg = 1.0 + 1.0 / std::log2(5.0);
    const double idcg = 1.0 + 1.0 / std::log2(3.0) + 1.0 / std::log2(4.0);
    const double got = ndcg_at_k({10, 1, 2, 11, 3}, {10, 11, 12}, 5);
    CHECK(got == doctest::Approx(dcg / idcg).epsilon(1e-12));
    CHECK(got == doctest::Approx(0.6714).epsilon(1e-4));
}

TEST_CASE("metrics agree with the brute-force reference on random rankings") {
    Rng rng(99);
    for (int trial = 0; trial < 1000; ++trial) {
        const int n_items = 2 + static_cast<int>(rng.below(49));
        std::vector<int> ranked(static_cast<std::size_t>(n_items));
        for (int v = 0; v < n_items; ++v) ranked[static_cast<std::size_t>(v)] = v;
        rng.shuffle(ranked);

        const int gt_size = 1 + static_cast<int>(rng.below(std::min(10, n_items)));
        std::set<int> gt;
        while (static_cast<int>(gt.size()) < gt_size) {
            gt.insert(static_cast<int>(rng.below(static_cast<std::uint64_t>(n_items))));
        }
        std::vector<int> gt_sorted(gt.begin(), gt.end());

        const int k = 1 + static_cast<int>(rng.below(12));
        CHECK(hr_at_k(ranked, gt_sorted, k) == doctest::Approx(ref_hr(ranked, gt, k)).epsilon(1e-12));
        CHECK(ndcg_at_k(ranked, gt_sorted, k) ==
              doctest::Approx(ref_ndcg(ranked, gt, k)).epsilon(1e-12));
    }
}

TEST_CASE("hr and ndcg are bounded, and non-decreasing once k covers the ground truth") {
    // below |gt| the min(k, |gt|) normalizer grows with k, so monotonicity
    // only holds from k = |gt| on
    Rng rng(123);
    for (int trial = 0; trial < 100; ++trial) {
        const int n_items = 30;
        std::vector<int> ranked(n_items);
        for (int v = 0; v < n_items; ++v) ranked[static_cast<std::size_t>(v)] = v;
        rng.shuffle(ranked);
        const std::vector<int> gt{3, 9, 17};
        double prev_hr = 0.0, prev_ndcg = 0.0;
        for (int k = 1; k <= n_items; ++k) {
            const double h = hr_at_k(ranked, gt, k);
            const double n = ndcg_at_k(ranked, gt, k);
            if (k > static_cast<int>(gt.size())) {
                CHECK(h >= prev_hr - 1e-12);
                CHECK(n >= prev_ndcg - 1e-12);
            }
            CHECK(h >= 0.0);
            CHECK(h <= 1.0);
            CHECK(n >= 0.0);
            CHECK(n <= 1.0);
            prev_hr = h;
            prev_ndcg = n;
        }
    }
}

TEST_CASE("evaluate with a perfect scorer yields unit hit ratio") {
    auto bundle = tiny_bundle(10, {2, 5}, {});
    bundle.user_ids = {"u0", "u1"};
    bundle.test_gt[idx(Channel::Off)][1] = {7};
    EvalProtocol protocol;
    protocol.k_values = {5, 10};
    const ScorerFn perfect = [&bundle](int user, int item, Channel c) {
        const auto& gt = bundle.test_gt[idx(c)].at(user);
        return std::binary_search(gt.begin(), gt.end(), item) ? 1.0 : 0.0;
    };
    const auto report = evaluate(perfect, bundle, protocol, UserFilter::All, SplitSection::Test);
    CHECK(report.n_users == 2);
    CHECK(report.hr_at(5) == doctest::Approx(1.0));
    CHECK(report.ndcg_at(5) == doctest::Approx(1.0));
}

TEST_CASE("evaluate on a single-user bundle equals that user's metrics") {
    const auto bundle = tiny_bundle(12, {3, 8}, {1});
    EvalProtocol protocol;
    protocol.k_values = {5};
    const ScorerFn fn = [](int, int item, Channel) { return std::cos(item * 1.7); };
    const auto report = evaluate(fn, bundle, protocol, UserFilter::All, SplitSection::Test);
    const auto ranked = rank_items(fn, 0, protocol, bundle);
    CHECK(report.n_users == 1);
    CHECK(report.hr_at(5) == doctest::Approx(hr_at_k(ranked, {3, 8}, 5)));
    CHECK(report.ndcg_at(5) == doctest::Approx(ndcg_at_k(ranked, {3, 8}, 5)));
}

TEST_CASE("random scorer hit ratio approaches the sampling expectation") {
    // HR@5 with |GT|=2 over 100 candidates: E[hits]/2 = 5*2/100/2 = 0.05
    DatasetBundle bundle;
    const int n_users = 400, n_items = 100;
    for (int u = 0; u < n_users; ++u) bundle.user_ids.push_back("u" + std::to_string(u));
    for (int v = 0; v < n_items; ++v) bundle.item_ids.push_back("i" + std::to_string(v));
    for (int u = 0; u < n_users; ++u) {
        bundle.test_gt[idx(Channel::Off)][u] = {u % n_items, (u * 7 + 3) % n_items};
        auto& gt = bundle.test_gt[idx(Channel::Off)][u];
        std::sort(gt.begin(), gt.end());
        gt.erase(std::unique(gt.begin(), gt.end()), gt.end());
    }
    Rng rng(2718);
    std::vector<double> noise(static_cast<std::size_t>(n_users) * n_items);
    for (double& x : noise) x = rng.uniform01();
    EvalProtocol protocol;
    protocol.k_values = {5};
    const ScorerFn fn = [&](int user, int item, Channel) {
        return noise[static_cast<std::size_t>(user) * n_items + static_cast<std::size_t>(item)];
    };
    const auto report = evaluate(fn, bundle, protocol, UserFilter::All, SplitSection::Test);
    CHECK(report.hr_at(5) == doctest::Approx(0.05).epsilon(0.5));
}

TEST_CASE("parallel evaluation reduces to the sequential result") {
    DatasetBundle bundle;
    const int n_users = 50, n_items = 40;
    for (int u = 0; u < n_users; ++u) bundle.user_ids.push_back("u" + std::to_string(u));
    for (int v = 0; v < n_items; ++v) bundle.item_ids.push_back("i" + std::to_string(v));
    for (int u = 0; u < n_users; ++u) {
        bundle.test_gt[idx(Channel::On)][u] = {(u * 3) % n_items};
    }
    EvalProtocol protocol;
    protocol.k_values = {5, 10};
    protocol.channel = Channel::On;
    const ScorerFactory factory = [] {
        return ScorerFn([](int user, int item, Channel) {
            return std::sin(user * 0.37 + item * 1.21);
        });
    };
    const auto sequential = evaluate(factory(), bundle, protocol, UserFilter::All, SplitSection::Test);
    for (int threads : {2, 3, 7}) {
        const auto parallel =
            evaluate_parallel(factory, bundle, protocol, UserFilter::All, SplitSection::Test, threads);
        CHECK(parallel.hr == sequential.hr);
        CHECK(parallel.ndcg == sequential.ndcg);
        CHECK(parallel.n_users == sequential.n_users);
    }
}

TEST_CASE("evaluate errors when no users qualify") {
    const auto bundle = tiny_bundle(5, {1}, {});
    EvalProtocol protocol;
    protocol.channel = Channel::On;  // ground truth lives on the off channel
    const ScorerFn fn = [](int, int, Channel) { return 0.0; };
    CHECK_THROWS_AS(evaluate(fn, bundle, protocol, UserFilter::All, SplitSection::Test), Error);
}

TEST_CASE("rank_items errors when filtering removes every candidate") {
    auto bundle = tiny_bundle(3, {0}, {0, 1, 2});
    EvalProtocol protocol;
    protocol.k_values = {5};
    const ScorerFn fn = [](int, int, Channel) { return 0.0; };
    CHECK_THROWS_AS(rank_items(fn, 0, protocol, bundle), Error);
}
