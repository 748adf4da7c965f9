#include "c2rec/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace c2rec {

void GenConfig::validate() const {
    if (n_users < 1 || n_items < 1) throw Error("synthgen: need users and items");
    if (latent_dim < 1) throw Error("synthgen: latent_dim must be >= 1");
    if (!(gamma >= 0.0)) throw Error("synthgen: gamma must be >= 0");
    if (overlap_user_frac < 0.0 || overlap_user_frac > 1.0 || overlap_item_frac < 0.0 ||
        overlap_item_frac > 1.0) {
        throw Error("synthgen: overlap fractions must be in [0, 1]");
    }
    if (min_interactions < 1 || max_interactions < min_interactions) {
        throw Error("synthgen: need 1 <= min_interactions <= max_interactions");
    }
    if (dup_prob < 0.0 || dup_prob > 1.0) throw Error("synthgen: dup_prob must be in [0, 1]");
}

double GroundTruth::affinity(int user, int item, Channel c) const {
    const auto u = static_cast<std::size_t>(user);
    const auto v = static_cast<std::size_t>(item);
    const double* z = shared_factors.row(u);
    const double* delta = channel_offsets[idx(c)].row(u);
    const double* w = item_factors.row(v);
    double s = 0.0;
    for (int j = 0; j < latent_dim; ++j) {
        s += (z[j] + gamma * delta[j]) * w[j];
    }
    return s;
}

namespace {

enum class UserRole { Overlapping, OffOnly, OnOnly };

// weighted draw without replacement; weights renormalize implicitly as
// drawn entries are zeroed
std::vector<int> draw_items(Rng& rng, const std::vector<int>& pool, std::vector<double>& weights,
                            int count) {
    double total = 0.0;
    for (double w : weights) total += w;
    std::vector<int> drawn;
    drawn.reserve(static_cast<std::size_t>(count));
    for (int n = 0; n < count; ++n) {
        const double r = rng.uniform01() * total;
        double acc = 0.0;
        std::size_t pick = weights.size() - 1;
        for (std::size_t i = 0; i < weights.size(); ++i) {
            acc += weights[i];
            if (r < acc && weights[i] > 0.0) {
                pick = i;
                break;
            }
        }
        // guard against picking an exhausted slot through rounding
        while (weights[pick] == 0.0 && pick > 0) --pick;
        drawn.push_back(pool[pick]);
        total -= weights[pick];
        weights[pick] = 0.0;
    }
    return drawn;
}

}  // namespace

GenResult generate(const GenConfig& config) {
    config.validate();
    Rng rng(config.seed);

    GenResult result;
    GroundTruth& truth = result.truth;
    truth.latent_dim = config.latent_dim;
    truth.gamma = config.gamma;
    const auto nu = static_cast<std::size_t>(config.n_users);
    const auto nv = static_cast<std::size_t>(config.n_items);
    const auto f = static_cast<std::size_t>(config.latent_dim);

    // Latent geometry: shared taste occupies the first half of the
    // coordinates, channel offsets the second half, and items alternate
    // between the two subspaces. Even items behave the same in both channels,
    // odd items are channel-specific (scaled by gamma), so the shared/specific
    // mix genuinely varies by item.
    const std::size_t shared_dims = (f + 1) / 2;
    truth.shared_factors = Mat(nu, f);
    truth.channel_offsets[0] = Mat(nu, f);
    truth.channel_offsets[1] = Mat(nu, f);
    truth.item_factors = Mat(nv, f);
    const double shared_scale = 1.0 / std::sqrt(static_cast<double>(shared_dims));
    const double specific_scale =
        f > shared_dims ? 1.0 / std::sqrt(static_cast<double>(f - shared_dims)) : 0.0;
    for (std::size_t u = 0; u < nu; ++u) {
        for (std::size_t j = 0; j < shared_dims; ++j) {
            truth.shared_factors.at(u, j) = rng.normal();
        }
        for (std::size_t j = shared_dims; j < f; ++j) {
            truth.channel_offsets[0].at(u, j) = rng.normal();
            truth.channel_offsets[1].at(u, j) = rng.normal();
        }
    }
    for (std::size_t v = 0; v < nv; ++v) {
        if (v % 2 == 0 || f == shared_dims) {
            for (std::size_t j = 0; j < shared_dims; ++j) {
                truth.item_factors.at(v, j) = rng.normal() * shared_scale;
            }
        } else {
            for (std::size_t j = shared_dims; j < f; ++j) {
                truth.item_factors.at(v, j) = rng.normal() * specific_scale;
            }
        }
    }

    // user roles: overlapping block first, then offline-only, then online-only
    const int n_overlap = static_cast<int>(config.overlap_user_frac * config.n_users);
    const int n_rest = config.n_users - n_overlap;
    const int n_off_only = (n_rest + 1) / 2;
    auto role_of = [&](int u) {
        if (u < n_overlap) return UserRole::Overlapping;
        return u < n_overlap + n_off_only ? UserRole::OffOnly : UserRole::OnOnly;
    };

    // item pools: shared block first, remainder split between the channels
    const int n_shared_items = static_cast<int>(config.overlap_item_frac * config.n_items);
    const int n_item_rest = config.n_items - n_shared_items;
    const int n_off_excl = (n_item_rest + 1) / 2;
    std::array<std::vector<int>, 2> pools;
    for (int v = 0; v < config.n_items; ++v) {
        if (v < n_shared_items) {
            pools[0].push_back(v);
            pools[1].push_back(v);
        } else if (v < n_shared_items + n_off_excl) {
            pools[0].push_back(v);
        } else {
            pools[1].push_back(v);
        }
    }
    for (Channel c : kChannels) {
        if (static_cast<std::size_t>(config.max_interactions) > pools[idx(c)].size()) {
            throw Error("synthgen: max_interactions exceeds the " +
                        std::string(channel_name(c)) + " item pool (" +
                        std::to_string(pools[idx(c)].size()) + ")");
        }
    }

    InteractionStore& store = result.store;
    for (int u = 0; u < config.n_users; ++u) store.add_user("u" + std::to_string(u));
    for (int v = 0; v < config.n_items; ++v) store.add_item("i" + std::to_string(v));

    GenCounters& counters = result.counters;
    std::array<std::unordered_set<int>, 2> seen_users, seen_items;
    auto record = [&](int u, int v, Channel c) {
        if (store.add(u, v, c)) {
            ++counters.interactions[idx(c)];
            seen_users[idx(c)].insert(u);
            seen_items[idx(c)].insert(v);
        } else {
            ++counters.duplicates_suppressed;
        }
    };

    std::vector<double> weights;
    for (int u = 0; u < config.n_users; ++u) {
        const UserRole role = role_of(u);
        for (Channel c : kChannels) {
            if (role == UserRole::OffOnly && c == Channel::On) continue;
            if (role == UserRole::OnOnly && c == Channel::Off) continue;
            const auto& pool = pools[idx(c)];
            const int count =
                config.min_interactions +
                static_cast<int>(rng.below(static_cast<std::uint64_t>(
                    config.max_interactions - config.min_interactions + 1)));

            // softmax of planted affinity over the channel's pool
            weights.resize(pool.size());
            double max_aff = -1e300;
            for (std::size_t i = 0; i < pool.size(); ++i) {
                weights[i] = truth.affinity(u, pool[i], c);
                max_aff = std::max(max_aff, weights[i]);
            }
            for (double& w : weights) w = std::exp(w - max_aff);

            for (int v : draw_items(rng, pool, weights, count)) {
                record(u, v, c);
                if (role == UserRole::Overlapping && rng.uniform01() < config.dup_prob) {
                    record(u, v, other(c));
                }
            }
        }
    }
    store.finalize();

    counters.users = {static_cast<int>(seen_users[0].size()),
                      static_cast<int>(seen_users[1].size())};
    counters.items = {static_cast<int>(seen_items[0].size()),
                      static_cast<int>(seen_items[1].size())};
    for (int u : seen_users[0]) {
        if (seen_users[1].count(u) != 0) ++counters.user_overlap;
    }
    for (int v : seen_items[0]) {
        if (seen_items[1].count(v) != 0) ++counters.item_overlap;
    }
    return result;
}

std::vector<int> oracle_topk(const GroundTruth& truth, int user, Channel c, int k) {
    const int n_items = static_cast<int>(truth.item_factors.rows);
    if (k < 0) throw Error("oracle_topk: k must be >= 0");
    std::vector<int> items(static_cast<std::size_t>(n_items));
    for (int v = 0; v < n_items; ++v) items[static_cast<std::size_t>(v)] = v;
    std::stable_sort(items.begin(), items.end(), [&](int a, int b) {
        const double sa = truth.affinity(user, a, c);
        const double sb = truth.affinity(user, b, c);
        if (sa != sb) return sa > sb;
        return a < b;
    });
    items.resize(std::min<std::size_t>(items.size(), static_cast<std::size_t>(k)));
    return items;
}

}  // namespace c2rec
