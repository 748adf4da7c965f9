#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "c2rec/common.hpp"

namespace c2rec {

// Sales channel of an interaction. Off sorts before On everywhere.
enum class Channel : std::uint8_t { Off = 0, On = 1 };

inline constexpr std::array<Channel, 2> kChannels = {Channel::Off, Channel::On};

inline Channel other(Channel c) { return c == Channel::Off ? Channel::On : Channel::Off; }
inline std::size_t idx(Channel c) { return static_cast<std::size_t>(c); }

const char* channel_name(Channel c);
Channel parse_channel(const std::string& token);  // throws Error on unknown token

struct Interaction {
    int user = 0;
    int item = 0;
    Channel channel = Channel::Off;
};

enum class PairPartition { OffOnly, OnOnly, Both };

// Deduplicated (user, item, channel) triples with dense ids assigned in
// first-appearance order. Raw ids are kept as strings.
class InteractionStore {
public:
    int add_user(const std::string& raw);
    int add_item(const std::string& raw);
    // returns false if the triple was already present
    bool add(int user, int item, Channel channel);
    bool add_raw(const std::string& user, const std::string& item, Channel channel);

    int n_users() const { return static_cast<int>(user_ids_.size()); }
    int n_items() const { return static_cast<int>(item_ids_.size()); }
    std::size_t n_triples() const { return triples_.size(); }

    const std::vector<Interaction>& triples() const { return triples_; }
    const std::vector<std::string>& user_ids() const { return user_ids_; }
    const std::vector<std::string>& item_ids() const { return item_ids_; }

    // sorted item lists; valid after finalize()
    const std::vector<int>& items_of(int user, Channel c) const;
    bool has_pair(int user, int item) const;  // interaction in either channel
    bool has_triple(int user, int item, Channel c) const;
    PairPartition pair_partition(int user, int item) const;  // throws if no interaction

    bool user_active(int user, Channel c) const { return !items_of(user, c).empty(); }
    std::vector<int> overlapping_users() const;  // sorted

    // Sorts per-user item lists. Called automatically by the loaders; call it
    // after hand-building a store with add()/add_raw().
    void finalize();

private:
    std::vector<std::string> user_ids_, item_ids_;
    std::unordered_map<std::string, int> user_index_, item_index_;
    std::vector<Interaction> triples_;
    // per user, per channel
    std::vector<std::array<std::vector<int>, 2>> by_user_;
    std::vector<std::array<std::unordered_set<int>, 2>> seen_;
    bool finalized_ = false;
};

struct ChannelStats {
    int users = 0;
    int items = 0;
    std::int64_t interactions = 0;
    double sparsity = 0.0;
};

struct StatsReport {
    ChannelStats off, on;
    int user_overlap = 0;
    int item_overlap = 0;
    std::int64_t total_triples = 0;
};

// CSV with header "user_id,item_id,channel"; channel token in {off, on}.
InteractionStore load_interactions(const std::string& path);
void save_interactions(const InteractionStore& store, const std::string& path);

StatsReport stats(const InteractionStore& store);  // throws on empty store

}  // namespace c2rec
