#include "c2rec/interactions.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace c2rec {

const char* channel_name(Channel c) { return c == Channel::Off ? "off" : "on"; }

Channel parse_channel(const std::string& token) {
    if (token == "off") return Channel::Off;
    if (token == "on") return Channel::On;
    throw Error("unknown channel token '" + token + "' (expected 'off' or 'on')");
}

int InteractionStore::add_user(const std::string& raw) {
    auto it = user_index_.find(raw);
    if (it != user_index_.end()) return it->second;
    const int id = static_cast<int>(user_ids_.size());
    user_ids_.push_back(raw);
    user_index_.emplace(raw, id);
    by_user_.emplace_back();
    seen_.emplace_back();
    return id;
}

int InteractionStore::add_item(const std::string& raw) {
    auto it = item_index_.find(raw);
    if (it != item_index_.end()) return it->second;
    const int id = static_cast<int>(item_ids_.size());
    item_ids_.push_back(raw);
    item_index_.emplace(raw, id);
    return id;
}

bool InteractionStore::add(int user, int item, Channel channel) {
    if (user < 0 || user >= n_users()) throw Error("add: user id out of range");
    if (item < 0 || item >= n_items()) throw Error("add: item id out of range");
    auto& seen = seen_[static_cast<std::size_t>(user)][idx(channel)];
    if (!seen.insert(item).second) return false;
    triples_.push_back({user, item, channel});
    by_user_[static_cast<std::size_t>(user)][idx(channel)].push_back(item);
    finalized_ = false;
    return true;
}

bool InteractionStore::add_raw(const std::string& user, const std::string& item, Channel channel) {
    return add(add_user(user), add_item(item), channel);
}

void InteractionStore::finalize() {
    for (auto& per_channel : by_user_) {
        for (auto& items : per_channel) std::sort(items.begin(), items.end());
    }
    finalized_ = true;
}

const std::vector<int>& InteractionStore::items_of(int user, Channel c) const {
    if (!finalized_) throw Error("InteractionStore: finalize() before queries");
    if (user < 0 || user >= n_users()) throw Error("items_of: user id out of range");
    return by_user_[static_cast<std::size_t>(user)][idx(c)];
}

bool InteractionStore::has_triple(int user, int item, Channel c) const {
    const auto& items = items_of(user, c);
    return std::binary_search(items.begin(), items.end(), item);
}

bool InteractionStore::has_pair(int user, int item) const {
    return has_triple(user, item, Channel::Off) || has_triple(user, item, Channel::On);
}

PairPartition InteractionStore::pair_partition(int user, int item) const {
    const bool off = has_triple(user, item, Channel::Off);
    const bool on = has_triple(user, item, Channel::On);
    if (off && on) return PairPartition::Both;
    if (off) return PairPartition::OffOnly;
    if (on) return PairPartition::OnOnly;
    throw Error("pair_partition: no interaction for this (user, item)");
}

std::vector<int> InteractionStore::overlapping_users() const {
    std::vector<int> out;
    for (int u = 0; u < n_users(); ++u) {
        if (user_active(u, Channel::Off) && user_active(u, Channel::On)) out.push_back(u);
    }
    return out;
}

namespace {

// splits a CSV line on commas; the formats here never need quoting
std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    fields.push_back(cur);
    return fields;
}

}  // namespace

InteractionStore load_interactions(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open interactions file: " + path);

    InteractionStore store;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || (line.size() == 1 && line[0] == '\r')) continue;
        auto fields = split_csv_line(line);
        if (line_no == 1 && !fields.empty() && fields[0] == "user_id") continue;  // header
        if (fields.size() != 3) {
            throw Error(path + ":" + std::to_string(line_no) +
                        ": expected 3 fields (user_id,item_id,channel), got " +
                        std::to_string(fields.size()));
        }
        if (fields[0].empty() || fields[1].empty()) {
            throw Error(path + ":" + std::to_string(line_no) + ": empty user or item id");
        }
        Channel channel;
        try {
            channel = parse_channel(fields[2]);
        } catch (const Error& e) {
            throw Error(path + ":" + std::to_string(line_no) + ": " + e.what());
        }
        store.add_raw(fields[0], fields[1], channel);
    }
    store.finalize();
    return store;
}

void save_interactions(const InteractionStore& store, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write interactions file: " + path);
    out << "user_id,item_id,channel\n";
    for (const auto& t : store.triples()) {
        out << store.user_ids()[static_cast<std::size_t>(t.user)] << ','
            << store.item_ids()[static_cast<std::size_t>(t.item)] << ',' << channel_name(t.channel)
            << '\n';
    }
    if (!out) throw Error("write failed: " + path);
}

StatsReport stats(const InteractionStore& store) {
    if (store.n_triples() == 0) throw Error("stats: empty interaction store");

    StatsReport report;
    std::array<std::unordered_set<int>, 2> users, items;
    std::array<std::int64_t, 2> counts = {0, 0};
    for (const auto& t : store.triples()) {
        users[idx(t.channel)].insert(t.user);
        items[idx(t.channel)].insert(t.item);
        ++counts[idx(t.channel)];
    }
    auto fill = [&](Channel c, ChannelStats& s) {
        s.users = static_cast<int>(users[idx(c)].size());
        s.items = static_cast<int>(items[idx(c)].size());
        s.interactions = counts[idx(c)];
        const double cells = static_cast<double>(s.users) * static_cast<double>(s.items);
        s.sparsity = cells > 0.0 ? 1.0 - static_cast<double>(s.interactions) / cells : 0.0;
    };
    fill(Channel::Off, report.off);
    fill(Channel::On, report.on);

    for (int u : users[0]) {
        if (users[1].count(u) != 0) ++report.user_overlap;
    }
    for (int v : items[0]) {
        if (items[1].count(v) != 0) ++report.item_overlap;
    }
    report.total_triples = static_cast<std::int64_t>(store.n_triples());
    return report;
}

}  // namespace c2rec
