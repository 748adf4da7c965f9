#include "c2rec/split.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <unordered_set>

#include <json.hpp>

namespace c2rec {

namespace {

const std::vector<int> kEmptyItems;

enum class UnitKind : std::uint8_t { ExclusiveOff, ExclusiveOn, BothPair };

struct Unit {
    int item;
    UnitKind kind;
};

void insert_sorted(std::vector<int>& v, int x) {
    v.insert(std::upper_bound(v.begin(), v.end(), x), x);
}

}  // namespace

const std::vector<int>& DatasetBundle::train_items_of(int user, Channel c) const {
    auto it = train_items[idx(c)].find(user);
    return it == train_items[idx(c)].end() ? kEmptyItems : it->second;
}

DatasetBundle split(const InteractionStore& store, std::uint64_t seed) {
    if (store.n_triples() == 0) throw Error("split: empty interaction store");

    DatasetBundle bundle;
    bundle.user_ids = store.user_ids();
    bundle.item_ids = store.item_ids();
    bundle.overlapping_users = store.overlapping_users();

    Rng rng(seed);
    std::vector<Unit> units;
    for (int u = 0; u < store.n_users(); ++u) {
        const auto& off_items = store.items_of(u, Channel::Off);
        const auto& on_items = store.items_of(u, Channel::On);

        // one unit per pair: exclusive triples keep their channel, a pair
        // present in both channels travels as a single unit
        units.clear();
        for (int v : off_items) {
            const bool both = std::binary_search(on_items.begin(), on_items.end(), v);
            units.push_back({v, both ? UnitKind::BothPair : UnitKind::ExclusiveOff});
        }
        for (int v : on_items) {
            if (!std::binary_search(off_items.begin(), off_items.end(), v)) {
                units.push_back({v, UnitKind::ExclusiveOn});
            }
        }
        if (units.empty()) continue;

        rng.shuffle(units);
        const std::size_t n = units.size();
        const std::size_t n_val = n / 5;   // floor(0.2 n)
        const std::size_t n_test = n / 5;
        const std::size_t n_train = n - n_val - n_test;

        for (std::size_t i = 0; i < n_train; ++i) {
            const Unit& unit = units[i];
            TrainingExample ex;
            ex.user = u;
            ex.item = unit.item;
            ex.is_positive = true;
            ex.label_off = unit.kind != UnitKind::ExclusiveOn;
            ex.label_on = unit.kind != UnitKind::ExclusiveOff;
            ex.specificity = unit.kind == UnitKind::BothPair ? 0 : 1;
            bundle.train.push_back(ex);
            if (ex.label_off) insert_sorted(bundle.train_items[idx(Channel::Off)][u], unit.item);
            if (ex.label_on) insert_sorted(bundle.train_items[idx(Channel::On)][u], unit.item);
        }

        auto assign_section = [&](std::size_t begin, std::size_t end,
                                  std::array<GroundTruthMap, 2>& gt) {
            // both-channel pairs alternate between channels, offline first
            Channel next_both = Channel::Off;
            for (std::size_t i = begin; i < end; ++i) {
                const Unit& unit = units[i];
                Channel c;
                switch (unit.kind) {
                    case UnitKind::ExclusiveOff: c = Channel::Off; break;
                    case UnitKind::ExclusiveOn: c = Channel::On; break;
                    default:
                        c = next_both;
                        next_both = other(next_both);
                        break;
                }
                insert_sorted(gt[idx(c)][u], unit.item);
            }
        };
        assign_section(n_train, n_train + n_val, bundle.val_gt);
        assign_section(n_train + n_val, n, bundle.test_gt);
    }

    // ground truths exclude the user's train items for the same channel
    for (Channel c : kChannels) {
        for (auto* gt : {&bundle.val_gt[idx(c)], &bundle.test_gt[idx(c)]}) {
            for (auto it = gt->begin(); it != gt->end();) {
                const auto& train_items = bundle.train_items_of(it->first, c);
                auto& items = it->second;
                items.erase(std::remove_if(items.begin(), items.end(),
                                           [&](int v) {
                                               return std::binary_search(train_items.begin(),
                                                                         train_items.end(), v);
                                           }),
                            items.end());
                it = items.empty() ? gt->erase(it) : std::next(it);
            }
        }
    }
    return bundle;
}

DatasetBundle sample_negatives(DatasetBundle bundle, const InteractionStore& store,
                               int per_positive, std::uint64_t seed) {
    if (per_positive < 0) throw Error("sample_negatives: per_positive must be >= 0");
    bundle.negatives_per_positive = per_positive;
    bundle.negative_warnings = 0;
    if (per_positive == 0) return bundle;

    // complement of each user's purchased items across both channels
    std::vector<std::vector<int>> candidates(static_cast<std::size_t>(store.n_users()));
    std::vector<bool> built(static_cast<std::size_t>(store.n_users()), false);
    auto candidates_of = [&](int u) -> const std::vector<int>& {
        auto& slot = candidates[static_cast<std::size_t>(u)];
        if (!built[static_cast<std::size_t>(u)]) {
            for (int v = 0; v < store.n_items(); ++v) {
                if (!store.has_pair(u, v)) slot.push_back(v);
            }
            built[static_cast<std::size_t>(u)] = true;
        }
        return slot;
    };

    Rng rng(seed);
    const std::size_t n_positives = bundle.train.size();
    std::unordered_set<int> drawn;
    for (std::size_t i = 0; i < n_positives; ++i) {
        const TrainingExample pos = bundle.train[i];  // push_back below reallocates
        if (!pos.is_positive) continue;
        const auto& pool = candidates_of(pos.user);
        const int want = std::min<int>(per_positive, static_cast<int>(pool.size()));
        if (want < per_positive) ++bundle.negative_warnings;
        drawn.clear();
        while (static_cast<int>(drawn.size()) < want) {
            const int v = pool[static_cast<std::size_t>(rng.below(pool.size()))];
            if (!drawn.insert(v).second) continue;
            TrainingExample neg;
            neg.user = pos.user;
            neg.item = v;
            bundle.train.push_back(neg);
        }
    }
    return bundle;
}

namespace {

void write_gt_csv(const GroundTruthMap& gt, const std::vector<std::string>& user_ids,
                  const std::vector<std::string>& item_ids, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write split file: " + path);
    out << "user_id,item_id\n";
    for (const auto& [user, items] : gt) {
        for (int v : items) {
            out << user_ids[static_cast<std::size_t>(user)] << ','
                << item_ids[static_cast<std::size_t>(v)] << '\n';
        }
    }
    if (!out) throw Error("write failed: " + path);
}

}  // namespace

void write_split_dir(const DatasetBundle& bundle, const std::string& dir) {
    std::filesystem::create_directories(dir);

    {
        std::ofstream out(dir + "/train.csv");
        if (!out) throw Error("cannot write split file: " + dir + "/train.csv");
        out << "user_id,item_id,label_off,label_on,specificity,is_positive\n";
        for (const auto& ex : bundle.train) {
            out << bundle.user_ids[static_cast<std::size_t>(ex.user)] << ','
                << bundle.item_ids[static_cast<std::size_t>(ex.item)] << ','
                << int(ex.label_off) << ',' << int(ex.label_on) << ',' << int(ex.specificity)
                << ',' << int(ex.is_positive) << '\n';
        }
        if (!out) throw Error("write failed: " + dir + "/train.csv");
    }
    for (Channel c : kChannels) {
        write_gt_csv(bundle.val_gt[idx(c)], bundle.user_ids, bundle.item_ids,
                     dir + "/val_" + channel_name(c) + ".csv");
        write_gt_csv(bundle.test_gt[idx(c)], bundle.user_ids, bundle.item_ids,
                     dir + "/test_" + channel_name(c) + ".csv");
    }

    nlohmann::ordered_json meta;
    meta["users"] = bundle.user_ids;
    meta["items"] = bundle.item_ids;
    nlohmann::ordered_json overlap = nlohmann::ordered_json::array();
    for (int u : bundle.overlapping_users) {
        overlap.push_back(bundle.user_ids[static_cast<std::size_t>(u)]);
    }
    meta["overlapping_users"] = overlap;
    meta["negatives_per_positive"] = bundle.negatives_per_positive;
    meta["negative_warnings"] = bundle.negative_warnings;
    std::ofstream out(dir + "/meta.json");
    if (!out) throw Error("cannot write split file: " + dir + "/meta.json");
    out << meta.dump(2) << '\n';
}

namespace {

std::vector<std::string> read_csv_fields(const std::string& line) {
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

void read_gt_csv(const std::string& path, const std::unordered_map<std::string, int>& users,
                 const std::unordered_map<std::string, int>& items, GroundTruthMap& gt) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open split file: " + path);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no == 1 || line.empty()) continue;
        auto fields = read_csv_fields(line);
        if (fields.size() != 2) {
            throw Error(path + ":" + std::to_string(line_no) + ": expected 2 fields");
        }
        insert_sorted(gt[users.at(fields[0])], items.at(fields[1]));
    }
}

}  // namespace

DatasetBundle read_split_dir(const std::string& dir) {
    std::ifstream meta_in(dir + "/meta.json");
    if (!meta_in) throw Error("cannot open split file: " + dir + "/meta.json");
    nlohmann::json meta = nlohmann::json::parse(meta_in);

    DatasetBundle bundle;
    bundle.user_ids = meta.at("users").get<std::vector<std::string>>();
    bundle.item_ids = meta.at("items").get<std::vector<std::string>>();
    bundle.negatives_per_positive = meta.at("negatives_per_positive").get<int>();
    bundle.negative_warnings = meta.at("negative_warnings").get<int>();

    std::unordered_map<std::string, int> users, items;
    for (int i = 0; i < bundle.n_users(); ++i) users.emplace(bundle.user_ids[i], i);
    for (int i = 0; i < bundle.n_items(); ++i) items.emplace(bundle.item_ids[i], i);
    for (const auto& raw : meta.at("overlapping_users")) {
        bundle.overlapping_users.push_back(users.at(raw.get<std::string>()));
    }
    std::sort(bundle.overlapping_users.begin(), bundle.overlapping_users.end());

    const std::string path = dir + "/train.csv";
    std::ifstream in(path);
    if (!in) throw Error("cannot open split file: " + path);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no == 1 || line.empty()) continue;
        auto fields = read_csv_fields(line);
        if (fields.size() != 6) {
            throw Error(path + ":" + std::to_string(line_no) + ": expected 6 fields");
        }
        TrainingExample ex;
        ex.user = users.at(fields[0]);
        ex.item = items.at(fields[1]);
        ex.label_off = static_cast<std::uint8_t>(std::stoi(fields[2]));
        ex.label_on = static_cast<std::uint8_t>(std::stoi(fields[3]));
        ex.specificity = static_cast<std::uint8_t>(std::stoi(fields[4]));
        ex.is_positive = fields[5] == "1";
        bundle.train.push_back(ex);
        if (ex.is_positive) {
            if (ex.label_off) insert_sorted(bundle.train_items[idx(Channel::Off)][ex.user], ex.item);
            if (ex.label_on) insert_sorted(bundle.train_items[idx(Channel::On)][ex.user], ex.item);
        }
    }

    for (Channel c : kChannels) {
        read_gt_csv(dir + "/val_" + std::string(channel_name(c)) + ".csv", users, items,
                    bundle.val_gt[idx(c)]);
        read_gt_csv(dir + "/test_" + std::string(channel_name(c)) + ".csv", users, items,
                    bundle.test_gt[idx(c)]);
    }
    return bundle;
}

}  // namespace c2rec
