#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "c2rec/common.hpp"
#include "c2rec/interactions.hpp"
#include "c2rec/split.hpp"

namespace c2rec {

enum class Variant : std::uint8_t {
    Full = 0,
    NoClassification = 1,  // (a) interaction classification removed
    NoAttention = 2,       // (b) constant 0.5 weights, attention blocks unused
    NoAttentionLoss = 3,   // (c) attention kept, its auxiliary loss removed
    NoSeparation = 4,      // (d) one head per channel over the mixed embedding
};

const char* variant_name(Variant v);
Variant parse_variant(const std::string& token);
std::array<Variant, 5> all_variants();

struct ModelConfig {
    int d = 128;          // embedding dim
    int d_prime = 64;     // attention projection dim
    int clf_hidden = 64;  // classifier hidden width
    double lambda_cls = 0.1;
    double lambda_attn = 0.1;
    Variant variant = Variant::Full;

    bool attention_enabled() const { return variant != Variant::NoAttention; }
    bool separate_heads() const { return variant != Variant::NoSeparation; }
    bool classification_enabled() const { return variant != Variant::NoClassification; }
    bool attention_loss_enabled() const {
        return variant == Variant::Full || variant == Variant::NoClassification;
    }
    void validate() const;  // throws Error on bad dims / weights
};

struct AttentionBlock {
    Mat query_w, key_w;  // d' x d
    std::vector<double> query_b, key_b;
};

struct Head {
    std::vector<double> w;  // d
    double b = 0.0;
};

struct Classifier {
    Mat w1;  // hidden x 2d
    Mat w2;  // hidden x hidden
    Mat w3;  // 2 x hidden
    std::vector<double> b1, b2, b3;
};

// All trainable arrays. Three user tables (channel-shared plus one per
// channel), one item table, per-channel attention blocks, three preference
// heads, and the channel classifier.
struct Parameters {
    ModelConfig config;
    int n_users = 0, n_items = 0;

    Mat user_shared, user_off, user_on;  // |U| x d
    Mat item;                            // |V| x d
    std::array<AttentionBlock, 2> attention;  // by Channel
    Head shared_head;
    std::array<Head, 2> channel_head;  // by Channel
    Classifier clf;

    const double* user_specific(int user, Channel c) const {
        return (c == Channel::Off ? user_off : user_on).row(static_cast<std::size_t>(user));
    }
    double* user_specific(int user, Channel c) {
        return (c == Channel::Off ? user_off : user_on).row(static_cast<std::size_t>(user));
    }
};

// Flat named view over every tensor, in a fixed order shared by the
// optimizer, the checkpoint writer, and the gradient checker.
struct TensorRef {
    std::string name;
    double* data;
    std::vector<std::size_t> shape;
    std::size_t size;
};
std::vector<TensorRef> tensor_refs(Parameters& p);

Parameters init_parameters(const ModelConfig& config, int n_users, int n_items,
                           std::uint64_t seed);
Parameters zeros_like(const Parameters& p);

struct Gradients {
    Parameters g;                                   // same shapes, holds d(total)/d(theta)
    std::vector<int> touched_users, touched_items;  // sorted embedding rows with gradient
};

struct LossBreakdown {
    double l_on = 0.0, l_off = 0.0, l_cls = 0.0, l_attn = 0.0, total = 0.0;
};

struct ChannelCache {
    std::vector<double> query, key_shared, key_specific;  // post-ReLU projections
    double attn_shared = 0.5, attn_specific = 0.5;
    double logit = 0.0;
    double prob = 0.5;
};

struct ExampleCache {
    std::array<ChannelCache, 2> ch;
    std::vector<double> clf_h1, clf_h2;  // post-ReLU
    std::array<double, 2> clf_logit{0.0, 0.0};
    std::array<double, 2> clf_prob{0.5, 0.5};
};

struct ForwardCache {
    std::vector<ExampleCache> examples;
};

inline constexpr double kProbEps = 1e-7;  // BCE probability clamp

// Single-example ops; each recomputes its own forward pass.
std::array<double, 2> attention_scores(const Parameters& p, int user, int item, Channel c);
double predict_preference(const Parameters& p, int user, int item, Channel c);
std::array<double, 2> classify_interaction(const Parameters& p, int user, int item);

std::pair<LossBreakdown, ForwardCache> batch_losses(std::span<const TrainingExample> batch,
                                                    const Parameters& p);
Gradients backward(std::span<const TrainingExample> batch, const Parameters& p,
                   const ForwardCache& cache);

// Evaluation-time scorer. Returns pre-sigmoid preference logits; sigmoid is
// monotone so rankings are unchanged. Item-side projections are precomputed
// once, user-side state is cached per (user, channel).
class ModelScorer {
public:
    explicit ModelScorer(const Parameters& p);
    double operator()(int user, int item, Channel c) const;
    void score_all_items(int user, Channel c, std::span<double> out) const;

private:
    void refresh(int user, Channel c) const;

    const Parameters& p_;
    std::array<Mat, 2> item_query_;  // |V| x d', per channel (attention variants only)
    mutable int cached_user_ = -1;
    mutable Channel cached_channel_ = Channel::Off;
    mutable std::vector<double> key_shared_, key_specific_;  // d'
    mutable std::vector<double> lhs_shared_, lhs_specific_;  // d, head weight * user embedding
    mutable double bias_ = 0.0;
};

}  // namespace c2rec
