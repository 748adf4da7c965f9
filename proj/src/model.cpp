#include "c2rec/model.hpp"

#include <algorithm>
#include <cmath>

namespace c2rec {

const char* variant_name(Variant v) {
    switch (v) {
        case Variant::Full: return "full";
        case Variant::NoClassification: return "no-classification";
        case Variant::NoAttention: return "no-attention";
        case Variant::NoAttentionLoss: return "no-attention-loss";
        case Variant::NoSeparation: return "no-separation";
    }
    return "?";
}

Variant parse_variant(const std::string& token) {
    for (Variant v : all_variants()) {
        if (token == variant_name(v)) return v;
    }
    throw Error("unknown variant '" + token +
                "' (expected full, no-classification, no-attention, no-attention-loss, "
                "no-separation)");
}

std::array<Variant, 5> all_variants() {
    return {Variant::Full, Variant::NoClassification, Variant::NoAttention,
            Variant::NoAttentionLoss, Variant::NoSeparation};
}

void ModelConfig::validate() const {
    if (d < 1 || d_prime < 1 || clf_hidden < 1) throw Error("model dims must be >= 1");
    if (!(lambda_cls >= 0.0) || !std::isfinite(lambda_cls)) {
        throw Error("lambda_cls must be finite and >= 0");
    }
    if (!(lambda_attn >= 0.0) || !std::isfinite(lambda_attn)) {
        throw Error("lambda_attn must be finite and >= 0");
    }
}

std::vector<TensorRef> tensor_refs(Parameters& p) {
    std::vector<TensorRef> refs;
    auto mat = [&](const std::string& name, Mat& m) {
        refs.push_back({name, m.a.data(), {m.rows, m.cols}, m.size()});
    };
    auto vec = [&](const std::string& name, std::vector<double>& v) {
        refs.push_back({name, v.data(), {v.size()}, v.size()});
    };
    auto scalar = [&](const std::string& name, double& s) { refs.push_back({name, &s, {1}, 1}); };

    mat("user_shared", p.user_shared);
    mat("user_off", p.user_off);
    mat("user_on", p.user_on);
    mat("item", p.item);
    for (Channel c : kChannels) {
        const std::string prefix = std::string("attention_") + channel_name(c);
        auto& block = p.attention[idx(c)];
        mat(prefix + ".query_w", block.query_w);
        vec(prefix + ".query_b", block.query_b);
        mat(prefix + ".key_w", block.key_w);
        vec(prefix + ".key_b", block.key_b);
    }
    vec("head_shared.w", p.shared_head.w);
    scalar("head_shared.b", p.shared_head.b);
    for (Channel c : kChannels) {
        const std::string prefix = std::string("head_") + channel_name(c);
        vec(prefix + ".w", p.channel_head[idx(c)].w);
        scalar(prefix + ".b", p.channel_head[idx(c)].b);
    }
    mat("classifier.w1", p.clf.w1);
    vec("classifier.b1", p.clf.b1);
    mat("classifier.w2", p.clf.w2);
    vec("classifier.b2", p.clf.b2);
    mat("classifier.w3", p.clf.w3);
    vec("classifier.b3", p.clf.b3);
    return refs;
}

Parameters zeros_like(const Parameters& p) {
    Parameters z;
    z.config = p.config;
    z.n_users = p.n_users;
    z.n_items = p.n_items;
    const auto d = static_cast<std::size_t>(p.config.d);
    const auto dp = static_cast<std::size_t>(p.config.d_prime);
    const auto h = static_cast<std::size_t>(p.config.clf_hidden);
    const auto nu = static_cast<std::size_t>(p.n_users);
    const auto nv = static_cast<std::size_t>(p.n_items);

    z.user_shared = Mat(nu, d);
    z.user_off = Mat(nu, d);
    z.user_on = Mat(nu, d);
    z.item = Mat(nv, d);
    for (auto& block : z.attention) {
        block.query_w = Mat(dp, d);
        block.key_w = Mat(dp, d);
        block.query_b.assign(dp, 0.0);
        block.key_b.assign(dp, 0.0);
    }
    z.shared_head.w.assign(d, 0.0);
    for (auto& head : z.channel_head) head.w.assign(d, 0.0);
    z.clf.w1 = Mat(h, 2 * d);
    z.clf.w2 = Mat(h, h);
    z.clf.w3 = Mat(2, h);
    z.clf.b1.assign(h, 0.0);
    z.clf.b2.assign(h, 0.0);
    z.clf.b3.assign(2, 0.0);
    return z;
}

Parameters init_parameters(const ModelConfig& config, int n_users, int n_items,
                           std::uint64_t seed) {
    config.validate();
    if (n_users < 1 || n_items < 1) throw Error("init_parameters: need users and items");
    Parameters p;
    p.config = config;
    p.n_users = n_users;
    p.n_items = n_items;
    p = zeros_like(p);

    Rng rng(seed);
    auto fill = [&](std::span<double> data, double bound) {
        for (double& x : data) x = rng.uniform(-bound, bound);
    };
    const double emb_bound = 1.0 / std::sqrt(static_cast<double>(config.d));
    fill(p.user_shared.a, emb_bound);
    fill(p.user_off.a, emb_bound);
    fill(p.user_on.a, emb_bound);
    fill(p.item.a, emb_bound);

    const double proj_bound = 1.0 / std::sqrt(static_cast<double>(config.d));
    for (auto& block : p.attention) {
        fill(block.query_w.a, proj_bound);
        fill(block.key_w.a, proj_bound);
        // biases stay zero
    }
    fill(p.shared_head.w, proj_bound);
    for (auto& head : p.channel_head) fill(head.w, proj_bound);

    fill(p.clf.w1.a, 1.0 / std::sqrt(2.0 * config.d));
    fill(p.clf.w2.a, 1.0 / std::sqrt(static_cast<double>(config.clf_hidden)));
    fill(p.clf.w3.a, 1.0 / std::sqrt(static_cast<double>(config.clf_hidden)));
    return p;
}

namespace {

double dot3(std::span<const double> a, const double* b, const double* c, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i] * c[i];
    return s;
}

void relu_affine(const Mat& w, std::span<const double> b, const double* x,
                 std::vector<double>& out) {
    out.resize(w.rows);
    for (std::size_t r = 0; r < w.rows; ++r) {
        const double* wr = w.row(r);
        double s = b[r];
        for (std::size_t c = 0; c < w.cols; ++c) s += wr[c] * x[c];
        out[r] = relu(s);
    }
}

// two-way softmax over scaled dot-product logits
std::array<double, 2> softmax_pair(double z_first, double z_second) {
    const double m = std::max(z_first, z_second);
    const double e1 = std::exp(z_first - m);
    const double e2 = std::exp(z_second - m);
    const double sum = e1 + e2;
    return {e1 / sum, e2 / sum};
}

double bce(double prob, int label) {
    const double q = std::clamp(prob, kProbEps, 1.0 - kProbEps);
    return label != 0 ? -std::log(q) : -std::log(1.0 - q);
}

// d(bce)/d(logit); zero where the clamp is active to stay consistent with
// the loss actually computed
double bce_logit_grad(double prob, int label) {
    if (prob <= kProbEps || prob >= 1.0 - kProbEps) return 0.0;
    return prob - static_cast<double>(label);
}

void check_ids(const Parameters& p, int user, int item) {
    if (user < 0 || user >= p.n_users) throw Error("model: user id out of range");
    if (item < 0 || item >= p.n_items) throw Error("model: item id out of range");
}

void attention_forward(const Parameters& p, Channel c, const double* y, const double* x_shared,
                       const double* x_specific, ChannelCache& cache) {
    const auto& block = p.attention[idx(c)];
    relu_affine(block.query_w, block.query_b, y, cache.query);
    relu_affine(block.key_w, block.key_b, x_shared, cache.key_shared);
    relu_affine(block.key_w, block.key_b, x_specific, cache.key_specific);
    const double scale = 1.0 / std::sqrt(static_cast<double>(p.config.d_prime));
    const double z_shared = dot(cache.query, cache.key_shared) * scale;
    const double z_specific = dot(cache.query, cache.key_specific) * scale;
    const auto a = softmax_pair(z_shared, z_specific);
    cache.attn_shared = a[0];
    cache.attn_specific = a[1];
}

void preference_forward(const Parameters& p, Channel c, const double* y, const double* x_shared,
                        const double* x_specific, ChannelCache& cache) {
    const auto d = static_cast<std::size_t>(p.config.d);
    const auto& head_c = p.channel_head[idx(c)];
    double logit;
    if (p.config.separate_heads()) {
        logit = cache.attn_shared * dot3(p.shared_head.w, x_shared, y, d) + p.shared_head.b +
                cache.attn_specific * dot3(head_c.w, x_specific, y, d) + head_c.b;
    } else {
        logit = cache.attn_shared * dot3(head_c.w, x_shared, y, d) +
                cache.attn_specific * dot3(head_c.w, x_specific, y, d) + head_c.b;
    }
    cache.logit = logit;
    cache.prob = sigmoid(logit);
}

void classifier_forward(const Parameters& p, const double* y, const double* x_shared,
                        const double* x_off, const double* x_on, ExampleCache& cache,
                        std::vector<double>& scratch) {
    const auto d = static_cast<std::size_t>(p.config.d);
    scratch.resize(2 * d);
    for (std::size_t j = 0; j < d; ++j) {
        scratch[j] = x_shared[j] + x_off[j] + x_on[j];  // integrated user embedding
        scratch[d + j] = y[j];
    }
    relu_affine(p.clf.w1, p.clf.b1, scratch.data(), cache.clf_h1);
    relu_affine(p.clf.w2, p.clf.b2, cache.clf_h1.data(), cache.clf_h2);
    for (std::size_t r = 0; r < 2; ++r) {
        const double* wr = p.clf.w3.row(r);
        double s = p.clf.b3[r];
        for (std::size_t c = 0; c < p.clf.w3.cols; ++c) s += wr[c] * cache.clf_h2[c];
        cache.clf_logit[r] = s;
        cache.clf_prob[r] = sigmoid(s);
    }
}

}  // namespace

std::array<double, 2> attention_scores(const Parameters& p, int user, int item, Channel c) {
    check_ids(p, user, item);
    if (!p.config.attention_enabled()) return {0.5, 0.5};
    ChannelCache cache;
    attention_forward(p, c, p.item.row(static_cast<std::size_t>(item)),
                      p.user_shared.row(static_cast<std::size_t>(user)), p.user_specific(user, c),
                      cache);
    return {cache.attn_shared, cache.attn_specific};
}

double predict_preference(const Parameters& p, int user, int item, Channel c) {
    check_ids(p, user, item);
    const double* y = p.item.row(static_cast<std::size_t>(item));
    const double* x_shared = p.user_shared.row(static_cast<std::size_t>(user));
    const double* x_specific = p.user_specific(user, c);
    ChannelCache cache;
    if (p.config.attention_enabled()) attention_forward(p, c, y, x_shared, x_specific, cache);
    preference_forward(p, c, y, x_shared, x_specific, cache);
    return cache.prob;
}

std::array<double, 2> classify_interaction(const Parameters& p, int user, int item) {
    check_ids(p, user, item);
    ExampleCache cache;
    std::vector<double> scratch;
    classifier_forward(p, p.item.row(static_cast<std::size_t>(item)),
                       p.user_shared.row(static_cast<std::size_t>(user)),
                       p.user_off.row(static_cast<std::size_t>(user)),
                       p.user_on.row(static_cast<std::size_t>(user)), cache, scratch);
    return cache.clf_prob;
}

std::pair<LossBreakdown, ForwardCache> batch_losses(std::span<const TrainingExample> batch,
                                                    const Parameters& p) {
    if (batch.empty()) throw Error("batch_losses: empty batch");
    const ModelConfig& cfg = p.config;

    ForwardCache cache;
    cache.examples.resize(batch.size());
    LossBreakdown losses;
    double attn_sum = 0.0;
    std::size_t n_positive = 0;
    std::vector<double> scratch;

    for (std::size_t i = 0; i < batch.size(); ++i) {
        const TrainingExample& ex = batch[i];
        check_ids(p, ex.user, ex.item);
        ExampleCache& ec = cache.examples[i];
        const double* y = p.item.row(static_cast<std::size_t>(ex.item));
        const double* x_shared = p.user_shared.row(static_cast<std::size_t>(ex.user));

        for (Channel c : kChannels) {
            const double* x_specific = p.user_specific(ex.user, c);
            ChannelCache& cc = ec.ch[idx(c)];
            if (cfg.attention_enabled()) attention_forward(p, c, y, x_shared, x_specific, cc);
            preference_forward(p, c, y, x_shared, x_specific, cc);
            const int label = c == Channel::Off ? ex.label_off : ex.label_on;
            (c == Channel::Off ? losses.l_off : losses.l_on) += bce(cc.prob, label);
            if (cfg.attention_loss_enabled() && ex.is_positive) {
                const double target_specific = static_cast<double>(ex.specificity);
                const double ds = cc.attn_shared - (1.0 - target_specific);
                const double dp = cc.attn_specific - target_specific;
                attn_sum += ds * ds + dp * dp;
            }
        }
        if (ex.is_positive) ++n_positive;

        if (cfg.classification_enabled()) {
            classifier_forward(p, y, x_shared, p.user_off.row(static_cast<std::size_t>(ex.user)),
                               p.user_on.row(static_cast<std::size_t>(ex.user)), ec, scratch);
            losses.l_cls += bce(ec.clf_prob[idx(Channel::Off)], ex.label_off) +
                            bce(ec.clf_prob[idx(Channel::On)], ex.label_on);
        }
    }

    const double n = static_cast<double>(batch.size());
    losses.l_off /= n;
    losses.l_on /= n;
    losses.l_cls /= n;
    losses.l_attn = n_positive > 0 ? attn_sum / static_cast<double>(n_positive) : 0.0;
    losses.total = losses.l_on + losses.l_off + cfg.lambda_cls * losses.l_cls +
                   cfg.lambda_attn * losses.l_attn;
    return {losses, std::move(cache)};
}

Gradients backward(std::span<const TrainingExample> batch, const Parameters& p,
                   const ForwardCache& cache) {
    if (batch.size() != cache.examples.size()) {
        throw Error("backward: cache does not match batch");
    }
    const ModelConfig& cfg = p.config;
    const auto d = static_cast<std::size_t>(cfg.d);
    const auto dp = static_cast<std::size_t>(cfg.d_prime);
    const double inv_n = 1.0 / static_cast<double>(batch.size());

    std::size_t n_positive = 0;
    for (const auto& ex : batch) n_positive += ex.is_positive ? 1 : 0;
    const double inv_pos = n_positive > 0 ? 1.0 / static_cast<double>(n_positive) : 0.0;

    Gradients grads;
    grads.g = zeros_like(p);
    Parameters& g = grads.g;
    std::vector<bool> user_touched(static_cast<std::size_t>(p.n_users), false);
    std::vector<bool> item_touched(static_cast<std::size_t>(p.n_items), false);

    const double scale = 1.0 / std::sqrt(static_cast<double>(cfg.d_prime));
    std::vector<double> d_query(dp), d_key(dp), input(2 * d), d_h2(0), d_h1(0), d_input(2 * d);

    for (std::size_t i = 0; i < batch.size(); ++i) {
        const TrainingExample& ex = batch[i];
        const ExampleCache& ec = cache.examples[i];
        const auto u = static_cast<std::size_t>(ex.user);
        const auto v = static_cast<std::size_t>(ex.item);
        user_touched[u] = true;
        item_touched[v] = true;

        const double* y = p.item.row(v);
        const double* x_shared = p.user_shared.row(u);
        double* gy = g.item.row(v);
        double* gx_shared = g.user_shared.row(u);

        for (Channel c : kChannels) {
            const ChannelCache& cc = ec.ch[idx(c)];
            const double* x_specific = p.user_specific(ex.user, c);
            double* gx_specific = g.user_specific(ex.user, c);
            const auto& head_c = p.channel_head[idx(c)];
            auto& g_head_c = g.channel_head[idx(c)];

            const int label = c == Channel::Off ? ex.label_off : ex.label_on;
            const double gt = bce_logit_grad(cc.prob, label) * inv_n;

            double d_attn_shared = 0.0, d_attn_specific = 0.0;
            if (cfg.separate_heads()) {
                for (std::size_t j = 0; j < d; ++j) {
                    const double m_shared = cc.attn_shared * x_shared[j] * y[j];
                    const double m_specific = cc.attn_specific * x_specific[j] * y[j];
                    g.shared_head.w[j] += gt * m_shared;
                    g_head_c.w[j] += gt * m_specific;
                    gx_shared[j] += gt * cc.attn_shared * p.shared_head.w[j] * y[j];
                    gx_specific[j] += gt * cc.attn_specific * head_c.w[j] * y[j];
                    gy[j] += gt * (cc.attn_shared * p.shared_head.w[j] * x_shared[j] +
                                   cc.attn_specific * head_c.w[j] * x_specific[j]);
                }
                g.shared_head.b += gt;
                g_head_c.b += gt;
                d_attn_shared = gt * dot3(p.shared_head.w, x_shared, y, d);
                d_attn_specific = gt * dot3(head_c.w, x_specific, y, d);
            } else {
                for (std::size_t j = 0; j < d; ++j) {
                    const double mix = cc.attn_shared * x_shared[j] + cc.attn_specific * x_specific[j];
                    g_head_c.w[j] += gt * mix * y[j];
                    gx_shared[j] += gt * cc.attn_shared * head_c.w[j] * y[j];
                    gx_specific[j] += gt * cc.attn_specific * head_c.w[j] * y[j];
                    gy[j] += gt * head_c.w[j] * mix;
                }
                g_head_c.b += gt;
                d_attn_shared = gt * dot3(head_c.w, x_shared, y, d);
                d_attn_specific = gt * dot3(head_c.w, x_specific, y, d);
            }

            if (!cfg.attention_enabled()) continue;  // constant weights, nothing upstream

            if (cfg.attention_loss_enabled() && ex.is_positive) {
                const double target_specific = static_cast<double>(ex.specificity);
                d_attn_shared += cfg.lambda_attn * 2.0 *
                                 (cc.attn_shared - (1.0 - target_specific)) * inv_pos;
                d_attn_specific +=
                    cfg.lambda_attn * 2.0 * (cc.attn_specific - target_specific) * inv_pos;
            }

            // softmax pair: dz_shared = -dz_specific
            const double dz = cc.attn_shared * cc.attn_specific * (d_attn_shared - d_attn_specific);
            if (dz == 0.0) continue;

            const auto& block = p.attention[idx(c)];
            auto& g_block = g.attention[idx(c)];
            for (std::size_t r = 0; r < dp; ++r) {
                // ReLU mask via post-activation
                d_query[r] = cc.query[r] > 0.0
                                 ? scale * dz * (cc.key_shared[r] - cc.key_specific[r])
                                 : 0.0;
            }
            for (std::size_t r = 0; r < dp; ++r) {
                const double dq = d_query[r];
                if (dq != 0.0) {
                    double* w_row = g_block.query_w.row(r);
                    for (std::size_t j = 0; j < d; ++j) w_row[j] += dq * y[j];
                    g_block.query_b[r] += dq;
                }
            }
            add_transposed(block.query_w, d_query, std::span<double>(gy, d));

            // shared key projection feeds both the shared and specific keys
            for (std::size_t r = 0; r < dp; ++r) {
                d_key[r] = cc.key_shared[r] > 0.0 ? scale * dz * cc.query[r] : 0.0;
            }
            for (std::size_t r = 0; r < dp; ++r) {
                const double dk = d_key[r];
                if (dk != 0.0) {
                    double* w_row = g_block.key_w.row(r);
                    for (std::size_t j = 0; j < d; ++j) w_row[j] += dk * x_shared[j];
                    g_block.key_b[r] += dk;
                }
            }
            add_transposed(block.key_w, d_key, std::span<double>(gx_shared, d));

            for (std::size_t r = 0; r < dp; ++r) {
                d_key[r] = cc.key_specific[r] > 0.0 ? -scale * dz * cc.query[r] : 0.0;
            }
            for (std::size_t r = 0; r < dp; ++r) {
                const double dk = d_key[r];
                if (dk != 0.0) {
                    double* w_row = g_block.key_w.row(r);
                    for (std::size_t j = 0; j < d; ++j) w_row[j] += dk * x_specific[j];
                    g_block.key_b[r] += dk;
                }
            }
            add_transposed(block.key_w, d_key, std::span<double>(gx_specific, d));
        }

        if (cfg.classification_enabled()) {
            const double* x_off = p.user_off.row(u);
            const double* x_on = p.user_on.row(u);
            for (std::size_t j = 0; j < d; ++j) {
                input[j] = x_shared[j] + x_off[j] + x_on[j];
                input[d + j] = y[j];
            }
            const std::array<double, 2> g_out = {
                cfg.lambda_cls * bce_logit_grad(ec.clf_prob[0], ex.label_off) * inv_n,
                cfg.lambda_cls * bce_logit_grad(ec.clf_prob[1], ex.label_on) * inv_n,
            };
            d_h2.assign(ec.clf_h2.size(), 0.0);
            for (std::size_t r = 0; r < 2; ++r) {
                if (g_out[r] == 0.0) continue;
                double* w_row = g.clf.w3.row(r);
                const double* w3_row = p.clf.w3.row(r);
                for (std::size_t j = 0; j < ec.clf_h2.size(); ++j) {
                    w_row[j] += g_out[r] * ec.clf_h2[j];
                    d_h2[j] += g_out[r] * w3_row[j];
                }
                g.clf.b3[r] += g_out[r];
            }
            for (std::size_t r = 0; r < d_h2.size(); ++r) {
                if (ec.clf_h2[r] <= 0.0) d_h2[r] = 0.0;
            }
            d_h1.assign(ec.clf_h1.size(), 0.0);
            for (std::size_t r = 0; r < d_h2.size(); ++r) {
                const double gr = d_h2[r];
                if (gr == 0.0) continue;
                double* w_row = g.clf.w2.row(r);
                const double* w2_row = p.clf.w2.row(r);
                for (std::size_t j = 0; j < ec.clf_h1.size(); ++j) {
                    w_row[j] += gr * ec.clf_h1[j];
                    d_h1[j] += gr * w2_row[j];
                }
                g.clf.b2[r] += gr;
            }
            for (std::size_t r = 0; r < d_h1.size(); ++r) {
                if (ec.clf_h1[r] <= 0.0) d_h1[r] = 0.0;
            }
            std::fill(d_input.begin(), d_input.end(), 0.0);
            for (std::size_t r = 0; r < d_h1.size(); ++r) {
                const double gr = d_h1[r];
                if (gr == 0.0) continue;
                double* w_row = g.clf.w1.row(r);
                const double* w1_row = p.clf.w1.row(r);
                for (std::size_t j = 0; j < 2 * d; ++j) {
                    w_row[j] += gr * input[j];
                    d_input[j] += gr * w1_row[j];
                }
                g.clf.b1[r] += gr;
            }
            double* gx_off = g.user_off.row(u);
            double* gx_on = g.user_on.row(u);
            for (std::size_t j = 0; j < d; ++j) {
                gx_shared[j] += d_input[j];
                gx_off[j] += d_input[j];
                gx_on[j] += d_input[j];
                gy[j] += d_input[d + j];
            }
        }
    }

    for (int u = 0; u < p.n_users; ++u) {
        if (user_touched[static_cast<std::size_t>(u)]) grads.touched_users.push_back(u);
    }
    for (int v = 0; v < p.n_items; ++v) {
        if (item_touched[static_cast<std::size_t>(v)]) grads.touched_items.push_back(v);
    }
    return grads;
}

ModelScorer::ModelScorer(const Parameters& p) : p_(p) {
    const auto dp = static_cast<std::size_t>(p.config.d_prime);
    const auto nv = static_cast<std::size_t>(p.n_items);
    if (p.config.attention_enabled()) {
        std::vector<double> q;
        for (Channel c : kChannels) {
            const auto& block = p.attention[idx(c)];
            Mat& out = item_query_[idx(c)];
            out = Mat(nv, dp);
            for (std::size_t v = 0; v < nv; ++v) {
                relu_affine(block.query_w, block.query_b, p.item.row(v), q);
                std::copy(q.begin(), q.end(), out.row(v));
            }
        }
    }
}

void ModelScorer::refresh(int user, Channel c) const {
    const auto d = static_cast<std::size_t>(p_.config.d);
    const double* x_shared = p_.user_shared.row(static_cast<std::size_t>(user));
    const double* x_specific = p_.user_specific(user, c);
    const auto& head_c = p_.channel_head[idx(c)];

    if (p_.config.attention_enabled()) {
        const auto& block = p_.attention[idx(c)];
        relu_affine(block.key_w, block.key_b, x_shared, key_shared_);
        relu_affine(block.key_w, block.key_b, x_specific, key_specific_);
    }
    lhs_shared_.resize(d);
    lhs_specific_.resize(d);
    if (p_.config.separate_heads()) {
        for (std::size_t j = 0; j < d; ++j) {
            lhs_shared_[j] = p_.shared_head.w[j] * x_shared[j];
            lhs_specific_[j] = head_c.w[j] * x_specific[j];
        }
        bias_ = p_.shared_head.b + head_c.b;
    } else {
        for (std::size_t j = 0; j < d; ++j) {
            lhs_shared_[j] = head_c.w[j] * x_shared[j];
            lhs_specific_[j] = head_c.w[j] * x_specific[j];
        }
        bias_ = head_c.b;
    }
    cached_user_ = user;
    cached_channel_ = c;
}

double ModelScorer::operator()(int user, int item, Channel c) const {
    check_ids(p_, user, item);
    if (user != cached_user_ || c != cached_channel_) refresh(user, c);

    const auto d = static_cast<std::size_t>(p_.config.d);
    const double* y = p_.item.row(static_cast<std::size_t>(item));
    double attn_shared = 0.5, attn_specific = 0.5;
    if (p_.config.attention_enabled()) {
        const double* q = item_query_[idx(c)].row(static_cast<std::size_t>(item));
        const double scale = 1.0 / std::sqrt(static_cast<double>(p_.config.d_prime));
        double z_shared = 0.0, z_specific = 0.0;
        for (std::size_t r = 0; r < key_shared_.size(); ++r) {
            z_shared += q[r] * key_shared_[r];
            z_specific += q[r] * key_specific_[r];
        }
        const auto a = softmax_pair(z_shared * scale, z_specific * scale);
        attn_shared = a[0];
        attn_specific = a[1];
    }
    double s_shared = 0.0, s_specific = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
        s_shared += lhs_shared_[j] * y[j];
        s_specific += lhs_specific_[j] * y[j];
    }
    return attn_shared * s_shared + attn_specific * s_specific + bias_;
}

void ModelScorer::score_all_items(int user, Channel c, std::span<double> out) const {
    if (out.size() != static_cast<std::size_t>(p_.n_items)) {
        throw Error("score_all_items: output span has wrong size");
    }
    for (int v = 0; v < p_.n_items; ++v) out[static_cast<std::size_t>(v)] = (*this)(user, v, c);
}

}  // namespace c2rec
