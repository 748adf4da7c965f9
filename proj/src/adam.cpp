#include "c2rec/adam.hpp"

#include <cmath>

namespace c2rec {

void adam_update(std::span<double> theta, std::span<const double> grad, std::span<double> m,
                 std::span<double> v, std::uint64_t t, const AdamConfig& cfg) {
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
    for (std::size_t i = 0; i < theta.size(); ++i) {
        const double g = grad[i];
        m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g;
        v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g * g;
        const double m_hat = m[i] / bc1;
        const double v_hat = v[i] / bc2;
        theta[i] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.eps);
    }
}

AdamState::AdamState(const Parameters& shape) {
    m_ = zeros_like(shape);
    v_ = zeros_like(shape);
    const auto nu = static_cast<std::size_t>(shape.n_users);
    const auto nv = static_cast<std::size_t>(shape.n_items);
    row_steps_[0].assign(nu, 0);
    row_steps_[1].assign(nu, 0);
    row_steps_[2].assign(nu, 0);
    row_steps_[3].assign(nv, 0);
}

namespace {

bool all_finite(std::span<const double> x) {
    for (double v : x) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

bool any_nonzero(std::span<const double> x) {
    for (double v : x) {
        if (v != 0.0) return true;
    }
    return false;
}

}  // namespace

void AdamState::apply(Parameters& params, const Gradients& grads, const AdamConfig& cfg) {
    auto p_refs = tensor_refs(params);
    auto g_refs = tensor_refs(const_cast<Parameters&>(grads.g));
    auto m_refs = tensor_refs(m_);
    auto v_refs = tensor_refs(v_);

    // tensors 0..3 are the embedding tables, in row_steps_ order
    constexpr std::size_t kEmbeddingTables = 4;
    const auto cols = static_cast<std::size_t>(params.config.d);

    ++step_;
    for (std::size_t ti = 0; ti < p_refs.size(); ++ti) {
        auto& pr = p_refs[ti];
        auto& gr = g_refs[ti];
        if (ti < kEmbeddingTables) {
            const auto& rows = ti == 3 ? grads.touched_items : grads.touched_users;
            auto& steps = row_steps_[ti];
            for (int row : rows) {
                const auto offset = static_cast<std::size_t>(row) * cols;
                std::span<const double> g(gr.data + offset, cols);
                if (!all_finite(g)) {
                    throw Error("adam: non-finite gradient in tensor '" + pr.name + "' row " +
                                std::to_string(row));
                }
                if (!any_nonzero(g)) continue;
                std::uint64_t& t = steps[static_cast<std::size_t>(row)];
                ++t;
                adam_update({pr.data + offset, cols}, g, {m_refs[ti].data + offset, cols},
                            {v_refs[ti].data + offset, cols}, t, cfg);
            }
        } else {
            std::span<const double> g(gr.data, gr.size);
            if (!all_finite(g)) {
                throw Error("adam: non-finite gradient in tensor '" + pr.name + "'");
            }
            adam_update({pr.data, pr.size}, g, {m_refs[ti].data, m_refs[ti].size},
                        {v_refs[ti].data, v_refs[ti].size}, step_, cfg);
        }
    }
}

}  // namespace c2rec
