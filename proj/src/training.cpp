#include "c2rec/training.hpp"

#include <algorithm>
#include <cmath>

namespace c2rec {

void TrainConfig::validate() const {
    if (epochs < 1) throw Error("train: epochs must be >= 1");
    if (batch_size < 1) throw Error("train: batch_size must be >= 1");
    if (!(learning_rate > 0.0)) throw Error("train: learning_rate must be > 0");
    if (patience < 1) throw Error("train: patience must be >= 1");
    if (negatives_per_positive < 0) throw Error("train: negatives_per_positive must be >= 0");
}

namespace {

// validation NDCG@10 per channel; NaN-free: channels without val users report 0
std::pair<std::array<double, 2>, double> validation_score(const Parameters& params,
                                                          const DatasetBundle& bundle) {
    const ModelScorer scorer(params);
    const ScorerFn fn = [&scorer](int u, int v, Channel c) { return scorer(u, v, c); };
    std::array<double, 2> ndcg{0.0, 0.0};
    double sum = 0.0;
    int present = 0;
    for (Channel c : kChannels) {
        if (bundle.val_gt[idx(c)].empty()) continue;
        EvalProtocol protocol;
        protocol.k_values = {10};
        protocol.candidate_mode = CandidateMode::WithoutPurchased;
        protocol.channel = c;
        const auto report = evaluate(fn, bundle, protocol, UserFilter::All, SplitSection::Val);
        ndcg[idx(c)] = report.ndcg_at(10);
        sum += ndcg[idx(c)];
        ++present;
    }
    if (present == 0) throw Error("train: both validation sets are empty");
    return {ndcg, sum / static_cast<double>(present)};
}

}  // namespace

TrainResult train(const DatasetBundle& bundle, const ModelConfig& model_config,
                  const TrainConfig& train_config) {
    model_config.validate();
    train_config.validate();
    if (bundle.train.empty()) throw Error("train: empty train set");

    Parameters params =
        init_parameters(model_config, bundle.n_users(), bundle.n_items(), train_config.seed);
    AdamState adam(params);
    AdamConfig adam_config;
    adam_config.learning_rate = train_config.learning_rate;
    adam_config.beta1 = train_config.adam_beta1;
    adam_config.beta2 = train_config.adam_beta2;
    adam_config.eps = train_config.adam_eps;

    Rng rng(train_config.seed);
    std::vector<std::size_t> order(bundle.train.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::vector<TrainingExample> shuffled(bundle.train.size());

    TrainResult result;
    result.best_epoch = 0;
    double best_score = -1.0;

    for (int epoch = 1; epoch <= train_config.epochs; ++epoch) {
        rng.shuffle(order);
        for (std::size_t i = 0; i < order.size(); ++i) shuffled[i] = bundle.train[order[i]];

        LossBreakdown epoch_loss;
        std::size_t n_batches = 0;
        const auto bs = static_cast<std::size_t>(train_config.batch_size);
        for (std::size_t start = 0; start < shuffled.size(); start += bs) {
            const std::size_t len = std::min(bs, shuffled.size() - start);
            const std::span<const TrainingExample> batch(shuffled.data() + start, len);
            auto [losses, cache] = batch_losses(batch, params);
            const Gradients grads = backward(batch, params, cache);
            adam.apply(params, grads, adam_config);
            epoch_loss.l_on += losses.l_on;
            epoch_loss.l_off += losses.l_off;
            epoch_loss.l_cls += losses.l_cls;
            epoch_loss.l_attn += losses.l_attn;
            epoch_loss.total += losses.total;
            ++n_batches;
        }
        const double inv = 1.0 / static_cast<double>(n_batches);
        epoch_loss.l_on *= inv;
        epoch_loss.l_off *= inv;
        epoch_loss.l_cls *= inv;
        epoch_loss.l_attn *= inv;
        epoch_loss.total *= inv;

        const auto [val_ndcg, score] = validation_score(params, bundle);
        result.history.push_back({epoch, epoch_loss, val_ndcg, score});
        result.last_epoch = epoch;

        if (score > best_score) {
            best_score = score;
            result.best_epoch = epoch;
            result.best_params = params;
        } else if (epoch - result.best_epoch >= train_config.patience) {
            break;
        }
    }
    return result;
}

GridSearchResult grid_search(const DatasetBundle& bundle, const SearchGrid& grid,
                             const ModelConfig& base_model, const TrainConfig& base_train,
                             const std::vector<std::uint64_t>& seeds) {
    if (grid.combinations() == 0) throw Error("grid_search: empty grid");
    if (seeds.empty()) throw Error("grid_search: need at least one seed");

    GridSearchResult result;
    bool have_best = false;
    for (int d_prime : grid.d_prime) {
        for (int clf_hidden : grid.clf_hidden) {
            for (double lr : grid.learning_rate) {
                for (double lambda_cls : grid.lambda_cls) {
                    for (double lambda_attn : grid.lambda_attn) {
                        GridPoint point;
                        point.model = base_model;
                        point.model.d_prime = d_prime;
                        point.model.clf_hidden = clf_hidden;
                        point.model.lambda_cls = lambda_cls;
                        point.model.lambda_attn = lambda_attn;
                        point.train = base_train;
                        point.train.learning_rate = lr;
                        point.train.seed = seeds.front();
                        const TrainResult run = train(bundle, point.model, point.train);
                        point.val_score = run.history[static_cast<std::size_t>(run.best_epoch - 1)]
                                              .selection_score;
                        point.best_epoch = run.best_epoch;
                        result.table.push_back(point);
                        if (!have_best || point.val_score > result.best.val_score) {
                            result.best = point;
                            have_best = true;
                        }
                    }
                }
            }
        }
    }

    for (std::uint64_t seed : seeds) {
        TrainConfig cfg = result.best.train;
        cfg.seed = seed;
        const TrainResult run = train(bundle, result.best.model, cfg);
        result.seed_scores.push_back(
            run.history[static_cast<std::size_t>(run.best_epoch - 1)].selection_score);
    }
    result.score_summary = mean_std(result.seed_scores);
    return result;
}

}  // namespace c2rec
