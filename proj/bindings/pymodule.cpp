#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "c2rec/bpr.hpp"
#include "c2rec/checkpoint.hpp"
#include "c2rec/interactions.hpp"
#include "c2rec/metrics.hpp"
#include "c2rec/model.hpp"
#include "c2rec/split.hpp"
#include "c2rec/synthgen.hpp"
#include "c2rec/training.hpp"

namespace py = pybind11;
using namespace c2rec;

namespace {

Channel channel_from_token(const std::string& token) { return parse_channel(token); }

py::dict report_to_dict(const MetricReport& report) {
    py::dict d;
    d["channel"] = std::string(channel_name(report.channel));
    d["protocol"] = std::string(candidate_mode_name(report.candidate_mode));
    d["k"] = report.k_values;
    d["hr"] = report.hr;
    d["ndcg"] = report.ndcg;
    d["n_users"] = report.n_users;
    return d;
}

MetricReport evaluate_params(const Parameters& params, const DatasetBundle& bundle,
                             const std::string& channel, const std::vector<int>& ks,
                             const std::string& candidate_mode, const std::string& section,
                             const std::string& user_filter) {
    EvalProtocol protocol;
    protocol.k_values = ks;
    protocol.candidate_mode = parse_candidate_mode(candidate_mode);
    protocol.channel = channel_from_token(channel);
    const ModelScorer scorer(params);
    SplitSection split_section;
    if (section == "test") {
        split_section = SplitSection::Test;
    } else if (section == "val") {
        split_section = SplitSection::Val;
    } else {
        throw Error("unknown split '" + section + "' (expected test or val)");
    }
    const UserFilter filter = user_filter == "overlapping" ? UserFilter::OverlappingOnly
                                                           : UserFilter::All;
    return evaluate([&scorer](int u, int v, Channel c) { return scorer(u, v, c); }, bundle,
                    protocol, filter, split_section);
}

}  // namespace

PYBIND11_MODULE(_c2rec, m) {
    m.doc() = "Cross-channel retail recommendation: model, training, and evaluation";

    py::register_exception<Error>(m, "C2RecError");

    py::class_<InteractionStore>(m, "InteractionStore")
        .def(py::init<>())
        .def("add", &InteractionStore::add_raw, py::arg("user"), py::arg("item"),
             py::arg("channel"))
        .def("finalize", &InteractionStore::finalize)
        .def_property_readonly("n_users", &InteractionStore::n_users)
        .def_property_readonly("n_items", &InteractionStore::n_items)
        .def_property_readonly("n_triples", &InteractionStore::n_triples)
        .def("overlapping_users", &InteractionStore::overlapping_users);

    py::class_<StatsReport>(m, "StatsReport")
        .def_property_readonly("user_overlap", [](const StatsReport& s) { return s.user_overlap; })
        .def_property_readonly("item_overlap", [](const StatsReport& s) { return s.item_overlap; })
        .def("as_dict", [](const StatsReport& s) {
            py::dict d;
            for (const auto& [name, cs] : {std::pair{"off", s.off}, std::pair{"on", s.on}}) {
                py::dict c;
                c["users"] = cs.users;
                c["items"] = cs.items;
                c["interactions"] = cs.interactions;
                c["sparsity"] = cs.sparsity;
                d[name] = c;
            }
            d["user_overlap"] = s.user_overlap;
            d["item_overlap"] = s.item_overlap;
            d["total_triples"] = s.total_triples;
            return d;
        });

    py::class_<TrainingExample>(m, "TrainingExample")
        .def_readonly("user", &TrainingExample::user)
        .def_readonly("item", &TrainingExample::item)
        .def_property_readonly("label_off",
                               [](const TrainingExample& e) { return int(e.label_off); })
        .def_property_readonly("label_on",
                               [](const TrainingExample& e) { return int(e.label_on); })
        .def_property_readonly("specificity",
                               [](const TrainingExample& e) { return int(e.specificity); })
        .def_readonly("is_positive", &TrainingExample::is_positive);

    py::class_<DatasetBundle>(m, "DatasetBundle")
        .def_property_readonly("n_users", &DatasetBundle::n_users)
        .def_property_readonly("n_items", &DatasetBundle::n_items)
        .def_readonly("train", &DatasetBundle::train)
        .def_readonly("user_ids", &DatasetBundle::user_ids)
        .def_readonly("item_ids", &DatasetBundle::item_ids)
        .def_readonly("overlapping_users", &DatasetBundle::overlapping_users)
        .def_readonly("negative_warnings", &DatasetBundle::negative_warnings)
        .def("ground_truth",
             [](const DatasetBundle& b, const std::string& section, const std::string& channel) {
                 const auto& gt = b.gt(section == "val" ? SplitSection::Val : SplitSection::Test,
                                       channel_from_token(channel));
                 py::dict d;
                 for (const auto& [user, items] : gt) d[py::int_(user)] = items;
                 return d;
             },
             py::arg("section"), py::arg("channel"))
        .def("train_items",
             [](const DatasetBundle& b, int user, const std::string& channel) {
                 return b.train_items_of(user, channel_from_token(channel));
             },
             py::arg("user"), py::arg("channel"));

    py::class_<GenConfig>(m, "GenConfig")
        .def(py::init<>())
        .def_readwrite("n_users", &GenConfig::n_users)
        .def_readwrite("n_items", &GenConfig::n_items)
        .def_readwrite("latent_dim", &GenConfig::latent_dim)
        .def_readwrite("gamma", &GenConfig::gamma)
        .def_readwrite("overlap_user_frac", &GenConfig::overlap_user_frac)
        .def_readwrite("overlap_item_frac", &GenConfig::overlap_item_frac)
        .def_readwrite("min_interactions", &GenConfig::min_interactions)
        .def_readwrite("max_interactions", &GenConfig::max_interactions)
        .def_readwrite("dup_prob", &GenConfig::dup_prob)
        .def_readwrite("seed", &GenConfig::seed);

    py::class_<GroundTruth>(m, "GroundTruth")
        .def("affinity",
             [](const GroundTruth& truth, int user, int item, const std::string& channel) {
                 return truth.affinity(user, item, channel_from_token(channel));
             })
        .def("top_k", [](const GroundTruth& truth, int user, const std::string& channel, int k) {
            return oracle_topk(truth, user, channel_from_token(channel), k);
        });

    py::class_<GenResult>(m, "GenResult")
        .def_readonly("store", &GenResult::store)
        .def_readonly("truth", &GenResult::truth);

    py::class_<ModelConfig>(m, "ModelConfig")
        .def(py::init<>())
        .def_readwrite("d", &ModelConfig::d)
        .def_readwrite("d_prime", &ModelConfig::d_prime)
        .def_readwrite("clf_hidden", &ModelConfig::clf_hidden)
        .def_readwrite("lambda_cls", &ModelConfig::lambda_cls)
        .def_readwrite("lambda_attn", &ModelConfig::lambda_attn)
        .def_property("variant",
                      [](const ModelConfig& c) { return std::string(variant_name(c.variant)); },
                      [](ModelConfig& c, const std::string& v) { c.variant = parse_variant(v); });

    py::class_<TrainConfig>(m, "TrainConfig")
        .def(py::init<>())
        .def_readwrite("epochs", &TrainConfig::epochs)
        .def_readwrite("batch_size", &TrainConfig::batch_size)
        .def_readwrite("learning_rate", &TrainConfig::learning_rate)
        .def_readwrite("patience", &TrainConfig::patience)
        .def_readwrite("seed", &TrainConfig::seed);

    py::class_<Parameters>(m, "Parameters")
        .def_property_readonly("n_users", [](const Parameters& p) { return p.n_users; })
        .def_property_readonly("n_items", [](const Parameters& p) { return p.n_items; })
        .def("predict_preference",
             [](const Parameters& p, int user, int item, const std::string& channel) {
                 return predict_preference(p, user, item, channel_from_token(channel));
             })
        .def("attention_scores",
             [](const Parameters& p, int user, int item, const std::string& channel) {
                 return attention_scores(p, user, item, channel_from_token(channel));
             })
        .def("classify_interaction", [](const Parameters& p, int user, int item) {
            return classify_interaction(p, user, item);
        });

    py::class_<TrainResult>(m, "TrainResult")
        .def_readonly("best_params", &TrainResult::best_params)
        .def_readonly("best_epoch", &TrainResult::best_epoch)
        .def_readonly("last_epoch", &TrainResult::last_epoch)
        .def("history", [](const TrainResult& r) {
            py::list rows;
            for (const auto& e : r.history) {
                py::dict d;
                d["epoch"] = e.epoch;
                d["total_loss"] = e.loss.total;
                d["l_off"] = e.loss.l_off;
                d["l_on"] = e.loss.l_on;
                d["l_cls"] = e.loss.l_cls;
                d["l_attn"] = e.loss.l_attn;
                d["val_ndcg10_off"] = e.val_ndcg10[0];
                d["val_ndcg10_on"] = e.val_ndcg10[1];
                d["selection_score"] = e.selection_score;
                rows.append(d);
            }
            return rows;
        });

    py::class_<BprConfig>(m, "BprConfig")
        .def(py::init<>())
        .def_readwrite("d", &BprConfig::d)
        .def_readwrite("epochs", &BprConfig::epochs)
        .def_readwrite("learning_rate", &BprConfig::learning_rate)
        .def_readwrite("reg", &BprConfig::reg)
        .def_readwrite("seed", &BprConfig::seed);

    py::class_<BprParams>(m, "BprParams")
        .def("score", &bpr_score, py::arg("user"), py::arg("item"));

    m.def("load_interactions", &load_interactions, py::arg("path"));
    m.def("save_interactions", &save_interactions, py::arg("store"), py::arg("path"));
    m.def("stats", &stats, py::arg("store"));
    m.def("generate", &generate, py::arg("config"));
    m.def("split", &split, py::arg("store"), py::arg("seed"));
    m.def("sample_negatives", &sample_negatives, py::arg("bundle"), py::arg("store"),
          py::arg("per_positive"), py::arg("seed"));
    m.def("write_split_dir", &write_split_dir, py::arg("bundle"), py::arg("dir"));
    m.def("read_split_dir", &read_split_dir, py::arg("dir"));
    m.def("train", &train, py::arg("bundle"), py::arg("model_config"), py::arg("train_config"));
    m.def("evaluate",
          [](const Parameters& params, const DatasetBundle& bundle, const std::string& channel,
             const std::vector<int>& ks, const std::string& candidate_mode,
             const std::string& section, const std::string& user_filter) {
              return report_to_dict(evaluate_params(params, bundle, channel, ks, candidate_mode,
                                                    section, user_filter));
          },
          py::arg("params"), py::arg("bundle"), py::arg("channel"),
          py::arg("k") = std::vector<int>{5, 10},
          py::arg("candidate_mode") = std::string("without-purchased"),
          py::arg("section") = std::string("test"), py::arg("user_filter") = std::string("all"),
          "Rank and score one channel; returns a metrics dict");
    m.def("bpr_train",
          [](const std::vector<std::pair<int, int>>& positives, int n_users, int n_items,
             const BprConfig& config) { return bpr_train(positives, n_users, n_items, config); },
          py::arg("positives"), py::arg("n_users"), py::arg("n_items"), py::arg("config"));
    m.def("train_positives",
          [](const DatasetBundle& bundle, const std::string& channel) {
              return train_positives(bundle, channel_from_token(channel));
          });
    m.def("train_positives_merged", &train_positives_merged);
    m.def("save_checkpoint", &save_checkpoint, py::arg("params"), py::arg("user_ids"),
          py::arg("item_ids"), py::arg("path"));
    m.def("load_checkpoint_params",
          [](const std::string& path) { return load_checkpoint(path).params; });
    m.def("hr_at_k", &hr_at_k, py::arg("ranked"), py::arg("ground_truth"), py::arg("k"));
    m.def("ndcg_at_k", &ndcg_at_k, py::arg("ranked"), py::arg("ground_truth"), py::arg("k"));
    m.def("version", [] { return std::string(kVersion); });
}
