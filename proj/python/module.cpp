#include "trpkgc/checkpoint.hpp"
#include "trpkgc/commands.hpp"
#include "trpkgc/errors.hpp"
#include "trpkgc/evaluation.hpp"
#include "trpkgc/training.hpp"

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

namespace py = pybind11;
using namespace trpkgc;

namespace {

using TripleArray = py::array_t<std::int32_t, py::array::c_style | py::array::forcecast>;

TripleArray to_array(const TripleList& list) {
    TripleArray out({static_cast<py::ssize_t>(list.size()), py::ssize_t{3}});
    auto v = out.mutable_unchecked<2>();
    for (std::size_t i = 0; i < list.size(); ++i) {
        const Triple& t = list.triples[i];
        const auto row = static_cast<py::ssize_t>(i);
        v(row, 0) = t.head;
        v(row, 1) = t.relation;
        v(row, 2) = t.tail;
    }
    return out;
}

std::vector<Triple> from_array(const TripleArray& a) {
    if (a.ndim() != 2 || a.shape(1) != 3) {
        throw ShapeError("expected an (n, 3) array of (head, relation, tail) ids");
    }
    auto v = a.unchecked<2>();
    std::vector<Triple> out;
    out.reserve(static_cast<std::size_t>(a.shape(0)));
    for (py::ssize_t i = 0; i < a.shape(0); ++i) {
        out.push_back({v(i, 0), v(i, 1), v(i, 2)});
    }
    return out;
}

void check_ids(const std::vector<Triple>& triples, const Vocab& vocab) {
    for (const Triple& t : triples) {
        if (t.head < 0 || t.head >= vocab.num_entities() || t.tail < 0 || t.tail >= vocab.num_entities() ||
            t.relation < 0 || t.relation >= vocab.num_relations()) {
            throw py::index_error("triple id out of range for this vocabulary");
        }
    }
}

py::dict rank_dict(const RankReport& r) {
    py::dict d;
    d["mrr"] = r.mrr;
    d["hits1"] = r.hits1;
    d["hits3"] = r.hits3;
    d["hits10"] = r.hits10;
    d["num_queries"] = r.num_queries;
    d["ranks"] = r.ranks;
    return d;
}

template <class Options>
py::tuple run(int (*command)(const Options&, std::ostream&, std::ostream&), const Options& opts) {
    std::ostringstream out;
    std::ostringstream err;
    int code = 0;
    {
        py::gil_scoped_release release;
        code = command(opts, out, err);
    }
    return py::make_tuple(code, out.str(), err.str());
}

std::vector<ScoredExample> scored_examples(const std::vector<RelationId>& relations, const std::vector<double>& scores,
                                           const std::vector<bool>& labels) {
    if (relations.size() != scores.size() || scores.size() != labels.size()) {
        throw ShapeError("relations, scores and labels must have equal length");
    }
    std::vector<ScoredExample> xs;
    xs.reserve(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) {
        xs.push_back({relations[i], scores[i], labels[i]});
    }
    return xs;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Knowledge graph completion with a recurrent triple encoder";
    configure_allocator();

    py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
    py::register_exception<LookupError>(m, "UnknownSymbolError", PyExc_KeyError);
    py::register_exception<ShapeError>(m, "ShapeError", PyExc_ValueError);
    py::register_exception<SaturationError>(m, "SaturationError", PyExc_RuntimeError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<CheckpointError>(m, "CheckpointError", PyExc_IOError);

    py::class_<Vocab>(m, "Vocab")
        .def_property_readonly("num_entities", &Vocab::num_entities)
        .def_property_readonly("num_relations", &Vocab::num_relations, "Relation count including reciprocals")
        .def_property_readonly("num_base_relations", [](const Vocab& v) { return v.relations.size(); })
        .def("entity_id",
             [](const Vocab& v, const std::string& s) {
                 auto id = v.entities.find(s);
                 if (!id) {
                     throw LookupError("unknown entity '" + s + "'");
                 }
                 return *id;
             })
        .def("relation_id",
             [](const Vocab& v, const std::string& s) {
                 auto id = v.find_relation(s);
                 if (!id) {
                     throw LookupError("unknown relation '" + s + "'");
                 }
                 return *id;
             })
        .def("entity_name", [](const Vocab& v, EntityId e) { return v.entities.symbols().at(static_cast<std::size_t>(e)); })
        .def("relation_name",
             [](const Vocab& v, RelationId r) {
                 if (r < 0 || r >= v.num_relations()) {
                     throw py::index_error("relation id out of range");
                 }
                 return v.relation_symbol(r);
             })
        .def("reciprocal", &Vocab::reciprocal)
        .def_property_readonly("entities", [](const Vocab& v) { return v.entities.symbols(); });

    py::class_<Dataset>(m, "Dataset")
        .def_readonly("vocab", &Dataset::vocab)
        .def_property_readonly("train", [](const Dataset& d) { return to_array(d.train); })
        .def_property_readonly("valid", [](const Dataset& d) { return to_array(d.valid); })
        .def_property_readonly("test", [](const Dataset& d) { return to_array(d.test); })
        .def("stats", [](const Dataset& d) { return format_stats(dataset_stats(d)); });

    m.def(
        "load_dataset", [](const std::filesystem::path& dir) { return load_dataset(dir); }, py::arg("directory"));
    m.def(
        "add_reciprocals",
        [](const TripleArray& triples, const Vocab& vocab) {
            TripleList list{from_array(triples), false};
            check_ids(list.triples, vocab);
            return to_array(add_reciprocals(list, vocab));
        },
        py::arg("triples"), py::arg("vocab"), "Appends (t, r^-1, h) for every (h, r, t)");

    py::class_<Checkpoint>(m, "Model")
        .def_static(
            "load", [](const std::filesystem::path& p) { return load_checkpoint(p); }, py::arg("path"))
        .def_readonly("vocab", &Checkpoint::vocab)
        .def_readonly("epoch", &Checkpoint::epoch)
        .def_readonly("best_dev_mrr", &Checkpoint::best_dev_mrr)
        .def_property_readonly("config_json", [](const Checkpoint& c) { return c.config.dump(); })
        .def_property_readonly("entity_embeddings", [](const Checkpoint& c) { return c.params.entity_table; })
        .def_property_readonly("relation_embeddings", [](const Checkpoint& c) { return c.params.relation_table; })
        .def(
            "score_all",
            [](const Checkpoint& c, const std::vector<EntityId>& heads, const std::vector<RelationId>& relations) {
                if (heads.size() != relations.size()) {
                    throw ShapeError("heads and relations must have equal length");
                }
                std::vector<Query> qs;
                std::vector<Triple> probe;
                for (std::size_t i = 0; i < heads.size(); ++i) {
                    qs.push_back({heads[i], relations[i]});
                    probe.push_back({heads[i], relations[i], 0});
                }
                check_ids(probe, c.vocab);
                py::gil_scoped_release release;
                return forward_scores(c.params, qs);
            },
            py::arg("heads"), py::arg("relations"), "Scores every entity as the tail of each (head, relation) query")
        .def(
            "score_triples",
            [](const Checkpoint& c, const TripleArray& triples) {
                auto ts = from_array(triples);
                check_ids(ts, c.vocab);
                py::gil_scoped_release release;
                return score_triples(c.params, ts);
            },
            py::arg("triples"))
        .def(
            "encode",
            [](const Checkpoint& c, EntityId head, RelationId relation) {
                check_ids({{head, relation, 0}}, c.vocab);
                auto e = encode_query(c.params, {head, relation});
                return py::make_tuple(e.head, e.relation);
            },
            py::arg("head"), py::arg("relation"), "Encoder outputs (h', r') for one query")
        .def(
            "evaluate",
            [](const Checkpoint& c, const Dataset& ds, const std::string& split, const std::string& scope, int workers) {
                const TripleList& list = split == "train" ? ds.train : split == "valid" ? ds.valid : ds.test;
                if (split != "train" && split != "valid" && split != "test") {
                    throw py::value_error("split must be train, valid or test");
                }
                if (!(ds.vocab == c.vocab)) {
                    throw ConfigError("dataset vocabulary differs from the checkpoint's");
                }
                const auto filter = build_eval_filter(ds, parse_filter_scope(scope));
                RankReport r;
                {
                    py::gil_scoped_release release;
                    r = evaluate_link_prediction(c.params, list.triples, ds.vocab, filter, effective_workers(workers));
                }
                return rank_dict(r);
            },
            py::arg("dataset"), py::arg("split") = "test", py::arg("filter_scope") = "standard", py::arg("workers") = 1,
            "Filtered link prediction over both query directions");

    m.def("token_shift", &token_shift, py::arg("current"), py::arg("previous"), py::arg("mix"));
    m.def("wkv_direct", &wkv_direct, py::arg("keys"), py::arg("values"), py::arg("decay"), py::arg("bonus"));
    m.def("tucker_score_all",
          [](const Vec& h, const Vec& r, const Mat& ent, const Mat& core) { return tucker_score_all(h, r, ent, {core}); },
          py::arg("head"), py::arg("relation"), py::arg("entities"), py::arg("core"));
    m.def("transe_score_all", &transe_score_all, py::arg("head"), py::arg("relation"), py::arg("entities"));
    m.def("distmult_score_all", &distmult_score_all, py::arg("head"), py::arg("relation"), py::arg("entities"));
    m.def("complex_score_all", &complex_score_all, py::arg("head"), py::arg("relation"), py::arg("entities"),
          py::arg("conjugate_tail") = true);

    m.def(
        "softmax_cross_entropy",
        [](const std::vector<double>& scores, Index target, double smoothing) {
            auto ce = softmax_cross_entropy(scores, target, smoothing);
            return py::make_tuple(ce.loss, ce.grad);
        },
        py::arg("scores"), py::arg("target"), py::arg("label_smoothing") = 0.0);
    m.def(
        "filtered_rank",
        [](const std::vector<double>& scores, EntityId truth, const std::vector<EntityId>& filtered) {
            if (truth < 0 || static_cast<std::size_t>(truth) >= scores.size()) {
                throw py::index_error("true answer out of range");
            }
            return filtered_rank(scores, truth, filtered);
        },
        py::arg("scores"), py::arg("true_answer"), py::arg("filtered") = std::vector<EntityId>{});
    m.def(
        "summarize_ranks", [](std::vector<std::int64_t> ranks) { return rank_dict(summarize_ranks(std::move(ranks))); },
        py::arg("ranks"));
    m.def(
        "tune_thresholds",
        [](const std::vector<RelationId>& relations, const std::vector<double>& scores, const std::vector<bool>& labels) {
            auto th = tune_thresholds(scored_examples(relations, scores, labels));
            return py::make_tuple(th.per_relation, th.fallback);
        },
        py::arg("relations"), py::arg("scores"), py::arg("labels"), "Returns ({relation: threshold}, fallback)");
    m.def(
        "classification_accuracy",
        [](const std::vector<RelationId>& relations, const std::vector<double>& scores, const std::vector<bool>& labels,
           const std::map<RelationId, double>& thresholds, double fallback) {
            RelationThresholds th{thresholds, fallback};
            return classify(scored_examples(relations, scores, labels), th).accuracy;
        },
        py::arg("relations"), py::arg("scores"), py::arg("labels"), py::arg("thresholds"), py::arg("fallback"));

    // Commands return (exit code, stdout, stderr).
    m.def("cmd_preprocess", [](const std::filesystem::path& dir, const std::filesystem::path& out) {
        return run(cmd_preprocess, PreprocessOptions{dir, out});
    });
    m.def("cmd_train", [](const std::string& overrides, std::optional<std::filesystem::path> config_file) {
        TrainOptions o;
        o.config_file = std::move(config_file);
        o.overrides = nlohmann::json::parse(overrides);
        return run(cmd_train, o);
    });
    m.def("cmd_eval", [](const std::filesystem::path& ckpt, const std::string& split,
                         std::optional<std::filesystem::path> dataset_dir, std::optional<std::string> scope,
                         std::optional<std::filesystem::path> out, int workers) {
        EvalOptions o{ckpt, split, std::move(dataset_dir), std::nullopt, std::move(out), workers};
        if (scope) {
            o.filter_scope = parse_filter_scope(*scope);
        }
        return run(cmd_eval, o);
    });
    m.def("cmd_classify", [](const std::filesystem::path& ckpt, const std::filesystem::path& valid,
                             const std::filesystem::path& test, std::optional<std::filesystem::path> out) {
        return run(cmd_classify, ClassifyOptions{ckpt, valid, test, std::move(out)});
    });
    m.def("cmd_export_embeddings", [](const std::filesystem::path& ckpt, const std::filesystem::path& out_dir,
                                      std::optional<std::string> probe) {
        return run(cmd_export_embeddings, ExportOptions{ckpt, out_dir, std::move(probe)});
    });
    m.def("cmd_corrupt", [](const std::filesystem::path& dir, const std::string& split, std::uint64_t seed,
                            const std::filesystem::path& out) {
        return run(cmd_corrupt, CorruptOptions{dir, split, seed, out});
    });
    m.def("cmd_subsample", [](const std::filesystem::path& dir, double fraction, std::uint64_t seed,
                              const std::filesystem::path& out) {
        return run(cmd_subsample, SubsampleOptions{dir, fraction, seed, out});
    });
}
