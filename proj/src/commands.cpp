#include "trpkgc/commands.hpp"

#include "trpkgc/checkpoint.hpp"
#include "trpkgc/errors.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

namespace trpkgc {

using nlohmann::json;

namespace {

template <typename F>
int guarded(std::ostream& err, F&& body) {
    try {
        return body();
    } catch (const NumericalError& e) {
        err << "numerical abort: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const ParseError& e) {
        err << "parse error: " << e.what() << '\n';
        return kExitData;
    } catch (const LookupError& e) {
        err << "vocabulary error: " << e.what() << '\n';
        return kExitData;
    } catch (const CheckpointError& e) {
        err << "checkpoint error: " << e.what() << '\n';
        return kExitData;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitData;
    }
}

void write_json(const std::filesystem::path& path, const json& j) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path);
    out << j.dump(2) << '\n';
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
}

// Splits of a dataset resolved against an existing vocabulary.
Dataset load_frozen(const std::filesystem::path& dir, const Vocab& vocab) {
    Dataset ds;
    ds.vocab = vocab;
    ds.train = load_triples(split_path(dir, "train"), ds.vocab, VocabMode::Frozen);
    ds.valid = load_triples(split_path(dir, "valid"), ds.vocab, VocabMode::Frozen);
    ds.test = load_triples(split_path(dir, "test"), ds.vocab, VocabMode::Frozen);
    return ds;
}

Checkpoint make_checkpoint(const json& config, const ModelConfig& model, const Vocab& vocab, const ModelParams& params,
                           std::optional<AdamState> adam, double mrr, int epoch) {
    Checkpoint c;
    c.config = config;
    c.model = model;
    c.vocab = vocab;
    c.params = params;
    c.adam = std::move(adam);
    c.best_dev_mrr = mrr;
    c.epoch = epoch;
    return c;
}

void write_vector_row(std::ostream& out, const std::string& symbol, const Vec& values) {
    out << symbol;
    for (Index i = 0; i < values.size(); ++i) {
        out << '\t' << values[i];
    }
    out << '\n';
}

}  // namespace

void configure_allocator() {
#if defined(__GLIBC__)
    mallopt(M_MMAP_THRESHOLD, 256 << 20);
    mallopt(M_TRIM_THRESHOLD, 1 << 30);
    mallopt(M_TOP_PAD, 64 << 20);
#endif
}

int effective_workers(int requested) {
    int workers = std::max(1, requested);
    if (const char* cap = std::getenv("TRP_KGC_THREADS")) {
        const int limit = std::atoi(cap);
        if (limit > 0) {
            workers = std::min(workers, limit);
        }
    }
    return workers;
}

json rank_report_json(const RankReport& r) {
    return json{{"mrr", r.mrr}, {"hits1", r.hits1}, {"hits3", r.hits3}, {"hits10", r.hits10},
                {"num_queries", r.num_queries}};
}

int cmd_preprocess(const PreprocessOptions& opts, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        for (const char* split : {"train", "valid", "test"}) {
            if (!std::filesystem::exists(split_path(opts.dataset_dir, split))) {
                err << "missing " << split << " split under " << opts.dataset_dir << '\n';
                return int{kExitData};
            }
        }
        const auto ds = load_dataset(opts.dataset_dir);
        const auto out_dir = opts.output_dir.empty() ? opts.dataset_dir / "vocab" : opts.output_dir;
        write_vocab(out_dir, ds.vocab);
        out << format_stats(dataset_stats(ds)) << '\n';
        if (ds.train.empty()) {
            err << "warning: training split is empty\n";
            return int{kExitData};
        }
        return int{kExitOk};
    });
}

int cmd_train(const TrainOptions& opts, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        RunConfig cfg;
        std::vector<std::string> errors;
        if (opts.config_file) {
            apply_json(cfg, read_json_file(*opts.config_file), errors);
        }
        apply_json(cfg, opts.overrides, errors);
        for (auto& e : validate(cfg, true)) {
            errors.push_back(std::move(e));
        }
        if (!errors.empty()) {
            for (const auto& e : errors) {
                err << "config error: " << e << '\n';
            }
            return int{kExitUsage};
        }
        for (const auto& w : range_warnings(cfg.train)) {
            err << "warning: " << w << '\n';
        }
        cfg.train.workers = effective_workers(cfg.train.workers);

        const auto ds = load_dataset(cfg.dataset_dir);
        if (ds.train.empty()) {
            err << "training split is empty\n";
            return int{kExitData};
        }
        const auto train_aug = add_reciprocals(ds.train, ds.vocab);
        const auto filter = build_eval_filter(ds, cfg.filter_scope);
        const json effective = to_json(cfg);
        // Checkpoints of identical runs written to different directories stay byte-identical.
        json stored = effective;
        stored.erase("output-dir");
        const auto model = model_config(cfg.train, ds.vocab);

        std::filesystem::create_directories(cfg.output_dir);
        write_json(cfg.output_dir / "effective_config.json", effective);
        std::ofstream log(cfg.output_dir / "train_log.tsv");
        log << "# config " << effective.dump() << '\n' << format_log_header() << '\n';

        TrainHooks hooks;
        hooks.on_eval = [&](const LogRow& row) {
            log << format_log_row(row) << '\n' << std::flush;
            out << "epoch " << row.epoch << "  loss " << row.loss << "  dev mrr " << row.mrr << "  hits@10 "
                << row.hits10 << '\n'
                << std::flush;
        };
        hooks.on_best = [&](const ModelParams& best, const LogRow& row) {
            save_checkpoint(cfg.output_dir / "best.ckpt",
                            make_checkpoint(stored, model, ds.vocab, best, std::nullopt, row.mrr, row.epoch));
        };

        const auto result = train(cfg.train, {ds.vocab, train_aug, ds.valid, filter}, std::nullopt, hooks);
        save_checkpoint(cfg.output_dir / "best.ckpt", make_checkpoint(stored, model, ds.vocab, result.best,
                                                                     std::nullopt, result.best_mrr, result.best_epoch));
        save_checkpoint(cfg.output_dir / "last.ckpt",
                        make_checkpoint(stored, model, ds.vocab, result.last, result.adam,
                                        result.log.empty() ? result.initial_mrr : result.log.back().mrr,
                                        result.epochs_run));
        out << "best dev mrr " << result.best_mrr << " at epoch " << result.best_epoch << '\n';
        return int{kExitOk};
    });
}

int cmd_eval(const EvalOptions& opts, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const auto ckpt = load_checkpoint(opts.checkpoint);
        const std::filesystem::path dataset_dir =
            opts.dataset_dir ? *opts.dataset_dir : std::filesystem::path(ckpt.config.value("dataset-dir", ""));
        const FilterScope scope = opts.filter_scope
                                      ? *opts.filter_scope
                                      : parse_filter_scope(ckpt.config.value("filter-scope", "standard"));
        const auto ds = load_frozen(dataset_dir, ckpt.vocab);
        const auto filter = build_eval_filter(ds, scope);

        TripleList custom;
        const TripleList* split = nullptr;
        if (opts.split == "train") {
            split = &ds.train;
        } else if (opts.split == "valid") {
            split = &ds.valid;
        } else if (opts.split == "test") {
            split = &ds.test;
        } else {
            Vocab vocab = ckpt.vocab;
            custom = load_triples(opts.split, vocab, VocabMode::Frozen);
            split = &custom;
        }

        const auto report =
            evaluate_link_prediction(ckpt.params, split->triples, ckpt.vocab, filter, effective_workers(opts.workers));
        json j = rank_report_json(report);
        j["split"] = opts.split;
        j["filter_scope"] = std::string(to_string(scope));
        j["config"] = ckpt.config;

        out << std::setprecision(6) << "mrr\t" << report.mrr << "\nhits1\t" << report.hits1 << "\nhits3\t"
            << report.hits3 << "\nhits10\t" << report.hits10 << "\nnum_queries\t" << report.num_queries << '\n';
        const auto path = opts.out ? *opts.out
                                   : opts.checkpoint.parent_path() /
                                         ("metrics_" + std::filesystem::path(opts.split).stem().string() + ".json");
        write_json(path, j);
        return int{kExitOk};
    });
}

int cmd_classify(const ClassifyOptions& opts, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const auto ckpt = load_checkpoint(opts.checkpoint);
        Vocab vocab = ckpt.vocab;
        const auto valid = load_labeled_triples(opts.valid, vocab, VocabMode::Frozen);
        const auto test = load_labeled_triples(opts.test, vocab, VocabMode::Frozen);
        const auto thresholds = tune_thresholds(score_labeled(ckpt.params, valid));
        const auto report = classify(score_labeled(ckpt.params, test), thresholds);
        for (auto r : report.fallback_relations) {
            err << "warning: relation " << vocab.relation_symbol(r)
                << " absent from validation data; using fallback threshold " << thresholds.fallback << '\n';
        }

        json per_relation = json::object();
        out << std::setprecision(6) << "accuracy\t" << report.accuracy << '\n';
        for (const auto& [r, acc] : report.per_relation) {
            const double a = static_cast<double>(acc.correct) / static_cast<double>(acc.total);
            out << vocab.relation_symbol(r) << '\t' << a << '\t' << acc.total << '\n';
            per_relation[vocab.relation_symbol(r)] = {{"accuracy", a},
                                                      {"count", acc.total},
                                                      {"threshold", thresholds.threshold(r)}};
        }
        if (opts.out) {
            write_json(*opts.out, json{{"accuracy", report.accuracy},
                                       {"num_examples", test.size()},
                                       {"per_relation", per_relation},
                                       {"config", ckpt.config}});
        }
        return int{kExitOk};
    });
}

int cmd_export_embeddings(const ExportOptions& opts, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const auto ckpt = load_checkpoint(opts.checkpoint);
        std::filesystem::create_directories(opts.out_dir);
        std::ofstream ent(opts.out_dir / "entities.tsv");
        std::ofstream rel(opts.out_dir / "relations.tsv");
        ent << std::setprecision(17);
        rel << std::setprecision(17);
        for (EntityId e = 0; e < ckpt.vocab.num_entities(); ++e) {
            write_vector_row(ent, ckpt.vocab.entities.symbol(e), ckpt.params.entity_table.row(e).transpose());
        }
        for (RelationId r = 0; r < ckpt.vocab.num_relations(); ++r) {
            write_vector_row(rel, ckpt.vocab.relation_symbol(r), ckpt.params.relation_table.row(r).transpose());
        }
        std::size_t rows = 0;
        if (opts.probe_entity) {
            const auto probe = ckpt.vocab.entities.find(*opts.probe_entity);
            if (!probe) {
                throw LookupError("unknown probe entity '" + *opts.probe_entity + "'");
            }
            std::ofstream enc(opts.out_dir / "encoded_relations.tsv");
            enc << std::setprecision(17);
            for (RelationId r = 0; r < ckpt.vocab.num_relations(); ++r) {
                write_vector_row(enc, ckpt.vocab.relation_symbol(r), encode_query(ckpt.params, {*probe, r}).relation);
                ++rows;
            }
            if (!enc) {
                throw std::runtime_error("cannot write encoded_relations.tsv");
            }
        }
        if (!ent || !rel) {
            throw std::runtime_error("cannot write embeddings under " + opts.out_dir.string());
        }
        out << ckpt.vocab.num_entities() << " entities, " << ckpt.vocab.num_relations() << " relations";
        if (opts.probe_entity) {
            out << ", " << rows << " encoded relations";
        }
        out << '\n';
        return int{kExitOk};
    });
}

int cmd_corrupt(const CorruptOptions& opts, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const auto ds = load_dataset(opts.dataset_dir);
        const auto known = build_eval_filter(ds, FilterScope::Standard);
        const TripleList& split = opts.split == "train" ? ds.train : opts.split == "valid" ? ds.valid : ds.test;
        const auto labeled = corrupt_negatives(split.triples, ds.vocab, known, opts.seed);
        write_labeled_triples(opts.out, labeled, ds.vocab);
        out << labeled.size() << " labeled triples written to " << opts.out.string() << '\n';
        return int{kExitOk};
    });
}

int cmd_subsample(const SubsampleOptions& opts, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        if (!(opts.fraction > 0.0 && opts.fraction <= 1.0)) {
            throw std::invalid_argument("fraction must lie in (0, 1]");
        }
        const auto sample = subsample(load_dataset(opts.dataset_dir), opts.fraction, opts.seed);
        std::filesystem::create_directories(opts.out_dir);
        write_triples(opts.out_dir / "train.txt", sample.train.triples, sample.vocab);
        write_triples(opts.out_dir / "valid.txt", sample.valid.triples, sample.vocab);
        write_triples(opts.out_dir / "test.txt", sample.test.triples, sample.vocab);
        out << format_stats(dataset_stats(sample)) << '\n';
        return int{kExitOk};
    });
}

}  // namespace trpkgc
