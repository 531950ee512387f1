// trp_kgc: knowledge-graph completion with a receptance-style encoder and Tucker decoder.

#include "trpkgc/commands.hpp"

#include <CLI11.hpp>

#include <functional>
#include <iostream>
#include <memory>
#include <vector>

using namespace trpkgc;
using nlohmann::json;

namespace {

// Flags collected into the train overrides only when the user set them.
class OverrideFlags {
public:
    explicit OverrideFlags(CLI::App* app) : app_(app) {}

    template <typename T>
    void add(const std::string& key, const std::string& help) {
        auto storage = std::make_shared<T>();
        CLI::Option* opt = app_->add_option("--" + key, *storage, help);
        apply_.push_back([opt, storage, key](json& overrides) {
            if (opt->count() > 0) {
                overrides[key] = *storage;
            }
        });
    }

    void collect(json& overrides) const {
        for (const auto& fn : apply_) {
            fn(overrides);
        }
    }

private:
    CLI::App* app_;
    std::vector<std::function<void(json&)>> apply_;
};

}  // namespace

int main(int argc, char** argv) {
    trpkgc::configure_allocator();
    CLI::App app{"Knowledge graph completion: train, evaluate, classify, export"};
    app.require_subcommand(1);

    PreprocessOptions pre;
    auto* pre_cmd = app.add_subcommand("preprocess", "Build vocabularies and print dataset statistics");
    pre_cmd->add_option("--dataset-dir", pre.dataset_dir, "Directory with train/valid/test TSV files")->required();
    pre_cmd->add_option("--output-dir", pre.output_dir, "Where to write entities.tsv and relations.tsv");

    TrainOptions tr;
    std::string config_path;
    auto* train_cmd = app.add_subcommand("train", "Train a model; writes best/last checkpoints and a log");
    OverrideFlags flags(train_cmd);
    train_cmd->add_option("--config", config_path, "JSON config with flat keys named like the flags");
    flags.add<std::string>("dataset-dir", "Dataset directory");
    flags.add<std::string>("output-dir", "Output directory");
    flags.add<long>("dim", "Embedding size");
    flags.add<int>("blocks", "Number of encoder blocks");
    flags.add<double>("dropout", "Dropout rate");
    flags.add<double>("lr", "Adam learning rate");
    flags.add<int>("batch-size", "Batch size");
    flags.add<int>("max-epochs", "Epoch budget");
    flags.add<std::uint64_t>("seed", "Random seed");
    flags.add<std::string>("decoder", "tucker|mlp|transe|distmult|complex");
    flags.add<std::string>("filter-scope", "standard|train_only");
    flags.add<int>("eval-every", "Dev evaluation cadence in epochs");
    flags.add<int>("workers", "Evaluation threads");
    flags.add<double>("label-smoothing", "Label smoothing mass");
    flags.add<double>("clip-norm", "Gradient norm clip (0 = off)");
    flags.add<long>("att-dim", "Time-mixing width (0 = dim)");
    flags.add<long>("ff-dim", "Channel-mixing hidden width (0 = 4*dim)");
    train_cmd->add_flag_callback("--no-encoder", [&] { tr.overrides["no-encoder"] = true; },
                                 "Decode raw embeddings (encoder ablation)");

    EvalOptions ev;
    std::string eval_dataset;
    std::string eval_scope;
    std::string eval_out;
    auto* eval_cmd = app.add_subcommand("eval", "Filtered link-prediction metrics for a checkpoint");
    eval_cmd->add_option("--checkpoint", ev.checkpoint, "Checkpoint file")->required();
    eval_cmd->add_option("--split", ev.split, "train|valid|test or a TSV path");
    eval_cmd->add_option("--dataset-dir", eval_dataset, "Override the dataset directory");
    eval_cmd->add_option("--filter-scope", eval_scope, "standard|train_only");
    eval_cmd->add_option("--out", eval_out, "Metrics JSON path");
    eval_cmd->add_option("--workers", ev.workers, "Evaluation threads");

    ClassifyOptions cl;
    std::string classify_out;
    auto* classify_cmd = app.add_subcommand("classify", "Triple classification with per-relation thresholds");
    classify_cmd->add_option("--checkpoint", cl.checkpoint, "Checkpoint file")->required();
    classify_cmd->add_option("--valid", cl.valid, "Labeled validation TSV (threshold tuning)")->required();
    classify_cmd->add_option("--test", cl.test, "Labeled test TSV")->required();
    classify_cmd->add_option("--out", classify_out, "Report JSON path");

    ExportOptions ex;
    std::string probe;
    auto* export_cmd = app.add_subcommand("export-embeddings", "Write entity/relation vectors as TSV");
    export_cmd->add_option("--checkpoint", ex.checkpoint, "Checkpoint file")->required();
    export_cmd->add_option("--out", ex.out_dir, "Output directory")->required();
    export_cmd->add_option("--probe-entity", probe, "Also export relations encoded with this head entity");

    CorruptOptions co;
    auto* corrupt_cmd = app.add_subcommand("corrupt", "Write a labeled split with one corrupted negative per triple");
    corrupt_cmd->add_option("--dataset-dir", co.dataset_dir, "Dataset directory")->required();
    corrupt_cmd->add_option("--split", co.split, "train|valid|test");
    corrupt_cmd->add_option("--seed", co.seed, "Random seed");
    corrupt_cmd->add_option("--out", co.out, "Labeled TSV output")->required();

    SubsampleOptions ss;
    auto* sub_cmd = app.add_subcommand("subsample", "Write a random fraction of a dataset");
    sub_cmd->add_option("--dataset-dir", ss.dataset_dir, "Dataset directory")->required();
    sub_cmd->add_option("--fraction", ss.fraction, "Kept fraction of triples");
    sub_cmd->add_option("--seed", ss.seed, "Random seed");
    sub_cmd->add_option("--out", ss.out_dir, "Output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    if (*pre_cmd) {
        return cmd_preprocess(pre, std::cout, std::cerr);
    }
    if (*train_cmd) {
        flags.collect(tr.overrides);
        if (!config_path.empty()) {
            tr.config_file = config_path;
        }
        return cmd_train(tr, std::cout, std::cerr);
    }
    if (*eval_cmd) {
        if (!eval_dataset.empty()) {
            ev.dataset_dir = eval_dataset;
        }
        if (!eval_scope.empty()) {
            try {
                ev.filter_scope = parse_filter_scope(eval_scope);
            } catch (const std::exception& e) {
                std::cerr << e.what() << '\n';
                return kExitUsage;
            }
        }
        if (!eval_out.empty()) {
            ev.out = eval_out;
        }
        return cmd_eval(ev, std::cout, std::cerr);
    }
    if (*classify_cmd) {
        if (!classify_out.empty()) {
            cl.out = classify_out;
        }
        return cmd_classify(cl, std::cout, std::cerr);
    }
    if (*export_cmd) {
        if (!probe.empty()) {
            ex.probe_entity = probe;
        }
        return cmd_export_embeddings(ex, std::cout, std::cerr);
    }
    if (*corrupt_cmd) {
        return cmd_corrupt(co, std::cout, std::cerr);
    }
    if (*sub_cmd) {
        return cmd_subsample(ss, std::cout, std::cerr);
    }
    return kExitUsage;
}
