#pragma once

#include "trpkgc/config.hpp"

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

namespace trpkgc {

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitData = 2, kExitNumerical = 3 };

struct PreprocessOptions {
    std::filesystem::path dataset_dir;
    std::filesystem::path output_dir;  // empty -> <dataset_dir>/vocab
};

struct TrainOptions {
    std::optional<std::filesystem::path> config_file;
    nlohmann::json overrides = nlohmann::json::object();  // flag values, same keys as the config file
};

struct EvalOptions {
    std::filesystem::path checkpoint;
    std::string split = "test";  // split name under the dataset dir, or a file path
    std::optional<std::filesystem::path> dataset_dir;
    std::optional<FilterScope> filter_scope;
    std::optional<std::filesystem::path> out;
    int workers = 1;
};

struct ClassifyOptions {
    std::filesystem::path checkpoint;
    std::filesystem::path valid;
    std::filesystem::path test;
    std::optional<std::filesystem::path> out;
};

struct ExportOptions {
    std::filesystem::path checkpoint;
    std::filesystem::path out_dir;
    std::optional<std::string> probe_entity;
};

struct CorruptOptions {
    std::filesystem::path dataset_dir;
    std::string split = "test";
    std::uint64_t seed = 7;
    std::filesystem::path out;
};

struct SubsampleOptions {
    std::filesystem::path dataset_dir;
    double fraction = 0.01;
    std::uint64_t seed = 7;
    std::filesystem::path out_dir;
};

// Each command reports to `out`/`err` and returns an ExitCode.
int cmd_preprocess(const PreprocessOptions& opts, std::ostream& out, std::ostream& err);
int cmd_train(const TrainOptions& opts, std::ostream& out, std::ostream& err);
int cmd_eval(const EvalOptions& opts, std::ostream& out, std::ostream& err);
int cmd_classify(const ClassifyOptions& opts, std::ostream& out, std::ostream& err);
int cmd_export_embeddings(const ExportOptions& opts, std::ostream& out, std::ostream& err);
int cmd_corrupt(const CorruptOptions& opts, std::ostream& out, std::ostream& err);
int cmd_subsample(const SubsampleOptions& opts, std::ostream& out, std::ostream& err);

// Caps a requested worker count by TRP_KGC_THREADS when set.
int effective_workers(int requested);

nlohmann::json rank_report_json(const RankReport& report);

// Keeps large scratch matrices on the heap instead of mmap-ing them per batch (glibc only).
void configure_allocator();

}  // namespace trpkgc
