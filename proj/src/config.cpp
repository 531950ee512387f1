#include "trpkgc/config.hpp"

#include "trpkgc/errors.hpp"

#include <fstream>

namespace trpkgc {

using nlohmann::json;

json to_json(const RunConfig& c) {
    const auto& t = c.train;
    return json{
        {"dataset-dir", c.dataset_dir.string()},
        {"output-dir", c.output_dir.string()},
        {"dim", t.dim},
        {"blocks", t.num_blocks},
        {"dropout", t.dropout},
        {"lr", t.learning_rate},
        {"batch-size", t.batch_size},
        {"max-epochs", t.max_epochs},
        {"seed", t.seed},
        {"decoder", std::string(to_string(t.decoder))},
        {"no-encoder", !t.encoder_enabled},
        {"filter-scope", std::string(to_string(c.filter_scope))},
        {"eval-every", t.eval_every},
        {"workers", t.workers},
        {"label-smoothing", t.label_smoothing},
        {"clip-norm", t.clip_norm},
        {"att-dim", t.att_dim},
        {"ff-dim", t.ff_dim},
        {"final-ln", t.final_ln},
        {"input-ln", t.input_ln},
        {"complex-conjugate", t.conjugate_tail},
    };
}

void apply_json(RunConfig& c, const json& j, std::vector<std::string>& errors) {
    if (!j.is_object()) {
        errors.push_back("config must be a JSON object");
        return;
    }
    auto& t = c.train;
    for (const auto& [key, value] : j.items()) {
        try {
            if (key == "dataset-dir") {
                c.dataset_dir = value.get<std::string>();
            } else if (key == "output-dir") {
                c.output_dir = value.get<std::string>();
            } else if (key == "dim") {
                t.dim = value.get<Index>();
            } else if (key == "blocks") {
                t.num_blocks = value.get<int>();
            } else if (key == "dropout") {
                t.dropout = value.get<double>();
            } else if (key == "lr") {
                t.learning_rate = value.get<double>();
            } else if (key == "batch-size") {
                t.batch_size = value.get<int>();
            } else if (key == "max-epochs") {
                t.max_epochs = value.get<int>();
            } else if (key == "seed") {
                t.seed = value.get<std::uint64_t>();
            } else if (key == "decoder") {
                t.decoder = parse_decoder_kind(value.get<std::string>());
            } else if (key == "no-encoder") {
                t.encoder_enabled = !value.get<bool>();
            } else if (key == "filter-scope") {
                c.filter_scope = parse_filter_scope(value.get<std::string>());
            } else if (key == "eval-every") {
                t.eval_every = value.get<int>();
            } else if (key == "workers") {
                t.workers = value.get<int>();
            } else if (key == "label-smoothing") {
                t.label_smoothing = value.get<double>();
            } else if (key == "clip-norm") {
                t.clip_norm = value.get<double>();
            } else if (key == "att-dim") {
                t.att_dim = value.get<Index>();
            } else if (key == "ff-dim") {
                t.ff_dim = value.get<Index>();
            } else if (key == "final-ln") {
                t.final_ln = value.get<bool>();
            } else if (key == "input-ln") {
                t.input_ln = value.get<bool>();
            } else if (key == "complex-conjugate") {
                t.conjugate_tail = value.get<bool>();
            } else {
                errors.push_back("unknown config key '" + key + "'");
            }
        } catch (const std::exception& e) {
            errors.push_back("config key '" + key + "': " + e.what());
        }
    }
}

std::vector<std::string> validate(const RunConfig& c, bool require_dataset) {
    std::vector<std::string> errors;
    const auto& t = c.train;
    if (require_dataset) {
        if (c.dataset_dir.empty()) {
            errors.push_back("dataset-dir is required");
        } else if (!std::filesystem::is_directory(c.dataset_dir)) {
            errors.push_back("dataset-dir '" + c.dataset_dir.string() + "' does not exist");
        }
    }
    if (t.dim <= 0) {
        errors.push_back("dim must be positive");
    }
    if (t.encoder_enabled && t.num_blocks < 1) {
        errors.push_back("blocks must be at least 1 when the encoder is enabled");
    }
    if (t.dropout < 0.0 || t.dropout >= 1.0) {
        errors.push_back("dropout must lie in [0, 1)");
    }
    if (t.learning_rate <= 0.0) {
        errors.push_back("lr must be positive");
    }
    if (t.batch_size <= 0) {
        errors.push_back("batch-size must be positive");
    }
    if (t.max_epochs < 0) {
        errors.push_back("max-epochs must be non-negative");
    }
    if (t.eval_every <= 0) {
        errors.push_back("eval-every must be positive");
    }
    if (t.workers <= 0) {
        errors.push_back("workers must be positive");
    }
    if (t.label_smoothing < 0.0 || t.label_smoothing >= 1.0) {
        errors.push_back("label-smoothing must lie in [0, 1)");
    }
    if (t.decoder == DecoderKind::ComplEx && t.dim % 2 != 0) {
        errors.push_back("complex decoder needs an even dim");
    }
    if (t.att_dim < 0 || t.ff_dim < 0) {
        errors.push_back("att-dim and ff-dim must be non-negative");
    }
    return errors;
}

json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config " + path.string());
    }
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config " + path.string() + ": " + e.what());
    }
}

}  // namespace trpkgc
