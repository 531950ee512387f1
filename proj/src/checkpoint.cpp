#include "trpkgc/checkpoint.hpp"

#include "trpkgc/errors.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace trpkgc {

static_assert(std::endian::native == std::endian::little, "checkpoint payloads assume a little-endian host");

using nlohmann::json;

namespace {

template <typename T>
void put(std::string& out, T value) {
    char buf[sizeof(T)];
    std::memcpy(buf, &value, sizeof(T));
    out.append(buf, sizeof(T));
}

template <typename T>
T take(std::string_view bytes, std::size_t& offset) {
    if (offset + sizeof(T) > bytes.size()) {
        throw CheckpointError("truncated checkpoint");
    }
    T value;
    std::memcpy(&value, bytes.data() + offset, sizeof(T));
    offset += sizeof(T);
    return value;
}

void put_tensors(std::string& out, const std::vector<ConstTensorRef>& tensors) {
    for (const auto& t : tensors) {
        out.append(reinterpret_cast<const char*>(t.values.data()), t.values.size_bytes());
    }
}

void take_tensors(std::string_view bytes, std::size_t& offset, const std::vector<TensorRef>& tensors) {
    for (const auto& t : tensors) {
        if (offset + t.values.size_bytes() > bytes.size()) {
            throw CheckpointError("truncated payload for tensor " + t.name);
        }
        std::memcpy(t.values.data(), bytes.data() + offset, t.values.size_bytes());
        offset += t.values.size_bytes();
    }
}

json symbols_json(const SymbolTable& table) {
    return table.symbols();
}

}  // namespace

json to_json(const ModelConfig& m) {
    return json{{"num_entities", m.num_entities},
                {"num_relations", m.num_relations},
                {"dim", m.dim},
                {"att_dim", m.att_dim},
                {"ff_dim", m.ff_dim},
                {"blocks", m.num_blocks},
                {"dropout", m.dropout},
                {"decoder", std::string(to_string(m.decoder))},
                {"encoder", m.encoder_enabled},
                {"final_ln", m.final_ln},
                {"input_ln", m.input_ln},
                {"conjugate_tail", m.conjugate_tail}};
}

ModelConfig model_config_from_json(const json& j) {
    ModelConfig m;
    m.num_entities = j.at("num_entities").get<std::int32_t>();
    m.num_relations = j.at("num_relations").get<std::int32_t>();
    m.dim = j.at("dim").get<Index>();
    m.att_dim = j.at("att_dim").get<Index>();
    m.ff_dim = j.at("ff_dim").get<Index>();
    m.num_blocks = j.at("blocks").get<int>();
    m.dropout = j.at("dropout").get<double>();
    m.decoder = parse_decoder_kind(j.at("decoder").get<std::string>());
    m.encoder_enabled = j.at("encoder").get<bool>();
    m.final_ln = j.at("final_ln").get<bool>();
    m.input_ln = j.at("input_ln").get<bool>();
    m.conjugate_tail = j.at("conjugate_tail").get<bool>();
    return m;
}

std::uint64_t vocab_hash(const SymbolTable& table) {
    std::uint64_t h = 1469598103934665603ULL;
    for (const auto& s : table.symbols()) {
        for (unsigned char ch : s) {
            h = (h ^ ch) * 1099511628211ULL;
        }
        h = (h ^ 0xffU) * 1099511628211ULL;
    }
    return h;
}

std::string serialize(const Checkpoint& ckpt) {
    json shapes = json::array();
    for (const auto& t : ckpt.params.tensors()) {
        shapes.push_back({{"name", t.name}, {"rows", t.rows}, {"cols", t.cols}});
    }
    json header{{"format_version", Checkpoint::kVersion},
                {"config", ckpt.config},
                {"model", to_json(ckpt.model)},
                {"vocab",
                 {{"entities", symbols_json(ckpt.vocab.entities)},
                  {"relations", symbols_json(ckpt.vocab.relations)},
                  {"entity_hash", vocab_hash(ckpt.vocab.entities)},
                  {"relation_hash", vocab_hash(ckpt.vocab.relations)}}},
                {"tensors", shapes},
                {"adam", ckpt.adam ? json{{"step", ckpt.adam->step}} : json(nullptr)},
                {"best_dev_mrr", ckpt.best_dev_mrr},
                {"epoch", ckpt.epoch}};
    const std::string text = header.dump();

    std::string out;
    out.append(Checkpoint::kMagic);
    put<std::uint32_t>(out, Checkpoint::kVersion);
    put<std::uint64_t>(out, text.size());
    out.append(text);
    put_tensors(out, ckpt.params.tensors());
    if (ckpt.adam) {
        put_tensors(out, ckpt.adam->first_moment.tensors());
        put_tensors(out, ckpt.adam->second_moment.tensors());
    }
    return out;
}

Checkpoint deserialize(std::string_view bytes) {
    if (bytes.size() < Checkpoint::kMagic.size() || bytes.substr(0, Checkpoint::kMagic.size()) != Checkpoint::kMagic) {
        throw CheckpointError("not a checkpoint (bad magic)");
    }
    std::size_t offset = Checkpoint::kMagic.size();
    const auto version = take<std::uint32_t>(bytes, offset);
    if (version != Checkpoint::kVersion) {
        throw CheckpointError("checkpoint version " + std::to_string(version) + " unsupported (expected " +
                              std::to_string(Checkpoint::kVersion) + ")");
    }
    const auto header_len = take<std::uint64_t>(bytes, offset);
    if (offset + header_len > bytes.size()) {
        throw CheckpointError("truncated checkpoint header");
    }
    json header;
    try {
        header = json::parse(bytes.substr(offset, header_len));
    } catch (const json::exception& e) {
        throw CheckpointError(std::string("corrupt checkpoint header: ") + e.what());
    }
    offset += header_len;

    Checkpoint ckpt;
    try {
        ckpt.config = header.at("config");
        ckpt.model = model_config_from_json(header.at("model"));
        for (const auto& s : header.at("vocab").at("entities")) {
            ckpt.vocab.entities.add(s.get<std::string>());
        }
        for (const auto& s : header.at("vocab").at("relations")) {
            ckpt.vocab.relations.add(s.get<std::string>());
        }
        if (header["vocab"].at("entity_hash").get<std::uint64_t>() != vocab_hash(ckpt.vocab.entities) ||
            header["vocab"].at("relation_hash").get<std::uint64_t>() != vocab_hash(ckpt.vocab.relations)) {
            throw CheckpointError("vocabulary hash mismatch");
        }
        ckpt.best_dev_mrr = header.at("best_dev_mrr").get<double>();
        ckpt.epoch = header.at("epoch").get<int>();
    } catch (const json::exception& e) {
        throw CheckpointError(std::string("malformed checkpoint header: ") + e.what());
    }

    ckpt.params = init_model(ckpt.model, 0);
    const auto tensors = ckpt.params.tensors();
    const auto& shapes = header.at("tensors");
    if (shapes.size() != tensors.size()) {
        throw CheckpointError("tensor count mismatch");
    }
    for (std::size_t i = 0; i < tensors.size(); ++i) {
        if (shapes[i].at("name") != tensors[i].name || shapes[i].at("rows") != tensors[i].rows ||
            shapes[i].at("cols") != tensors[i].cols) {
            throw CheckpointError("tensor header mismatch at " + tensors[i].name);
        }
    }
    take_tensors(bytes, offset, tensors);
    if (!header.at("adam").is_null()) {
        AdamState adam = AdamState::zeros(ckpt.params);
        adam.step = header["adam"].at("step").get<std::int64_t>();
        take_tensors(bytes, offset, adam.first_moment.tensors());
        take_tensors(bytes, offset, adam.second_moment.tensors());
        ckpt.adam = std::move(adam);
    }
    if (offset != bytes.size()) {
        throw CheckpointError("trailing bytes after checkpoint payload");
    }
    return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    const auto bytes = serialize(ckpt);
    std::ofstream out(path, std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw CheckpointError("cannot write " + path.string());
    }
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw CheckpointError("cannot open checkpoint " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return deserialize(buf.str());
}

}  // namespace trpkgc
