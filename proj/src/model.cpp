#include "trpkgc/model.hpp"

#include "trpkgc/errors.hpp"

#include <cmath>

namespace trpkgc {

namespace {

Mat gather_inputs(const ModelParams& p, std::span<const Query> queries) {
    const Index batch = static_cast<Index>(queries.size());
    const Index entities = p.entity_table.rows();
    const Index relations = p.relation_table.rows();
    Mat x(2 * batch, p.entity_table.cols());
    for (Index b = 0; b < batch; ++b) {
        const auto& q = queries[static_cast<std::size_t>(b)];
        if (q.head < 0 || q.head >= entities || q.relation < 0 || q.relation >= relations) {
            throw ShapeError("query id out of range");
        }
        x.row(b) = p.entity_table.row(q.head);
        x.row(batch + b) = p.relation_table.row(q.relation);
    }
    return x;
}

}  // namespace

std::vector<TensorRef> ModelParams::tensors() {
    std::vector<TensorRef> out;
    out.push_back(tensor_ref("entity_table", entity_table));
    out.push_back(tensor_ref("relation_table", relation_table));
    append_tensors(encoder, out);
    append_tensors(decoder, out);
    return out;
}

std::vector<ConstTensorRef> ModelParams::tensors() const {
    std::vector<ConstTensorRef> out;
    for (auto& t : const_cast<ModelParams*>(this)->tensors()) {
        out.push_back({t.name, t.values, t.rows, t.cols});
    }
    return out;
}

ModelParams init_model(const ModelConfig& config, std::uint64_t seed) {
    if (config.num_entities <= 0 || config.num_relations <= 0 || config.dim <= 0) {
        throw ShapeError("init_model: empty vocabulary or zero dimension");
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> emb(0.0, 1.0 / std::sqrt(static_cast<double>(config.dim)));
    ModelParams p;
    p.input_dropout = config.dropout;
    p.entity_table.resize(config.num_entities, config.dim);
    p.relation_table.resize(config.num_relations, config.dim);
    for (Index i = 0; i < p.entity_table.size(); ++i) {
        p.entity_table.data()[i] = emb(rng);
    }
    for (Index i = 0; i < p.relation_table.size(); ++i) {
        p.relation_table.data()[i] = emb(rng);
    }
    if (config.encoder_enabled) {
        const auto dims = config.encoder_dims();
        for (int b = 0; b < config.num_blocks; ++b) {
            p.encoder.blocks.push_back(init_block(dims, config.dropout, rng));
        }
        if (config.input_ln) {
            p.encoder.input_ln = make_layer_norm(config.dim);
        }
        if (config.final_ln) {
            p.encoder.final_ln = make_layer_norm(config.dim);
        }
    }
    p.decoder = init_decoder(config.decoder, config.dim, rng);
    p.decoder.conjugate_tail = config.conjugate_tail;
    return p;
}

ModelParams zeros_like(const ModelParams& p) {
    ModelParams g;
    g.input_dropout = p.input_dropout;
    g.entity_table = Mat::Zero(p.entity_table.rows(), p.entity_table.cols());
    g.relation_table = Mat::Zero(p.relation_table.rows(), p.relation_table.cols());
    g.encoder = zeros_like(p.encoder);
    g.decoder = zeros_like(p.decoder);
    return g;
}

Mat forward_scores(const ModelParams& p, std::span<const Query> queries, DropoutSource* masks, ModelCache* cache) {
    const Index batch = static_cast<Index>(queries.size());
    Mat x = gather_inputs(p, queries);
    Mat input_mask = masks ? masks->mask(x.rows(), x.cols(), p.input_dropout) : Mat{};
    if (input_mask.size() > 0) {
        x.array() *= input_mask.array();
    }
    const bool has_encoder = !p.encoder.blocks.empty() || p.encoder.final_ln || p.encoder.input_ln;
    Mat encoded = has_encoder ? encoder_forward(p.encoder, x, 2, masks, cache ? &cache->encoder : nullptr) : x;
    const Mat head = encoded.topRows(batch);
    const Mat relation = encoded.bottomRows(batch);
    Mat scores = decoder_forward(p.decoder, head, relation, p.entity_table, cache ? &cache->decoder : nullptr);
    if (cache) {
        cache->queries.assign(queries.begin(), queries.end());
        cache->input_mask = std::move(input_mask);
        cache->has_encoder = has_encoder;
    }
    return scores;
}

void backward_scores(const ModelParams& p, const ModelCache& cache, const Mat& grad_scores, ModelParams& grads) {
    const Index batch = static_cast<Index>(cache.queries.size());
    const auto input_grads =
        decoder_backward(p.decoder, cache.decoder, p.entity_table, grad_scores, grads.decoder, grads.entity_table);
    Mat grad_encoded(2 * batch, p.entity_table.cols());
    grad_encoded.topRows(batch) = input_grads.head;
    grad_encoded.bottomRows(batch) = input_grads.relation;
    Mat grad_x = cache.has_encoder ? encoder_backward(p.encoder, cache.encoder, grad_encoded, 2, grads.encoder)
                                   : grad_encoded;
    if (cache.input_mask.size() > 0) {
        grad_x.array() *= cache.input_mask.array();
    }
    for (Index b = 0; b < batch; ++b) {
        const auto& q = cache.queries[static_cast<std::size_t>(b)];
        grads.entity_table.row(q.head) += grad_x.row(b);
        grads.relation_table.row(q.relation) += grad_x.row(batch + b);
    }
}

EncoderOutput encode_query(const ModelParams& p, const Query& q) {
    const Query qs[] = {q};
    const Mat x = gather_inputs(p, qs);
    const bool has_encoder = !p.encoder.blocks.empty() || p.encoder.final_ln || p.encoder.input_ln;
    const Mat y = has_encoder ? encoder_forward(p.encoder, x, 2, nullptr, nullptr) : x;
    return {y.row(0).transpose(), y.row(1).transpose()};
}

std::vector<double> score_triples(const ModelParams& p, std::span<const Triple> triples) {
    constexpr std::size_t kChunk = 512;
    std::vector<double> out;
    out.reserve(triples.size());
    std::vector<Query> queries;
    for (std::size_t start = 0; start < triples.size(); start += kChunk) {
        const auto n = std::min(kChunk, triples.size() - start);
        queries.clear();
        for (std::size_t i = 0; i < n; ++i) {
            queries.push_back({triples[start + i].head, triples[start + i].relation});
        }
        const Mat scores = forward_scores(p, queries);
        for (std::size_t i = 0; i < n; ++i) {
            out.push_back(scores(static_cast<Index>(i), triples[start + i].tail));
        }
    }
    return out;
}

double squared_norm(const ModelParams& p) {
    double total = 0.0;
    for (const auto& t : p.tensors()) {
        for (double v : t.values) {
            total += v * v;
        }
    }
    return total;
}

}  // namespace trpkgc
