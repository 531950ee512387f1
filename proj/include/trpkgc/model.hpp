#pragma once

#include "trpkgc/decoders.hpp"
#include "trpkgc/kg_data.hpp"
#include "trpkgc/tensor.hpp"
#include "trpkgc/trp_encoder.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace trpkgc {

struct ModelConfig {
    std::int32_t num_entities = 0;
    std::int32_t num_relations = 0;  // including reciprocals
    Index dim = 128;
    Index att_dim = 0;  // 0 -> dim
    Index ff_dim = 0;   // 0 -> 4 * dim
    int num_blocks = 2;
    double dropout = 0.3;
    DecoderKind decoder = DecoderKind::Tucker;
    bool encoder_enabled = true;
    bool final_ln = true;
    bool input_ln = false;
    bool conjugate_tail = true;

    EncoderDims encoder_dims() const { return {dim, att_dim > 0 ? att_dim : dim, ff_dim > 0 ? ff_dim : 4 * dim}; }
};

struct ModelParams {
    Mat entity_table;    // [|V| x d]
    Mat relation_table;  // [2R x d]
    EncoderParams encoder;
    DecoderParams decoder;
    double input_dropout = 0.0;

    // Every learnable tensor in a fixed order.
    std::vector<TensorRef> tensors();
    std::vector<ConstTensorRef> tensors() const;
};

ModelParams init_model(const ModelConfig& config, std::uint64_t seed);
ModelParams zeros_like(const ModelParams& p);

struct Query {
    EntityId head = 0;
    RelationId relation = 0;
};

struct ModelCache {
    std::vector<Query> queries;
    Mat input_mask;
    bool has_encoder = false;
    EncoderCache encoder;
    DecoderCache decoder;
};

// Scores every entity as tail for each query: [B x |V|]. `masks` null means inference.
Mat forward_scores(const ModelParams& p, std::span<const Query> queries, DropoutSource* masks = nullptr,
                   ModelCache* cache = nullptr);

// Reverse pass from d(loss)/d(scores), accumulating into `grads`.
void backward_scores(const ModelParams& p, const ModelCache& cache, const Mat& grad_scores, ModelParams& grads);

// Encoded (head, relation) representations without decoding, [B x d] each.
EncoderOutput encode_query(const ModelParams& p, const Query& q);

// Plausibility of individual triples (higher = more likely true).
std::vector<double> score_triples(const ModelParams& p, std::span<const Triple> triples);

double squared_norm(const ModelParams& p);

}  // namespace trpkgc
