#pragma once

#include "trpkgc/tensor.hpp"

#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace trpkgc {

enum class DecoderKind { Tucker, Mlp, TransE, DistMult, ComplEx };

std::string_view to_string(DecoderKind kind);
DecoderKind parse_decoder_kind(std::string_view name);

// Three-way core W[i, j, k] stored as a [d x d*d] matrix: core(i, j * d + k).
struct TuckerCore {
    Mat core;

    Index dim() const { return core.rows(); }
    double at(Index i, Index j, Index k) const { return core(i, j * dim() + k); }
    double& at(Index i, Index j, Index k) { return core(i, j * dim() + k); }
};

struct MlpDecoderParams {
    Mat w1;  // [d_hid x 2d]
    Vec b1;  // [d_hid]
    Mat w2;  // [d x d_hid]
    Vec b2;  // [d]
};

struct DecoderParams {
    DecoderKind kind = DecoderKind::Tucker;
    std::optional<TuckerCore> tucker;
    std::optional<MlpDecoderParams> mlp;
    // ComplEx: score Re(<r, h, conj(t)>) when true, Re(<r, h, t>) otherwise.
    bool conjugate_tail = true;
};

DecoderParams init_decoder(DecoderKind kind, Index dim, std::mt19937_64& rng);
DecoderParams zeros_like(const DecoderParams& p);
void append_tensors(DecoderParams& p, std::vector<TensorRef>& out);

// Scores of one (head, relation) pair against every row of `entities` ([|V| x d]).
Vec tucker_score_all(const Vec& head, const Vec& relation, const Mat& entities, const TuckerCore& core);
Vec mlp_score_all(const Vec& head, const Vec& relation, const Mat& entities, const MlpDecoderParams& p);
Vec transe_score_all(const Vec& head, const Vec& relation, const Mat& entities);
Vec distmult_score_all(const Vec& head, const Vec& relation, const Mat& entities);
Vec complex_score_all(const Vec& head, const Vec& relation, const Mat& entities, bool conjugate_tail = true);

struct DecoderCache {
    Mat head;
    Mat relation;
    Mat query;       // scores = query * entities^T for every kind except TransE
    Mat contracted;  // Tucker: head contracted with the core, [B x d*d]
    Mat hidden_pre;  // MLP: W1 [h; r] + b1
    Mat distance;    // TransE: ||h + r - t||
};

// Batched scoring: rows of `head`/`relation` are queries; result is [B x |V|].
Mat decoder_forward(const DecoderParams& p, const Mat& head, const Mat& relation, const Mat& entities,
                    DecoderCache* cache);

struct DecoderInputGrads {
    Mat head;
    Mat relation;
};

// Accumulates parameter gradients into `grads` and candidate-side gradients into
// `grad_entities`; returns gradients for the head and relation inputs.
DecoderInputGrads decoder_backward(const DecoderParams& p, const DecoderCache& cache, const Mat& entities,
                                   const Mat& grad_scores, DecoderParams& grads, Mat& grad_entities);

}  // namespace trpkgc
