#pragma once

#include "trpkgc/tensor.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

namespace trpkgc {

// Sequences are stored step-major: row `t * batch + b` holds step t of sequence b.

struct LayerNormParams {
    Vec gain;
    Vec bias;
    double eps = 1e-5;
};

struct TimeMixParams {
    Mat w_receptance;  // [d_att x d_io]
    Mat w_key;         // [d_att x d_io]
    Mat w_value;       // [d_att x d_io]
    Mat w_output;      // [d_io x d_att]
    Vec mix_receptance;  // [d_io]
    Vec mix_key;         // [d_io]
    Vec mix_value;       // [d_io]
    Vec decay;  // [d_att], per-step discount is exp(-decay)
    Vec bonus;  // [d_att], extra weight on the current step
};

struct ChannelMixParams {
    Mat w_receptance;  // [d_io x d_io]
    Mat w_key;         // [d_ff x d_io]
    Mat w_value;       // [d_io x d_ff]
    Vec mix_receptance;  // [d_io]
    Vec mix_key;         // [d_io]
};

struct BlockParams {
    LayerNormParams ln1;
    LayerNormParams ln2;
    TimeMixParams time_mix;
    ChannelMixParams channel_mix;
    double dropout_rate = 0.0;
};

struct EncoderDims {
    Index d_io = 0;
    Index d_att = 0;
    Index d_ff = 0;
};

struct EncoderParams {
    std::vector<BlockParams> blocks;
    std::optional<LayerNormParams> input_ln;
    std::optional<LayerNormParams> final_ln;
};

// Stabilized wkv accumulators: the true sums are a * exp(m) and b * exp(m).
struct EncoderState {
    Vec a;
    Vec b;
    Vec m;

    static EncoderState fresh(Index channels);
};

struct EncoderOutput {
    Vec head;
    Vec relation;
};

// Stands in for -infinity in the running max so that differences stay finite.
inline constexpr double kNegInfSurrogate = -1e300;

// Bernoulli keep-masks for inverted dropout.
class DropoutSource {
public:
    explicit DropoutSource(std::uint64_t seed) : rng_(seed) {}

    // Entries are 0 or 1/(1-rate). Rate 0 yields an empty matrix (no-op).
    Mat mask(Index rows, Index cols, double rate);

private:
    std::mt19937_64 rng_;
};

Vec token_shift(const Vec& current, const Vec& previous, const Vec& mix);

// Evaluates the weighted sum at the last step of `keys`/`values` ([t x d_att]) directly.
Vec wkv_direct(const Mat& keys, const Mat& values, const Vec& decay, const Vec& bonus);

struct WkvStep {
    Vec output;
    EncoderState state;
};
WkvStep wkv_recurrent(const EncoderState& state, const Vec& key, const Vec& value, const Vec& decay, const Vec& bonus);

// --- batched forward/backward -------------------------------------------------

struct LayerNormCache {
    Mat normalized;
    Vec inv_std;
};

Mat layer_norm_forward(const LayerNormParams& p, const Mat& x, LayerNormCache* cache);
Mat layer_norm_backward(const LayerNormParams& p, const LayerNormCache& cache, const Mat& grad_out,
                        LayerNormParams& grads);

struct TimeMixCache {
    Mat input;
    Mat receptance;  // sigmoid(r)
    Mat key;
    Mat value;
    Mat wkv;
    Mat state_a;  // stabilized state after each step
    Mat state_b;
    Mat state_m;
};

Mat time_mixing_forward(const TimeMixParams& p, const Mat& x, Index steps, TimeMixCache* cache);
Mat time_mixing_backward(const TimeMixParams& p, const TimeMixCache& cache, const Mat& grad_out, Index steps,
                         TimeMixParams& grads);

struct ChannelMixCache {
    Mat input;
    Mat receptance;  // sigmoid(r')
    Mat key;         // k' before activation
    Mat hidden;      // max(k', 0)^2
    Mat value;       // W_v' * hidden
};

Mat channel_mixing_forward(const ChannelMixParams& p, const Mat& x, Index steps, ChannelMixCache* cache);
Mat channel_mixing_backward(const ChannelMixParams& p, const ChannelMixCache& cache, const Mat& grad_out, Index steps,
                            ChannelMixParams& grads);

struct BlockCache {
    LayerNormCache ln1;
    TimeMixCache time_mix;
    Mat drop1;
    LayerNormCache ln2;
    ChannelMixCache channel_mix;
    Mat drop2;
};

// `masks` is null in inference mode.
Mat block_forward(const BlockParams& p, const Mat& x, Index steps, DropoutSource* masks, BlockCache* cache);
Mat block_backward(const BlockParams& p, const BlockCache& cache, const Mat& grad_out, Index steps, BlockParams& grads);

struct EncoderCache {
    LayerNormCache input_ln;
    std::vector<BlockCache> blocks;
    LayerNormCache final_ln;
};

Mat encoder_forward(const EncoderParams& p, const Mat& x, Index steps, DropoutSource* masks, EncoderCache* cache);
Mat encoder_backward(const EncoderParams& p, const EncoderCache& cache, const Mat& grad_out, Index steps,
                     EncoderParams& grads);

// Single (head, relation) pair through all blocks and the final norm.
EncoderOutput encode(const Vec& head_embedding, const Vec& relation_embedding, const EncoderParams& p,
                     DropoutSource* masks = nullptr);

// Single-sequence conveniences over the batched kernels; rows of `x` are steps.
Mat time_mixing(const Mat& x, const TimeMixParams& p);
Mat channel_mixing(const Mat& x, const ChannelMixParams& p);
Mat block_forward(const Mat& x, const BlockParams& p, DropoutSource* masks = nullptr);

// --- construction ------------------------------------------------------------

LayerNormParams make_layer_norm(Index dim);
BlockParams init_block(const EncoderDims& dims, double dropout_rate, std::mt19937_64& rng);
BlockParams zeros_like(const BlockParams& p);
LayerNormParams zeros_like(const LayerNormParams& p);
EncoderParams zeros_like(const EncoderParams& p);

void append_tensors(const std::string& prefix, LayerNormParams& p, std::vector<TensorRef>& out);
void append_tensors(const std::string& prefix, BlockParams& p, std::vector<TensorRef>& out);
void append_tensors(EncoderParams& p, std::vector<TensorRef>& out);

}  // namespace trpkgc
