#include "trpkgc/trp_encoder.hpp"

#include "trpkgc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace trpkgc {

namespace {

void require(bool ok, const char* what) {
    if (!ok) {
        throw ShapeError(what);
    }
}

Index batch_of(const Mat& x, Index steps) {
    require(steps >= 1 && x.rows() % steps == 0, "sequence rows must be a multiple of the step count");
    return x.rows() / steps;
}

// x_{t-1} for every row, with x_0 := 0.
Mat previous_step(const Mat& x, Index steps) {
    const Index batch = batch_of(x, steps);
    Mat prev = Mat::Zero(x.rows(), x.cols());
    if (steps > 1) {
        prev.bottomRows((steps - 1) * batch) = x.topRows((steps - 1) * batch);
    }
    return prev;
}

Mat interpolate(const Mat& x, const Mat& prev, const Vec& mix) {
    require(mix.size() == x.cols(), "mix vector length must match input width");
    const Eigen::RowVectorXd mu = mix.transpose();
    const Eigen::RowVectorXd one_minus = (1.0 - mix.array()).matrix().transpose();
    return (x.array().rowwise() * mu.array() + prev.array().rowwise() * one_minus.array()).matrix();
}

// Adjoint of interpolate(x, previous_step(x), mix), accumulated into grad_x and grad_mix.
void interpolate_backward(const Mat& x, const Mat& prev, const Vec& mix, const Mat& grad, Index steps, Mat& grad_x,
                          Vec& grad_mix) {
    const Index batch = x.rows() / steps;
    grad_x.array() += grad.array().rowwise() * mix.transpose().array();
    if (steps > 1) {
        const Eigen::RowVectorXd one_minus = (1.0 - mix.array()).matrix().transpose();
        grad_x.topRows((steps - 1) * batch).array() +=
            grad.bottomRows((steps - 1) * batch).array().rowwise() * one_minus.array();
    }
    grad_mix += (grad.array() * (x - prev).array()).colwise().sum().matrix().transpose();
}

Mat sigmoid_of(const Mat& x) {
    return x.unaryExpr([](double v) { return sigmoid(v); });
}

Mat normal_matrix(Index rows, Index cols, double stddev, std::mt19937_64& rng) {
    std::normal_distribution<double> dist(0.0, stddev);
    Mat m(rows, cols);
    for (Index i = 0; i < m.size(); ++i) {
        m.data()[i] = dist(rng);
    }
    return m;
}

}  // namespace

EncoderState EncoderState::fresh(Index channels) {
    return {Vec::Zero(channels), Vec::Zero(channels), Vec::Constant(channels, kNegInfSurrogate)};
}

Mat DropoutSource::mask(Index rows, Index cols, double rate) {
    if (rate <= 0.0) {
        return {};
    }
    std::bernoulli_distribution keep(1.0 - rate);
    const double scale = 1.0 / (1.0 - rate);
    Mat m(rows, cols);
    for (Index i = 0; i < m.size(); ++i) {
        m.data()[i] = keep(rng_) ? scale : 0.0;
    }
    return m;
}

Vec token_shift(const Vec& current, const Vec& previous, const Vec& mix) {
    require(current.size() == previous.size() && current.size() == mix.size(), "token_shift: length mismatch");
    return (mix.array() * current.array() + (1.0 - mix.array()) * previous.array()).matrix();
}

Vec wkv_direct(const Mat& keys, const Mat& values, const Vec& decay, const Vec& bonus) {
    require(keys.rows() >= 1, "wkv_direct: need at least one step");
    require(keys.rows() == values.rows() && keys.cols() == values.cols() && keys.cols() == decay.size() &&
                keys.cols() == bonus.size(),
            "wkv_direct: dimension mismatch");
    const Index t = keys.rows();
    const Index channels = keys.cols();
    Vec out(channels);
    std::vector<double> logits(static_cast<std::size_t>(t));
    for (Index c = 0; c < channels; ++c) {
        // Step i (0-based) of t: exponent -(t - 2 - i) * w + k_i for i < t-1, u + k_{t-1} for the last.
        for (Index i = 0; i + 1 < t; ++i) {
            logits[i] = -static_cast<double>(t - 2 - i) * decay[c] + keys(i, c);
        }
        logits[t - 1] = bonus[c] + keys(t - 1, c);
        const double peak = *std::max_element(logits.begin(), logits.end());
        double num = 0.0;
        double den = 0.0;
        for (Index i = 0; i < t; ++i) {
            const double weight = std::exp(logits[i] - peak);
            num += weight * values(i, c);
            den += weight;
        }
        out[c] = num / den;
    }
    return out;
}

WkvStep wkv_recurrent(const EncoderState& state, const Vec& key, const Vec& value, const Vec& decay, const Vec& bonus) {
    const Index channels = key.size();
    require(value.size() == channels && decay.size() == channels && bonus.size() == channels &&
                state.a.size() == channels && state.b.size() == channels && state.m.size() == channels,
            "wkv_recurrent: dimension mismatch");
    WkvStep step{Vec(channels), EncoderState::fresh(channels)};
    for (Index c = 0; c < channels; ++c) {
        const double m = state.m[c];
        const double cur = bonus[c] + key[c];
        const double q = std::max(m, cur);
        const double e_prev = std::exp(m - q);
        const double e_cur = std::exp(cur - q);
        step.output[c] = (e_prev * state.a[c] + e_cur * value[c]) / (e_prev * state.b[c] + e_cur);

        const double m_next = std::max(m - decay[c], key[c]);
        const double f_prev = std::exp(m - decay[c] - m_next);
        const double f_cur = std::exp(key[c] - m_next);
        step.state.a[c] = f_prev * state.a[c] + f_cur * value[c];
        step.state.b[c] = f_prev * state.b[c] + f_cur;
        step.state.m[c] = m_next;
    }
    return step;
}

// --- layer norm ----------------------------------------------------------------

Mat layer_norm_forward(const LayerNormParams& p, const Mat& x, LayerNormCache* cache) {
    require(p.gain.size() == x.cols() && p.bias.size() == x.cols(), "layer_norm: width mismatch");
    const double width = static_cast<double>(x.cols());
    Mat normalized(x.rows(), x.cols());
    Vec inv_std(x.rows());
    for (Index i = 0; i < x.rows(); ++i) {
        const double mean = x.row(i).sum() / width;
        const auto centered = (x.row(i).array() - mean).eval();
        const double var = centered.square().sum() / width;
        inv_std[i] = 1.0 / std::sqrt(var + p.eps);
        normalized.row(i) = (centered * inv_std[i]).matrix();
    }
    Mat out = (normalized.array().rowwise() * p.gain.transpose().array()).matrix();
    out.rowwise() += p.bias.transpose();
    if (cache) {
        cache->normalized = std::move(normalized);
        cache->inv_std = std::move(inv_std);
    }
    return out;
}

Mat layer_norm_backward(const LayerNormParams& p, const LayerNormCache& cache, const Mat& grad_out,
                        LayerNormParams& grads) {
    const auto& xhat = cache.normalized;
    grads.gain += (grad_out.array() * xhat.array()).colwise().sum().matrix().transpose();
    grads.bias += grad_out.colwise().sum().transpose();

    const double width = static_cast<double>(grad_out.cols());
    const Mat gxhat = (grad_out.array().rowwise() * p.gain.transpose().array()).matrix();
    Mat grad_in(grad_out.rows(), grad_out.cols());
    for (Index i = 0; i < grad_out.rows(); ++i) {
        const double mean_g = gxhat.row(i).sum() / width;
        const double mean_gx = gxhat.row(i).dot(xhat.row(i)) / width;
        grad_in.row(i) = (cache.inv_std[i] * (gxhat.row(i).array() - mean_g - xhat.row(i).array() * mean_gx)).matrix();
    }
    return grad_in;
}

// --- time mixing --------------------------------------------------------------------

Mat time_mixing_forward(const TimeMixParams& p, const Mat& x, Index steps, TimeMixCache* cache) {
    const Index batch = batch_of(x, steps);
    const Index d_att = p.w_key.rows();
    require(p.w_receptance.cols() == x.cols() && p.w_key.cols() == x.cols() && p.w_value.cols() == x.cols(),
            "time_mixing: projection width mismatch");
    require(p.w_output.cols() == d_att && p.decay.size() == d_att && p.bonus.size() == d_att,
            "time_mixing: attention width mismatch");

    const Mat prev = previous_step(x, steps);
    const Mat receptance = sigmoid_of(interpolate(x, prev, p.mix_receptance) * p.w_receptance.transpose());
    const Mat key = interpolate(x, prev, p.mix_key) * p.w_key.transpose();
    const Mat value = interpolate(x, prev, p.mix_value) * p.w_value.transpose();

    Mat wkv(x.rows(), d_att);
    Mat state_a(x.rows(), d_att);
    Mat state_b(x.rows(), d_att);
    Mat state_m(x.rows(), d_att);
    for (Index b = 0; b < batch; ++b) {
        for (Index c = 0; c < d_att; ++c) {
            double a = 0.0;
            double den = 0.0;
            double m = kNegInfSurrogate;
            const double w = p.decay[c];
            const double u = p.bonus[c];
            for (Index t = 0; t < steps; ++t) {
                const Index row = t * batch + b;
                const double k = key(row, c);
                const double v = value(row, c);
                const double q = std::max(m, u + k);
                const double e_prev = std::exp(m - q);
                const double e_cur = std::exp(u + k - q);
                wkv(row, c) = (e_prev * a + e_cur * v) / (e_prev * den + e_cur);

                const double m_next = std::max(m - w, k);
                const double f_prev = std::exp(m - w - m_next);
                const double f_cur = std::exp(k - m_next);
                a = f_prev * a + f_cur * v;
                den = f_prev * den + f_cur;
                m = m_next;
                state_a(row, c) = a;
                state_b(row, c) = den;
                state_m(row, c) = m;
            }
        }
    }

    Mat out = (receptance.array() * wkv.array()).matrix() * p.w_output.transpose();
    if (cache) {
        cache->input = x;
        cache->receptance = receptance;
        cache->key = key;
        cache->value = value;
        cache->wkv = std::move(wkv);
        cache->state_a = std::move(state_a);
        cache->state_b = std::move(state_b);
        cache->state_m = std::move(state_m);
    }
    return out;
}

Mat time_mixing_backward(const TimeMixParams& p, const TimeMixCache& cache, const Mat& grad_out, Index steps,
                         TimeMixParams& grads) {
    const Mat& x = cache.input;
    const Index batch = batch_of(x, steps);
    const Index d_att = p.w_key.rows();

    const Mat gated = (cache.receptance.array() * cache.wkv.array()).matrix();
    grads.w_output += grad_out.transpose() * gated;
    const Mat grad_gated = grad_out * p.w_output;
    const Mat grad_r =
        (grad_gated.array() * cache.wkv.array() * cache.receptance.array() * (1.0 - cache.receptance.array())).matrix();
    const Mat grad_wkv = (grad_gated.array() * cache.receptance.array()).matrix();

    // Reverse pass over the stabilized recurrence. Adjoints of the true sums
    // A_t, B_t are carried as ga * exp(-m_t), gb * exp(-m_t).
    Mat grad_k = Mat::Zero(x.rows(), d_att);
    Mat grad_v = Mat::Zero(x.rows(), d_att);
    for (Index b = 0; b < batch; ++b) {
        for (Index c = 0; c < d_att; ++c) {
            const double w = p.decay[c];
            const double u = p.bonus[c];
            double ga = 0.0;
            double gb = 0.0;
            double g_decay = 0.0;
            double g_bonus = 0.0;
            for (Index t = steps - 1; t >= 0; --t) {
                const Index row = t * batch + b;
                const double a_prev = t > 0 ? cache.state_a(row - batch, c) : 0.0;
                const double b_prev = t > 0 ? cache.state_b(row - batch, c) : 0.0;
                const double m_prev = t > 0 ? cache.state_m(row - batch, c) : kNegInfSurrogate;
                const double m_cur = cache.state_m(row, c);
                const double k = cache.key(row, c);
                const double v = cache.value(row, c);
                const double y = cache.wkv(row, c);
                const double g = grad_wkv(row, c);

                const double q = std::max(m_prev, u + k);
                const double e_prev = std::exp(m_prev - q);
                const double e_cur = std::exp(u + k - q);
                const double den = e_prev * b_prev + e_cur;

                // Output path: y_t = (A_{t-1} + e^{u+k} v) / (B_{t-1} + e^{u+k}).
                const double g_cur = g * e_cur / den;
                double gv = g_cur;
                double gk = g_cur * (v - y);
                g_bonus += g_cur * (v - y);

                // State path: A_t = e^{-w} A_{t-1} + e^{k} v, B_t = e^{-w} B_{t-1} + e^{k}.
                const double f_cur = std::exp(k - m_cur);
                const double f_prev = std::exp(m_prev - w - m_cur);
                gv += ga * f_cur;
                gk += (ga * v + gb) * f_cur;
                g_decay -= (ga * a_prev + gb * b_prev) * f_prev;

                const double g_prev_scale = g * e_prev / den;
                ga = ga * f_prev + g_prev_scale;
                gb = gb * f_prev - g_prev_scale * y;

                grad_k(row, c) = gk;
                grad_v(row, c) = gv;
            }
            grads.decay[c] += g_decay;
            grads.bonus[c] += g_bonus;
        }
    }

    const Mat prev = previous_step(x, steps);
    Mat grad_x = Mat::Zero(x.rows(), x.cols());
    const auto project_back = [&](const Mat& grad_proj, const Mat& weight, const Vec& mix, Mat& grad_weight,
                                  Vec& grad_mix) {
        const Mat shifted = interpolate(x, prev, mix);
        grad_weight += grad_proj.transpose() * shifted;
        interpolate_backward(x, prev, mix, grad_proj * weight, steps, grad_x, grad_mix);
    };
    project_back(grad_r, p.w_receptance, p.mix_receptance, grads.w_receptance, grads.mix_receptance);
    project_back(grad_k, p.w_key, p.mix_key, grads.w_key, grads.mix_key);
    project_back(grad_v, p.w_value, p.mix_value, grads.w_value, grads.mix_value);
    return grad_x;
}

// --- channel mixing -------------------------------------------------------------------

Mat channel_mixing_forward(const ChannelMixParams& p, const Mat& x, Index steps, ChannelMixCache* cache) {
    batch_of(x, steps);
    require(p.w_receptance.cols() == x.cols() && p.w_receptance.rows() == x.cols(),
            "channel_mixing: receptance must be [d_io x d_io]");
    require(p.w_key.cols() == x.cols() && p.w_value.rows() == x.cols() && p.w_value.cols() == p.w_key.rows(),
            "channel_mixing: feed-forward shape mismatch");

    const Mat prev = previous_step(x, steps);
    const Mat receptance = sigmoid_of(interpolate(x, prev, p.mix_receptance) * p.w_receptance.transpose());
    const Mat key = interpolate(x, prev, p.mix_key) * p.w_key.transpose();
    const Mat hidden = key.unaryExpr([](double k) { return k > 0.0 ? k * k : 0.0; });
    const Mat value = hidden * p.w_value.transpose();
    Mat out = (receptance.array() * value.array()).matrix();
    if (cache) {
        cache->input = x;
        cache->receptance = receptance;
        cache->key = key;
        cache->hidden = hidden;
        cache->value = value;
    }
    return out;
}

Mat channel_mixing_backward(const ChannelMixParams& p, const ChannelMixCache& cache, const Mat& grad_out, Index steps,
                            ChannelMixParams& grads) {
    const Mat& x = cache.input;
    const Mat prev = previous_step(x, steps);
    const auto& sr = cache.receptance;

    const Mat grad_value = (grad_out.array() * sr.array()).matrix();
    const Mat grad_r = (grad_out.array() * cache.value.array() * sr.array() * (1.0 - sr.array())).matrix();
    grads.w_value += grad_value.transpose() * cache.hidden;
    const Mat grad_hidden = grad_value * p.w_value;
    const Mat grad_k = (grad_hidden.array() * (2.0 * cache.key.array().max(0.0))).matrix();

    Mat grad_x = Mat::Zero(x.rows(), x.cols());
    const Mat xr = interpolate(x, prev, p.mix_receptance);
    grads.w_receptance += grad_r.transpose() * xr;
    interpolate_backward(x, prev, p.mix_receptance, grad_r * p.w_receptance, steps, grad_x, grads.mix_receptance);
    const Mat xk = interpolate(x, prev, p.mix_key);
    grads.w_key += grad_k.transpose() * xk;
    interpolate_backward(x, prev, p.mix_key, grad_k * p.w_key, steps, grad_x, grads.mix_key);
    return grad_x;
}

// --- blocks ---------------------------------------------------------------------------

Mat block_forward(const BlockParams& p, const Mat& x, Index steps, DropoutSource* masks, BlockCache* cache) {
    LayerNormCache ln1;
    LayerNormCache ln2;
    TimeMixCache tm;
    ChannelMixCache cm;
    const bool keep = cache != nullptr;

    Mat branch = time_mixing_forward(p.time_mix, layer_norm_forward(p.ln1, x, keep ? &ln1 : nullptr), steps,
                                     keep ? &tm : nullptr);
    Mat drop1 = masks ? masks->mask(branch.rows(), branch.cols(), p.dropout_rate) : Mat{};
    if (drop1.size() > 0) {
        branch.array() *= drop1.array();
    }
    const Mat mid = x + branch;

    Mat branch2 = channel_mixing_forward(p.channel_mix, layer_norm_forward(p.ln2, mid, keep ? &ln2 : nullptr), steps,
                                         keep ? &cm : nullptr);
    Mat drop2 = masks ? masks->mask(branch2.rows(), branch2.cols(), p.dropout_rate) : Mat{};
    if (drop2.size() > 0) {
        branch2.array() *= drop2.array();
    }
    if (cache) {
        *cache = {std::move(ln1), std::move(tm), std::move(drop1), std::move(ln2), std::move(cm), std::move(drop2)};
    }
    return mid + branch2;
}

Mat block_backward(const BlockParams& p, const BlockCache& cache, const Mat& grad_out, Index steps, BlockParams& grads) {
    Mat grad_mid = grad_out;
    Mat grad_branch2 = grad_out;
    if (cache.drop2.size() > 0) {
        grad_branch2.array() *= cache.drop2.array();
    }
    const Mat grad_norm2 = channel_mixing_backward(p.channel_mix, cache.channel_mix, grad_branch2, steps,
                                                   grads.channel_mix);
    grad_mid += layer_norm_backward(p.ln2, cache.ln2, grad_norm2, grads.ln2);

    Mat grad_branch1 = grad_mid;
    if (cache.drop1.size() > 0) {
        grad_branch1.array() *= cache.drop1.array();
    }
    const Mat grad_norm1 = time_mixing_backward(p.time_mix, cache.time_mix, grad_branch1, steps, grads.time_mix);
    return grad_mid + layer_norm_backward(p.ln1, cache.ln1, grad_norm1, grads.ln1);
}

Mat encoder_forward(const EncoderParams& p, const Mat& x, Index steps, DropoutSource* masks, EncoderCache* cache) {
    Mat h = x;
    if (cache) {
        cache->blocks.resize(p.blocks.size());
    }
    if (p.input_ln) {
        h = layer_norm_forward(*p.input_ln, h, cache ? &cache->input_ln : nullptr);
    }
    for (std::size_t i = 0; i < p.blocks.size(); ++i) {
        h = block_forward(p.blocks[i], h, steps, masks, cache ? &cache->blocks[i] : nullptr);
    }
    if (p.final_ln) {
        h = layer_norm_forward(*p.final_ln, h, cache ? &cache->final_ln : nullptr);
    }
    return h;
}

Mat encoder_backward(const EncoderParams& p, const EncoderCache& cache, const Mat& grad_out, Index steps,
                     EncoderParams& grads) {
    Mat g = grad_out;
    if (p.final_ln) {
        g = layer_norm_backward(*p.final_ln, cache.final_ln, g, *grads.final_ln);
    }
    for (std::size_t i = p.blocks.size(); i-- > 0;) {
        g = block_backward(p.blocks[i], cache.blocks[i], g, steps, grads.blocks[i]);
    }
    if (p.input_ln) {
        g = layer_norm_backward(*p.input_ln, cache.input_ln, g, *grads.input_ln);
    }
    return g;
}

EncoderOutput encode(const Vec& head_embedding, const Vec& relation_embedding, const EncoderParams& p,
                     DropoutSource* masks) {
    require(!p.blocks.empty(), "encode: need at least one block");
    require(head_embedding.size() == relation_embedding.size(), "encode: embedding width mismatch");
    Mat x(2, head_embedding.size());
    x.row(0) = head_embedding.transpose();
    x.row(1) = relation_embedding.transpose();
    const Mat y = encoder_forward(p, x, 2, masks, nullptr);
    return {y.row(0).transpose(), y.row(1).transpose()};
}

Mat time_mixing(const Mat& x, const TimeMixParams& p) {
    return time_mixing_forward(p, x, x.rows(), nullptr);
}

Mat channel_mixing(const Mat& x, const ChannelMixParams& p) {
    return channel_mixing_forward(p, x, x.rows(), nullptr);
}

Mat block_forward(const Mat& x, const BlockParams& p, DropoutSource* masks) {
    return block_forward(p, x, x.rows(), masks, nullptr);
}

// --- construction -----------------------------------------------------------------------

LayerNormParams make_layer_norm(Index dim) {
    return {Vec::Ones(dim), Vec::Zero(dim), 1e-5};
}

BlockParams init_block(const EncoderDims& dims, double dropout_rate, std::mt19937_64& rng) {
    const auto std_for = [](Index fan_in) { return 1.0 / std::sqrt(static_cast<double>(fan_in)); };
    BlockParams b;
    b.dropout_rate = dropout_rate;
    b.ln1 = make_layer_norm(dims.d_io);
    b.ln2 = make_layer_norm(dims.d_io);

    auto& tm = b.time_mix;
    tm.w_receptance = normal_matrix(dims.d_att, dims.d_io, std_for(dims.d_io), rng);
    tm.w_key = normal_matrix(dims.d_att, dims.d_io, std_for(dims.d_io), rng);
    tm.w_value = normal_matrix(dims.d_att, dims.d_io, std_for(dims.d_io), rng);
    tm.w_output = normal_matrix(dims.d_io, dims.d_att, std_for(dims.d_att), rng);
    tm.mix_receptance = Vec::Constant(dims.d_io, 0.5);
    tm.mix_key = Vec::Constant(dims.d_io, 0.5);
    tm.mix_value = Vec::Constant(dims.d_io, 0.5);
    tm.decay = dims.d_att > 1 ? Vec(Vec::LinSpaced(dims.d_att, 1.0, 8.0)) : Vec(Vec::Constant(dims.d_att, 1.0));
    tm.bonus = Vec::Zero(dims.d_att);

    auto& cm = b.channel_mix;
    cm.w_receptance = normal_matrix(dims.d_io, dims.d_io, std_for(dims.d_io), rng);
    cm.w_key = normal_matrix(dims.d_ff, dims.d_io, std_for(dims.d_io), rng);
    cm.w_value = normal_matrix(dims.d_io, dims.d_ff, std_for(dims.d_ff), rng);
    cm.mix_receptance = Vec::Constant(dims.d_io, 0.5);
    cm.mix_key = Vec::Constant(dims.d_io, 0.5);
    return b;
}

LayerNormParams zeros_like(const LayerNormParams& p) {
    return {Vec::Zero(p.gain.size()), Vec::Zero(p.bias.size()), p.eps};
}

BlockParams zeros_like(const BlockParams& p) {
    const auto zm = [](const Mat& m) { return Mat::Zero(m.rows(), m.cols()).eval(); };
    const auto zv = [](const Vec& v) { return Vec::Zero(v.size()).eval(); };
    BlockParams g;
    g.dropout_rate = p.dropout_rate;
    g.ln1 = zeros_like(p.ln1);
    g.ln2 = zeros_like(p.ln2);
    const auto& tm = p.time_mix;
    g.time_mix = {zm(tm.w_receptance), zm(tm.w_key),   zm(tm.w_value),   zm(tm.w_output), zv(tm.mix_receptance),
                  zv(tm.mix_key),      zv(tm.mix_value), zv(tm.decay), zv(tm.bonus)};
    const auto& cm = p.channel_mix;
    g.channel_mix = {zm(cm.w_receptance), zm(cm.w_key), zm(cm.w_value), zv(cm.mix_receptance), zv(cm.mix_key)};
    return g;
}

EncoderParams zeros_like(const EncoderParams& p) {
    EncoderParams g;
    for (const auto& b : p.blocks) {
        g.blocks.push_back(zeros_like(b));
    }
    if (p.input_ln) {
        g.input_ln = zeros_like(*p.input_ln);
    }
    if (p.final_ln) {
        g.final_ln = zeros_like(*p.final_ln);
    }
    return g;
}

void append_tensors(const std::string& prefix, LayerNormParams& p, std::vector<TensorRef>& out) {
    out.push_back(tensor_ref(prefix + ".gain", p.gain));
    out.push_back(tensor_ref(prefix + ".bias", p.bias));
}

void append_tensors(const std::string& prefix, BlockParams& p, std::vector<TensorRef>& out) {
    append_tensors(prefix + ".ln1", p.ln1, out);
    auto& tm = p.time_mix;
    const auto t = prefix + ".time_mix.";
    out.push_back(tensor_ref(t + "w_receptance", tm.w_receptance));
    out.push_back(tensor_ref(t + "w_key", tm.w_key));
    out.push_back(tensor_ref(t + "w_value", tm.w_value));
    out.push_back(tensor_ref(t + "w_output", tm.w_output));
    out.push_back(tensor_ref(t + "mix_receptance", tm.mix_receptance));
    out.push_back(tensor_ref(t + "mix_key", tm.mix_key));
    out.push_back(tensor_ref(t + "mix_value", tm.mix_value));
    out.push_back(tensor_ref(t + "decay", tm.decay));
    out.push_back(tensor_ref(t + "bonus", tm.bonus));
    append_tensors(prefix + ".ln2", p.ln2, out);
    auto& cm = p.channel_mix;
    const auto c = prefix + ".channel_mix.";
    out.push_back(tensor_ref(c + "w_receptance", cm.w_receptance));
    out.push_back(tensor_ref(c + "w_key", cm.w_key));
    out.push_back(tensor_ref(c + "w_value", cm.w_value));
    out.push_back(tensor_ref(c + "mix_receptance", cm.mix_receptance));
    out.push_back(tensor_ref(c + "mix_key", cm.mix_key));
}

void append_tensors(EncoderParams& p, std::vector<TensorRef>& out) {
    if (p.input_ln) {
        append_tensors("encoder.input_ln", *p.input_ln, out);
    }
    for (std::size_t i = 0; i < p.blocks.size(); ++i) {
        append_tensors("encoder.blocks." + std::to_string(i), p.blocks[i], out);
    }
    if (p.final_ln) {
        append_tensors("encoder.final_ln", *p.final_ln, out);
    }
}

}  // namespace trpkgc
