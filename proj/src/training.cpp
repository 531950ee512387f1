#include "trpkgc/training.hpp"

#include "trpkgc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

namespace trpkgc {

std::vector<std::string> range_warnings(const TrainConfig& c) {
    std::vector<std::string> out;
    const auto in = [](auto v, std::initializer_list<decltype(v)> set) {
        return std::find(set.begin(), set.end(), v) != set.end();
    };
    if (!in(c.dim, {64, 96, 128, 192, 256})) {
        out.push_back("dim " + std::to_string(c.dim) + " outside {64, 96, 128, 192, 256}");
    }
    if (!in(c.num_blocks, {2, 4, 6, 8})) {
        out.push_back("blocks " + std::to_string(c.num_blocks) + " outside {2, 4, 6, 8}");
    }
    if (!in(c.dropout, {0.2, 0.3, 0.4, 0.5})) {
        out.push_back("dropout " + std::to_string(c.dropout) + " outside {0.2, 0.3, 0.4, 0.5}");
    }
    if (c.learning_rate < 0.0005 || c.learning_rate > 0.01) {
        out.push_back("lr " + std::to_string(c.learning_rate) + " outside [0.0005, 0.01]");
    }
    if (c.batch_size != 512) {
        out.push_back("batch size " + std::to_string(c.batch_size) + " differs from 512");
    }
    if (c.max_epochs > 500) {
        out.push_back("max epochs " + std::to_string(c.max_epochs) + " exceeds 500");
    }
    return out;
}

ModelConfig model_config(const TrainConfig& c, const Vocab& vocab) {
    ModelConfig m;
    m.num_entities = vocab.num_entities();
    m.num_relations = vocab.num_relations();
    m.dim = c.dim;
    m.att_dim = c.att_dim;
    m.ff_dim = c.ff_dim;
    m.num_blocks = c.num_blocks;
    m.dropout = c.dropout;
    m.decoder = c.decoder;
    m.encoder_enabled = c.encoder_enabled;
    m.final_ln = c.final_ln;
    m.input_ln = c.input_ln;
    m.conjugate_tail = c.conjugate_tail;
    return m;
}

CrossEntropy softmax_cross_entropy(std::span<const double> scores, EntityId target, double smoothing) {
    if (target < 0 || static_cast<std::size_t>(target) >= scores.size()) {
        throw std::out_of_range("softmax_cross_entropy: target " + std::to_string(target) + " outside [0, " +
                                std::to_string(scores.size()) + ")");
    }
    const auto n = static_cast<Index>(scores.size());
    const Eigen::Map<const Vec> s(scores.data(), n);
    const double peak = s.maxCoeff();
    const Vec shifted = s.array() - peak;
    const double log_z = std::log(shifted.array().exp().sum());
    const Vec log_p = shifted.array() - log_z;

    CrossEntropy out;
    out.grad = log_p.array().exp();
    const double off = smoothing / static_cast<double>(n);
    const double on = 1.0 - smoothing + off;
    if (smoothing > 0.0) {
        out.loss = -(on * log_p[target] + off * (log_p.sum() - log_p[target]));
        out.grad.array() -= off;
        out.grad[target] -= on - off;
    } else {
        out.loss = -log_p[target];
        out.grad[target] -= 1.0;
    }
    return out;
}

BatchLoss batch_loss(const ModelParams& params, std::span<const Triple> batch, DropoutSource* masks, double smoothing) {
    if (batch.empty()) {
        throw std::invalid_argument("batch_loss: empty batch");
    }
    std::vector<Query> queries;
    queries.reserve(batch.size());
    for (const auto& t : batch) {
        queries.push_back({t.head, t.relation});
    }
    ModelCache cache;
    const Mat scores = forward_scores(params, queries, masks, &cache);

    const double scale = 1.0 / static_cast<double>(batch.size());
    Mat grad_scores(scores.rows(), scores.cols());
    double total = 0.0;
    for (Index b = 0; b < scores.rows(); ++b) {
        const std::span<const double> row(scores.row(b).data(), static_cast<std::size_t>(scores.cols()));
        const auto ce = softmax_cross_entropy(row, batch[static_cast<std::size_t>(b)].tail, smoothing);
        total += ce.loss;
        grad_scores.row(b) = ce.grad.transpose() * scale;
    }

    BatchLoss out{{total * scale, 0.0}, zeros_like(params)};
    backward_scores(params, cache, grad_scores, out.grads);
    out.report.grad_norm = std::sqrt(squared_norm(out.grads));
    return out;
}

AdamState AdamState::zeros(const ModelParams& params) {
    AdamState s;
    s.first_moment = zeros_like(params);
    s.second_moment = zeros_like(params);
    return s;
}

void adam_step(ModelParams& params, const ModelParams& grads, AdamState& state, double learning_rate) {
    auto p = params.tensors();
    const auto g = grads.tensors();
    auto m = state.first_moment.tensors();
    auto v = state.second_moment.tensors();
    if (p.size() != g.size() || p.size() != m.size() || p.size() != v.size()) {
        throw ShapeError("adam_step: parameter/gradient/state structure mismatch");
    }
    state.step += 1;
    const double t = static_cast<double>(state.step);
    const double correction1 = 1.0 - std::pow(state.beta1, t);
    const double correction2 = 1.0 - std::pow(state.beta2, t);
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i].values.size() != g[i].values.size() || p[i].values.size() != m[i].values.size() ||
            p[i].values.size() != v[i].values.size()) {
            throw ShapeError("adam_step: shape mismatch in " + p[i].name);
        }
        for (std::size_t j = 0; j < p[i].values.size(); ++j) {
            const double grad = g[i].values[j];
            double& mj = m[i].values[j];
            double& vj = v[i].values[j];
            mj = state.beta1 * mj + (1.0 - state.beta1) * grad;
            vj = state.beta2 * vj + (1.0 - state.beta2) * grad * grad;
            const double m_hat = mj / correction1;
            const double v_hat = vj / correction2;
            p[i].values[j] -= learning_rate * m_hat / (std::sqrt(v_hat) + state.eps);
        }
    }
}

void clip_gradients(ModelParams& grads, double norm, double max_norm) {
    if (max_norm <= 0.0 || norm <= max_norm) {
        return;
    }
    const double scale = max_norm / norm;
    for (auto& t : grads.tensors()) {
        for (double& v : t.values) {
            v *= scale;
        }
    }
}

std::string format_log_header() {
    return "epoch\tloss\tmrr\thits1\thits3\thits10";
}

std::string format_log_row(const LogRow& r) {
    std::ostringstream os;
    os.precision(6);
    os << r.epoch << '\t' << r.loss << '\t' << r.mrr << '\t' << r.hits1 << '\t' << r.hits3 << '\t' << r.hits10;
    return os.str();
}

TrainResult train(const TrainConfig& config, const TrainInputs& data, std::optional<ModelParams> initial,
                  const TrainHooks& hooks) {
    if (!data.train.has_reciprocals) {
        throw std::invalid_argument("train: training triples must be reciprocal-augmented");
    }
    if (config.batch_size <= 0) {
        throw std::invalid_argument("train: batch size must be positive");
    }
    TrainResult result;
    result.last = initial ? std::move(*initial) : init_model(model_config(config, data.vocab), config.seed);
    result.adam = AdamState::zeros(result.last);
    result.best = result.last;
    if (config.max_epochs <= 0) {
        return result;
    }

    const auto dev_eval = [&](const ModelParams& p) {
        return evaluate_link_prediction(p, data.valid.triples, data.vocab, data.filter, config.workers);
    };
    result.initial_mrr = dev_eval(result.last).mrr;
    result.best_mrr = result.initial_mrr;

    std::mt19937_64 shuffle_rng(config.seed);
    DropoutSource masks(config.seed ^ 0x9e3779b97f4a7c15ULL);
    std::vector<Triple> order = data.train.triples;
    const std::size_t batch_size = static_cast<std::size_t>(config.batch_size);
    const int eval_every = std::max(1, config.eval_every);

    for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), shuffle_rng);
        double loss_sum = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < order.size(); start += batch_size) {
            const std::span<const Triple> batch(order.data() + start, std::min(batch_size, order.size() - start));
            auto step = batch_loss(result.last, batch, &masks, config.label_smoothing);
            if (!std::isfinite(step.report.loss) || !std::isfinite(step.report.grad_norm)) {
                throw NumericalError(epoch, batches, "non-finite loss or gradient");
            }
            clip_gradients(step.grads, step.report.grad_norm, config.clip_norm);
            adam_step(result.last, step.grads, result.adam, config.learning_rate);
            loss_sum += step.report.loss;
            ++batches;
        }
        result.epochs_run = epoch;

        if (epoch % eval_every == 0 || epoch == config.max_epochs) {
            const auto report = dev_eval(result.last);
            const LogRow row{epoch, batches ? loss_sum / static_cast<double>(batches) : 0.0, report.mrr, report.hits1,
                             report.hits3, report.hits10};
            result.log.push_back(row);
            if (hooks.on_eval) {
                hooks.on_eval(row);
            }
            if (report.mrr > result.best_mrr) {
                result.best_mrr = report.mrr;
                result.best_epoch = epoch;
                result.best = result.last;
                if (hooks.on_best) {
                    hooks.on_best(result.best, row);
                }
            }
        }
    }
    return result;
}

}  // namespace trpkgc
