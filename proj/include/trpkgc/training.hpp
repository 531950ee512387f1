#pragma once

#include "trpkgc/evaluation.hpp"
#include "trpkgc/kg_data.hpp"
#include "trpkgc/model.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace trpkgc {

struct TrainConfig {
    Index dim = 128;
    int num_blocks = 2;
    double dropout = 0.3;
    double learning_rate = 0.003;
    int batch_size = 512;
    int max_epochs = 500;
    std::uint64_t seed = 42;
    DecoderKind decoder = DecoderKind::Tucker;
    bool encoder_enabled = true;
    int eval_every = 5;
    double label_smoothing = 0.0;
    double clip_norm = 0.0;  // 0 disables clipping
    Index att_dim = 0;
    Index ff_dim = 0;
    bool final_ln = true;
    bool input_ln = false;
    bool conjugate_tail = true;
    int workers = 1;  // dev-evaluation fan-out
};

// Values outside the tuned hyperparameter ranges. Never fatal.
std::vector<std::string> range_warnings(const TrainConfig& config);

ModelConfig model_config(const TrainConfig& config, const Vocab& vocab);

struct CrossEntropy {
    double loss = 0.0;
    Vec grad;  // d(loss)/d(scores)
};

// Max-subtracted softmax; optional label smoothing spreads `smoothing` mass uniformly.
CrossEntropy softmax_cross_entropy(std::span<const double> scores, EntityId target, double smoothing = 0.0);

struct LossReport {
    double loss = 0.0;  // mean nats per example
    double grad_norm = 0.0;
};

struct BatchLoss {
    LossReport report;
    ModelParams grads;
};

// Mean cross-entropy over the batch, one one-hot target per triple. `masks` null => inference.
BatchLoss batch_loss(const ModelParams& params, std::span<const Triple> batch, DropoutSource* masks,
                     double smoothing = 0.0);

struct AdamState {
    ModelParams first_moment;
    ModelParams second_moment;
    std::int64_t step = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    static AdamState zeros(const ModelParams& params);
};

void adam_step(ModelParams& params, const ModelParams& grads, AdamState& state, double learning_rate);

// Scales gradients in place so their global norm is at most `max_norm`.
void clip_gradients(ModelParams& grads, double norm, double max_norm);

struct LogRow {
    int epoch = 0;
    double loss = 0.0;
    double mrr = 0.0;
    double hits1 = 0.0;
    double hits3 = 0.0;
    double hits10 = 0.0;
};

std::string format_log_header();
std::string format_log_row(const LogRow& row);

struct TrainResult {
    ModelParams best;
    ModelParams last;
    AdamState adam;
    std::vector<LogRow> log;
    double initial_mrr = 0.0;
    double best_mrr = 0.0;
    int best_epoch = 0;
    int epochs_run = 0;
};

struct TrainHooks {
    std::function<void(const LogRow&)> on_eval;
    // Called whenever a new best dev MRR is reached.
    std::function<void(const ModelParams&, const LogRow&)> on_best;
};

struct TrainInputs {
    const Vocab& vocab;
    const TripleList& train;  // reciprocal-augmented
    const TripleList& valid;
    const FilterIndex& filter;
};

TrainResult train(const TrainConfig& config, const TrainInputs& data, std::optional<ModelParams> initial = std::nullopt,
                  const TrainHooks& hooks = {});

}  // namespace trpkgc
