#pragma once

#include "trpkgc/kg_data.hpp"
#include "trpkgc/model.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string_view>
#include <vector>

namespace trpkgc {

enum class FilterScope { Standard, TrainOnly };

std::string_view to_string(FilterScope scope);
FilterScope parse_filter_scope(std::string_view name);

// Standard: train ∪ valid ∪ test. TrainOnly: train split alone.
FilterIndex build_eval_filter(const Dataset& ds, FilterScope scope);

struct RankReport {
    std::vector<std::int64_t> ranks;  // tail query then head query, per triple
    double mrr = 0.0;
    double hits1 = 0.0;
    double hits3 = 0.0;
    double hits10 = 0.0;
    std::size_t num_queries = 0;
};

// 1 + number of unfiltered competitors scoring >= the true answer (ties count against it).
std::int64_t filtered_rank(std::span<const double> scores, EntityId true_answer, std::span<const EntityId> filtered);
std::int64_t filtered_rank(std::span<const double> scores, EntityId true_answer, const Query& query,
                           const FilterIndex& filter);

RankReport summarize_ranks(std::vector<std::int64_t> ranks);

// Maps a batch of queries to [B x |V|] scores. Must be safe to call concurrently.
using BatchScorer = std::function<Mat(std::span<const Query>)>;

RankReport evaluate_link_prediction(const BatchScorer& scorer, std::span<const Triple> split, const Vocab& vocab,
                                    const FilterIndex& filter, int workers = 1);
RankReport evaluate_link_prediction(const ModelParams& model, std::span<const Triple> split, const Vocab& vocab,
                                    const FilterIndex& filter, int workers = 1);

struct ScoredExample {
    RelationId relation = 0;
    double score = 0.0;
    bool label = false;
};

struct RelationThresholds {
    std::map<RelationId, double> per_relation;
    double fallback = 0.0;  // median of the tuned thresholds

    bool has(RelationId r) const { return per_relation.contains(r); }
    double threshold(RelationId r) const {
        auto it = per_relation.find(r);
        return it == per_relation.end() ? fallback : it->second;
    }
};

// Margin placed below the lowest and above the highest score as sentinel thresholds.
inline constexpr double kThresholdSentinelMargin = 1.0;

// Per relation, picks the candidate threshold (midpoints between consecutive
// distinct scores, plus sentinels) with the best accuracy; ties go to the smaller one.
RelationThresholds tune_thresholds(std::span<const ScoredExample> examples);

// Accuracy of `score >= threshold` as the prediction for one example set.
double threshold_accuracy(std::span<const ScoredExample> examples, double threshold);

struct RelationAccuracy {
    std::size_t correct = 0;
    std::size_t total = 0;
};

struct ClassificationReport {
    double accuracy = 0.0;
    std::map<RelationId, RelationAccuracy> per_relation;
    std::vector<RelationId> fallback_relations;  // relations absent from the tuning set
};

ClassificationReport classify(std::span<const ScoredExample> examples, const RelationThresholds& thresholds);

std::vector<ScoredExample> score_labeled(const ModelParams& model, std::span<const LabeledTriple> triples);

}  // namespace trpkgc
