#include "trpkgc/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <string>
#include <thread>

namespace trpkgc {

std::string_view to_string(FilterScope scope) {
    return scope == FilterScope::Standard ? "standard" : "train_only";
}

FilterScope parse_filter_scope(std::string_view name) {
    if (name == "standard") {
        return FilterScope::Standard;
    }
    if (name == "train_only") {
        return FilterScope::TrainOnly;
    }
    throw std::invalid_argument("unknown filter scope '" + std::string(name) + "'");
}

FilterIndex build_eval_filter(const Dataset& ds, FilterScope scope) {
    if (scope == FilterScope::TrainOnly) {
        const TripleList* splits[] = {&ds.train};
        return build_filter_index(splits, ds.vocab);
    }
    const TripleList* splits[] = {&ds.train, &ds.valid, &ds.test};
    return build_filter_index(splits, ds.vocab);
}

std::int64_t filtered_rank(std::span<const double> scores, EntityId true_answer, std::span<const EntityId> filtered) {
    const double target = scores[static_cast<std::size_t>(true_answer)];
    std::int64_t ahead = 0;
    std::size_t next_filtered = 0;
    for (std::size_t t = 0; t < scores.size(); ++t) {
        while (next_filtered < filtered.size() && static_cast<std::size_t>(filtered[next_filtered]) < t) {
            ++next_filtered;
        }
        if (static_cast<EntityId>(t) == true_answer) {
            continue;
        }
        if (next_filtered < filtered.size() && static_cast<std::size_t>(filtered[next_filtered]) == t) {
            continue;
        }
        // A NaN target loses to every competitor.
        if (std::isnan(target) || scores[t] >= target) {
            ++ahead;
        }
    }
    return 1 + ahead;
}

std::int64_t filtered_rank(std::span<const double> scores, EntityId true_answer, const Query& query,
                           const FilterIndex& filter) {
    return filtered_rank(scores, true_answer, filter.answers(query.head, query.relation));
}

RankReport summarize_ranks(std::vector<std::int64_t> ranks) {
    RankReport report;
    report.num_queries = ranks.size();
    if (!ranks.empty()) {
        double rr = 0.0;
        std::size_t h1 = 0;
        std::size_t h3 = 0;
        std::size_t h10 = 0;
        for (auto r : ranks) {
            rr += 1.0 / static_cast<double>(r);
            h1 += r <= 1;
            h3 += r <= 3;
            h10 += r <= 10;
        }
        const auto n = static_cast<double>(ranks.size());
        report.mrr = rr / n;
        report.hits1 = static_cast<double>(h1) / n;
        report.hits3 = static_cast<double>(h3) / n;
        report.hits10 = static_cast<double>(h10) / n;
    }
    report.ranks = std::move(ranks);
    return report;
}

RankReport evaluate_link_prediction(const BatchScorer& scorer, std::span<const Triple> split, const Vocab& vocab,
                                    const FilterIndex& filter, int workers) {
    constexpr std::size_t kChunkTriples = 128;
    std::vector<std::int64_t> ranks(2 * split.size());
    const std::size_t chunks = (split.size() + kChunkTriples - 1) / kChunkTriples;
    std::atomic<std::size_t> next{0};

    const auto work = [&] {
        std::vector<Query> queries;
        std::vector<EntityId> answers;
        for (std::size_t c = next++; c < chunks; c = next++) {
            const std::size_t begin = c * kChunkTriples;
            const std::size_t end = std::min(split.size(), begin + kChunkTriples);
            queries.clear();
            answers.clear();
            for (std::size_t i = begin; i < end; ++i) {
                const auto& t = split[i];
                queries.push_back({t.head, t.relation});
                answers.push_back(t.tail);
                queries.push_back({t.tail, vocab.reciprocal(t.relation)});
                answers.push_back(t.head);
            }
            const Mat scores = scorer(queries);
            for (std::size_t q = 0; q < queries.size(); ++q) {
                const std::span<const double> row(scores.row(static_cast<Index>(q)).data(),
                                                  static_cast<std::size_t>(scores.cols()));
                ranks[2 * begin + q] = filtered_rank(row, answers[q], queries[q], filter);
            }
        }
    };

    const int threads = std::max(1, std::min<int>(workers, static_cast<int>(chunks)));
    if (threads == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < threads; ++i) {
            pool.emplace_back(work);
        }
        for (auto& th : pool) {
            th.join();
        }
    }
    return summarize_ranks(std::move(ranks));
}

RankReport evaluate_link_prediction(const ModelParams& model, std::span<const Triple> split, const Vocab& vocab,
                                    const FilterIndex& filter, int workers) {
    const BatchScorer scorer = [&model](std::span<const Query> queries) { return forward_scores(model, queries); };
    return evaluate_link_prediction(scorer, split, vocab, filter, workers);
}

double threshold_accuracy(std::span<const ScoredExample> examples, double threshold) {
    if (examples.empty()) {
        return 0.0;
    }
    std::size_t correct = 0;
    for (const auto& e : examples) {
        correct += (e.score >= threshold) == e.label;
    }
    return static_cast<double>(correct) / static_cast<double>(examples.size());
}

RelationThresholds tune_thresholds(std::span<const ScoredExample> examples) {
    if (examples.empty()) {
        throw std::invalid_argument("tune_thresholds: no examples");
    }
    std::map<RelationId, std::vector<ScoredExample>> by_relation;
    for (const auto& e : examples) {
        by_relation[e.relation].push_back(e);
    }

    RelationThresholds out;
    for (auto& [relation, group] : by_relation) {
        std::sort(group.begin(), group.end(), [](const auto& a, const auto& b) { return a.score < b.score; });
        // Sweep thresholds upward. Everything is predicted true below the lowest score.
        std::int64_t correct = std::count_if(group.begin(), group.end(), [](const auto& e) { return e.label; });
        double best_threshold = group.front().score - kThresholdSentinelMargin;
        std::int64_t best_correct = correct;
        for (std::size_t i = 0; i < group.size();) {
            const double value = group[i].score;
            for (; i < group.size() && group[i].score == value; ++i) {
                correct += group[i].label ? -1 : 1;
            }
            const double candidate =
                i < group.size() ? 0.5 * (value + group[i].score) : value + kThresholdSentinelMargin;
            if (correct > best_correct) {
                best_correct = correct;
                best_threshold = candidate;
            }
        }
        out.per_relation[relation] = best_threshold;
    }

    std::vector<double> values;
    for (const auto& [r, t] : out.per_relation) {
        values.push_back(t);
    }
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    out.fallback = n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
    return out;
}

ClassificationReport classify(std::span<const ScoredExample> examples, const RelationThresholds& thresholds) {
    ClassificationReport report;
    std::size_t correct = 0;
    for (const auto& e : examples) {
        if (!thresholds.has(e.relation) &&
            std::find(report.fallback_relations.begin(), report.fallback_relations.end(), e.relation) ==
                report.fallback_relations.end()) {
            report.fallback_relations.push_back(e.relation);
        }
        const bool ok = (e.score >= thresholds.threshold(e.relation)) == e.label;
        auto& rel = report.per_relation[e.relation];
        rel.total += 1;
        rel.correct += ok;
        correct += ok;
    }
    report.accuracy = examples.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(examples.size());
    return report;
}

std::vector<ScoredExample> score_labeled(const ModelParams& model, std::span<const LabeledTriple> triples) {
    std::vector<Triple> plain;
    plain.reserve(triples.size());
    for (const auto& lt : triples) {
        plain.push_back(lt.triple);
    }
    const auto scores = score_triples(model, plain);
    std::vector<ScoredExample> out;
    out.reserve(triples.size());
    for (std::size_t i = 0; i < triples.size(); ++i) {
        out.push_back({triples[i].triple.relation, scores[i], triples[i].label});
    }
    return out;
}

}  // namespace trpkgc
