#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace trpkgc {

using EntityId = std::int32_t;
using RelationId = std::int32_t;

struct Triple {
    EntityId head = 0;
    RelationId relation = 0;
    EntityId tail = 0;

    auto operator<=>(const Triple&) const = default;
};

struct LabeledTriple {
    Triple triple;
    bool label = false;

    bool operator==(const LabeledTriple&) const = default;
};

// Insertion-ordered bijection between surface forms and dense ids.
class SymbolTable {
public:
    std::int32_t add(std::string_view symbol);
    std::optional<std::int32_t> find(std::string_view symbol) const;
    const std::string& symbol(std::int32_t id) const { return symbols_.at(static_cast<std::size_t>(id)); }
    std::int32_t size() const { return static_cast<std::int32_t>(symbols_.size()); }
    const std::vector<std::string>& symbols() const { return symbols_; }

private:
    std::vector<std::string> symbols_;
    std::unordered_map<std::string, std::int32_t> ids_;
};

inline constexpr std::string_view kReciprocalSuffix = "_reciprocal";

// Entity and relation vocabularies. Relation ids [0, R) are the base relations
// read from files; ids [R, 2R) are their reciprocals.
class Vocab {
public:
    SymbolTable entities;
    SymbolTable relations;  // base relations only

    std::int32_t num_entities() const { return entities.size(); }
    std::int32_t num_base_relations() const { return relations.size(); }
    std::int32_t num_relations() const { return 2 * relations.size(); }

    RelationId reciprocal(RelationId r) const {
        const RelationId base = num_base_relations();
        return r < base ? r + base : r - base;
    }

    std::string relation_symbol(RelationId r) const;
    // Accepts base names and `<name>_reciprocal`.
    std::optional<RelationId> find_relation(std::string_view symbol) const;

    bool operator==(const Vocab& other) const {
        return entities.symbols() == other.entities.symbols() && relations.symbols() == other.relations.symbols();
    }
};

// A list of triples plus a guard against augmenting twice.
struct TripleList {
    std::vector<Triple> triples;
    bool has_reciprocals = false;

    std::size_t size() const { return triples.size(); }
    bool empty() const { return triples.empty(); }
};

enum class VocabMode { Extend, Frozen };

TripleList load_triples(const std::filesystem::path& path, Vocab& vocab, VocabMode mode);
// Appends (t, reciprocal(r), h) for each (h, r, t), keeping the originals first.
TripleList add_reciprocals(const TripleList& input, const Vocab& vocab);

std::vector<LabeledTriple> load_labeled_triples(const std::filesystem::path& path, Vocab& vocab,
                                                VocabMode mode = VocabMode::Frozen);
void write_labeled_triples(const std::filesystem::path& path, std::span<const LabeledTriple> triples,
                           const Vocab& vocab);
void write_triples(const std::filesystem::path& path, std::span<const Triple> triples, const Vocab& vocab);

// Known true answers per (entity, relation) query.
class FilterIndex {
public:
    void insert(EntityId entity, RelationId relation, EntityId answer);
    // Sorts and deduplicates every answer list. Called once after all inserts.
    void finalize();

    // Sorted, unique. Empty span when the query was never indexed.
    std::span<const EntityId> answers(EntityId entity, RelationId relation) const;
    bool contains(EntityId entity, RelationId relation, EntityId answer) const;
    std::size_t num_queries() const { return answers_.size(); }

private:
    static std::uint64_t key(EntityId e, RelationId r) {
        return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(e)) << 32) | static_cast<std::uint32_t>(r);
    }
    std::unordered_map<std::uint64_t, std::vector<EntityId>> answers_;
};

// Indexes (h, r) -> t and (t, reciprocal(r)) -> h for every triple in every split.
FilterIndex build_filter_index(std::span<const TripleList* const> splits, const Vocab& vocab);

// One negative per positive, interleaved as pos, neg, pos, neg, ...
// Head or tail is replaced (fair coin) by a uniform entity so that the result is
// absent from `known`. Throws SaturationError after 1000 failed draws for one triple.
std::vector<LabeledTriple> corrupt_negatives(std::span<const Triple> positives, const Vocab& vocab,
                                             const FilterIndex& known, std::uint64_t seed);

struct Dataset {
    Vocab vocab;
    TripleList train;
    TripleList valid;
    TripleList test;
};

// Resolves `<dir>/<split>.txt`, falling back to `.tsv`.
std::filesystem::path split_path(const std::filesystem::path& dir, std::string_view split);

// Ids follow first appearance over train, valid, then test.
Dataset load_dataset(const std::filesystem::path& dir);

// Two-column `id<TAB>symbol` files: entities.tsv and relations.tsv (2R rows).
void write_vocab(const std::filesystem::path& dir, const Vocab& vocab);

struct DatasetStats {
    std::int32_t entities = 0;
    std::int32_t relations = 0;
    std::size_t train = 0;
    std::size_t valid = 0;
    std::size_t test = 0;
};

DatasetStats dataset_stats(const Dataset& ds);
std::string format_stats(const DatasetStats& stats);

// Keeps each training triple with probability `fraction`; valid/test keep only
// triples whose entities and relation survive in the sampled train split.
Dataset subsample(const Dataset& ds, double fraction, std::uint64_t seed);

}  // namespace trpkgc
