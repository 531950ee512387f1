#include "trpkgc/kg_data.hpp"

#include "trpkgc/errors.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <random>
#include <sstream>

namespace trpkgc {

namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find('\t', start);
        if (pos == std::string_view::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open " + path.string());
    }
    return in;
}

std::int32_t intern(SymbolTable& table, std::string_view symbol, VocabMode mode, const std::filesystem::path& path,
                    std::size_t line, const char* kind) {
    if (auto id = table.find(symbol)) {
        return *id;
    }
    if (mode == VocabMode::Frozen) {
        throw LookupError(path.string() + ":" + std::to_string(line) + ": unknown " + kind + " '" +
                          std::string(symbol) + "'");
    }
    return table.add(symbol);
}

RelationId intern_relation(Vocab& vocab, std::string_view symbol, VocabMode mode, const std::filesystem::path& path,
                           std::size_t line) {
    if (mode == VocabMode::Frozen) {
        // Frozen lookups may name a reciprocal relation explicitly.
        if (auto id = vocab.find_relation(symbol)) {
            return *id;
        }
        throw LookupError(path.string() + ":" + std::to_string(line) + ": unknown relation '" + std::string(symbol) +
                          "'");
    }
    return intern(vocab.relations, symbol, mode, path, line, "relation");
}

Triple parse_triple(const std::vector<std::string_view>& fields, Vocab& vocab, VocabMode mode,
                    const std::filesystem::path& path, std::size_t line) {
    Triple t;
    t.head = intern(vocab.entities, fields[0], mode, path, line, "entity");
    t.relation = intern_relation(vocab, fields[1], mode, path, line);
    t.tail = intern(vocab.entities, fields[2], mode, path, line, "entity");
    return t;
}

std::string_view strip_cr(std::string_view line) {
    if (!line.empty() && line.back() == '\r') {
        line.remove_suffix(1);
    }
    return line;
}

}  // namespace

std::int32_t SymbolTable::add(std::string_view symbol) {
    if (auto id = find(symbol)) {
        return *id;
    }
    const auto id = static_cast<std::int32_t>(symbols_.size());
    symbols_.emplace_back(symbol);
    ids_.emplace(symbols_.back(), id);
    return id;
}

std::optional<std::int32_t> SymbolTable::find(std::string_view symbol) const {
    auto it = ids_.find(std::string(symbol));
    if (it == ids_.end()) {
        return std::nullopt;
    }
    return it->second;
}

std::string Vocab::relation_symbol(RelationId r) const {
    const RelationId base = num_base_relations();
    if (r < base) {
        return relations.symbol(r);
    }
    return relations.symbol(r - base) + std::string(kReciprocalSuffix);
}

std::optional<RelationId> Vocab::find_relation(std::string_view symbol) const {
    if (auto id = relations.find(symbol)) {
        return *id;
    }
    if (symbol.ends_with(kReciprocalSuffix)) {
        symbol.remove_suffix(kReciprocalSuffix.size());
        if (auto id = relations.find(symbol)) {
            return *id + num_base_relations();
        }
    }
    return std::nullopt;
}

TripleList load_triples(const std::filesystem::path& path, Vocab& vocab, VocabMode mode) {
    auto in = open_input(path);
    TripleList out;
    std::string raw;
    std::size_t line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const auto text = strip_cr(raw);
        if (text.empty()) {
            continue;
        }
        const auto fields = split_tabs(text);
        if (fields.size() != 3) {
            throw ParseError(path.string(), line, "expected 3 tab-separated fields, got " + std::to_string(fields.size()));
        }
        out.triples.push_back(parse_triple(fields, vocab, mode, path, line));
    }
    return out;
}

TripleList add_reciprocals(const TripleList& input, const Vocab& vocab) {
    if (input.has_reciprocals) {
        throw std::logic_error("add_reciprocals: triple list is already augmented");
    }
    TripleList out;
    out.has_reciprocals = true;
    out.triples.reserve(2 * input.size());
    out.triples = input.triples;
    for (const auto& t : input.triples) {
        out.triples.push_back({t.tail, vocab.reciprocal(t.relation), t.head});
    }
    return out;
}

std::vector<LabeledTriple> load_labeled_triples(const std::filesystem::path& path, Vocab& vocab, VocabMode mode) {
    auto in = open_input(path);
    std::vector<LabeledTriple> out;
    std::string raw;
    std::size_t line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const auto text = strip_cr(raw);
        if (text.empty()) {
            continue;
        }
        const auto fields = split_tabs(text);
        if (fields.size() != 4) {
            throw ParseError(path.string(), line, "expected 4 tab-separated fields, got " + std::to_string(fields.size()));
        }
        LabeledTriple lt;
        if (fields[3] == "1") {
            lt.label = true;
        } else if (fields[3] == "-1") {
            lt.label = false;
        } else {
            throw ParseError(path.string(), line, "invalid label '" + std::string(fields[3]) + "' (expected 1 or -1)");
        }
        lt.triple = parse_triple(fields, vocab, mode, path, line);
        out.push_back(lt);
    }
    return out;
}

void write_triples(const std::filesystem::path& path, std::span<const Triple> triples, const Vocab& vocab) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    for (const auto& t : triples) {
        out << vocab.entities.symbol(t.head) << '\t' << vocab.relation_symbol(t.relation) << '\t'
            << vocab.entities.symbol(t.tail) << '\n';
    }
}

void write_labeled_triples(const std::filesystem::path& path, std::span<const LabeledTriple> triples,
                           const Vocab& vocab) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    for (const auto& lt : triples) {
        const auto& t = lt.triple;
        out << vocab.entities.symbol(t.head) << '\t' << vocab.relation_symbol(t.relation) << '\t'
            << vocab.entities.symbol(t.tail) << '\t' << (lt.label ? "1" : "-1") << '\n';
    }
}

void FilterIndex::insert(EntityId entity, RelationId relation, EntityId answer) {
    answers_[key(entity, relation)].push_back(answer);
}

void FilterIndex::finalize() {
    for (auto& [k, list] : answers_) {
        std::sort(list.begin(), list.end());
        list.erase(std::unique(list.begin(), list.end()), list.end());
    }
}

std::span<const EntityId> FilterIndex::answers(EntityId entity, RelationId relation) const {
    auto it = answers_.find(key(entity, relation));
    if (it == answers_.end()) {
        return {};
    }
    return it->second;
}

bool FilterIndex::contains(EntityId entity, RelationId relation, EntityId answer) const {
    const auto list = answers(entity, relation);
    return std::binary_search(list.begin(), list.end(), answer);
}

FilterIndex build_filter_index(std::span<const TripleList* const> splits, const Vocab& vocab) {
    FilterIndex index;
    for (const auto* split : splits) {
        for (const auto& t : split->triples) {
            index.insert(t.head, t.relation, t.tail);
            index.insert(t.tail, vocab.reciprocal(t.relation), t.head);
        }
    }
    index.finalize();
    return index;
}

std::vector<LabeledTriple> corrupt_negatives(std::span<const Triple> positives, const Vocab& vocab,
                                             const FilterIndex& known, std::uint64_t seed) {
    constexpr int kMaxAttempts = 1000;
    if (vocab.num_entities() < 2) {
        throw std::invalid_argument("corrupt_negatives: need at least 2 entities");
    }
    std::mt19937_64 rng(seed);
    std::bernoulli_distribution coin(0.5);
    std::uniform_int_distribution<EntityId> pick(0, vocab.num_entities() - 1);

    std::vector<LabeledTriple> out;
    out.reserve(2 * positives.size());
    for (const auto& pos : positives) {
        out.push_back({pos, true});
        bool found = false;
        for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
            Triple neg = pos;
            if (coin(rng)) {
                neg.head = pick(rng);
            } else {
                neg.tail = pick(rng);
            }
            if (!known.contains(neg.head, neg.relation, neg.tail)) {
                out.push_back({neg, false});
                found = true;
                break;
            }
        }
        if (!found) {
            throw SaturationError("no corrupted triple absent from the index after " + std::to_string(kMaxAttempts) +
                                  " attempts for (" + vocab.entities.symbol(pos.head) + ", " +
                                  vocab.relation_symbol(pos.relation) + ", " + vocab.entities.symbol(pos.tail) + ")");
        }
    }
    return out;
}

std::filesystem::path split_path(const std::filesystem::path& dir, std::string_view split) {
    auto txt = dir / (std::string(split) + ".txt");
    if (std::filesystem::exists(txt)) {
        return txt;
    }
    auto tsv = dir / (std::string(split) + ".tsv");
    if (std::filesystem::exists(tsv)) {
        return tsv;
    }
    return txt;
}

Dataset load_dataset(const std::filesystem::path& dir) {
    Dataset ds;
    ds.train = load_triples(split_path(dir, "train"), ds.vocab, VocabMode::Extend);
    ds.valid = load_triples(split_path(dir, "valid"), ds.vocab, VocabMode::Extend);
    ds.test = load_triples(split_path(dir, "test"), ds.vocab, VocabMode::Extend);
    return ds;
}

void write_vocab(const std::filesystem::path& dir, const Vocab& vocab) {
    std::filesystem::create_directories(dir);
    std::ofstream ent(dir / "entities.tsv");
    for (std::int32_t i = 0; i < vocab.num_entities(); ++i) {
        ent << i << '\t' << vocab.entities.symbol(i) << '\n';
    }
    std::ofstream rel(dir / "relations.tsv");
    for (RelationId r = 0; r < vocab.num_relations(); ++r) {
        rel << r << '\t' << vocab.relation_symbol(r) << '\n';
    }
    if (!ent || !rel) {
        throw std::runtime_error("cannot write vocabulary files under " + dir.string());
    }
}

DatasetStats dataset_stats(const Dataset& ds) {
    return {ds.vocab.num_entities(), ds.vocab.num_base_relations(), ds.train.size(), ds.valid.size(), ds.test.size()};
}

std::string format_stats(const DatasetStats& s) {
    std::ostringstream os;
    os << s.entities << " entities, " << s.relations << " relations, " << s.train << "/" << s.valid << "/" << s.test
       << " triples";
    return os.str();
}

Dataset subsample(const Dataset& ds, double fraction, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::bernoulli_distribution keep(fraction);
    Dataset out;
    const auto copy = [&](const Triple& t) {
        return Triple{out.vocab.entities.add(ds.vocab.entities.symbol(t.head)),
                      out.vocab.relations.add(ds.vocab.relations.symbol(t.relation)),
                      out.vocab.entities.add(ds.vocab.entities.symbol(t.tail))};
    };
    for (const auto& t : ds.train.triples) {
        if (keep(rng)) {
            out.train.triples.push_back(copy(t));
        }
    }
    const auto known = [&](const Triple& t) {
        return out.vocab.entities.find(ds.vocab.entities.symbol(t.head)) &&
               out.vocab.entities.find(ds.vocab.entities.symbol(t.tail)) &&
               out.vocab.relations.find(ds.vocab.relations.symbol(t.relation));
    };
    for (auto [src, dst] : {std::pair{&ds.valid, &out.valid}, std::pair{&ds.test, &out.test}}) {
        for (const auto& t : src->triples) {
            if (keep(rng) && known(t)) {
                dst->triples.push_back(copy(t));
            }
        }
    }
    return out;
}

}  // namespace trpkgc
