#include "test_util.hpp"

#include "trpkgc/errors.hpp"
#include "trpkgc/kg_data.hpp"

#include <set>

using namespace trpkgc;
using testutil::temp_dir;
using testutil::write_file;

namespace {

const std::filesystem::path kUmls = TRPKGC_UMLS_DIR;

Vocab one_relation_vocab(int entities) {
    Vocab v;
    for (int i = 0; i < entities; ++i) {
        v.entities.add("e" + std::to_string(i));
    }
    v.relations.add("r");
    return v;
}

TripleList list_of(std::vector<Triple> triples) {
    TripleList l;
    l.triples = std::move(triples);
    return l;
}

}  // namespace

TEST_CASE("load_triples: UMLS split sizes") {
    Dataset ds = load_dataset(kUmls);
    CHECK(ds.train.size() == 5216);
    CHECK(ds.valid.size() == 652);
    CHECK(ds.test.size() == 661);
    CHECK(ds.vocab.num_entities() == 135);
    CHECK(ds.vocab.num_base_relations() == 46);
    CHECK(ds.vocab.num_relations() == 92);
}

TEST_CASE("load_triples: empty file leaves the vocab unchanged") {
    auto dir = temp_dir("empty");
    write_file(dir / "empty.txt", "");
    Vocab v = one_relation_vocab(2);
    TripleList l = load_triples(dir / "empty.txt", v, VocabMode::Extend);
    CHECK(l.empty());
    CHECK(v.num_entities() == 2);
    CHECK(v.num_base_relations() == 1);
}

TEST_CASE("load_triples: small synthetic file") {
    auto dir = temp_dir("synthetic");
    write_file(dir / "t.txt", "a\tlikes\tb\nb\tlikes\ta\na\tlikes\ta\n");
    Vocab v;
    TripleList l = load_triples(dir / "t.txt", v, VocabMode::Extend);
    REQUIRE(l.size() == 3);
    CHECK(v.num_entities() == 2);
    CHECK(v.num_base_relations() == 1);
    CHECK(l.triples[0] == Triple{0, 0, 1});
    CHECK(l.triples[1] == Triple{1, 0, 0});
    CHECK(l.triples[2] == Triple{0, 0, 0});
}

TEST_CASE("load_triples: errors") {
    auto dir = temp_dir("errors");
    write_file(dir / "bad.txt", "a\tr\tb\na\tr\n");
    Vocab v;
    try {
        load_triples(dir / "bad.txt", v, VocabMode::Extend);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 2);
    }

    write_file(dir / "good.txt", "a\tr\tb\n");
    write_file(dir / "unseen.txt", "a\tr\tc\n");
    Vocab frozen;
    load_triples(dir / "good.txt", frozen, VocabMode::Extend);
    CHECK_THROWS_AS(load_triples(dir / "unseen.txt", frozen, VocabMode::Frozen), LookupError);
    CHECK(frozen.num_entities() == 2);
}

TEST_CASE("load_triples: crlf line endings and blank lines") {
    auto dir = temp_dir("crlf");
    write_file(dir / "t.txt", "a\tr\tb\r\n\r\nb\tr\tc\r\n");
    Vocab v;
    TripleList l = load_triples(dir / "t.txt", v, VocabMode::Extend);
    CHECK(l.size() == 2);
    CHECK(v.entities.symbol(2) == "c");
}

TEST_CASE("vocab: reciprocal involution and naming") {
    Vocab v = one_relation_vocab(2);
    v.relations.add("s");
    for (RelationId r = 0; r < v.num_relations(); ++r) {
        CHECK(v.reciprocal(v.reciprocal(r)) == r);
    }
    CHECK(v.reciprocal(0) == 2);
    CHECK(v.reciprocal(3) == 1);
    CHECK(v.relation_symbol(3) == "s_reciprocal");
    CHECK(v.find_relation("s_reciprocal") == 3);
    CHECK(v.find_relation("s") == 1);
    CHECK_FALSE(v.find_relation("missing").has_value());
}

TEST_CASE("vocab: determinism across loads") {
    Dataset a = load_dataset(kUmls);
    Dataset b = load_dataset(kUmls);
    CHECK(a.vocab == b.vocab);
    CHECK(a.train.triples == b.train.triples);
}

TEST_CASE("add_reciprocals") {
    Vocab v = one_relation_vocab(2);
    TripleList out = add_reciprocals(list_of({{0, 0, 1}}), v);
    REQUIRE(out.size() == 2);
    CHECK(out.triples[0] == Triple{0, 0, 1});
    CHECK(out.triples[1] == Triple{1, 1, 0});
    CHECK(out.has_reciprocals);

    CHECK(add_reciprocals(TripleList{}, v).empty());
    CHECK_THROWS_AS(add_reciprocals(out, v), std::logic_error);

    Dataset ds = load_dataset(kUmls);
    TripleList aug = add_reciprocals(ds.train, ds.vocab);
    CHECK(aug.size() == 2 * ds.train.size());
    CHECK(aug.size() == 10432);
    CHECK(ds.vocab.num_relations() == 92);
    for (std::size_t i = 0; i < ds.train.size(); ++i) {
        const Triple& t = ds.train.triples[i];
        CHECK(aug.triples[i] == t);
        CHECK(aug.triples[ds.train.size() + i] == Triple{t.tail, ds.vocab.reciprocal(t.relation), t.head});
    }
}

TEST_CASE("build_filter_index: direct aggregation and reciprocal entry") {
    Vocab v = one_relation_vocab(3);
    TripleList l = list_of({{0, 0, 1}, {0, 0, 2}});
    const TripleList* splits[] = {&l};
    FilterIndex idx = build_filter_index(splits, v);
    auto a = idx.answers(0, 0);
    CHECK(std::vector<EntityId>(a.begin(), a.end()) == std::vector<EntityId>{1, 2});

    TripleList single = list_of({{0, 0, 1}});
    const TripleList* one[] = {&single};
    FilterIndex idx1 = build_filter_index(one, v);
    auto b = idx1.answers(1, 1);
    CHECK(std::vector<EntityId>(b.begin(), b.end()) == std::vector<EntityId>{0});
    CHECK(idx1.answers(2, 0).empty());
}

TEST_CASE("build_filter_index: UMLS lookups match a linear scan") {
    Dataset ds = load_dataset(kUmls);
    const TripleList* splits[] = {&ds.train, &ds.valid, &ds.test};
    FilterIndex idx = build_filter_index(splits, ds.vocab);

    std::vector<Triple> all;
    for (const TripleList* s : splits) {
        all.insert(all.end(), s->triples.begin(), s->triples.end());
    }
    CHECK(all.size() == 6529);

    std::mt19937_64 rng(3);
    std::uniform_int_distribution<std::size_t> pick(0, all.size() - 1);
    for (int q = 0; q < 20; ++q) {
        const Triple& probe = all[pick(rng)];
        const bool head_query = q % 2 == 1;
        const EntityId e = head_query ? probe.tail : probe.head;
        const RelationId r = head_query ? ds.vocab.reciprocal(probe.relation) : probe.relation;
        std::set<EntityId> expected;
        for (const Triple& t : all) {
            if (!head_query && t.head == e && t.relation == r) {
                expected.insert(t.tail);
            }
            if (head_query && t.tail == e && t.relation == probe.relation) {
                expected.insert(t.head);
            }
        }
        auto got = idx.answers(e, r);
        CHECK(std::set<EntityId>(got.begin(), got.end()) == expected);
    }
}

TEST_CASE("build_filter_index: reciprocal closure") {
    Dataset ds = load_dataset(kUmls);
    TripleList aug = add_reciprocals(ds.train, ds.vocab);
    const TripleList* splits[] = {&aug};
    FilterIndex idx = build_filter_index(splits, ds.vocab);
    for (const Triple& t : aug.triples) {
        CHECK(idx.contains(t.head, t.relation, t.tail));
        CHECK(idx.contains(t.tail, ds.vocab.reciprocal(t.relation), t.head));
    }
}

TEST_CASE("load_labeled_triples") {
    auto dir = temp_dir("labeled");
    write_file(dir / "base.txt", "a\tb\tc\n");
    Vocab v;
    load_triples(dir / "base.txt", v, VocabMode::Extend);

    write_file(dir / "one.txt", "a\tb\tc\t1\n");
    auto one = load_labeled_triples(dir / "one.txt", v);
    REQUIRE(one.size() == 1);
    CHECK(one[0].label);
    CHECK(one[0].triple == Triple{0, 0, 1});

    write_file(dir / "three.txt", "a\tb\tc\t1\nc\tb\ta\t-1\na\tb\ta\t1\n");
    auto three = load_labeled_triples(dir / "three.txt", v);
    CHECK(std::count_if(three.begin(), three.end(), [](const LabeledTriple& t) { return t.label; }) == 2);

    write_file(dir / "bad_label.txt", "a\tb\tc\tyes\n");
    CHECK_THROWS_AS(load_labeled_triples(dir / "bad_label.txt", v), ParseError);
    write_file(dir / "bad_fields.txt", "a\tb\tc\n");
    CHECK_THROWS_AS(load_labeled_triples(dir / "bad_fields.txt", v), ParseError);

    write_labeled_triples(dir / "round.txt", three, v);
    CHECK(load_labeled_triples(dir / "round.txt", v) == three);
}

TEST_CASE("corrupt_negatives: saturation") {
    Vocab v = one_relation_vocab(2);
    // Every replacement of head or tail of (0, r, 1) lands on a known triple.
    TripleList known = list_of({{0, 0, 1}, {0, 0, 0}, {1, 0, 1}});
    const TripleList* splits[] = {&known};
    FilterIndex idx = build_filter_index(splits, v);
    std::vector<Triple> pos{{0, 0, 1}};
    CHECK_THROWS_AS(corrupt_negatives(pos, v, idx, 1), SaturationError);
}

TEST_CASE("corrupt_negatives: determinism and membership") {
    Dataset ds = load_dataset(kUmls);
    const TripleList* splits[] = {&ds.train, &ds.valid, &ds.test};
    FilterIndex idx = build_filter_index(splits, ds.vocab);
    std::span<const Triple> pos(ds.test.triples.data(), 100);

    auto a = corrupt_negatives(pos, ds.vocab, idx, 11);
    auto b = corrupt_negatives(pos, ds.vocab, idx, 11);
    CHECK(a == b);
    REQUIRE(a.size() == 200);

    std::set<Triple> all;
    for (const TripleList* s : splits) {
        all.insert(s->triples.begin(), s->triples.end());
    }
    for (std::size_t i = 0; i < pos.size(); ++i) {
        CHECK(a[2 * i].label);
        CHECK(a[2 * i].triple == pos[i]);
        const LabeledTriple& neg = a[2 * i + 1];
        CHECK_FALSE(neg.label);
        CHECK_FALSE(all.contains(neg.triple));
        const bool head_kept = neg.triple.head == pos[i].head;
        const bool tail_kept = neg.triple.tail == pos[i].tail;
        CHECK(neg.triple.relation == pos[i].relation);
        CHECK((head_kept || tail_kept));
    }
}

TEST_CASE("dataset stats and vocab export") {
    Dataset ds = load_dataset(kUmls);
    CHECK(format_stats(dataset_stats(ds)) == "135 entities, 46 relations, 5216/652/661 triples");

    auto dir = temp_dir("vocab");
    write_vocab(dir, ds.vocab);
    std::string rel = testutil::read_file(dir / "relations.tsv");
    CHECK(std::count(rel.begin(), rel.end(), '\n') == 92);
    std::string ent = testutil::read_file(dir / "entities.tsv");
    CHECK(std::count(ent.begin(), ent.end(), '\n') == 135);
    CHECK(ent.rfind("0\t" + ds.vocab.entities.symbol(0) + "\n", 0) == 0);
}

TEST_CASE("subsample keeps a consistent vocabulary") {
    Dataset ds = load_dataset(kUmls);
    Dataset sub = subsample(ds, 0.1, 5);
    CHECK(sub.train.size() > 300);
    CHECK(sub.train.size() < 800);
    for (const Triple& t : sub.train.triples) {
        CHECK(t.head < sub.vocab.num_entities());
        CHECK(t.tail < sub.vocab.num_entities());
        CHECK(t.relation < sub.vocab.num_base_relations());
    }
    Dataset again = subsample(ds, 0.1, 5);
    CHECK(again.train.triples == sub.train.triples);
    CHECK(again.vocab == sub.vocab);
}
