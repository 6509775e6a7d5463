#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"
#include "xlner/codecoding.hpp"

using namespace xlner;

namespace {

ConfidenceTaggedSentence make_output(std::vector<std::string> tags, std::vector<double> confs) {
    ConfidenceTaggedSentence s;
    s.tokens.assign(tags.size(), "w");
    for (std::size_t i = 0; i < s.tokens.size(); ++i) s.tokens[i] = "w" + std::to_string(i);
    s.tags = std::move(tags);
    s.confidences = std::move(confs);
    return s;
}

ConfidenceTaggedSentence from_spans(int length, const std::vector<EntityMention>& spans,
                                    const std::vector<double>& entity_confs, double base = 0.5) {
    ConfidenceTaggedSentence s;
    for (int i = 0; i < length; ++i) s.tokens.push_back("w" + std::to_string(i));
    s.tags = spans_to_iob(spans, length);
    s.confidences.assign(length, base);
    for (std::size_t k = 0; k < spans.size(); ++k)
        for (int i = spans[k].start; i < spans[k].end; ++i) s.confidences[i] = entity_confs[k];
    return s;
}

}  // namespace

TEST_CASE("conflict definition follows the footnote") {
    REQUIRE(entities_conflict({0, 2, "ORG"}, {1, 3, "LOC"}));   // overlap, different span
    REQUIRE(entities_conflict({0, 2, "PER"}, {0, 2, "ORG"}));   // same span, different type
    REQUIRE_FALSE(entities_conflict({0, 2, "PER"}, {0, 2, "PER"}));  // agreement
    REQUIRE_FALSE(entities_conflict({0, 2, "PER"}, {3, 4, "LOC"})); // disjoint
    REQUIRE(entities_conflict({0, 3, "PER"}, {1, 2, "PER"}));   // nesting still differs in span

    auto conflicts = find_conflicts({{0, 2, "ORG"}, {4, 5, "PER"}}, {{1, 3, "LOC"}, {4, 5, "ORG"}});
    REQUIRE(conflicts.size() == 2);
    REQUIRE(conflicts[0].kind == ConflictKind::OverlapDifferentSpan);
    REQUIRE(conflicts[1].kind == ConflictKind::SameSpanDifferentType);
}

TEST_CASE("rank scheme reproduces the worked example") {
    auto ap = make_output({"B-PER", "O", "O", "O", "O"}, {0.9, 0.5, 0.5, 0.5, 0.5});
    auto rp = make_output({"B-ORG", "I-ORG", "O", "B-LOC", "I-LOC"}, {0.6, 0.6, 0.5, 0.7, 0.7});
    auto out = codecode_rank(ap, rp);
    REQUIRE(out.tags == std::vector<std::string>{"B-PER", "O", "O", "B-LOC", "I-LOC"});
    // confidences carried from the contributing system
    REQUIRE(out.confidences[0] == 0.9);
    REQUIRE(out.confidences[3] == 0.7);
}

TEST_CASE("rank scheme with empty AP passes RP through") {
    auto ap = make_output({"O", "O", "O"}, {0.5, 0.5, 0.5});
    auto rp = make_output({"B-LOC", "I-LOC", "O"}, {0.8, 0.8, 0.5});
    auto out = codecode_rank(ap, rp);
    REQUIRE(out.tags == rp.tags);
}

TEST_CASE("rank scheme keeps agreements once with AP provenance") {
    auto ap = make_output({"B-PER", "O"}, {0.4, 0.5});
    auto rp = make_output({"B-PER", "O"}, {0.9, 0.5});
    auto out = codecode_rank(ap, rp);
    REQUIRE(out.tags == std::vector<std::string>{"B-PER", "O"});
    REQUIRE(out.confidences[0] == 0.4);  // the AP copy
}

TEST_CASE("rank scheme rejects token mismatches") {
    auto ap = make_output({"O"}, {0.5});
    auto rp = make_output({"O", "O"}, {0.5, 0.5});
    REQUIRE_THROWS_AS(codecode_rank(ap, rp), std::invalid_argument);
}

TEST_CASE("rank output always contains the AP entities and no conflicting RP entity") {
    TagSet ts({"PER", "LOC", "ORG"});
    auto rng = make_rng(71);
    std::uniform_int_distribution<int> len(1, 12);
    std::uniform_real_distribution<double> conf(0.0, 1.0);
    for (int trial = 0; trial < 1000; ++trial) {
        int n = len(rng);
        auto random_output = [&]() {
            std::vector<std::string> tags;
            for (int i = 0; i < n; ++i) {
                std::vector<int> allowed;
                for (int l = 0; l < ts.num_labels(); ++l) {
                    bool ok = i == 0 ? ts.valid_start(l) : ts.valid_transition(ts.label_id(tags.back()), l);
                    if (ok) allowed.push_back(l);
                }
                std::uniform_int_distribution<int> pick(0, static_cast<int>(allowed.size()) - 1);
                tags.push_back(ts.label_name(allowed[pick(rng)]));
            }
            std::vector<double> confs;
            for (int i = 0; i < n; ++i) confs.push_back(conf(rng));
            return make_output(std::move(tags), std::move(confs));
        };
        auto ap = random_output();
        auto rp = random_output();
        auto out = codecode_rank(ap, rp);
        REQUIRE(is_iob2_valid(out.tags));
        auto ea = iob_to_spans(ap.tags);
        auto eo = iob_to_spans(out.tags);
        // AP ⊆ output
        for (const auto& a : ea)
            REQUIRE(std::find(eo.begin(), eo.end(), a) != eo.end());
        // no output entity conflicts with an AP entity
        for (const auto& o : eo)
            for (const auto& a : ea) REQUIRE_FALSE(entities_conflict(o, a));
        // combined entities pairwise non-overlapping
        for (std::size_t i = 1; i < eo.size(); ++i) REQUIRE(eo[i - 1].end <= eo[i].start);
    }
}

TEST_CASE("exclude-O keeps low-confidence entities against all-O rivals") {
    auto a = from_spans(3, {{0, 1, "PER"}}, {0.3});
    auto b = from_spans(3, {}, {});
    auto out = codecode_confidence_exclude_o(a, b);
    REQUIRE(out.tags == std::vector<std::string>{"B-PER", "O", "O"});
    REQUIRE(out.confidences[0] == 0.3);
    // symmetric direction
    auto out2 = codecode_confidence_exclude_o(b, a);
    REQUIRE(out2.tags == out.tags);
}

TEST_CASE("same-span conflicts resolve by confidence") {
    auto a = from_spans(2, {{0, 2, "PER"}}, {0.8});
    auto b = from_spans(2, {{0, 2, "ORG"}}, {0.6});
    REQUIRE(codecode_confidence_exclude_o(a, b).tags == std::vector<std::string>{"B-PER", "I-PER"});
    REQUIRE(codecode_confidence_exclude_o(b, a).tags == std::vector<std::string>{"B-PER", "I-PER"});
}

TEST_CASE("overlap conflicts drop the weaker entity") {
    auto a = from_spans(3, {{0, 2, "ORG"}}, {0.5});
    auto b = from_spans(3, {{1, 3, "LOC"}}, {0.9});
    auto out = codecode_confidence_exclude_o(a, b);
    REQUIRE(out.tags == std::vector<std::string>{"O", "B-LOC", "I-LOC"});
}

TEST_CASE("confidence ties go to system A") {
    auto a = from_spans(2, {{0, 2, "PER"}}, {0.7});
    auto b = from_spans(2, {{0, 2, "ORG"}}, {0.7});
    REQUIRE(codecode_confidence_exclude_o(a, b).tags == std::vector<std::string>{"B-PER", "I-PER"});
}

TEST_CASE("agreements are kept once with the max confidence") {
    auto a = from_spans(2, {{0, 1, "LOC"}}, {0.4});
    auto b = from_spans(2, {{0, 1, "LOC"}}, {0.9});
    auto out = codecode_confidence_exclude_o(a, b);
    REQUIRE(out.tags == std::vector<std::string>{"B-LOC", "O"});
    REQUIRE(out.confidences[0] == 0.9);
}

TEST_CASE("both schemes are idempotent on identical inputs") {
    TagSet ts({"PER", "LOC"});
    auto rng = make_rng(73);
    std::uniform_int_distribution<int> len(1, 10);
    std::uniform_real_distribution<double> conf(0.1, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        int n = len(rng);
        std::vector<std::string> tags;
        for (int i = 0; i < n; ++i) {
            std::vector<int> allowed;
            for (int l = 0; l < ts.num_labels(); ++l) {
                bool ok = i == 0 ? ts.valid_start(l) : ts.valid_transition(ts.label_id(tags.back()), l);
                if (ok) allowed.push_back(l);
            }
            std::uniform_int_distribution<int> pick(0, static_cast<int>(allowed.size()) - 1);
            tags.push_back(ts.label_name(allowed[pick(rng)]));
        }
        // per-entity-constant confidences so entity confidence == token confidence
        std::vector<double> confs(n, 0.0);
        auto spans = iob_to_spans(tags);
        std::vector<double> base(n);
        for (int i = 0; i < n; ++i) base[i] = conf(rng);
        for (int i = 0; i < n; ++i) confs[i] = base[i];
        for (const auto& s : spans) {
            double c = conf(rng);
            for (int i = s.start; i < s.end; ++i) confs[i] = c;
        }
        auto x = make_output(tags, confs);
        auto r = codecode_rank(x, x);
        REQUIRE(r.tags == x.tags);
        auto c = codecode_confidence_exclude_o(x, x);
        REQUIRE(c.tags == x.tags);
    }
}
