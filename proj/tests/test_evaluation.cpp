#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "oracles.hpp"
#include "xlner/evaluation.hpp"

using namespace xlner;

namespace {

std::vector<LabeledSentence> gold_fixture() {
    return {
        {{"John", "visited", "New", "York"}, {"B-PER", "O", "B-LOC", "I-LOC"}},
        {{"IBM", "hired", "Ann"}, {"B-ORG", "O", "B-PER"}},
    };
}

}  // namespace

TEST_CASE("perfect predictions score one") {
    auto gold = gold_fixture();
    auto r = phrasal_f1(gold, gold);
    REQUIRE(r.overall.precision() == 1.0);
    REQUIRE(r.overall.recall() == 1.0);
    REQUIRE(r.overall.f1() == 1.0);
}

TEST_CASE("partial match arithmetic by hand") {
    std::vector<LabeledSentence> gold = {{{"a", "b", "c", "d"}, {"B-PER", "O", "B-LOC", "O"}}};
    std::vector<LabeledSentence> pred = {{{"a", "b", "c", "d"}, {"B-PER", "O", "O", "O"}}};
    auto r = phrasal_f1(gold, pred);
    REQUIRE(r.overall.gold == 2);
    REQUIRE(r.overall.predicted == 1);
    REQUIRE(r.overall.correct == 1);
    REQUIRE(r.overall.precision() == 1.0);
    REQUIRE(r.overall.recall() == 0.5);
    REQUIRE_THAT(r.overall.f1(), Catch::Matchers::WithinAbs(2.0 / 3.0, 1e-12));
}

TEST_CASE("boundary misses count as wrong") {
    std::vector<LabeledSentence> gold = {{{"New", "York", "City"}, {"B-LOC", "I-LOC", "O"}}};
    std::vector<LabeledSentence> pred = {{{"New", "York", "City"}, {"B-LOC", "O", "O"}}};
    auto r = phrasal_f1(gold, pred);
    REQUIRE(r.overall.correct == 0);
    // type miss on the same span also fails
    std::vector<LabeledSentence> pred2 = {{{"New", "York", "City"}, {"B-ORG", "I-ORG", "O"}}};
    REQUIRE(phrasal_f1(gold, pred2).overall.correct == 0);
}

TEST_CASE("swapping gold and prediction swaps precision and recall") {
    auto rng = make_rng(3);
    TagSet ts({"PER", "LOC"});
    std::uniform_int_distribution<int> len(1, 9);
    for (int trial = 0; trial < 30; ++trial) {
        auto random_corpus = [&](int n_sent) {
            std::vector<LabeledSentence> corpus;
            for (int s = 0; s < n_sent; ++s) {
                int n = len(rng);
                LabeledSentence sent;
                for (int i = 0; i < n; ++i) {
                    sent.tokens.push_back("tok" + std::to_string(i));
                    std::vector<int> allowed;
                    for (int l = 0; l < ts.num_labels(); ++l) {
                        bool ok = i == 0 ? ts.valid_start(l)
                                         : ts.valid_transition(ts.label_id(sent.tags.back()), l);
                        if (ok) allowed.push_back(l);
                    }
                    std::uniform_int_distribution<int> pick(0, static_cast<int>(allowed.size()) - 1);
                    sent.tags.push_back(ts.label_name(allowed[pick(rng)]));
                }
                corpus.push_back(std::move(sent));
            }
            return corpus;
        };
        auto a = random_corpus(4);
        auto b = a;
        for (auto& s : b) {  // perturb tags keeping tokenization
            if (s.tags.size() > 1) s.tags = std::vector<std::string>(s.tags.size(), "O");
        }
        auto r1 = phrasal_f1(a, b);
        auto r2 = phrasal_f1(b, a);
        REQUIRE(r1.overall.precision() == r2.overall.recall());
        REQUIRE(r1.overall.recall() == r2.overall.precision());
        REQUIRE(r1.overall.f1() == r2.overall.f1());
    }
}

TEST_CASE("per-type counts sum to the overall counts") {
    auto gold = gold_fixture();
    std::vector<LabeledSentence> pred = {
        {{"John", "visited", "New", "York"}, {"B-PER", "O", "B-ORG", "I-ORG"}},
        {{"IBM", "hired", "Ann"}, {"O", "O", "B-PER"}},
    };
    auto r = phrasal_f1(gold, pred);
    long g = 0, p = 0, c = 0;
    for (const auto& [t, counts] : r.per_type) {
        g += counts.gold;
        p += counts.predicted;
        c += counts.correct;
    }
    REQUIRE(g == r.overall.gold);
    REQUIRE(p == r.overall.predicted);
    REQUIRE(c == r.overall.correct);
}

TEST_CASE("mismatched corpora are rejected with the sentence index") {
    auto gold = gold_fixture();
    auto pred = gold;
    pred[1].tokens.push_back("extra");
    pred[1].tags.push_back("O");
    REQUIRE_THROWS_WITH(phrasal_f1(gold, pred), Catch::Matchers::ContainsSubstring("sentence 1"));
    pred.pop_back();
    REQUIRE_THROWS_AS(phrasal_f1(gold, pred), std::invalid_argument);
}

TEST_CASE("identical systems give p = 1") {
    auto gold = gold_fixture();
    auto pred = gold;
    pred[0].tags = {"B-PER", "O", "O", "O"};
    REQUIRE(stratified_shuffling_test(pred, pred, gold, 2000, 5) == 1.0);
}

TEST_CASE("extreme separation gives a tiny p-value") {
    std::vector<LabeledSentence> gold, perfect, all_o;
    for (int i = 0; i < 200; ++i) {
        LabeledSentence s{{"w0", "w1", "w2"}, {"B-PER", "O", "B-LOC"}};
        gold.push_back(s);
        perfect.push_back(s);
        all_o.push_back({s.tokens, {"O", "O", "O"}});
    }
    double p = stratified_shuffling_test(perfect, all_o, gold, 10000, 7);
    REQUIRE(p < 0.001);
}

TEST_CASE("p-values are reproducible and in range") {
    auto gold = gold_fixture();
    auto a = gold;
    auto b = gold;
    b[0].tags = {"O", "O", "B-LOC", "I-LOC"};
    double p1 = stratified_shuffling_test(a, b, gold, 500, 42);
    double p2 = stratified_shuffling_test(a, b, gold, 500, 42);
    REQUIRE(p1 == p2);
    REQUIRE(p1 > 0.0);
    REQUIRE(p1 <= 1.0);
    double p3 = stratified_shuffling_test(a, b, gold, 500, 43);
    REQUIRE(p3 > 0.0);  // different seed still valid
}

TEST_CASE("report renderers emit stable keys") {
    auto r = phrasal_f1(gold_fixture(), gold_fixture());
    std::ostringstream kv;
    write_report_kv(kv, r);
    REQUIRE_THAT(kv.str(), Catch::Matchers::ContainsSubstring("f1\t1.000000"));
    REQUIRE_THAT(kv.str(), Catch::Matchers::ContainsSubstring("precision.LOC\t"));
    std::ostringstream text;
    write_report_text(text, r);
    REQUIRE_THAT(text.str(), Catch::Matchers::ContainsSubstring("OVERALL"));
}
