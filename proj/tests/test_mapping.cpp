#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <sstream>

#include "oracles.hpp"
#include "xlner/mapping.hpp"

using namespace xlner;

namespace {

EmbeddingTable random_table(const std::string& prefix, int n, int dim, std::uint64_t seed) {
    EmbeddingTable t(dim);
    auto rng = make_rng(seed);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int i = 0; i < n; ++i) {
        std::vector<double> v(dim);
        for (auto& x : v) x = u(rng);
        t.add(prefix + std::to_string(i), v);
    }
    return t;
}

/// target table whose vectors are A·u for an invertible A
std::pair<EmbeddingTable, Eigen::MatrixXd> linear_image(const EmbeddingTable& source, int d2,
                                                        std::uint64_t seed) {
    const int d1 = source.dimension();
    auto rng = make_rng(seed);
    std::uniform_real_distribution<double> u(-1, 1);
    Eigen::MatrixXd A(d2, d1);
    for (int r = 0; r < d2; ++r)
        for (int c = 0; c < d1; ++c) A(r, c) = u(rng);
    // keep A comfortably invertible
    A += 2.0 * Eigen::MatrixXd::Identity(d2, d1);
    EmbeddingTable target(d2);
    for (const auto& w : source.words()) {
        const auto& uv = *source.find(w);
        Eigen::VectorXd x(d1);
        for (int i = 0; i < d1; ++i) x(i) = uv[i];
        Eigen::VectorXd y = A * x;
        target.add(w + "_t", std::vector<double>(y.data(), y.data() + d2));
    }
    return {std::move(target), std::move(A)};
}

BilingualDictionary full_dictionary(const EmbeddingTable& source, double weight = 1.0) {
    BilingualDictionary d;
    for (const auto& w : source.words()) d.entries.push_back({w, w + "_t", weight, 1});
    return d;
}

}  // namespace

TEST_CASE("dictionary extraction normalizes per target word") {
    std::istringstream in(
        "house\tcasa\t9\n"
        "home\tcasa\t1\n"
        "dog\tperro\t4\n");
    auto dict = extract_dictionary(in, 1);
    REQUIRE(dict.entries.size() == 3);
    // sorted by (target, source)
    REQUIRE(dict.entries[0].target_word == "casa");
    REQUIRE(dict.entries[0].source_word == "home");
    REQUIRE_THAT(dict.entries[0].weight, Catch::Matchers::WithinAbs(0.1, 1e-12));
    REQUIRE(dict.entries[1].source_word == "house");
    REQUIRE_THAT(dict.entries[1].weight, Catch::Matchers::WithinAbs(0.9, 1e-12));
    REQUIRE_THAT(dict.entries[2].weight, Catch::Matchers::WithinAbs(1.0, 1e-12));
}

TEST_CASE("dictionary weights sum to one per target word") {
    std::ostringstream gen;
    auto rng = make_rng(77);
    std::uniform_int_distribution<int> c(1, 50);
    for (int y = 0; y < 10; ++y)
        for (int x = 0; x < 6; ++x) gen << "src" << x << "\ttgt" << y << "\t" << c(rng) << "\n";
    std::istringstream in(gen.str());
    auto dict = extract_dictionary(in, 5);
    std::map<std::string, double> sums;
    for (const auto& e : dict.entries) sums[e.target_word] += e.weight;
    REQUIRE_FALSE(sums.empty());
    for (const auto& [y, s] : sums) REQUIRE_THAT(s, Catch::Matchers::WithinAbs(1.0, 1e-9));
}

TEST_CASE("duplicate pairs are summed before normalization") {
    std::istringstream in(
        "a\tx\t3\n"
        "a\tx\t2\n"
        "b\tx\t5\n");
    auto dict = extract_dictionary(in, 1);
    REQUIRE(dict.entries.size() == 2);
    REQUIRE(dict.entries[0].count + dict.entries[1].count == 10);
    REQUIRE_THAT(dict.entries[0].weight, Catch::Matchers::WithinAbs(0.5, 1e-12));
}

TEST_CASE("min frequency above all counts empties the dictionary and mapping fails") {
    std::istringstream in("a\tx\t3\n");
    auto dict = extract_dictionary(in, 10);
    REQUIRE(dict.entries.empty());
    auto src = random_table("s", 4, 3, 1);
    auto tgt = random_table("t", 4, 3, 2);
    REQUIRE_THROWS_AS(learn_mapping(dict, src, tgt), std::invalid_argument);
}

TEST_CASE("top-one mode keeps the most frequent translation with weight one") {
    std::istringstream in(
        "house\tcasa\t9\n"
        "home\tcasa\t1\n"
        "hound\tperro\t2\n"
        "dog\tperro\t6\n");
    auto dict = extract_dictionary(in, 1, DictionaryMode::TopOneUniform);
    REQUIRE(dict.entries.size() == 2);
    REQUIRE(dict.entries[0].source_word == "house");
    REQUIRE(dict.entries[0].weight == 1.0);
    REQUIRE(dict.entries[1].source_word == "dog");
}

TEST_CASE("malformed phrase-table lines carry line numbers") {
    std::istringstream in("a\tx\t3\nbad line\n");
    REQUIRE_THROWS_WITH(extract_dictionary(in, 1), Catch::Matchers::ContainsSubstring("line 2"));
    std::istringstream in2("a\tx\tnotanumber\n");
    REQUIRE_THROWS_AS(extract_dictionary(in2, 1), ParseError);
}

TEST_CASE("mapping recovers the inverse of a linear image") {
    auto source = random_table("w", 60, 8, 5);
    auto [target, A] = linear_image(source, 8, 6);
    auto dict = full_dictionary(source);
    auto m = learn_mapping(dict, source, target, 0.0);
    Eigen::MatrixXd Ainv = A.inverse();
    double num = 0.0, den = 0.0;
    for (std::size_t r = 0; r < m.rows; ++r)
        for (std::size_t c = 0; c < m.cols; ++c) {
            num += (m.at(r, c) - Ainv(r, c)) * (m.at(r, c) - Ainv(r, c));
            den += Ainv(r, c) * Ainv(r, c);
        }
    REQUIRE(std::sqrt(num / den) < 1e-6);
    REQUIRE(m.residual < 1e-12);
    REQUIRE(m.pairs_used == 60);
}

TEST_CASE("identity embeddings give the identity mapping") {
    auto source = random_table("w", 30, 5, 7);
    EmbeddingTable target(5);
    for (const auto& w : source.words()) target.add(w + "_t", *source.find(w));
    auto m = learn_mapping(full_dictionary(source), source, target, 0.0);
    for (std::size_t r = 0; r < m.rows; ++r)
        for (std::size_t c = 0; c < m.cols; ++c)
            REQUIRE_THAT(m.at(r, c), Catch::Matchers::WithinAbs(r == c ? 1.0 : 0.0, 1e-8));
}

TEST_CASE("weight rescaling leaves the solution unchanged") {
    auto source = random_table("w", 40, 6, 9);
    auto [target, A] = linear_image(source, 6, 10);
    auto m1 = learn_mapping(full_dictionary(source, 0.3), source, target, 0.0);
    auto m2 = learn_mapping(full_dictionary(source, 0.6), source, target, 0.0);
    for (std::size_t i = 0; i < m1.values.size(); ++i)
        REQUIRE_THAT(m1.values[i], Catch::Matchers::WithinAbs(m2.values[i], 1e-10));
}

TEST_CASE("weighted solution beats uniform weights on its own objective") {
    auto source = random_table("w", 50, 4, 11);
    // noisy target: not an exact linear image, so weights matter
    EmbeddingTable target(4);
    auto rng = make_rng(12);
    std::uniform_real_distribution<double> noise(-0.5, 0.5);
    for (const auto& w : source.words()) {
        auto v = *source.find(w);
        for (auto& x : v) x = 0.7 * x + noise(rng);
        target.add(w + "_t", v);
    }
    BilingualDictionary weighted;
    std::uniform_real_distribution<double> wdist(0.05, 1.0);
    for (const auto& w : source.words()) weighted.entries.push_back({w, w + "_t", wdist(rng), 1});
    auto mw = learn_mapping(weighted, source, target, 0.0);
    auto mu = learn_mapping(full_dictionary(source), source, target, 0.0);
    auto objective = [&](const MappingMatrix& m) {
        double s = 0.0;
        for (const auto& e : weighted.entries) {
            auto proj = project_embedding(m, *target.find(e.target_word));
            const auto& u = *source.find(e.source_word);
            double err = 0.0;
            for (std::size_t i = 0; i < u.size(); ++i) err += (u[i] - proj[i]) * (u[i] - proj[i]);
            s += e.weight * err;
        }
        return s;
    };
    REQUIRE(objective(mw) <= objective(mu) + 1e-10);
}

TEST_CASE("singular normal matrix without ridge is an error, ridge fixes it") {
    // all target vectors identical → rank-1 gram
    EmbeddingTable source = random_table("w", 10, 3, 13);
    EmbeddingTable target(3);
    for (const auto& w : source.words()) target.add(w + "_t", {1.0, 2.0, 3.0});
    auto dict = full_dictionary(source);
    REQUIRE_THROWS_AS(learn_mapping(dict, source, target, 0.0), std::runtime_error);
    REQUIRE_NOTHROW(learn_mapping(dict, source, target, 1e-6));
}

TEST_CASE("project_embedding is the plain matrix action") {
    MappingMatrix m;
    m.rows = 2;
    m.cols = 3;
    m.values = {1, 0, 0, 0, 1, 0};  // selects first two coords
    REQUIRE(project_embedding(m, {3, 4, 5}) == std::vector<double>{3, 4});
    REQUIRE(project_embedding(m, {0, 0, 0}) == std::vector<double>{0, 0});
    REQUIRE_THROWS(project_embedding(m, {1, 2}));
    // linearity
    auto a = project_embedding(m, {1, 2, 3});
    auto b = project_embedding(m, {4, -1, 0});
    auto c = project_embedding(m, {2 * 1 + 3 * 4, 2 * 2 + 3 * -1, 2 * 3 + 3 * 0});
    for (int i = 0; i < 2; ++i) REQUIRE_THAT(c[i], Catch::Matchers::WithinAbs(2 * a[i] + 3 * b[i], 1e-12));
}

TEST_CASE("mapping matrix save/load round trip") {
    auto source = random_table("w", 12, 4, 15);
    auto [target, A] = linear_image(source, 5, 16);
    auto m = learn_mapping(full_dictionary(source), source, target);
    std::ostringstream out;
    m.save(out);
    std::istringstream in(out.str());
    auto l = MappingMatrix::load(in);
    REQUIRE(l.rows == m.rows);
    REQUIRE(l.cols == m.cols);
    REQUIRE(l.values == m.values);
}

TEST_CASE("transfer lookup falls back target → source → unk") {
    auto source = random_table("src", 6, 4, 17);
    EmbeddingTable target(4);
    for (const auto& w : source.words()) target.add(w + "_t", *source.find(w));
    MappingMatrix ident;
    ident.rows = ident.cols = 4;
    ident.values = {1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1};
    // a tiny model only to own the UNK vector
    NNTrainConfig cfg;
    cfg.seed = 2;
    std::vector<LabeledSentence> toy = {{{"src0"}, {"O"}}};
    auto model = nn_build(toy, source, cfg, NNArch::NN1, TagSet({"X"}), 1, 4, 1, 2, 1, 1.0);
    auto lookup = make_transfer_lookup(ident, target, source, model);

    auto in_target = lookup("src1_t");
    REQUIRE(in_target.vec == *source.find("src1"));
    REQUIRE_FALSE(in_target.is_unk);
    auto in_source = lookup("src2");  // bypasses the mapping
    REQUIRE(in_source.vec == *source.find("src2"));
    REQUIRE_FALSE(in_source.is_unk);
    auto oov = lookup("nowhere");
    REQUIRE(oov.is_unk);
    auto u = model.unk();
    REQUIRE(oov.vec == std::vector<double>(u.begin(), u.end()));
}
