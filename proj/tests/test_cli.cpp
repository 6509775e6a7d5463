// End-to-end exercises of the command-line interface: every subcommand runs
// against a small synthetic world in a temp directory, and the stage outputs
// feed the next stage (format closure).
#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "synthdata.hpp"
#include "xlner/corpus.hpp"
#include "xlner/evaluation.hpp"
#include "xlner/mapping.hpp"

namespace fs = std::filesystem;
using namespace xlner;

namespace {

const std::string cli = XLNER_CLI_PATH;

struct World {
    fs::path dir;

    World() {
        dir = fs::temp_directory_path() / "xlner_cli_test";
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    std::string path(const std::string& name) const { return (dir / name).string(); }
};

int run(const std::string& args) {
    std::string cmd = cli + " " + args + " 2>/dev/null";
    int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

World& world() {
    static World w;
    return w;
}

void write_source_corpus(const std::string& path, int sentences, std::uint64_t seed) {
    synthdata::ToyCorpusSpec spec;
    spec.sentences = sentences;
    spec.seed = seed;
    auto corpus = synthdata::toy_source_corpus(spec);
    std::ofstream out(path);
    write_conll(out, corpus);
}

}  // namespace

TEST_CASE("missing inputs fail validation with exit 1 and no outputs") {
    auto& w = world();
    REQUIRE(run("train-source --train " + w.path("absent.conll") + " --model-out " + w.path("never.model")) ==
            1);
    REQUIRE_FALSE(fs::exists(w.path("never.model")));
    REQUIRE(run("codecode --a x --b y --scheme bogus") == 1);
}

TEST_CASE("train-source is reproducible and its model decodes") {
    auto& w = world();
    write_source_corpus(w.path("train.conll"), 50, 11);
    std::string common = "train-source --train " + w.path("train.conll") + " --kind crf --epochs 6 --seed 7";
    REQUIRE(run(common + " --model-out " + w.path("m1.model")) == 0);
    REQUIRE(run(common + " --model-out " + w.path("m2.model")) == 0);
    REQUIRE(slurp(w.path("m1.model")) == slurp(w.path("m2.model")));  // byte-identical

    REQUIRE(run("decode --model " + w.path("m1.model") + " --input " + w.path("train.conll") +
                " --output " + w.path("decoded.conll")) == 0);
    std::ifstream in(w.path("decoded.conll"));
    auto decoded = read_conll(in);
    REQUIRE(decoded.size() == 50);
}

TEST_CASE("synth-bitext then project-select-train closes the loop") {
    auto& w = world();
    write_source_corpus(w.path("src.conll"), 80, 13);
    REQUIRE(run("synth-bitext --source " + w.path("src.conll") + " --out-dir " + w.path("bitext") +
                " --align-noise 0.0 --seed 3") == 0);
    for (const char* f : {"source.conll", "target.tokens", "alignments.txt", "target-gold.conll"})
        REQUIRE(fs::exists(w.dir / "bitext" / f));

    // thresholds (0,0): the selected corpus equals the projected corpus
    REQUIRE(run("project-select-train --source " + w.path("bitext/source.conll") + " --target " +
                w.path("bitext/target.tokens") + " --alignments " + w.path("bitext/alignments.txt") +
                " --q 0 --n 0 --order 2 --epochs 4 --model-out " + w.path("ap.model") + " --selected-out " +
                w.path("selected.conll") + " --scores-out " + w.path("scores.tsv") + " --freq-out " +
                w.path("freq.tsv")) == 0);
    std::ifstream sel_in(w.path("selected.conll"));
    auto selected = read_conll(sel_in);
    REQUIRE(selected.size() == 80);
    // zero-noise projection reproduces the gold target corpus
    std::ifstream gold_in(w.path("bitext/target-gold.conll"));
    auto gold = read_conll(gold_in);
    REQUIRE(phrasal_f1(gold, selected).overall.f1() == 1.0);
    // sidecar carries one line per selected sentence
    auto scores = slurp(w.path("scores.tsv"));
    REQUIRE(std::count(scores.begin(), scores.end(), '\n') == 80);

    // the trained MEMM decodes the target text
    REQUIRE(run("decode --model " + w.path("ap.model") + " --input " + w.path("bitext/target.tokens") +
                " --format tokens --output " + w.path("ap-pred.conll") + " --conf-out " +
                w.path("ap-pred.conf")) == 0);
    std::ifstream pred_in(w.path("ap-pred.conll"));
    REQUIRE(read_conll(pred_in).size() == 80);
}

TEST_CASE("coordinate-search emits the 15-point grid") {
    auto& w = world();
    REQUIRE(run("coordinate-search --source " + w.path("bitext/source.conll") + " --target " +
                w.path("bitext/target.tokens") + " --alignments " + w.path("bitext/alignments.txt") +
                " --auto --dev " + w.path("bitext/target-gold.conll") +
                " --epochs 2 --order 1 --grid-out " + w.path("grid.tsv") + " > " + w.path("best.tsv")) == 0);
    auto grid = slurp(w.path("grid.tsv"));
    // header + 15 points + best line
    REQUIRE(std::count(grid.begin(), grid.end(), '\n') == 17);
    auto best = slurp(w.path("best.tsv"));
    REQUIRE_THAT(best, Catch::Matchers::ContainsSubstring("q\t"));
    REQUIRE_THAT(best, Catch::Matchers::ContainsSubstring("n\t"));
}

TEST_CASE("learn-mapping and transfer run end to end") {
    auto& w = world();
    write_source_corpus(w.path("src2.conll"), 40, 17);
    std::ifstream src_in(w.path("src2.conll"));
    auto corpus = read_conll(src_in);
    auto table = synthdata::toy_embeddings(corpus, 8, 19);
    {
        std::ofstream out(w.path("src.emb"));
        table.save(out);
    }
    SyntheticLanguageSpec spec;
    auto target_table = synthdata::transformed_embeddings(table, spec);
    {
        std::ofstream out(w.path("tgt.emb"));
        target_table.save(out);
    }
    {
        std::ofstream out(w.path("pairs.tsv"));
        for (const auto& word : table.words()) out << word << '\t' << transform_word(word, spec) << "\t5\n";
    }
    REQUIRE(run("learn-mapping --pairs " + w.path("pairs.tsv") + " --source-emb " + w.path("src.emb") +
                " --target-emb " + w.path("tgt.emb") + " --ridge 1e-8 --out " + w.path("map.txt")) == 0);
    {
        std::ifstream map_in(w.path("map.txt"));
        auto m = MappingMatrix::load(map_in);
        REQUIRE(m.rows == 8);
        REQUIRE(m.cols == 8);
    }

    REQUIRE(run("train-source --train " + w.path("src2.conll") + " --kind nn1 --embeddings " +
                w.path("src.emb") + " --epochs 30 --lr 0.3 --hidden 20 --seed 5 --model-out " +
                w.path("nn.model")) == 0);
    // identity language: transfer output must equal source decode, token for token
    {
        std::vector<std::vector<std::string>> target_sentences;
        for (const auto& s : corpus) {
            std::vector<std::string> t;
            for (const auto& tok : s.tokens) t.push_back(transform_word(tok, spec));
            target_sentences.push_back(std::move(t));
        }
        std::ofstream out(w.path("target2.tokens"));
        write_token_lines(out, target_sentences);
    }
    REQUIRE(run("transfer --model " + w.path("nn.model") + " --mapping " + w.path("map.txt") +
                " --source-emb " + w.path("src.emb") + " --target-emb " + w.path("tgt.emb") + " --input " +
                w.path("target2.tokens") + " --format tokens --output " + w.path("transfer.conll") +
                " --conf-out " + w.path("transfer.conf")) == 0);
    REQUIRE(run("decode --model " + w.path("nn.model") + " --embeddings " + w.path("src.emb") +
                " --input " + w.path("src2.conll") + " --output " + w.path("source-decode.conll")) == 0);
    std::ifstream t_in(w.path("transfer.conll")), s_in(w.path("source-decode.conll"));
    auto t_out = read_conll(t_in);
    auto s_out = read_conll(s_in);
    REQUIRE(t_out.size() == s_out.size());
    for (std::size_t i = 0; i < t_out.size(); ++i) REQUIRE(t_out[i].tags == s_out[i].tags);
}

TEST_CASE("codecode reproduces the worked rank example") {
    auto& w = world();
    {
        std::ofstream a(w.path("ap.conll"));
        write_conll(a, {{{"w0", "w1", "w2", "w3", "w4"}, {"B-PER", "O", "O", "O", "O"}}});
        std::ofstream b(w.path("rp.conll"));
        write_conll(b, {{{"w0", "w1", "w2", "w3", "w4"}, {"B-ORG", "I-ORG", "O", "B-LOC", "I-LOC"}}});
    }
    REQUIRE(run("codecode --a " + w.path("ap.conll") + " --b " + w.path("rp.conll") +
                " --scheme rank --output " + w.path("combined.conll")) == 0);
    std::ifstream in(w.path("combined.conll"));
    auto combined = read_conll(in);
    REQUIRE(combined[0].tags == std::vector<std::string>{"B-PER", "O", "O", "B-LOC", "I-LOC"});
    // confidence scheme needs sidecars
    REQUIRE(run("codecode --a " + w.path("ap.conll") + " --b " + w.path("rp.conll") +
                " --scheme confidence --output -") == 1);
}

TEST_CASE("evaluate and significance emit stable reports") {
    auto& w = world();
    write_source_corpus(w.path("gold.conll"), 30, 23);
    REQUIRE(run("evaluate --gold " + w.path("gold.conll") + " --pred " + w.path("gold.conll") +
                " --kv-out " + w.path("eval.kv") + " > " + w.path("eval.txt")) == 0);
    auto kv = slurp(w.path("eval.kv"));
    REQUIRE_THAT(kv, Catch::Matchers::ContainsSubstring("f1\t1.000000"));
    REQUIRE_THAT(slurp(w.path("eval.txt")), Catch::Matchers::ContainsSubstring("OVERALL"));

    REQUIRE(run("significance --gold " + w.path("gold.conll") + " --a " + w.path("gold.conll") + " --b " +
                w.path("gold.conll") + " --iterations 2000 --seed 5 > " + w.path("sig.kv")) == 0);
    auto sig = slurp(w.path("sig.kv"));
    REQUIRE_THAT(sig, Catch::Matchers::ContainsSubstring("p_value\t1"));
    REQUIRE_THAT(sig, Catch::Matchers::ContainsSubstring("verdict\tnot-significant"));
}

TEST_CASE("config file values apply and flags win") {
    auto& w = world();
    {
        std::ofstream cfg(w.path("run.conf"));
        cfg << "[evaluate]\n";
        cfg << "gold = \"" << w.path("gold.conll") << "\"\n";
        cfg << "pred = \"" << w.path("gold.conll") << "\"\n";
    }
    REQUIRE(run("--config " + w.path("run.conf") + " evaluate > " + w.path("eval2.txt")) == 0);
    REQUIRE_THAT(slurp(w.path("eval2.txt")), Catch::Matchers::ContainsSubstring("OVERALL"));
    // a flag overrides the config value: point --pred at a mismatched corpus
    write_source_corpus(w.path("other.conll"), 10, 29);
    REQUIRE(run("--config " + w.path("run.conf") + " evaluate --pred " + w.path("other.conll")) == 2);
}
