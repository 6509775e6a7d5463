// Command-line front end wiring the library into the two pipelines plus
// co-decoding, evaluation and the synthetic-bitext generator.
//
// Exit codes: 0 success, 1 validation/usage error, 2 runtime error.
// Logs go to stderr; data goes to files or stdout.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "xlner/codecoding.hpp"
#include "xlner/corpus.hpp"
#include "xlner/crf.hpp"
#include "xlner/embeddings.hpp"
#include "xlner/evaluation.hpp"
#include "xlner/mapping.hpp"
#include "xlner/memm.hpp"
#include "xlner/neural.hpp"
#include "xlner/projection.hpp"
#include "xlner/synthetic.hpp"

namespace fs = std::filesystem;
using namespace xlner;

namespace {

struct ValidationError : std::runtime_error {
    explicit ValidationError(const std::vector<std::string>& problems)
        : std::runtime_error(join(problems)) {}
    static std::string join(const std::vector<std::string>& problems) {
        std::string s = "configuration invalid:";
        for (const auto& p : problems) s += "\n  - " + p;
        return s;
    }
};

/// Collects every problem before any side effect happens.
class Validator {
public:
    void require_file(const std::string& path, const std::string& what) {
        if (path.empty())
            problems_.push_back(what + " is required");
        else if (!fs::exists(path))
            problems_.push_back(what + " '" + path + "' does not exist");
    }
    void require(bool ok, const std::string& message) {
        if (!ok) problems_.push_back(message);
    }
    void finish() const {
        if (!problems_.empty()) throw ValidationError(problems_);
    }

private:
    std::vector<std::string> problems_;
};

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "' for reading");
    return in;
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    return out;
}

std::vector<LabeledSentence> load_conll(const std::string& path, int tag_column = -1) {
    auto in = open_input(path);
    return read_conll(in, tag_column);
}

std::vector<std::vector<std::string>> load_tokens(const std::string& path) {
    auto in = open_input(path);
    return read_token_lines(in);
}

/// Tokens of a prediction input: CoNLL (tags present, ignored) or plain
/// token lines, decided by format flag.
std::vector<std::vector<std::string>> load_decode_input(const std::string& path, const std::string& format) {
    if (format == "conll") {
        std::vector<std::vector<std::string>> out;
        for (auto& s : load_conll(path)) out.push_back(std::move(s.tokens));
        return out;
    }
    return load_tokens(path);
}

std::string peek_model_kind(const std::string& path) {
    auto in = open_input(path);
    std::string line;
    detail::getline_any(in, line);  // xlner-model 1
    if (!detail::getline_any(in, line) || line.rfind("kind ", 0) != 0)
        throw std::runtime_error("'" + path + "' is not an xlner model file");
    return line.substr(5);
}

std::optional<TagSet> parse_types(const std::string& csv) {
    if (csv.empty()) return std::nullopt;
    std::vector<std::string> types;
    std::stringstream ss(csv);
    std::string t;
    while (std::getline(ss, t, ','))
        if (!t.empty()) types.push_back(t);
    return TagSet(types);
}

void write_tagged(const std::string& out_path, const std::string& conf_path,
                  const std::vector<ConfidenceTaggedSentence>& tagged) {
    std::vector<LabeledSentence> plain;
    plain.reserve(tagged.size());
    for (const auto& s : tagged) plain.push_back(s.labeled());
    if (out_path == "-") {
        write_conll(std::cout, plain);
    } else {
        auto out = open_output(out_path);
        write_conll(out, plain);
    }
    if (!conf_path.empty()) {
        auto out = open_output(conf_path);
        write_confidence_sidecar(out, tagged);
    }
}

std::vector<ConfidenceTaggedSentence> load_tagged(const std::string& conll_path, const std::string& conf_path) {
    auto sentences = load_conll(conll_path);
    std::vector<std::vector<double>> confs;
    if (!conf_path.empty()) {
        auto in = open_input(conf_path);
        confs = read_confidence_sidecar(in);
        if (confs.size() != sentences.size())
            throw std::runtime_error("confidence sidecar '" + conf_path + "' covers " +
                                     std::to_string(confs.size()) + " sentences, corpus has " +
                                     std::to_string(sentences.size()));
    }
    std::vector<ConfidenceTaggedSentence> out;
    for (std::size_t i = 0; i < sentences.size(); ++i) {
        ConfidenceTaggedSentence s;
        s.tokens = std::move(sentences[i].tokens);
        s.tags = std::move(sentences[i].tags);
        if (!confs.empty()) {
            if (confs[i].size() != s.tokens.size())
                throw std::runtime_error("confidence sidecar length mismatch at sentence " + std::to_string(i));
            s.confidences = std::move(confs[i]);
        } else {
            s.confidences.assign(s.tokens.size(), 1.0);
        }
        out.push_back(std::move(s));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Shared option blocks

struct LinearHyper {
    int epochs = 15;
    double lr = 0.2;
    double decay = 0.01;
    double l2 = 1e-3;
    int batch = 8;
    std::uint64_t seed = 1;
    double tolerance = 1e-6;
    int workers = 1;
    int window = 2;
    int affix = 4;
    bool shapes = true;

    void add_to(CLI::App* cmd) {
        cmd->add_option("--epochs", epochs, "training epochs");
        cmd->add_option("--lr", lr, "initial learning rate");
        cmd->add_option("--decay", decay, "inverse-time learning-rate decay");
        cmd->add_option("--l2", l2, "L2 regularization strength");
        cmd->add_option("--batch", batch, "mini-batch size");
        cmd->add_option("--seed", seed, "RNG seed");
        cmd->add_option("--tolerance", tolerance, "objective convergence tolerance");
        cmd->add_option("--workers", workers, "gradient workers");
        cmd->add_option("--window", window, "word feature window radius");
        cmd->add_option("--affix", affix, "max affix length");
        cmd->add_option("--shapes", shapes, "emit word shape features");
    }
    TrainConfig train_config() const { return {epochs, lr, decay, l2, batch, seed, tolerance, workers}; }
    FeatureTemplateConfig templates(int order) const { return {window, affix, shapes, order}; }
};

// ---------------------------------------------------------------------------
// train-source

struct TrainSourceOpts {
    std::string train, model_out, kind = "crf", types, embeddings;
    int tag_column = -1;
    LinearHyper hyper;
    int order = 2;
    int beam = 5;
    bool constrain = true;
    int hidden = 100, tag_history = 1, tag_emb_dim = 20, prototypes = 40;
    double temperature = 1.0, init_scale = 1.0;
};

int cmd_train_source(const TrainSourceOpts& o) {
    Validator v;
    v.require_file(o.train, "--train corpus");
    v.require(!o.model_out.empty(), "--model-out is required");
    v.require(o.kind == "crf" || o.kind == "memm" || o.kind == "nn1" || o.kind == "nn2",
              "--kind must be one of crf|memm|nn1|nn2");
    if (o.kind == "nn1" || o.kind == "nn2") v.require_file(o.embeddings, "--embeddings (needed for nn kinds)");
    v.finish();

    auto corpus = load_conll(o.train, o.tag_column);
    if (corpus.empty()) throw std::runtime_error("training corpus '" + o.train + "' is empty");
    auto tags = parse_types(o.types);
    std::cerr << "[train-source] " << corpus.size() << " sentences, kind=" << o.kind << "\n";
    TrainReport report;
    auto out = open_output(o.model_out);
    if (o.kind == "crf") {
        auto model = crf_train(corpus, o.hyper.train_config(), o.hyper.templates(1), tags, &report);
        model.save(out);
    } else if (o.kind == "memm") {
        auto model = memm_train(corpus, o.hyper.train_config(), o.order, o.hyper.templates(o.order), tags,
                                &report);
        model.beam_width = o.beam;
        model.constrain_decode = o.constrain;
        model.save(out);
    } else {
        auto emb_in = open_input(o.embeddings);
        auto table = EmbeddingTable::load(emb_in);
        NNTrainConfig cfg{o.hyper.epochs,  o.hyper.lr,   o.hyper.decay,     o.hyper.batch,
                          o.hyper.seed,    o.init_scale, o.hyper.tolerance, o.hyper.workers};
        auto model = nn_build(corpus, table, cfg, o.kind == "nn1" ? NNArch::NN1 : NNArch::NN2, tags,
                              o.hyper.window, o.hidden, o.tag_history, o.tag_emb_dim, o.prototypes,
                              o.temperature);
        model.constrain_decode = o.constrain;
        model = nn_train(corpus, table, cfg, model.arch, std::nullopt, &report, &model);
        model.save(out);
    }
    if (!report.epoch_objectives.empty())
        std::cerr << "[train-source] epochs=" << report.epoch_objectives.size()
                  << " final objective=" << report.epoch_objectives.back()
                  << (report.converged ? " (converged)" : "") << "\n";
    std::cerr << "[train-source] model written to " << o.model_out << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// decode

struct DecodeOpts {
    std::string model, input, output = "-", conf_out, format = "conll", embeddings;
    int beam = 0;
};

int cmd_decode(const DecodeOpts& o) {
    Validator v;
    v.require_file(o.model, "--model");
    v.require_file(o.input, "--input");
    v.require(o.format == "conll" || o.format == "tokens", "--format must be conll|tokens");
    std::string kind;
    if (fs::exists(o.model)) {
        kind = peek_model_kind(o.model);
        if (kind == "nn1" || kind == "nn2") v.require_file(o.embeddings, "--embeddings (needed for nn models)");
    }
    v.finish();

    auto inputs = load_decode_input(o.input, o.format);
    std::vector<ConfidenceTaggedSentence> tagged;
    auto model_in = open_input(o.model);
    if (kind == "crf") {
        auto model = LinearChainCRF::load(model_in);
        for (const auto& toks : inputs) tagged.push_back(crf_decode(model, toks));
    } else if (kind == "memm") {
        auto model = OrderOMEMM::load(model_in);
        for (const auto& toks : inputs) tagged.push_back(memm_decode(model, toks, o.beam));
    } else {
        auto model = NNModel::load(model_in);
        auto emb_in = open_input(o.embeddings);
        auto table = EmbeddingTable::load(emb_in);
        auto lookup = make_table_lookup(table, model);
        for (const auto& toks : inputs) tagged.push_back(nn_decode(model, toks, lookup, std::max(1, o.beam)));
    }
    write_tagged(o.output, o.conf_out, tagged);
    return 0;
}

// ---------------------------------------------------------------------------
// project-select-train / coordinate-search

struct ProjectOpts {
    std::string source, target, alignments, source_model;
    std::string model_out, selected_out, scores_out, freq_out, grid_out, dev;
    double q = 0.0;
    int n = 0;
    bool auto_thresholds = false;
    double dev_sample = 0.0;
    int order = 2;
    int beam = 5;
    LinearHyper hyper;
    std::string types;
};

struct ProjectedCorpus {
    std::vector<ProjectedSentence> sentences;
    FrequencyTable table;
    long source_tokens = 0;
};

ProjectedCorpus run_projection(const ProjectOpts& o) {
    auto source = load_conll(o.source);
    auto targets = load_tokens(o.target);
    auto align_in = open_input(o.alignments);
    auto alignments = read_alignments(align_in);
    if (source.size() != targets.size() || source.size() != alignments.size())
        throw std::runtime_error("bitext parts disagree: " + std::to_string(source.size()) + " source / " +
                                 std::to_string(targets.size()) + " target / " +
                                 std::to_string(alignments.size()) + " alignment sentences");

    if (!o.source_model.empty()) {
        auto model_in = open_input(o.source_model);
        std::string kind = peek_model_kind(o.source_model);
        if (kind != "crf") throw std::runtime_error("--source-model must be a crf model");
        auto model = LinearChainCRF::load(model_in);
        for (auto& s : source) s.tags = crf_decode(model, s.tokens).tags;
    }

    ProjectedCorpus out;
    for (std::size_t i = 0; i < source.size(); ++i) {
        AlignedSentencePair pair;
        pair.source_tokens = source[i].tokens;
        pair.source_tags = source[i].tags;
        pair.target_tokens = targets[i];
        pair.links = alignments[i];
        out.sentences.push_back(project_annotations(pair, pair.source_tags));
        out.source_tokens += static_cast<long>(source[i].tokens.size());
    }
    out.table = build_frequency_table(out.sentences);
    score_corpus(out.sentences, out.table);
    return out;
}

long token_count(const std::vector<LabeledSentence>& corpus) {
    long n = 0;
    for (const auto& s : corpus) n += static_cast<long>(s.tokens.size());
    return n;
}

/// Splits off a deterministic dev sample (labels = projected labels).
void split_dev_sample(std::vector<ProjectedSentence>& corpus, double fraction, std::uint64_t seed,
                      std::vector<LabeledSentence>& dev_out, std::vector<std::size_t>& train_index) {
    std::vector<std::size_t> order(corpus.size());
    std::iota(order.begin(), order.end(), 0);
    auto rng = make_rng(seed, 9999);
    std::shuffle(order.begin(), order.end(), rng);
    std::size_t n_dev = static_cast<std::size_t>(fraction * corpus.size());
    std::set<std::size_t> dev_set(order.begin(), order.begin() + n_dev);
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        if (dev_set.count(i)) dev_out.push_back(corpus[i].target);
        else train_index.push_back(i);
    }
}

int run_project_select(const ProjectOpts& o, bool train_final) {
    Validator v;
    v.require_file(o.source, "--source");
    v.require_file(o.target, "--target");
    v.require_file(o.alignments, "--alignments");
    if (!o.source_model.empty()) v.require_file(o.source_model, "--source-model");
    v.require(o.q >= 0.0 && o.q <= 1.0, "--q must lie in [0,1]");
    v.require(o.n >= 0, "--n must be >= 0");
    if (o.auto_thresholds)
        v.require(!o.dev.empty() || o.dev_sample > 0.0,
                  "--auto requires --dev <gold conll> or --dev-sample <fraction>");
    if (!o.dev.empty()) v.require_file(o.dev, "--dev");
    v.require(o.dev_sample >= 0.0 && o.dev_sample < 1.0, "--dev-sample must lie in [0,1)");
    if (train_final) v.require(!o.model_out.empty(), "--model-out is required");
    v.finish();

    auto projected = run_projection(o);
    std::cerr << "[project] " << projected.sentences.size() << " sentence pairs, "
              << projected.table.size() << " distinct entity surfaces\n";

    // dev set: human-annotated file, or a held-out sample of the projection
    std::vector<LabeledSentence> dev;
    std::vector<std::size_t> usable(projected.sentences.size());
    std::iota(usable.begin(), usable.end(), 0);
    if (!o.dev.empty()) {
        dev = load_conll(o.dev);
    } else if (o.dev_sample > 0.0) {
        usable.clear();
        split_dev_sample(projected.sentences, o.dev_sample, o.hyper.seed, dev, usable);
        std::cerr << "[project] held out " << dev.size() << " projection-labeled dev sentences\n";
    }
    std::vector<ProjectedSentence> pool;
    for (auto i : usable) pool.push_back(projected.sentences[i]);

    SelectionThresholds thresholds{o.q, o.n};
    if (o.auto_thresholds) {
        TrainerCallback trainer = [&](const std::vector<LabeledSentence>& selected) -> Tagger {
            auto model = memm_train(selected, o.hyper.train_config(), o.order, o.hyper.templates(o.order),
                                    parse_types(o.types));
            model.beam_width = o.beam;
            return [model](const std::vector<std::string>& toks) { return memm_decode(model, toks).tags; };
        };
        DevEvaluator evaluator = [](const Tagger& tagger, const std::vector<LabeledSentence>& devset) {
            std::vector<LabeledSentence> pred;
            for (const auto& s : devset) pred.push_back({s.tokens, tagger(s.tokens)});
            return phrasal_f1(devset, pred).overall.f1();
        };
        auto result = coordinate_search(pool, projected.table, dev, trainer, evaluator);
        thresholds = result.best;
        std::cerr << "[search] best q=" << thresholds.quality << " n=" << thresholds.min_entities << "\n";
        if (!o.grid_out.empty()) {
            auto out = open_output(o.grid_out);
            write_search_grid(out, result);
        } else {
            write_search_grid(std::cerr, result);
        }
    }

    auto selected_idx = select_indices(pool, projected.table, thresholds);
    std::vector<LabeledSentence> selected;
    for (auto i : selected_idx) selected.push_back(pool[i].target);
    std::vector<LabeledSentence> full;
    for (const auto& s : pool) full.push_back(s.target);
    std::cerr << "[select] thresholds (q=" << thresholds.quality << ", n=" << thresholds.min_entities
              << "): " << full.size() << " sentences / " << token_count(full) << " tokens before, "
              << selected.size() << " sentences / " << token_count(selected) << " tokens after\n";
    if (selected.empty())
        throw std::runtime_error("selection removed every sentence; lower --q or --n");

    if (!o.freq_out.empty()) {
        auto out = open_output(o.freq_out);
        projected.table.save(out);
    }
    if (!o.selected_out.empty()) {
        auto out = open_output(o.selected_out);
        write_conll(out, selected);
    }
    if (!o.scores_out.empty()) {
        auto out = open_output(o.scores_out);
        write_selection_scores(out, pool, projected.table, selected_idx);
    }
    if (!train_final) {
        std::cout << "q\t" << thresholds.quality << "\nn\t" << thresholds.min_entities << "\n";
        return 0;
    }

    TrainReport report;
    auto model = memm_train(selected, o.hyper.train_config(), o.order, o.hyper.templates(o.order),
                            parse_types(o.types), &report);
    model.beam_width = o.beam;
    auto out = open_output(o.model_out);
    model.save(out);
    std::cerr << "[train] memm order " << o.order << ", final objective "
              << (report.epoch_objectives.empty() ? 0.0 : report.epoch_objectives.back()) << ", model written to "
              << o.model_out << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// learn-mapping

struct MappingOpts {
    std::string pairs, source_emb, target_emb, out;
    long min_freq = 1;
    std::string mode = "freq";
    double ridge = -1.0;
};

int cmd_learn_mapping(const MappingOpts& o) {
    Validator v;
    v.require_file(o.pairs, "--pairs");
    v.require_file(o.source_emb, "--source-emb");
    v.require_file(o.target_emb, "--target-emb");
    v.require(!o.out.empty(), "--out is required");
    v.require(o.mode == "freq" || o.mode == "top1", "--mode must be freq|top1");
    v.require(o.min_freq >= 1, "--min-freq must be >= 1");
    v.finish();

    auto pairs_in = open_input(o.pairs);
    auto dict = extract_dictionary(pairs_in, o.min_freq,
                                   o.mode == "freq" ? DictionaryMode::FrequencyWeighted
                                                    : DictionaryMode::TopOneUniform);
    std::cerr << "[mapping] dictionary has " << dict.entries.size() << " unique word pairs\n";
    auto src_in = open_input(o.source_emb);
    auto source = EmbeddingTable::load(src_in);
    auto tgt_in = open_input(o.target_emb);
    auto target = EmbeddingTable::load(tgt_in);
    auto m = learn_mapping(dict, source, target, o.ridge);
    std::cerr << "[mapping] " << m.pairs_used << " pairs used, " << m.pairs_dropped
              << " dropped (missing embeddings), weighted MSE " << m.residual << "\n";
    auto out = open_output(o.out);
    m.save(out);
    return 0;
}

// ---------------------------------------------------------------------------
// transfer

struct TransferOpts {
    std::string model, mapping, source_emb, target_emb, input, output = "-", conf_out, format = "tokens";
    int beam = 1;
};

int cmd_transfer(const TransferOpts& o) {
    Validator v;
    v.require_file(o.model, "--model");
    v.require_file(o.mapping, "--mapping");
    v.require_file(o.source_emb, "--source-emb");
    v.require_file(o.target_emb, "--target-emb");
    v.require_file(o.input, "--input");
    v.require(o.format == "conll" || o.format == "tokens", "--format must be conll|tokens");
    if (fs::exists(o.model)) {
        std::string kind = peek_model_kind(o.model);
        v.require(kind == "nn1" || kind == "nn2", "--model must be a neural model (nn1|nn2)");
    }
    v.finish();

    auto model_in = open_input(o.model);
    auto model = NNModel::load(model_in);
    auto map_in = open_input(o.mapping);
    auto mapping = MappingMatrix::load(map_in);
    auto src_in = open_input(o.source_emb);
    auto source = EmbeddingTable::load(src_in);
    auto tgt_in = open_input(o.target_emb);
    auto target = EmbeddingTable::load(tgt_in);

    auto inputs = load_decode_input(o.input, o.format);
    std::vector<ConfidenceTaggedSentence> tagged;
    for (const auto& toks : inputs)
        tagged.push_back(transfer_decode(toks, mapping, target, source, model, o.beam));
    write_tagged(o.output, o.conf_out, tagged);
    return 0;
}

// ---------------------------------------------------------------------------
// codecode

struct CodecodeOpts {
    std::string a, b, a_conf, b_conf, scheme = "rank", output = "-", conf_out;
};

int cmd_codecode(const CodecodeOpts& o) {
    Validator v;
    v.require_file(o.a, "--a");
    v.require_file(o.b, "--b");
    v.require(o.scheme == "rank" || o.scheme == "confidence", "--scheme must be rank|confidence");
    if (o.scheme == "confidence") {
        v.require(!o.a_conf.empty(), "--a-conf is required for the confidence scheme");
        v.require(!o.b_conf.empty(), "--b-conf is required for the confidence scheme");
    }
    if (!o.a_conf.empty()) v.require_file(o.a_conf, "--a-conf");
    if (!o.b_conf.empty()) v.require_file(o.b_conf, "--b-conf");
    v.finish();

    auto a = load_tagged(o.a, o.a_conf);
    auto b = load_tagged(o.b, o.b_conf);
    if (a.size() != b.size())
        throw std::runtime_error("inputs have different sentence counts (" + std::to_string(a.size()) +
                                 " vs " + std::to_string(b.size()) + ")");
    std::vector<ConfidenceTaggedSentence> combined;
    for (std::size_t i = 0; i < a.size(); ++i)
        combined.push_back(o.scheme == "rank" ? codecode_rank(a[i], b[i])
                                              : codecode_confidence_exclude_o(a[i], b[i]));
    write_tagged(o.output, o.conf_out, combined);
    return 0;
}

// ---------------------------------------------------------------------------
// evaluate / significance

struct EvaluateOpts {
    std::string gold, pred, kv_out;
};

int cmd_evaluate(const EvaluateOpts& o) {
    Validator v;
    v.require_file(o.gold, "--gold");
    v.require_file(o.pred, "--pred");
    v.finish();
    auto report = phrasal_f1(load_conll(o.gold), load_conll(o.pred));
    write_report_text(std::cout, report);
    if (!o.kv_out.empty()) {
        auto out = open_output(o.kv_out);
        write_report_kv(out, report);
    }
    return 0;
}

struct SignificanceOpts {
    std::string gold, a, b;
    long iterations = 10000;
    std::uint64_t seed = 1;
    double alpha = 0.05;
};

int cmd_significance(const SignificanceOpts& o) {
    Validator v;
    v.require_file(o.gold, "--gold");
    v.require_file(o.a, "--a");
    v.require_file(o.b, "--b");
    v.require(o.iterations >= 1000, "--iterations must be >= 1000");
    v.finish();
    auto gold = load_conll(o.gold);
    auto a = load_conll(o.a);
    auto b = load_conll(o.b);
    double fa = phrasal_f1(gold, a).overall.f1();
    double fb = phrasal_f1(gold, b).overall.f1();
    double p = stratified_shuffling_test(a, b, gold, o.iterations, o.seed);
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", fa);
    std::cout << "f1_a\t" << buf << "\n";
    std::snprintf(buf, sizeof(buf), "%.6f", fb);
    std::cout << "f1_b\t" << buf << "\n";
    std::snprintf(buf, sizeof(buf), "%.6g", p);
    std::cout << "p_value\t" << buf << "\n";
    std::cout << "verdict\t" << (p < o.alpha ? "significant" : "not-significant") << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// synth-bitext

struct SynthOpts {
    std::string source, out_dir;
    std::string suffix = "_x";
    bool no_reverse = false;
    double align_noise = 0.0;
    double label_noise = 0.0;
    double sentence_fraction = 1.0;
    std::uint64_t seed = 1;
};

int cmd_synth_bitext(const SynthOpts& o) {
    Validator v;
    v.require_file(o.source, "--source");
    v.require(!o.out_dir.empty(), "--out-dir is required");
    v.require(o.align_noise >= 0 && o.align_noise <= 1, "--align-noise must lie in [0,1]");
    v.require(o.label_noise >= 0 && o.label_noise <= 1, "--label-noise must lie in [0,1]");
    v.require(o.sentence_fraction >= 0 && o.sentence_fraction <= 1,
              "--sentence-fraction must lie in [0,1]");
    v.finish();

    auto source = load_conll(o.source);
    SyntheticLanguageSpec spec;
    spec.reverse_chars = !o.no_reverse;
    spec.suffix = o.suffix;
    spec.alignment_noise = o.align_noise;
    spec.label_noise = o.label_noise;
    spec.noisy_sentence_fraction = o.sentence_fraction;
    spec.seed = o.seed;
    auto bitext = synth_bitext(source, spec);

    fs::create_directories(o.out_dir);
    auto path = [&](const char* name) { return (fs::path(o.out_dir) / name).string(); };
    {
        std::vector<LabeledSentence> noisy_source;
        for (const auto& p : bitext.pairs) noisy_source.push_back({p.source_tokens, p.source_tags});
        auto out = open_output(path("source.conll"));
        write_conll(out, noisy_source);
    }
    {
        std::vector<std::vector<std::string>> targets;
        for (const auto& p : bitext.pairs) targets.push_back(p.target_tokens);
        auto out = open_output(path("target.tokens"));
        write_token_lines(out, targets);
    }
    {
        std::vector<AlignmentLinks> links;
        for (const auto& p : bitext.pairs) links.push_back(p.links);
        auto out = open_output(path("alignments.txt"));
        write_alignments(out, links);
    }
    {
        auto out = open_output(path("target-gold.conll"));
        write_conll(out, bitext.target_gold);
    }
    std::cerr << "[synth] " << bitext.pairs.size() << " pairs, " << bitext.noisy_sentences
              << " noisy sentences, " << bitext.corrupted_links << " corrupted links, "
              << bitext.corrupted_entities << " corrupted entities → " << o.out_dir << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"weakly supervised cross-lingual NER toolkit"};
    app.require_subcommand(1);
    app.set_config("--config", "", "key = value configuration file (sections per subcommand)");
    app.get_config_formatter_base()->comment('#');

    TrainSourceOpts ts;
    auto* c_train = app.add_subcommand("train-source", "train a source-language tagger")->configurable();
    c_train->add_option("--train", ts.train, "labeled CoNLL training corpus");
    c_train->add_option("--model-out", ts.model_out, "output model path");
    c_train->add_option("--kind", ts.kind, "crf|memm|nn1|nn2");
    c_train->add_option("--types", ts.types, "comma-separated entity types (default: inferred)");
    c_train->add_option("--tag-column", ts.tag_column, "CoNLL tag column (default last)");
    c_train->add_option("--embeddings", ts.embeddings, "word2vec text embeddings (nn kinds)");
    c_train->add_option("--order", ts.order, "MEMM history order");
    c_train->add_option("--beam", ts.beam, "MEMM beam width");
    c_train->add_option("--constrain", ts.constrain, "mask IOB2-invalid transitions at decode");
    c_train->add_option("--hidden", ts.hidden, "NN hidden layer size");
    c_train->add_option("--tag-history", ts.tag_history, "NN previous tags fed as context");
    c_train->add_option("--tag-emb-dim", ts.tag_emb_dim, "NN tag embedding dimension");
    c_train->add_option("--prototypes", ts.prototypes, "NN2 prototype count");
    c_train->add_option("--temperature", ts.temperature, "NN2 smoothing temperature");
    c_train->add_option("--init-scale", ts.init_scale, "NN init scale multiplier");
    ts.hyper.add_to(c_train);

    DecodeOpts dc;
    auto* c_decode = app.add_subcommand("decode", "tag text with a trained model")->configurable();
    c_decode->add_option("--model", dc.model, "model file");
    c_decode->add_option("--input", dc.input, "input corpus");
    c_decode->add_option("--format", dc.format, "input format: conll|tokens");
    c_decode->add_option("--output", dc.output, "output CoNLL path ('-' for stdout)");
    c_decode->add_option("--conf-out", dc.conf_out, "confidence sidecar output");
    c_decode->add_option("--beam", dc.beam, "beam width override");
    c_decode->add_option("--embeddings", dc.embeddings, "embeddings (nn models)");

    ProjectOpts pr;
    auto add_project_opts = [&](CLI::App* cmd) {
        cmd->add_option("--source", pr.source, "source-side CoNLL (tags used unless --source-model)");
        cmd->add_option("--target", pr.target, "target-side token lines");
        cmd->add_option("--alignments", pr.alignments, "Pharaoh alignment file");
        cmd->add_option("--source-model", pr.source_model, "CRF used to tag the source side");
        cmd->add_option("--q", pr.q, "quality threshold");
        cmd->add_option("--n", pr.n, "minimum entity count");
        cmd->add_flag("--auto", pr.auto_thresholds, "pick (q, n) by coordinate search");
        cmd->add_option("--dev", pr.dev, "gold CoNLL dev set for the search");
        cmd->add_option("--dev-sample", pr.dev_sample, "held-out fraction of projected data as dev");
        cmd->add_option("--order", pr.order, "MEMM history order");
        cmd->add_option("--beam", pr.beam, "MEMM beam width");
        cmd->add_option("--types", pr.types, "comma-separated entity types");
        cmd->add_option("--selected-out", pr.selected_out, "selected corpus CoNLL output");
        cmd->add_option("--scores-out", pr.scores_out, "sidecar 'index q n' output");
        cmd->add_option("--freq-out", pr.freq_out, "frequency table export");
        cmd->add_option("--grid-out", pr.grid_out, "coordinate-search grid output");
        pr.hyper.add_to(cmd);
    };
    auto* c_project = app.add_subcommand("project-select-train",
                                         "project tags over bitext, select data, train a target MEMM")
                          ->configurable();
    add_project_opts(c_project);
    c_project->add_option("--model-out", pr.model_out, "output model path");
    auto* c_search = app.add_subcommand("coordinate-search",
                                        "run the (q, n) coordinate search and emit the grid")
                         ->configurable();
    add_project_opts(c_search);

    MappingOpts mp;
    auto* c_map = app.add_subcommand("learn-mapping", "fit the cross-lingual embedding mapping")->configurable();
    c_map->add_option("--pairs", mp.pairs, "word-pair count file: source<TAB>target<TAB>count");
    c_map->add_option("--source-emb", mp.source_emb, "source embeddings (word2vec text)");
    c_map->add_option("--target-emb", mp.target_emb, "target embeddings (word2vec text)");
    c_map->add_option("--min-freq", mp.min_freq, "minimum pair count");
    c_map->add_option("--mode", mp.mode, "freq|top1 dictionary weighting");
    c_map->add_option("--ridge", mp.ridge, "ridge term (default: auto, 0 = none)");
    c_map->add_option("--out", mp.out, "mapping matrix output");

    TransferOpts tr;
    auto* c_transfer = app.add_subcommand("transfer", "decode target text with the source model")->configurable();
    c_transfer->add_option("--model", tr.model, "source nn model");
    c_transfer->add_option("--mapping", tr.mapping, "mapping matrix file");
    c_transfer->add_option("--source-emb", tr.source_emb, "source embeddings");
    c_transfer->add_option("--target-emb", tr.target_emb, "target embeddings");
    c_transfer->add_option("--input", tr.input, "target-language input");
    c_transfer->add_option("--format", tr.format, "input format: tokens|conll");
    c_transfer->add_option("--output", tr.output, "output CoNLL ('-' for stdout)");
    c_transfer->add_option("--conf-out", tr.conf_out, "confidence sidecar output");
    c_transfer->add_option("--beam", tr.beam, "beam width");

    CodecodeOpts cd;
    auto* c_codecode = app.add_subcommand("codecode", "combine two tagged outputs")->configurable();
    c_codecode->add_option("--a", cd.a, "system A CoNLL (annotation projection by convention)");
    c_codecode->add_option("--b", cd.b, "system B CoNLL");
    c_codecode->add_option("--a-conf", cd.a_conf, "system A confidence sidecar");
    c_codecode->add_option("--b-conf", cd.b_conf, "system B confidence sidecar");
    c_codecode->add_option("--scheme", cd.scheme, "rank|confidence");
    c_codecode->add_option("--output", cd.output, "combined CoNLL ('-' for stdout)");
    c_codecode->add_option("--conf-out", cd.conf_out, "combined confidence sidecar");

    EvaluateOpts ev;
    auto* c_eval = app.add_subcommand("evaluate", "exact phrasal match P/R/F1")->configurable();
    c_eval->add_option("--gold", ev.gold, "gold CoNLL");
    c_eval->add_option("--pred", ev.pred, "predicted CoNLL");
    c_eval->add_option("--kv-out", ev.kv_out, "machine-readable key<TAB>value report");

    SignificanceOpts sg;
    auto* c_sig = app.add_subcommand("significance", "stratified shuffling test")->configurable();
    c_sig->add_option("--gold", sg.gold, "gold CoNLL");
    c_sig->add_option("--a", sg.a, "system A CoNLL");
    c_sig->add_option("--b", sg.b, "system B CoNLL");
    c_sig->add_option("--iterations", sg.iterations, "shuffling iterations");
    c_sig->add_option("--seed", sg.seed, "RNG seed");
    c_sig->add_option("--alpha", sg.alpha, "significance level");

    SynthOpts sy;
    auto* c_synth = app.add_subcommand("synth-bitext", "generate a synthetic-language bitext")->configurable();
    c_synth->add_option("--source", sy.source, "labeled source CoNLL");
    c_synth->add_option("--out-dir", sy.out_dir, "output directory");
    c_synth->add_option("--suffix", sy.suffix, "word transform suffix");
    c_synth->add_flag("--no-reverse", sy.no_reverse, "do not reverse word characters");
    c_synth->add_option("--align-noise", sy.align_noise, "per-token link corruption probability");
    c_synth->add_option("--label-noise", sy.label_noise, "per-entity tag corruption probability");
    c_synth->add_option("--sentence-fraction", sy.sentence_fraction, "share of sentences with alignment noise");
    c_synth->add_option("--seed", sy.seed, "RNG seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return e.get_exit_code() == 0 ? app.exit(e) : (app.exit(e), 1);
    }

    try {
        if (*c_train) return cmd_train_source(ts);
        if (*c_decode) return cmd_decode(dc);
        if (*c_project) return run_project_select(pr, true);
        if (*c_search) return run_project_select(pr, false);
        if (*c_map) return cmd_learn_mapping(mp);
        if (*c_transfer) return cmd_transfer(tr);
        if (*c_codecode) return cmd_codecode(cd);
        if (*c_eval) return cmd_evaluate(ev);
        if (*c_sig) return cmd_significance(sg);
        if (*c_synth) return cmd_synth_bitext(sy);
    } catch (const ValidationError& e) {
        std::cerr << "xlner: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "xlner: error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
