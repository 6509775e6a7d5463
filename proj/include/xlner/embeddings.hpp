// Monolingual word embeddings: the lookup table with word2vec text I/O and
// a CBOW variant that concatenates the context slots and weights them by
// 1/distance, trained with negative sampling.
#pragma once

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <unordered_map>
#include <vector>

#include "xlner/corpus.hpp"
#include "xlner/numeric.hpp"
#include "xlner/serialize.hpp"

namespace xlner {

/// Word → vector table. Lookup policy: exact case first, then the lowercased
/// form (LowercaseFallback), then nothing. The UNK vector is owned by the
/// consumer models, not the table.
class EmbeddingTable {
public:
    enum class CasePolicy { Exact, LowercaseFallback };

    EmbeddingTable() = default;
    explicit EmbeddingTable(int dimension, CasePolicy policy = CasePolicy::LowercaseFallback)
        : dimension_(dimension), policy_(policy) {}

    int dimension() const { return dimension_; }
    std::size_t size() const { return words_.size(); }
    const std::vector<std::string>& words() const { return words_; }
    CasePolicy policy() const { return policy_; }
    void set_policy(CasePolicy p) { policy_ = p; }

    void add(const std::string& word, std::vector<double> vec) {
        if (static_cast<int>(vec.size()) != dimension_)
            throw std::invalid_argument("EmbeddingTable: vector for '" + word + "' has dimension " +
                                        detail::itos(vec.size()) + ", expected " + detail::itos(dimension_));
        auto [it, inserted] = index_.emplace(word, words_.size());
        if (!inserted) {
            vectors_[it->second] = std::move(vec);
            return;
        }
        words_.push_back(word);
        vectors_.push_back(std::move(vec));
    }

    /// Exact-case lookup only.
    const std::vector<double>* find_exact(const std::string& word) const {
        auto it = index_.find(word);
        return it == index_.end() ? nullptr : &vectors_[it->second];
    }

    /// Policy-aware lookup; nullptr when the word is out of vocabulary.
    const std::vector<double>* find(const std::string& word) const {
        if (const auto* v = find_exact(word)) return v;
        if (policy_ == CasePolicy::LowercaseFallback) {
            std::string lower = word;
            std::transform(lower.begin(), lower.end(), lower.begin(),
                           [](unsigned char c) { return std::tolower(c); });
            if (lower != word) return find_exact(lower);
        }
        return nullptr;
    }

    const std::vector<double>& at(std::size_t i) const { return vectors_[i]; }
    std::vector<double>& at(std::size_t i) { return vectors_[i]; }

    /// word2vec text format: "count dim" header, then "word v1 ... vd" lines.
    void save(std::ostream& out) const {
        out << words_.size() << ' ' << dimension_ << '\n';
        char buf[32];
        for (std::size_t i = 0; i < words_.size(); ++i) {
            out << words_[i];
            for (double v : vectors_[i]) {
                std::snprintf(buf, sizeof(buf), "%.17g", v);
                out << ' ' << buf;
            }
            out << '\n';
        }
    }

    static EmbeddingTable load(std::istream& in, CasePolicy policy = CasePolicy::LowercaseFallback) {
        std::string line;
        if (!detail::getline_any(in, line)) throw ParseError("embedding file is empty");
        auto header = detail::split_ws(line);
        if (header.size() != 2) throw ParseError("embedding header must be 'count dim'");
        std::size_t count = std::stoul(header[0]);
        EmbeddingTable table(std::stoi(header[1]), policy);
        for (std::size_t i = 0; i < count; ++i) {
            if (!detail::getline_any(in, line))
                throw ParseError("embedding file truncated at entry " + detail::itos(i));
            auto fields = detail::split_ws(line);
            if (fields.size() != static_cast<std::size_t>(table.dimension()) + 1)
                throw ParseError("embedding line " + detail::itos(i + 2) + " has " +
                                 detail::itos(fields.size() - 1) + " values, expected " +
                                 detail::itos(table.dimension()));
            std::vector<double> vec(table.dimension());
            for (int d = 0; d < table.dimension(); ++d) vec[d] = detail::parse_double(fields[d + 1]);
            table.add(fields[0], std::move(vec));
        }
        return table;
    }

private:
    int dimension_ = 0;
    CasePolicy policy_ = CasePolicy::LowercaseFallback;
    std::vector<std::string> words_;
    std::vector<std::vector<double>> vectors_;
    std::unordered_map<std::string, std::size_t> index_;
};

// ---------------------------------------------------------------------------
// CBOW variant trainer

struct CbowConfig {
    int dimension = 50;
    int window_radius = 2;
    int epochs = 5;
    int negative_samples = 5;
    double learning_rate = 0.025;
    bool distance_decay = true;   // context weight w = 1/dist(x, x_c)
    bool concatenate = true;      // concatenate context slots instead of averaging
    std::uint64_t seed = 1;
    int min_count = 5;

    void check() const {
        if (dimension < 1 || window_radius < 1 || epochs < 1 || negative_samples < 1 ||
            learning_rate <= 0 || min_count < 1)
            throw std::invalid_argument("CbowConfig: all fields must be positive");
    }
};

/// Context weight at the given distance (>= 1).
inline double cbow_context_weight(const CbowConfig& cfg, int dist) {
    return cfg.distance_decay ? 1.0 / dist : 1.0;
}

namespace detail {

struct CbowVocab {
    std::vector<std::string> words;  // by count desc, then first occurrence
    std::vector<long> counts;
    std::unordered_map<std::string, int> index;
};

inline CbowVocab cbow_vocab(const std::vector<std::vector<std::string>>& corpus, int min_count) {
    std::unordered_map<std::string, long> counts;
    std::vector<std::string> order;
    for (const auto& sent : corpus)
        for (const auto& w : sent) {
            auto [it, inserted] = counts.emplace(w, 0);
            if (inserted) order.push_back(w);
            ++it->second;
        }
    std::stable_sort(order.begin(), order.end(),
                     [&](const std::string& a, const std::string& b) { return counts[a] > counts[b]; });
    CbowVocab v;
    for (const auto& w : order) {
        if (counts[w] < min_count) continue;
        v.index.emplace(w, static_cast<int>(v.words.size()));
        v.words.push_back(w);
        v.counts.push_back(counts[w]);
    }
    return v;
}

inline std::vector<int> unigram_table(const CbowVocab& vocab, std::size_t table_size = 1 << 20) {
    std::vector<int> table;
    table.reserve(table_size);
    double total = 0.0;
    for (long c : vocab.counts) total += std::pow(static_cast<double>(c), 0.75);
    std::size_t i = 0;
    double cum = std::pow(static_cast<double>(vocab.counts[0]), 0.75) / total;
    for (std::size_t k = 0; k < table_size; ++k) {
        table.push_back(static_cast<int>(i));
        if (static_cast<double>(k + 1) / table_size > cum && i + 1 < vocab.words.size()) {
            ++i;
            cum += std::pow(static_cast<double>(vocab.counts[i]), 0.75) / total;
        }
    }
    return table;
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace detail

/// Trains the CBOW variant on a tokenized corpus. The input representation
/// of one prediction is the concatenation of the 2·radius context slots,
/// each slot holding its context word's input vector scaled by 1/dist
/// (missing slots at sentence edges stay zero). With concatenate=false the
/// slots collapse into a weighted mean, as in standard CBOW.
/// Single-threaded; deterministic for a fixed seed.
inline EmbeddingTable train_cbow_variant(const std::vector<std::vector<std::string>>& corpus,
                                         const CbowConfig& cfg) {
    cfg.check();
    auto vocab = detail::cbow_vocab(corpus, cfg.min_count);
    if (vocab.words.empty())
        throw std::invalid_argument("train_cbow_variant: vocabulary is empty after the min-count cut");
    const int d = cfg.dimension;
    const int R = cfg.window_radius;
    const int slots = 2 * R;
    const int hidden = cfg.concatenate ? slots * d : d;
    const int V = static_cast<int>(vocab.words.size());

    auto rng = make_rng(cfg.seed);
    std::uniform_real_distribution<double> init(-0.5 / d, 0.5 / d);
    std::vector<double> syn0(static_cast<std::size_t>(V) * d);
    for (auto& x : syn0) x = init(rng);
    std::vector<double> syn1(static_cast<std::size_t>(V) * hidden, 0.0);
    auto table = detail::unigram_table(vocab);
    std::uniform_int_distribution<std::size_t> draw(0, table.size() - 1);

    long long total_tokens = 0;
    for (const auto& s : corpus) total_tokens += static_cast<long long>(s.size());
    const long long planned = std::max<long long>(1, total_tokens * cfg.epochs);
    long long seen = 0;

    std::vector<double> h(hidden), err(hidden);
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (const auto& sent : corpus) {
            std::vector<int> ids;
            ids.reserve(sent.size());
            for (const auto& w : sent) {
                auto it = vocab.index.find(w);
                ids.push_back(it == vocab.index.end() ? -1 : it->second);
            }
            for (int t = 0; t < static_cast<int>(ids.size()); ++t) {
                ++seen;
                if (ids[t] < 0) continue;
                const double lr =
                    cfg.learning_rate * std::max(1e-4, 1.0 - static_cast<double>(seen) / planned);
                std::fill(h.begin(), h.end(), 0.0);
                double weight_sum = 0.0;
                bool any = false;
                for (int off = -R; off <= R; ++off) {
                    if (off == 0) continue;
                    int p = t + off;
                    if (p < 0 || p >= static_cast<int>(ids.size()) || ids[p] < 0) continue;
                    any = true;
                    const double w = cbow_context_weight(cfg, std::abs(off));
                    weight_sum += w;
                    const double* v = syn0.data() + static_cast<std::size_t>(ids[p]) * d;
                    const int slot = off < 0 ? off + R : off + R - 1;
                    double* dst = cfg.concatenate ? h.data() + static_cast<std::size_t>(slot) * d : h.data();
                    for (int k = 0; k < d; ++k) dst[k] += w * v[k];
                }
                if (!any) continue;
                if (!cfg.concatenate)
                    for (double& x : h) x /= weight_sum;
                std::fill(err.begin(), err.end(), 0.0);
                for (int neg = 0; neg <= cfg.negative_samples; ++neg) {
                    int target;
                    double label;
                    if (neg == 0) {
                        target = ids[t];
                        label = 1.0;
                    } else {
                        target = table[draw(rng)];
                        if (target == ids[t]) continue;
                        label = 0.0;
                    }
                    double* w1 = syn1.data() + static_cast<std::size_t>(target) * hidden;
                    double f = detail::sigmoid(dot({h.data(), h.size()}, {w1, h.size()}));
                    double g = (label - f) * lr;
                    for (int k = 0; k < hidden; ++k) {
                        err[k] += g * w1[k];
                        w1[k] += g * h[k];
                    }
                }
                for (int off = -R; off <= R; ++off) {
                    if (off == 0) continue;
                    int p = t + off;
                    if (p < 0 || p >= static_cast<int>(ids.size()) || ids[p] < 0) continue;
                    const double w = cbow_context_weight(cfg, std::abs(off));
                    double* v = syn0.data() + static_cast<std::size_t>(ids[p]) * d;
                    const int slot = off < 0 ? off + R : off + R - 1;
                    const double* src =
                        cfg.concatenate ? err.data() + static_cast<std::size_t>(slot) * d : err.data();
                    const double scale = cfg.concatenate ? w : w / weight_sum;
                    for (int k = 0; k < d; ++k) v[k] += scale * src[k];
                }
            }
        }
    }

    EmbeddingTable out(d);
    for (int i = 0; i < V; ++i)
        out.add(vocab.words[i],
                std::vector<double>(syn0.begin() + static_cast<std::size_t>(i) * d,
                                    syn0.begin() + static_cast<std::size_t>(i + 1) * d));
    return out;
}

/// Cosine similarity with a zero-norm guard.
inline double cosine(std::span<const double> a, std::span<const double> b) {
    double na = std::sqrt(squared_norm(a)), nb = std::sqrt(squared_norm(b));
    return dot(a, b) / (std::max(na, 1e-12) * std::max(nb, 1e-12));
}

}  // namespace xlner
