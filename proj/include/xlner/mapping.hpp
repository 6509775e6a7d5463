// Cross-lingual representation projection: dictionary extraction from a
// word-pair count file, the frequency-weighted least-squares mapping between
// embedding spaces, and direct model transfer (decode a target-language
// sentence with the unmodified source-language tagger through the mapping).
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "xlner/embeddings.hpp"
#include "xlner/neural.hpp"

namespace xlner {

struct DictionaryEntry {
    std::string source_word;  // x: source-language word (the NER system's language)
    std::string target_word;  // y: target-language word
    double weight = 0.0;      // P̂(x|y) over retained entries
    long count = 0;
};

struct BilingualDictionary {
    std::vector<DictionaryEntry> entries;  // sorted by (target, source)
    long min_frequency = 1;
};

enum class DictionaryMode {
    FrequencyWeighted,  // all pairs above the cut, weights P̂(x|y)
    TopOneUniform,      // most frequent source word per target, weight 1
};

/// Reads "source_word<TAB>target_word<TAB>count" lines (duplicate pairs are
/// summed), drops pairs with count < min_freq, and renormalizes the weights
/// per target word over what survived.
inline BilingualDictionary extract_dictionary(std::istream& in, long min_freq,
                                              DictionaryMode mode = DictionaryMode::FrequencyWeighted) {
    std::map<std::pair<std::string, std::string>, long> counts;  // (target, source) -> count
    std::string line;
    long line_no = 0;
    while (detail::getline_any(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto cols = detail::split_ws(line);
        if (cols.size() != 3)
            throw ParseError("line " + detail::itos(line_no) +
                             ": expected 'source<TAB>target<TAB>count', found " +
                             detail::itos(cols.size()) + " fields");
        long c = 0;
        try {
            std::size_t pos = 0;
            c = std::stol(cols[2], &pos);
            if (pos != cols[2].size()) throw std::invalid_argument("");
        } catch (const std::exception&) {
            throw ParseError("line " + detail::itos(line_no) + ": malformed count '" + cols[2] + "'");
        }
        if (c <= 0) throw ParseError("line " + detail::itos(line_no) + ": count must be positive");
        counts[{cols[1], cols[0]}] += c;
    }

    BilingualDictionary dict;
    dict.min_frequency = min_freq;
    auto it = counts.begin();
    while (it != counts.end()) {
        const std::string& target = it->first.first;
        auto stop = it;
        long total = 0;
        long best_count = 0;
        auto best = it;
        while (stop != counts.end() && stop->first.first == target) {
            if (stop->second >= min_freq) {
                total += stop->second;
                if (stop->second > best_count) {
                    best_count = stop->second;
                    best = stop;
                }
            }
            ++stop;
        }
        if (total > 0) {
            if (mode == DictionaryMode::TopOneUniform) {
                dict.entries.push_back({best->first.second, target, 1.0, best->second});
            } else {
                for (auto e = it; e != stop; ++e)
                    if (e->second >= min_freq)
                        dict.entries.push_back({e->first.second, target,
                                                static_cast<double>(e->second) / total, e->second});
            }
        }
        it = stop;
    }
    return dict;
}

/// Linear map between embedding spaces, d1 × d2 row-major (source dim ×
/// target dim), with fit provenance.
struct MappingMatrix {
    std::size_t rows = 0;  // d1
    std::size_t cols = 0;  // d2
    std::vector<double> values;
    long pairs_used = 0;
    long pairs_dropped = 0;  // dictionary entries missing from an embedding table
    double residual = 0.0;   // weighted mean squared error of the fit

    double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }

    /// Text format: "d1 d2" header + one row per line.
    void save(std::ostream& out) const {
        out << rows << ' ' << cols << '\n';
        for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t c = 0; c < cols; ++c) {
                if (c) out << ' ';
                out << detail::hexdouble(at(r, c));
            }
            out << '\n';
        }
    }

    static MappingMatrix load(std::istream& in) {
        std::string line = detail::next_line(in, "mapping header");
        auto header = detail::split_ws(line);
        if (header.size() != 2) throw ParseError("mapping header must be 'd1 d2'");
        MappingMatrix m;
        m.rows = std::stoul(header[0]);
        m.cols = std::stoul(header[1]);
        m.values.reserve(m.rows * m.cols);
        for (std::size_t r = 0; r < m.rows; ++r) {
            auto fields = detail::split_ws(detail::next_line(in, "mapping row"));
            if (fields.size() != m.cols) throw ParseError("mapping row " + detail::itos(r) + " has wrong width");
            for (const auto& f : fields) m.values.push_back(detail::parse_double(f));
        }
        return m;
    }
};

/// Solves M = argmin_M Σ w_i ||u_i − M v_i||² in closed form via the normal
/// equations M = (Σ w u vᵀ)(Σ w v vᵀ + εI)⁻¹. ridge < 0 picks the default
/// ε = 1e-6 · trace/d2; ridge = 0 solves unregularized and fails on a
/// singular normal matrix. Dictionary words missing from either table are
/// dropped and counted.
inline MappingMatrix learn_mapping(const BilingualDictionary& dict, const EmbeddingTable& source,
                                   const EmbeddingTable& target, double ridge = -1.0) {
    const int d1 = source.dimension();
    const int d2 = target.dimension();
    Eigen::MatrixXd cross = Eigen::MatrixXd::Zero(d1, d2);  // Σ w u vᵀ
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(d2, d2);   // Σ w v vᵀ
    struct Pair {
        const std::vector<double>* u;
        const std::vector<double>* v;
        double w;
    };
    std::vector<Pair> pairs;
    long dropped = 0;
    for (const auto& e : dict.entries) {
        const auto* u = source.find(e.source_word);
        const auto* v = target.find(e.target_word);
        if (!u || !v) {
            ++dropped;
            continue;
        }
        pairs.push_back({u, v, e.weight});
    }
    if (pairs.empty())
        throw std::invalid_argument("learn_mapping: no dictionary pair is covered by both embedding tables");
    Eigen::VectorXd u(d1), v(d2);
    for (const auto& p : pairs) {
        for (int i = 0; i < d1; ++i) u(i) = (*p.u)[i];
        for (int j = 0; j < d2; ++j) v(j) = (*p.v)[j];
        cross.noalias() += p.w * u * v.transpose();
        gram.noalias() += p.w * v * v.transpose();
    }
    double eps = ridge;
    if (ridge < 0) eps = 1e-6 * gram.trace() / d2;
    if (eps > 0) gram.diagonal().array() += eps;

    Eigen::FullPivLU<Eigen::MatrixXd> lu(gram);
    if (!lu.isInvertible())
        throw std::runtime_error(
            "learn_mapping: normal matrix is singular; pass a positive ridge to regularize");
    Eigen::MatrixXd M = lu.solve(cross.transpose()).transpose();  // gram Mᵀ = crossᵀ

    MappingMatrix out;
    out.rows = d1;
    out.cols = d2;
    out.values.resize(static_cast<std::size_t>(d1) * d2);
    for (int r = 0; r < d1; ++r)
        for (int c = 0; c < d2; ++c) out.values[static_cast<std::size_t>(r) * d2 + c] = M(r, c);
    out.pairs_used = static_cast<long>(pairs.size());
    out.pairs_dropped = dropped;
    double num = 0.0, den = 0.0;
    for (const auto& p : pairs) {
        for (int j = 0; j < d2; ++j) v(j) = (*p.v)[j];
        Eigen::VectorXd proj = M * v;
        double err = 0.0;
        for (int i = 0; i < d1; ++i) err += ((*p.u)[i] - proj(i)) * ((*p.u)[i] - proj(i));
        num += p.w * err;
        den += p.w;
    }
    out.residual = num / den;
    return out;
}

/// M·v: project a target-space vector into the source space.
inline std::vector<double> project_embedding(const MappingMatrix& m, const std::vector<double>& v) {
    if (v.size() != m.cols)
        throw std::invalid_argument("project_embedding: vector has dimension " + detail::itos(v.size()) +
                                    ", expected " + detail::itos(m.cols));
    std::vector<double> out(m.rows, 0.0);
    for (std::size_t r = 0; r < m.rows; ++r) {
        const double* row = m.values.data() + r * m.cols;
        double s = 0.0;
        for (std::size_t c = 0; c < m.cols; ++c) s += row[c] * v[c];
        out[r] = s;
    }
    return out;
}

/// Embedding lookup for direct model transfer: target vocabulary → M·v;
/// else the source vocabulary directly; else the model's UNK vector.
inline EmbeddingLookup make_transfer_lookup(const MappingMatrix& m, const EmbeddingTable& target,
                                            const EmbeddingTable& source, const NNModel& model) {
    if (m.rows != static_cast<std::size_t>(source.dimension()) ||
        m.cols != static_cast<std::size_t>(target.dimension()))
        throw std::invalid_argument("make_transfer_lookup: mapping shape does not match the embedding tables");
    if (static_cast<int>(m.rows) != model.embedding_dim)
        throw std::invalid_argument("make_transfer_lookup: mapping rows do not match the model dimension");
    return [&m, &target, &source, &model](const std::string& word) -> TokenEmbedding {
        if (const auto* v = target.find(word)) return {project_embedding(m, *v), false};
        if (const auto* u = source.find(word)) return {*u, false};
        auto unk = model.unk();
        return {{unk.begin(), unk.end()}, true};
    };
}

/// Decode a target-language sentence with the source model; only the
/// per-token embeddings change, the model parameters are untouched.
inline ConfidenceTaggedSentence transfer_decode(const std::vector<std::string>& target_sentence,
                                                const MappingMatrix& m, const EmbeddingTable& target,
                                                const EmbeddingTable& source, const NNModel& model,
                                                int beam_width = 1) {
    return nn_decode(model, target_sentence, make_transfer_lookup(m, target, source, model), beam_width);
}

}  // namespace xlner
