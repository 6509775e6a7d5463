// Linear-chain CRF: log-space forward/backward, Viterbi decoding with
// posterior-marginal confidences, and maximum conditional likelihood
// training by mini-batch gradient ascent.
#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "xlner/corpus.hpp"
#include "xlner/features.hpp"
#include "xlner/numeric.hpp"
#include "xlner/optim.hpp"
#include "xlner/serialize.hpp"

namespace xlner {

namespace detail {

inline TagSet infer_tagset(const std::vector<LabeledSentence>& data) {
    std::set<std::string> types;
    for (const auto& s : data)
        for (const auto& t : s.tags)
            if (t != "O") types.insert(std::string(parse_iob_tag(t).second));
    return TagSet(std::vector<std::string>(types.begin(), types.end()));
}

}  // namespace detail

/// Weight layout: emission (feature k, label l) at k·L + l, then the L×L
/// transition block. Total length |alphabet|·L + L².
struct LinearChainCRF {
    TagSet tags;
    FeatureAlphabet alphabet;
    FeatureTemplateConfig templates;  // word features only; tag history unused
    std::vector<double> weights;
    double l2 = 1e-3;

    int num_labels() const { return tags.num_labels(); }
    std::size_t emission_size() const { return alphabet.size() * tags.num_labels(); }

    double transition(int prev, int next) const {
        return weights[emission_size() + static_cast<std::size_t>(prev) * num_labels() + next];
    }
    double& transition(int prev, int next) {
        return weights[emission_size() + static_cast<std::size_t>(prev) * num_labels() + next];
    }

    /// Per-label emission scores of one feature vector.
    std::vector<double> emission_scores(const FeatureVector& fv) const {
        std::vector<double> scores(num_labels(), 0.0);
        const int L = num_labels();
        for (auto [k, v] : fv)
            for (int l = 0; l < L; ++l) scores[l] += v * weights[static_cast<std::size_t>(k) * L + l];
        return scores;
    }

    std::vector<FeatureVector> sentence_features(const std::vector<std::string>& tokens) const {
        std::vector<FeatureVector> fvs(tokens.size());
        const FeatureAlphabet& frozen = alphabet;
        for (std::size_t i = 0; i < tokens.size(); ++i)
            fvs[i] = extract_word_features(tokens, static_cast<int>(i), templates, frozen);
        return fvs;
    }

    void save(std::ostream& out) const;
    static LinearChainCRF load(std::istream& in);
};

/// Forward/backward tables of one sentence, all in log space.
struct CRFLattice {
    std::vector<std::vector<double>> emit;       // [n][L] emission scores
    std::vector<std::vector<double>> log_alpha;  // [n][L]
    std::vector<std::vector<double>> log_beta;   // [n][L]
    double log_z = 0.0;

    /// Posterior P(l_i = l | x).
    double marginal(int i, int l) const {
        return std::exp(log_alpha[i][l] + log_beta[i][l] - log_z);
    }
};

/// Computes log Z and the forward/backward tables from precomputed
/// per-position feature vectors.
inline CRFLattice crf_lattice(const LinearChainCRF& model, const std::vector<FeatureVector>& fvs) {
    const int n = static_cast<int>(fvs.size());
    const int L = model.num_labels();
    CRFLattice lat;
    lat.emit.resize(n);
    lat.log_alpha.assign(n, std::vector<double>(L, kNegInf));
    lat.log_beta.assign(n, std::vector<double>(L, 0.0));
    for (int i = 0; i < n; ++i) lat.emit[i] = model.emission_scores(fvs[i]);
    if (n == 0) {
        lat.log_z = 0.0;
        return lat;
    }
    lat.log_alpha[0] = lat.emit[0];
    std::vector<double> terms(L);
    for (int i = 1; i < n; ++i) {
        for (int l = 0; l < L; ++l) {
            for (int a = 0; a < L; ++a) terms[a] = lat.log_alpha[i - 1][a] + model.transition(a, l);
            lat.log_alpha[i][l] = log_sum_exp(terms) + lat.emit[i][l];
        }
    }
    for (int i = n - 2; i >= 0; --i) {
        for (int a = 0; a < L; ++a) {
            for (int l = 0; l < L; ++l)
                terms[l] = model.transition(a, l) + lat.emit[i + 1][l] + lat.log_beta[i + 1][l];
            lat.log_beta[i][a] = log_sum_exp(terms);
        }
    }
    lat.log_z = log_sum_exp(lat.log_alpha[n - 1]);
    return lat;
}

/// log Z_λ(x) plus tables for a raw token sequence.
inline CRFLattice crf_log_partition(const LinearChainCRF& model, const std::vector<std::string>& tokens) {
    return crf_lattice(model, model.sentence_features(tokens));
}

/// Pairwise posterior P(l_{i-1} = a, l_i = b | x), i ≥ 1.
inline double crf_pair_marginal(const LinearChainCRF& model, const CRFLattice& lat, int i, int a, int b) {
    return std::exp(lat.log_alpha[i - 1][a] + model.transition(a, b) + lat.emit[i][b] +
                    lat.log_beta[i][b] - lat.log_z);
}

/// Unnormalized log score of a fixed label sequence.
inline double crf_sequence_score(const LinearChainCRF& model, const CRFLattice& lat,
                                 const std::vector<int>& labels) {
    double s = 0.0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        s += lat.emit[i][labels[i]];
        if (i > 0) s += model.transition(labels[i - 1], labels[i]);
    }
    return s;
}

/// Builds the untrained model (tag set, frozen alphabet, zero weights) from
/// the training data. Exposed separately so tests can perturb weights and
/// check gradients.
inline LinearChainCRF crf_build(const std::vector<LabeledSentence>& data,
                                const FeatureTemplateConfig& templates = {},
                                std::optional<TagSet> tags = std::nullopt, double l2 = 1e-3) {
    if (data.empty()) throw std::invalid_argument("crf_build: empty training data");
    templates.check();
    LinearChainCRF model;
    model.tags = tags ? std::move(*tags) : detail::infer_tagset(data);
    model.templates = templates;
    model.l2 = l2;
    for (const auto& s : data)
        for (std::size_t i = 0; i < s.tokens.size(); ++i)
            extract_word_features(s.tokens, static_cast<int>(i), templates, model.alphabet);
    model.alphabet.freeze();
    model.weights.assign(model.emission_size() + static_cast<std::size_t>(model.num_labels()) * model.num_labels(),
                         0.0);
    return model;
}

namespace detail {

struct CRFInstance {
    std::vector<FeatureVector> fvs;
    std::vector<int> gold;
};

inline std::vector<CRFInstance> crf_instances(const LinearChainCRF& model,
                                              const std::vector<LabeledSentence>& data) {
    std::vector<CRFInstance> out;
    out.reserve(data.size());
    for (const auto& s : data) {
        if (!is_iob2_valid(s.tags))
            throw std::invalid_argument("crf_train: sentence tags are not IOB2-valid");
        CRFInstance inst;
        inst.fvs = model.sentence_features(s.tokens);
        for (const auto& t : s.tags) inst.gold.push_back(model.tags.label_id(t));
        out.push_back(std::move(inst));
    }
    return out;
}

/// Adds ∇ log p(gold | x) of one sentence to grad.
inline double crf_sentence_gradient(const LinearChainCRF& model, const CRFInstance& inst,
                                    std::vector<double>* grad) {
    const int L = model.num_labels();
    const int n = static_cast<int>(inst.fvs.size());
    CRFLattice lat = crf_lattice(model, inst.fvs);
    if (grad) {
        auto& g = *grad;
        for (int i = 0; i < n; ++i) {
            for (auto [k, v] : inst.fvs[i]) {
                double* row = g.data() + static_cast<std::size_t>(k) * L;
                row[inst.gold[i]] += v;
                for (int l = 0; l < L; ++l) row[l] -= v * lat.marginal(i, l);
            }
            if (i > 0) {
                double* trans = g.data() + model.emission_size();
                trans[static_cast<std::size_t>(inst.gold[i - 1]) * L + inst.gold[i]] += 1.0;
                for (int a = 0; a < L; ++a)
                    for (int b = 0; b < L; ++b)
                        trans[static_cast<std::size_t>(a) * L + b] -= crf_pair_marginal(model, lat, i, a, b);
            }
        }
    }
    return crf_sequence_score(model, lat, inst.gold) - lat.log_z;
}

}  // namespace detail

/// Regularized conditional log-likelihood and its gradient over a data set:
/// Σ_j log p(l⁽ʲ⁾|x⁽ʲ⁾) − (l2/2)·||w||²; gradient = empirical counts −
/// expected counts − l2·w.
inline std::pair<double, std::vector<double>> crf_objective_and_gradient(
    const LinearChainCRF& model, const std::vector<LabeledSentence>& data) {
    auto instances = detail::crf_instances(model, data);
    std::vector<double> grad(model.weights.size(), 0.0);
    double obj = 0.0;
    for (const auto& inst : instances) obj += detail::crf_sentence_gradient(model, inst, &grad);
    obj -= 0.5 * model.l2 * squared_norm(model.weights);
    for (std::size_t j = 0; j < grad.size(); ++j) grad[j] -= model.l2 * model.weights[j];
    return {obj, std::move(grad)};
}

inline LinearChainCRF crf_train(const std::vector<LabeledSentence>& data, const TrainConfig& cfg,
                                const FeatureTemplateConfig& templates = {},
                                std::optional<TagSet> tags = std::nullopt, TrainReport* report = nullptr) {
    LinearChainCRF model = crf_build(data, templates, std::move(tags), cfg.l2);
    auto instances = detail::crf_instances(model, data);
    auto batch_grad = [&](std::size_t j, std::vector<double>& g) {
        detail::crf_sentence_gradient(model, instances[j], &g);
    };
    auto objective = [&]() {
        double obj = 0.0;
        for (const auto& inst : instances) obj += detail::crf_sentence_gradient(model, inst, nullptr);
        return obj - 0.5 * cfg.l2 * squared_norm(model.weights);
    };
    TrainReport r = minibatch_ascend(model.weights, instances.size(), cfg, batch_grad, objective, "crf_train");
    if (report) *report = std::move(r);
    return model;
}

/// Viterbi decoding; per-token confidence is the posterior marginal of the
/// chosen label. Ties break toward the lowest label id.
inline ConfidenceTaggedSentence crf_decode(const LinearChainCRF& model, const std::vector<std::string>& tokens) {
    ConfidenceTaggedSentence out;
    out.tokens = tokens;
    if (tokens.empty()) return out;
    const int n = static_cast<int>(tokens.size());
    const int L = model.num_labels();
    auto fvs = model.sentence_features(tokens);
    CRFLattice lat = crf_lattice(model, fvs);

    std::vector<std::vector<double>> best(n, std::vector<double>(L, kNegInf));
    std::vector<std::vector<int>> back(n, std::vector<int>(L, 0));
    best[0] = lat.emit[0];
    for (int i = 1; i < n; ++i) {
        for (int l = 0; l < L; ++l) {
            double b = kNegInf;
            int arg = 0;
            for (int a = 0; a < L; ++a) {
                double cand = best[i - 1][a] + model.transition(a, l);
                if (cand > b) {
                    b = cand;
                    arg = a;
                }
            }
            best[i][l] = b + lat.emit[i][l];
            back[i][l] = arg;
        }
    }
    int cur = 0;
    for (int l = 1; l < L; ++l)
        if (best[n - 1][l] > best[n - 1][cur]) cur = l;
    std::vector<int> path(n);
    for (int i = n - 1; i >= 0; --i) {
        path[i] = cur;
        cur = back[i][cur];
    }
    for (int i = 0; i < n; ++i) {
        out.tags.push_back(model.tags.label_name(path[i]));
        out.confidences.push_back(lat.marginal(i, path[i]));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Serialization

inline void LinearChainCRF::save(std::ostream& out) const {
    out << "xlner-model 1\nkind crf\n";
    out << "l2 " << detail::hexdouble(l2) << '\n';
    detail::write_tagset(out, tags);
    out << "template " << templates.window_radius << ' ' << templates.affix_max_length << ' '
        << (templates.word_shapes ? 1 : 0) << ' ' << templates.tag_history_order << '\n';
    out << "alphabet " << alphabet.size() << '\n';
    alphabet.save(out);
    detail::write_weights(out, weights);
    out << "end\n";
}

inline LinearChainCRF LinearChainCRF::load(std::istream& in) {
    detail::expect_fields(in, "xlner-model", 1);
    auto kind = detail::expect_fields(in, "kind", 1);
    if (kind[1] != "crf") throw ParseError("expected a crf model, found '" + kind[1] + "'");
    LinearChainCRF m;
    m.l2 = detail::parse_double(detail::expect_fields(in, "l2", 1)[1]);
    m.tags = detail::read_tagset(in);
    auto t = detail::expect_fields(in, "template", 4);
    m.templates = {std::stoi(t[1]), std::stoi(t[2]), t[3] == "1", std::stoi(t[4])};
    auto a = detail::expect_fields(in, "alphabet", 1);
    m.alphabet = FeatureAlphabet::load(in, std::stoul(a[1]));
    m.weights = detail::read_weights(in);
    if (m.weights.size() != m.emission_size() + static_cast<std::size_t>(m.num_labels()) * m.num_labels())
        throw ParseError("crf weight vector has wrong length");
    detail::expect_fields(in, "end", 0);
    return m;
}

}  // namespace xlner
