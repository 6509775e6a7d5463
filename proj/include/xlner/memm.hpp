// Order-o maximum entropy Markov model: per-token softmax conditioned on the
// observation and the previous o tags. Training decomposes into independent
// multinomial logistic regressions over gold tag histories; decoding is beam
// search over histories, exact when the beam holds every history state.
#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "xlner/corpus.hpp"
#include "xlner/crf.hpp"  // detail::infer_tagset
#include "xlner/features.hpp"
#include "xlner/numeric.hpp"
#include "xlner/optim.hpp"
#include "xlner/serialize.hpp"

namespace xlner {

/// Weight layout: (feature k, label l) at k·L + l. The tag history enters
/// through history features, so there is no separate transition block.
struct OrderOMEMM {
    TagSet tags;
    FeatureAlphabet alphabet;
    FeatureTemplateConfig templates;  // templates.tag_history_order == order
    std::vector<double> weights;
    double l2 = 1e-3;
    int beam_width = 5;
    bool constrain_decode = true;  // mask IOB2-invalid successors

    int order() const { return templates.tag_history_order; }
    int num_labels() const { return tags.num_labels(); }

    /// History id used for padding before the sentence start.
    int bos_id() const { return num_labels(); }

    const std::string& history_label(int id) const {
        return id == bos_id() ? kBosLabel : tags.label_name(id);
    }

    std::vector<double> label_scores(const FeatureVector& fv) const {
        const int L = num_labels();
        std::vector<double> scores(L, 0.0);
        for (auto [k, v] : fv)
            for (int l = 0; l < L; ++l) scores[l] += v * weights[static_cast<std::size_t>(k) * L + l];
        return scores;
    }

    /// p(l | history, x, i); masked=true renormalizes over IOB2-valid
    /// successors of the immediately previous label.
    std::vector<double> token_distribution(const FeatureVector& fv, int prev_label_id, bool masked) const {
        std::vector<double> scores = label_scores(fv);
        if (masked) {
            for (int l = 0; l < num_labels(); ++l)
                if (!allowed(prev_label_id, l)) scores[l] = kNegInf;
        }
        softmax_inplace(scores);
        return scores;
    }

    bool allowed(int prev_label_id, int label) const {
        if (prev_label_id == bos_id()) return tags.valid_start(label);
        return tags.valid_transition(prev_label_id, label);
    }

    void save(std::ostream& out) const;
    static OrderOMEMM load(std::istream& in);
};

namespace detail {

inline std::vector<std::string> history_names(const OrderOMEMM& model, const std::vector<int>& hist) {
    std::vector<std::string> names;
    names.reserve(hist.size());
    for (int id : hist) names.push_back(model.history_label(id));
    return names;
}

struct MEMMToken {
    FeatureVector fv;  // word + gold-history features
    int gold;
};

inline std::vector<std::string> gold_history(const LabeledSentence& s, int i, int order) {
    std::vector<std::string> hist;
    for (int k = i - order; k < i; ++k) hist.push_back(k < 0 ? kBosLabel : s.tags[k]);
    return hist;
}

/// Per-token training instances with teacher-forced histories.
inline std::vector<std::vector<MEMMToken>> memm_instances(const OrderOMEMM& model,
                                                          const std::vector<LabeledSentence>& data) {
    std::vector<std::vector<MEMMToken>> out;
    const FeatureAlphabet& frozen = model.alphabet;
    for (const auto& s : data) {
        if (!is_iob2_valid(s.tags))
            throw std::invalid_argument("memm_train: sentence tags are not IOB2-valid");
        std::vector<MEMMToken> toks;
        for (int i = 0; i < static_cast<int>(s.tokens.size()); ++i) {
            MEMMToken t;
            t.fv = extract_features(s.tokens, i, gold_history(s, i, model.order()), model.templates, frozen);
            t.gold = model.tags.label_id(s.tags[i]);
            toks.push_back(std::move(t));
        }
        out.push_back(std::move(toks));
    }
    return out;
}

/// Adds Σ_i ∇ log p(gold_i | hist_i, x) of one sentence to grad.
inline double memm_sentence_gradient(const OrderOMEMM& model, const std::vector<MEMMToken>& toks,
                                     std::vector<double>* grad) {
    const int L = model.num_labels();
    double ll = 0.0;
    for (const auto& tok : toks) {
        std::vector<double> p = model.label_scores(tok.fv);
        double z = log_sum_exp(p);
        ll += p[tok.gold] - z;
        if (grad) {
            for (int l = 0; l < L; ++l) p[l] = std::exp(p[l] - z);
            for (auto [k, v] : tok.fv) {
                double* row = grad->data() + static_cast<std::size_t>(k) * L;
                row[tok.gold] += v;
                for (int l = 0; l < L; ++l) row[l] -= v * p[l];
            }
        }
    }
    return ll;
}

}  // namespace detail

inline OrderOMEMM memm_build(const std::vector<LabeledSentence>& data, const FeatureTemplateConfig& templates,
                             std::optional<TagSet> tags = std::nullopt, double l2 = 1e-3) {
    if (data.empty()) throw std::invalid_argument("memm_build: empty training data");
    templates.check();
    OrderOMEMM model;
    model.tags = tags ? std::move(*tags) : detail::infer_tagset(data);
    model.templates = templates;
    model.l2 = l2;
    for (const auto& s : data)
        for (int i = 0; i < static_cast<int>(s.tokens.size()); ++i)
            extract_features(s.tokens, i, detail::gold_history(s, i, model.order()), templates,
                             model.alphabet);
    model.alphabet.freeze();
    model.weights.assign(model.alphabet.size() * static_cast<std::size_t>(model.num_labels()), 0.0);
    return model;
}

/// Σ_tokens log p(gold | history, x) − (l2/2)·||w||² and its gradient.
inline std::pair<double, std::vector<double>> memm_objective_and_gradient(
    const OrderOMEMM& model, const std::vector<LabeledSentence>& data) {
    auto instances = detail::memm_instances(model, data);
    std::vector<double> grad(model.weights.size(), 0.0);
    double obj = 0.0;
    for (const auto& toks : instances) obj += detail::memm_sentence_gradient(model, toks, &grad);
    obj -= 0.5 * model.l2 * squared_norm(model.weights);
    for (std::size_t j = 0; j < grad.size(); ++j) grad[j] -= model.l2 * model.weights[j];
    return {obj, std::move(grad)};
}

inline OrderOMEMM memm_train(const std::vector<LabeledSentence>& data, const TrainConfig& cfg, int order,
                             FeatureTemplateConfig templates = {}, std::optional<TagSet> tags = std::nullopt,
                             TrainReport* report = nullptr) {
    templates.tag_history_order = order;
    OrderOMEMM model = memm_build(data, templates, std::move(tags), cfg.l2);
    auto instances = detail::memm_instances(model, data);
    auto batch_grad = [&](std::size_t j, std::vector<double>& g) {
        detail::memm_sentence_gradient(model, instances[j], &g);
    };
    auto objective = [&]() {
        double obj = 0.0;
        for (const auto& toks : instances) obj += detail::memm_sentence_gradient(model, toks, nullptr);
        return obj - 0.5 * cfg.l2 * squared_norm(model.weights);
    };
    TrainReport r = minibatch_ascend(model.weights, instances.size(), cfg, batch_grad, objective, "memm_train");
    if (report) *report = std::move(r);
    return model;
}

/// Beam search over history states (the last o emitted labels). States with
/// identical histories are merged, so beam >= |labels|^o is exact; beam 1 is
/// greedy left-to-right decoding. Per-token confidence is the conditional
/// probability of the emitted label given the emitted history.
inline ConfidenceTaggedSentence memm_decode(const OrderOMEMM& model, const std::vector<std::string>& tokens,
                                            int beam_width = 0) {
    const int beam = beam_width > 0 ? beam_width : model.beam_width;
    if (beam < 1) throw std::invalid_argument("memm_decode: beam width must be >= 1");
    ConfidenceTaggedSentence out;
    out.tokens = tokens;
    if (tokens.empty()) return out;

    const int o = model.order();
    const FeatureAlphabet& frozen = model.alphabet;

    struct Hyp {
        std::vector<int> history;  // last o labels (bos-padded)
        double log_prob;
        std::vector<int> path;
    };
    std::vector<Hyp> live{{std::vector<int>(o, model.bos_id()), 0.0, {}}};

    for (int i = 0; i < static_cast<int>(tokens.size()); ++i) {
        // order-preserving merge map: history -> best hypothesis
        std::map<std::vector<int>, Hyp> merged;
        for (const auto& hyp : live) {
            auto fv = extract_features(tokens, i, detail::history_names(model, hyp.history), model.templates,
                                       frozen);
            auto dist = model.token_distribution(fv, hyp.history.back(), model.constrain_decode);
            for (int l = 0; l < model.num_labels(); ++l) {
                if (dist[l] <= 0.0) continue;
                Hyp next;
                next.history.assign(hyp.history.begin() + 1, hyp.history.end());
                next.history.push_back(l);
                next.log_prob = hyp.log_prob + std::log(dist[l]);
                next.path = hyp.path;
                next.path.push_back(l);
                auto it = merged.find(next.history);
                if (it == merged.end())
                    merged.emplace(next.history, std::move(next));
                else if (next.log_prob > it->second.log_prob)
                    it->second = std::move(next);
            }
        }
        live.clear();
        for (auto& [h, hyp] : merged) live.push_back(std::move(hyp));
        std::stable_sort(live.begin(), live.end(),
                         [](const Hyp& a, const Hyp& b) { return a.log_prob > b.log_prob; });
        if (static_cast<int>(live.size()) > beam) live.resize(beam);
        if (live.empty()) throw std::runtime_error("memm_decode: constraint mask eliminated all labels");
    }

    const Hyp& best = live.front();
    // confidences: p(emitted label | emitted history) along the chosen path
    std::vector<int> hist(o, model.bos_id());
    for (int i = 0; i < static_cast<int>(tokens.size()); ++i) {
        auto fv = extract_features(tokens, i, detail::history_names(model, hist), model.templates, frozen);
        auto dist = model.token_distribution(fv, hist.back(), model.constrain_decode);
        out.tags.push_back(model.tags.label_name(best.path[i]));
        out.confidences.push_back(dist[best.path[i]]);
        hist.erase(hist.begin());
        hist.push_back(best.path[i]);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Serialization

inline void OrderOMEMM::save(std::ostream& out) const {
    out << "xlner-model 1\nkind memm\n";
    out << "l2 " << detail::hexdouble(l2) << '\n';
    out << "beam " << beam_width << ' ' << (constrain_decode ? 1 : 0) << '\n';
    detail::write_tagset(out, tags);
    out << "template " << templates.window_radius << ' ' << templates.affix_max_length << ' '
        << (templates.word_shapes ? 1 : 0) << ' ' << templates.tag_history_order << '\n';
    out << "alphabet " << alphabet.size() << '\n';
    alphabet.save(out);
    detail::write_weights(out, weights);
    out << "end\n";
}

inline OrderOMEMM OrderOMEMM::load(std::istream& in) {
    detail::expect_fields(in, "xlner-model", 1);
    auto kind = detail::expect_fields(in, "kind", 1);
    if (kind[1] != "memm") throw ParseError("expected a memm model, found '" + kind[1] + "'");
    OrderOMEMM m;
    m.l2 = detail::parse_double(detail::expect_fields(in, "l2", 1)[1]);
    auto b = detail::expect_fields(in, "beam", 2);
    m.beam_width = std::stoi(b[1]);
    m.constrain_decode = b[2] == "1";
    m.tags = detail::read_tagset(in);
    auto t = detail::expect_fields(in, "template", 4);
    m.templates = {std::stoi(t[1]), std::stoi(t[2]), t[3] == "1", std::stoi(t[4])};
    auto a = detail::expect_fields(in, "alphabet", 1);
    m.alphabet = FeatureAlphabet::load(in, std::stoul(a[1]));
    m.weights = detail::read_weights(in);
    if (m.weights.size() != m.alphabet.size() * static_cast<std::size_t>(m.num_labels()))
        throw ParseError("memm weight vector has wrong length");
    detail::expect_fields(in, "end", 0);
    return m;
}

}  // namespace xlner
