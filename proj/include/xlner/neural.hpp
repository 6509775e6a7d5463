// Feedforward neural taggers NN1 and NN2: embedding-window input, optional
// prototype smoothing layer (NN2), one sigmoid hidden layer, softmax output,
// and conditioning on previously assigned tags. Locally normalized training
// with teacher-forced histories; word embeddings stay frozen except the
// NER-trained UNK vector.
#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "xlner/corpus.hpp"
#include "xlner/crf.hpp"  // detail::infer_tagset
#include "xlner/embeddings.hpp"
#include "xlner/numeric.hpp"
#include "xlner/optim.hpp"
#include "xlner/serialize.hpp"

namespace xlner {

enum class NNArch { NN1, NN2 };

struct NNTrainConfig {
    int epochs = 10;
    double learning_rate = 0.1;
    double decay = 0.01;
    int batch_size = 8;
    std::uint64_t seed = 1;
    double init_scale = 1.0;  // multiplier on the uniform(-x, x) bound, x = sqrt(6/(fan_in+fan_out))
    double tolerance = 1e-6;
    int workers = 1;

    void check() const {
        if (epochs < 0 || learning_rate <= 0 || batch_size < 1 || init_scale <= 0 || workers < 1)
            throw std::invalid_argument("NNTrainConfig: fields must be positive (epochs may be 0)");
    }
};

/// All trainable parameters live in one flat vector; the spans below are
/// views into it. Layout: input→hidden matrix, hidden bias, hidden→output
/// matrix, output bias, tag embeddings ((L+1)·d_t, last row is BOS),
/// prototypes (m·d, NN2 only), UNK vector (d).
struct NNModel {
    NNArch arch = NNArch::NN1;
    TagSet tags;
    int window_radius = 2;      // c
    int embedding_dim = 0;      // d
    int hidden_size = 100;      // h
    int tag_history = 1;        // previous tags fed as context
    int tag_embedding_dim = 20; // d_t
    int num_prototypes = 0;     // m (NN2)
    double temperature = 1.0;   // τ (NN2)
    bool constrain_decode = true;
    std::vector<double> params;

    int num_labels() const { return tags.num_labels(); }
    int bos_tag_id() const { return num_labels(); }
    int window_slots() const { return 2 * window_radius + 1; }
    int input_dim() const { return window_slots() * embedding_dim + tag_history * tag_embedding_dim; }

    std::size_t w_hidden_size() const { return static_cast<std::size_t>(hidden_size) * input_dim(); }
    std::size_t w_out_size() const { return static_cast<std::size_t>(num_labels()) * hidden_size; }
    std::size_t tag_emb_size() const { return static_cast<std::size_t>(num_labels() + 1) * tag_embedding_dim; }
    std::size_t proto_size() const { return static_cast<std::size_t>(num_prototypes) * embedding_dim; }

    std::size_t off_w_hidden() const { return 0; }
    std::size_t off_b_hidden() const { return w_hidden_size(); }
    std::size_t off_w_out() const { return off_b_hidden() + hidden_size; }
    std::size_t off_b_out() const { return off_w_out() + w_out_size(); }
    std::size_t off_tag_emb() const { return off_b_out() + num_labels(); }
    std::size_t off_prototypes() const { return off_tag_emb() + tag_emb_size(); }
    std::size_t off_unk() const { return off_prototypes() + proto_size(); }
    std::size_t total_params() const { return off_unk() + embedding_dim; }

    std::span<const double> w_hidden() const { return {params.data() + off_w_hidden(), w_hidden_size()}; }
    std::span<const double> b_hidden() const { return {params.data() + off_b_hidden(), static_cast<std::size_t>(hidden_size)}; }
    std::span<const double> w_out() const { return {params.data() + off_w_out(), w_out_size()}; }
    std::span<const double> b_out() const { return {params.data() + off_b_out(), static_cast<std::size_t>(num_labels())}; }
    std::span<const double> tag_embedding(int tag_id) const {
        return {params.data() + off_tag_emb() + static_cast<std::size_t>(tag_id) * tag_embedding_dim,
                static_cast<std::size_t>(tag_embedding_dim)};
    }
    std::span<const double> prototype(int k) const {
        return {params.data() + off_prototypes() + static_cast<std::size_t>(k) * embedding_dim,
                static_cast<std::size_t>(embedding_dim)};
    }
    std::span<const double> unk() const { return {params.data() + off_unk(), static_cast<std::size_t>(embedding_dim)}; }

    void check_shapes() const {
        if (embedding_dim < 1 || hidden_size < 1 || window_radius < 0 || tag_history < 1 ||
            tag_embedding_dim < 1)
            throw std::invalid_argument("NNModel: inconsistent dimensions");
        if (arch == NNArch::NN2 && (num_prototypes < 1 || temperature <= 0))
            throw std::invalid_argument("NNModel: NN2 needs m >= 1 prototypes and τ > 0");
        if (params.size() != total_params()) throw std::invalid_argument("NNModel: parameter vector size mismatch");
    }

    void save(std::ostream& out) const;
    static NNModel load(std::istream& in);
};

namespace detail {

/// One window slot for the forward pass: a borrowed word vector, the live
/// UNK vector, or zero padding beyond the sentence edge.
struct SlotRef {
    const double* vec = nullptr;  // nullptr → padding (zero vector)
    bool is_unk = false;
};

struct SmoothState {
    std::vector<double> weights;  // softmax over cos/τ, size m
    std::vector<double> cos;      // cosine values, size m
    double v_norm = 0.0;
};

struct NNForwardState {
    std::vector<double> input;   // input_dim
    std::vector<double> hidden;  // h, sigmoid outputs
    std::vector<double> probs;   // L (unmasked softmax)
    std::vector<SmoothState> smooth;  // per slot, NN2 only
};

inline double guarded(double norm) { return std::max(norm, 1e-12); }

/// Smoothing layer of NN2: replace v by Σ_k a_k P_k, a = softmax(cos(v,P)/τ).
inline void smooth_slot(const NNModel& m, const double* v, double* out, SmoothState& st) {
    const int d = m.embedding_dim;
    const int mm = m.num_prototypes;
    std::span<const double> vv = v ? std::span<const double>(v, d) : std::span<const double>();
    double nv = v ? guarded(std::sqrt(squared_norm(vv))) : 1e-12;
    st.cos.resize(mm);
    st.weights.resize(mm);
    st.v_norm = nv;
    for (int k = 0; k < mm; ++k) {
        auto p = m.prototype(k);
        double np = guarded(std::sqrt(squared_norm(p)));
        st.cos[k] = v ? dot(vv, p) / (nv * np) : 0.0;
        st.weights[k] = st.cos[k] / m.temperature;
    }
    softmax_inplace(st.weights);
    for (int j = 0; j < d; ++j) out[j] = 0.0;
    for (int k = 0; k < mm; ++k) {
        auto p = m.prototype(k);
        for (int j = 0; j < d; ++j) out[j] += st.weights[k] * p[j];
    }
}

inline NNForwardState nn_forward_state(const NNModel& m, const std::vector<SlotRef>& window,
                                       const std::vector<int>& prev_tag_ids) {
    if (static_cast<int>(window.size()) != m.window_slots())
        throw std::invalid_argument("nn_forward: expected " + itos(m.window_slots()) + " window slots, got " +
                                    itos(window.size()));
    if (static_cast<int>(prev_tag_ids.size()) != m.tag_history)
        throw std::invalid_argument("nn_forward: expected " + itos(m.tag_history) + " previous tags, got " +
                                    itos(prev_tag_ids.size()));
    const int d = m.embedding_dim;
    const int L = m.num_labels();
    NNForwardState st;
    st.input.assign(m.input_dim(), 0.0);
    if (m.arch == NNArch::NN2) st.smooth.resize(window.size());
    for (std::size_t s = 0; s < window.size(); ++s) {
        double* dst = st.input.data() + s * d;
        if (m.arch == NNArch::NN2) {
            smooth_slot(m, window[s].vec, dst, st.smooth[s]);
        } else if (window[s].vec) {
            for (int j = 0; j < d; ++j) dst[j] = window[s].vec[j];
        }
    }
    double* tag_dst = st.input.data() + static_cast<std::size_t>(m.window_slots()) * d;
    for (int t = 0; t < m.tag_history; ++t) {
        int id = prev_tag_ids[t];
        if (id < 0 || id > m.bos_tag_id())
            throw std::invalid_argument("nn_forward: previous tag id out of range");
        auto e = m.tag_embedding(id);
        for (int j = 0; j < m.tag_embedding_dim; ++j) tag_dst[t * m.tag_embedding_dim + j] = e[j];
    }
    st.hidden.resize(m.hidden_size);
    auto w1 = m.w_hidden();
    auto b1 = m.b_hidden();
    const int in = m.input_dim();
    for (int i = 0; i < m.hidden_size; ++i) {
        double z = b1[i] + dot({w1.data() + static_cast<std::size_t>(i) * in, static_cast<std::size_t>(in)},
                               st.input);
        st.hidden[i] = 1.0 / (1.0 + std::exp(-z));
    }
    st.probs.resize(L);
    auto w2 = m.w_out();
    auto b2 = m.b_out();
    for (int l = 0; l < L; ++l)
        st.probs[l] = b2[l] + dot({w2.data() + static_cast<std::size_t>(l) * m.hidden_size,
                                   static_cast<std::size_t>(m.hidden_size)},
                                  st.hidden);
    softmax_inplace(st.probs);
    return st;
}

/// Backpropagates dL/dscore (score = pre-softmax logits) through the net,
/// accumulating into grad (same layout as params). Word-slot gradients flow
/// only into the UNK vector and, for NN2, the prototypes.
inline void nn_backward(const NNModel& m, const std::vector<SlotRef>& window,
                        const std::vector<int>& prev_tag_ids, const NNForwardState& st,
                        const std::vector<double>& dscore, std::vector<double>& grad) {
    const int d = m.embedding_dim;
    const int L = m.num_labels();
    const int h = m.hidden_size;
    const int in = m.input_dim();
    auto w2 = m.w_out();
    // hidden→output
    std::vector<double> dhidden(h, 0.0);
    for (int l = 0; l < L; ++l) {
        double g = dscore[l];
        if (g == 0.0) continue;
        double* gw2 = grad.data() + m.off_w_out() + static_cast<std::size_t>(l) * h;
        const double* w2row = w2.data() + static_cast<std::size_t>(l) * h;
        for (int i = 0; i < h; ++i) {
            gw2[i] += g * st.hidden[i];
            dhidden[i] += g * w2row[i];
        }
        grad[m.off_b_out() + l] += g;
    }
    // sigmoid
    std::vector<double> dpre(h);
    for (int i = 0; i < h; ++i) dpre[i] = dhidden[i] * st.hidden[i] * (1.0 - st.hidden[i]);
    // input→hidden
    auto w1 = m.w_hidden();
    std::vector<double> dinput(in, 0.0);
    for (int i = 0; i < h; ++i) {
        double g = dpre[i];
        if (g == 0.0) continue;
        double* gw1 = grad.data() + m.off_w_hidden() + static_cast<std::size_t>(i) * in;
        const double* w1row = w1.data() + static_cast<std::size_t>(i) * in;
        for (int j = 0; j < in; ++j) {
            gw1[j] += g * st.input[j];
            dinput[j] += g * w1row[j];
        }
        grad[m.off_b_hidden() + i] += g;
    }
    // tag embeddings
    for (int t = 0; t < m.tag_history; ++t) {
        int id = prev_tag_ids[t];
        double* ge = grad.data() + m.off_tag_emb() + static_cast<std::size_t>(id) * m.tag_embedding_dim;
        const double* src = dinput.data() + static_cast<std::size_t>(m.window_slots()) * d +
                            static_cast<std::size_t>(t) * m.tag_embedding_dim;
        for (int j = 0; j < m.tag_embedding_dim; ++j) ge[j] += src[j];
    }
    // word slots
    for (std::size_t s = 0; s < window.size(); ++s) {
        const double* dslot = dinput.data() + s * d;
        if (m.arch == NNArch::NN1) {
            if (window[s].is_unk) {
                double* gu = grad.data() + m.off_unk();
                for (int j = 0; j < d; ++j) gu[j] += dslot[j];
            }
            continue;
        }
        // NN2: through the smoothing layer
        const SmoothState& sm = st.smooth[s];
        const int mm = m.num_prototypes;
        std::vector<double> da(mm);
        double mix = 0.0;
        for (int k = 0; k < mm; ++k) {
            auto p = m.prototype(k);
            da[k] = dot({dslot, static_cast<std::size_t>(d)}, p);
            mix += sm.weights[k] * da[k];
        }
        const double* v = window[s].vec;
        double nv = sm.v_norm;
        std::vector<double> dv(d, 0.0);
        for (int k = 0; k < mm; ++k) {
            auto p = m.prototype(k);
            double np = guarded(std::sqrt(squared_norm(p)));
            double dcos = sm.weights[k] * (da[k] - mix) / m.temperature;
            double* gp = grad.data() + m.off_prototypes() + static_cast<std::size_t>(k) * d;
            for (int j = 0; j < d; ++j) {
                double vj = v ? v[j] : 0.0;
                gp[j] += sm.weights[k] * dslot[j] + dcos * (vj / (nv * np) - sm.cos[k] * p[j] / (np * np));
                if (v) dv[j] += dcos * (p[j] / (nv * np) - sm.cos[k] * vj / (nv * nv));
            }
        }
        if (window[s].is_unk) {
            double* gu = grad.data() + m.off_unk();
            for (int j = 0; j < d; ++j) gu[j] += dv[j];
        }
    }
}

}  // namespace detail

/// Forward pass on explicit window embeddings (2c+1 vectors of dimension d)
/// and previous-tag ids; returns the softmax distribution over labels.
inline std::vector<double> nn_forward(const NNModel& model, const std::vector<std::vector<double>>& window,
                                      const std::vector<int>& prev_tag_ids) {
    std::vector<detail::SlotRef> slots;
    for (const auto& v : window) {
        if (static_cast<int>(v.size()) != model.embedding_dim)
            throw std::invalid_argument("nn_forward: window embedding has wrong dimension");
        slots.push_back({v.data(), false});
    }
    return detail::nn_forward_state(model, slots, prev_tag_ids).probs;
}

/// Smoothing layer output for one word embedding (NN2); exposed for tests.
inline std::vector<double> nn_smooth(const NNModel& model, const std::vector<double>& v) {
    std::vector<double> out(model.embedding_dim);
    detail::SmoothState st;
    detail::smooth_slot(model, v.data(), out.data(), st);
    return out;
}

// ---------------------------------------------------------------------------
// Training

/// Per-token embedding source used by decoding; the UNK flag routes
/// gradients during training and selects the model's trained UNK vector.
struct TokenEmbedding {
    std::vector<double> vec;
    bool is_unk = false;
};
using EmbeddingLookup = std::function<TokenEmbedding(const std::string&)>;

/// Lookup into a monolingual table with the model's UNK as fallback.
inline EmbeddingLookup make_table_lookup(const EmbeddingTable& table, const NNModel& model) {
    return [&table, &model](const std::string& word) -> TokenEmbedding {
        if (const auto* v = table.find(word)) return {*v, false};
        auto u = model.unk();
        return {{u.begin(), u.end()}, true};
    };
}

inline NNModel nn_build(const std::vector<LabeledSentence>& data, const EmbeddingTable& embeddings,
                        const NNTrainConfig& cfg, NNArch arch, std::optional<TagSet> tags = std::nullopt,
                        int window_radius = 2, int hidden_size = 100, int tag_history = 1,
                        int tag_embedding_dim = 20, int num_prototypes = 40, double temperature = 1.0) {
    if (data.empty()) throw std::invalid_argument("nn_build: empty training data");
    cfg.check();
    NNModel m;
    m.arch = arch;
    m.tags = tags ? std::move(*tags) : detail::infer_tagset(data);
    m.window_radius = window_radius;
    m.embedding_dim = embeddings.dimension();
    m.hidden_size = hidden_size;
    m.tag_history = tag_history;
    m.tag_embedding_dim = tag_embedding_dim;
    m.num_prototypes = arch == NNArch::NN2 ? num_prototypes : 0;
    m.temperature = temperature;
    m.params.assign(m.total_params(), 0.0);
    m.check_shapes();

    auto rng = make_rng(cfg.seed);
    auto fill = [&](std::size_t off, std::size_t n, int fan_in, int fan_out) {
        double x = cfg.init_scale * std::sqrt(6.0 / (fan_in + fan_out));
        std::uniform_real_distribution<double> u(-x, x);
        for (std::size_t i = 0; i < n; ++i) m.params[off + i] = u(rng);
    };
    fill(m.off_w_hidden(), m.w_hidden_size(), m.input_dim(), m.hidden_size);
    fill(m.off_w_out(), m.w_out_size(), m.hidden_size, m.num_labels());
    fill(m.off_tag_emb(), m.tag_emb_size(), m.num_labels() + 1, m.tag_embedding_dim);
    if (m.arch == NNArch::NN2) fill(m.off_prototypes(), m.proto_size(), m.num_prototypes, m.embedding_dim);
    fill(m.off_unk(), m.embedding_dim, 1, m.embedding_dim);
    return m;
}

namespace detail {

struct NNToken {
    std::vector<SlotRef> window;
    std::vector<int> prev_ids;  // teacher-forced gold history
    int gold;
};

/// Window slots reference either table vectors (borrowed) or the model's
/// live UNK span, so parameter updates are visible without re-assembly.
inline std::vector<std::vector<NNToken>> nn_instances(const NNModel& model,
                                                      const std::vector<LabeledSentence>& data,
                                                      const EmbeddingTable& table) {
    std::vector<std::vector<NNToken>> out;
    const int c = model.window_radius;
    for (const auto& s : data) {
        if (!is_iob2_valid(s.tags)) throw std::invalid_argument("nn_train: sentence tags are not IOB2-valid");
        std::vector<NNToken> toks;
        for (int i = 0; i < static_cast<int>(s.tokens.size()); ++i) {
            NNToken t;
            for (int off = -c; off <= c; ++off) {
                int p = i + off;
                if (p < 0 || p >= static_cast<int>(s.tokens.size())) {
                    t.window.push_back({nullptr, false});
                } else if (const auto* v = table.find(s.tokens[p])) {
                    t.window.push_back({v->data(), false});
                } else {
                    t.window.push_back({model.unk().data(), true});
                }
            }
            for (int k = i - model.tag_history; k < i; ++k)
                t.prev_ids.push_back(k < 0 ? model.bos_tag_id() : model.tags.label_id(s.tags[k]));
            t.gold = model.tags.label_id(s.tags[i]);
            toks.push_back(std::move(t));
        }
        out.push_back(std::move(toks));
    }
    return out;
}

inline double nn_sentence_gradient(const NNModel& model, const std::vector<NNToken>& toks,
                                   std::vector<double>* grad) {
    double ll = 0.0;
    for (const auto& tok : toks) {
        auto st = nn_forward_state(model, tok.window, tok.prev_ids);
        ll += std::log(std::max(st.probs[tok.gold], 1e-300));
        if (grad) {
            std::vector<double> dscore = st.probs;
            for (double& g : dscore) g = -g;
            dscore[tok.gold] += 1.0;
            nn_backward(model, tok.window, tok.prev_ids, st, dscore, *grad);
        }
    }
    return ll;
}

}  // namespace detail

/// Per-token log-likelihood (teacher-forced histories) and its gradient in
/// the flat parameter layout. Covers every trainable group: both weight
/// matrices and biases, tag embeddings, prototypes and the UNK vector.
inline std::pair<double, std::vector<double>> nn_objective_and_gradient(
    const NNModel& model, const std::vector<LabeledSentence>& data, const EmbeddingTable& table) {
    auto instances = detail::nn_instances(model, data, table);
    std::vector<double> grad(model.params.size(), 0.0);
    double obj = 0.0;
    for (const auto& toks : instances) obj += detail::nn_sentence_gradient(model, toks, &grad);
    return {obj, std::move(grad)};
}

inline NNModel nn_train(const std::vector<LabeledSentence>& data, const EmbeddingTable& embeddings,
                        const NNTrainConfig& cfg, NNArch arch, std::optional<TagSet> tags = std::nullopt,
                        TrainReport* report = nullptr, const NNModel* warm_start = nullptr) {
    NNModel model = warm_start ? *warm_start : nn_build(data, embeddings, cfg, arch, std::move(tags));
    if (cfg.epochs == 0) return model;
    auto instances = detail::nn_instances(model, data, embeddings);
    TrainConfig opt;
    opt.epochs = cfg.epochs;
    opt.learning_rate = cfg.learning_rate;
    opt.decay = cfg.decay;
    opt.l2 = 0.0;
    opt.batch_size = cfg.batch_size;
    opt.seed = cfg.seed;
    opt.tolerance = cfg.tolerance;
    opt.workers = cfg.workers;
    auto batch_grad = [&](std::size_t j, std::vector<double>& g) {
        detail::nn_sentence_gradient(model, instances[j], &g);
    };
    auto objective = [&]() {
        double obj = 0.0;
        for (const auto& toks : instances) obj += detail::nn_sentence_gradient(model, toks, nullptr);
        return obj;
    };
    TrainReport r = minibatch_ascend(model.params, instances.size(), opt, batch_grad, objective, "nn_train");
    if (report) *report = std::move(r);
    return model;
}

// ---------------------------------------------------------------------------
// Decoding

/// Greedy (beam 1) or beam decoding, feeding previously emitted tags as
/// history; per-token confidence is the (masked) softmax probability of the
/// emitted label.
inline ConfidenceTaggedSentence nn_decode(const NNModel& model, const std::vector<std::string>& tokens,
                                          const EmbeddingLookup& lookup, int beam_width = 1) {
    if (beam_width < 1) throw std::invalid_argument("nn_decode: beam width must be >= 1");
    ConfidenceTaggedSentence out;
    out.tokens = tokens;
    if (tokens.empty()) return out;

    const int n = static_cast<int>(tokens.size());
    const int c = model.window_radius;
    const int L = model.num_labels();
    std::vector<TokenEmbedding> embs(n);
    for (int i = 0; i < n; ++i) embs[i] = lookup(tokens[i]);

    auto window_at = [&](int i) {
        std::vector<detail::SlotRef> w;
        for (int off = -c; off <= c; ++off) {
            int p = i + off;
            if (p < 0 || p >= n) w.push_back({nullptr, false});
            else w.push_back({embs[p].vec.data(), embs[p].is_unk});
        }
        return w;
    };

    auto masked_dist = [&](const std::vector<detail::SlotRef>& window, const std::vector<int>& hist) {
        auto st = detail::nn_forward_state(model, window, hist);
        if (!model.constrain_decode) return st.probs;
        int prev = hist.back();
        double total = 0.0;
        for (int l = 0; l < L; ++l) {
            bool ok = prev == model.bos_tag_id() ? model.tags.valid_start(l)
                                                 : model.tags.valid_transition(prev, l);
            if (!ok) st.probs[l] = 0.0;
            total += st.probs[l];
        }
        for (double& p : st.probs) p /= total;
        return st.probs;
    };

    struct Hyp {
        std::vector<int> hist;  // last tag_history emitted labels (BOS-padded)
        double log_prob;
        std::vector<int> path;
    };
    std::vector<Hyp> live{{std::vector<int>(model.tag_history, model.bos_tag_id()), 0.0, {}}};
    for (int i = 0; i < n; ++i) {
        auto window = window_at(i);
        std::map<std::vector<int>, Hyp> merged;
        for (const auto& hyp : live) {
            auto dist = masked_dist(window, hyp.hist);
            for (int l = 0; l < L; ++l) {
                if (dist[l] <= 0.0) continue;
                Hyp next;
                next.hist.assign(hyp.hist.begin() + 1, hyp.hist.end());
                next.hist.push_back(l);
                next.log_prob = hyp.log_prob + std::log(dist[l]);
                next.path = hyp.path;
                next.path.push_back(l);
                auto it = merged.find(next.hist);
                if (it == merged.end()) merged.emplace(next.hist, std::move(next));
                else if (next.log_prob > it->second.log_prob) it->second = std::move(next);
            }
        }
        live.clear();
        for (auto& [h, hyp] : merged) live.push_back(std::move(hyp));
        std::stable_sort(live.begin(), live.end(),
                         [](const Hyp& a, const Hyp& b) { return a.log_prob > b.log_prob; });
        if (static_cast<int>(live.size()) > beam_width) live.resize(beam_width);
    }

    const auto& best = live.front();
    std::vector<int> hist(model.tag_history, model.bos_tag_id());
    for (int i = 0; i < n; ++i) {
        auto dist = masked_dist(window_at(i), hist);
        out.tags.push_back(model.tags.label_name(best.path[i]));
        out.confidences.push_back(dist[best.path[i]]);
        hist.erase(hist.begin());
        hist.push_back(best.path[i]);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Serialization (embedding table not included; models reference it by dim)

inline void NNModel::save(std::ostream& out) const {
    out << "xlner-model 1\nkind " << (arch == NNArch::NN1 ? "nn1" : "nn2") << '\n';
    detail::write_tagset(out, tags);
    out << "dims " << window_radius << ' ' << embedding_dim << ' ' << hidden_size << ' ' << tag_history
        << ' ' << tag_embedding_dim << ' ' << num_prototypes << ' ' << detail::hexdouble(temperature) << ' '
        << (constrain_decode ? 1 : 0) << '\n';
    detail::write_weights(out, params);
    out << "end\n";
}

inline NNModel NNModel::load(std::istream& in) {
    detail::expect_fields(in, "xlner-model", 1);
    auto kind = detail::expect_fields(in, "kind", 1);
    if (kind[1] != "nn1" && kind[1] != "nn2") throw ParseError("expected an nn model, found '" + kind[1] + "'");
    NNModel m;
    m.arch = kind[1] == "nn1" ? NNArch::NN1 : NNArch::NN2;
    m.tags = detail::read_tagset(in);
    auto d = detail::expect_fields(in, "dims", 8);
    m.window_radius = std::stoi(d[1]);
    m.embedding_dim = std::stoi(d[2]);
    m.hidden_size = std::stoi(d[3]);
    m.tag_history = std::stoi(d[4]);
    m.tag_embedding_dim = std::stoi(d[5]);
    m.num_prototypes = std::stoi(d[6]);
    m.temperature = detail::parse_double(d[7]);
    m.constrain_decode = d[8] == "1";
    m.params = detail::read_weights(in);
    detail::expect_fields(in, "end", 0);
    m.check_shapes();
    return m;
}

}  // namespace xlner
