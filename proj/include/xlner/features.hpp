// Sparse feature extraction for the linear models: word n-grams, word
// shapes, affixes and previous-tag history features. Extraction is a pure
// function of its arguments; the alphabet is the only mutable piece and is
// single-writer until frozen.
#pragma once

#include <algorithm>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "xlner/corpus.hpp"

namespace xlner {

/// String-interning map feature → dense id. Ids are contiguous from 0.
/// Once frozen, unknown features map to kAbsent and are dropped.
class FeatureAlphabet {
public:
    static constexpr int kAbsent = -1;

    int add_or_get(const std::string& feature) {
        auto it = index_.find(feature);
        if (it != index_.end()) return it->second;
        if (frozen_) return kAbsent;
        int id = static_cast<int>(names_.size());
        names_.push_back(feature);
        index_.emplace(names_.back(), id);
        return id;
    }

    int lookup(const std::string& feature) const {
        auto it = index_.find(feature);
        return it == index_.end() ? kAbsent : it->second;
    }

    void freeze() { frozen_ = true; }
    bool frozen() const { return frozen_; }
    std::size_t size() const { return names_.size(); }
    const std::string& name(int id) const { return names_.at(id); }

    /// Line-oriented "id<TAB>feature" dump, in id order.
    void save(std::ostream& out) const {
        for (std::size_t i = 0; i < names_.size(); ++i) out << i << '\t' << names_[i] << '\n';
    }

    static FeatureAlphabet load(std::istream& in, std::size_t expected_size) {
        FeatureAlphabet a;
        std::string line;
        for (std::size_t i = 0; i < expected_size; ++i) {
            if (!detail::getline_any(in, line)) throw ParseError("alphabet truncated at entry " + detail::itos(i));
            auto tab = line.find('\t');
            if (tab == std::string::npos) throw ParseError("malformed alphabet line: '" + line + "'");
            if (std::stoul(line.substr(0, tab)) != i) throw ParseError("non-contiguous alphabet ids");
            a.add_or_get(line.substr(tab + 1));
        }
        a.freeze();
        return a;
    }

private:
    std::unordered_map<std::string, int> index_;
    std::vector<std::string> names_;
    bool frozen_ = false;
};

/// Sorted sparse vector of (feature id, value); binary features carry 1.0.
struct FeatureVector {
    std::vector<std::pair<int, double>> entries;

    std::size_t size() const { return entries.size(); }
    auto begin() const { return entries.begin(); }
    auto end() const { return entries.end(); }
    bool operator==(const FeatureVector&) const = default;
};

struct FeatureTemplateConfig {
    int window_radius = 2;
    int affix_max_length = 4;
    bool word_shapes = true;
    int tag_history_order = 1;  // o; MEMM history length

    void check() const {
        if (window_radius < 0) throw std::invalid_argument("window_radius must be >= 0");
        if (affix_max_length < 1) throw std::invalid_argument("affix_max_length must be >= 1");
        if (tag_history_order < 1) throw std::invalid_argument("tag_history_order must be >= 1");
    }
    bool operator==(const FeatureTemplateConfig&) const = default;
};

/// Distinguished label padding the tag history at sentence start.
inline const std::string kBosLabel = "<BOS>";

/// Word shape: uppercase→A, lowercase→a, digit→0, other→-, runs compressed.
/// Classification is byte-wise ASCII; non-ASCII bytes count as "other".
inline std::string word_shape(std::string_view word) {
    std::string shape;
    char prev = '\0';
    for (unsigned char c : word) {
        char s;
        if (std::isupper(c)) s = 'A';
        else if (std::islower(c)) s = 'a';
        else if (std::isdigit(c)) s = '0';
        else s = '-';
        if (s != prev) shape.push_back(s);
        prev = s;
    }
    return shape;
}

namespace detail {

inline const std::string kBosToken = "<s>";
inline const std::string kEosToken = "</s>";

inline const std::string& window_token(const std::vector<std::string>& tokens, int pos) {
    if (pos < 0) return kBosToken;
    if (pos >= static_cast<int>(tokens.size())) return kEosToken;
    return tokens[pos];
}

/// Emits every word-level feature string for one position into sink(string).
template <typename Sink>
void word_feature_strings(const std::vector<std::string>& tokens, int position,
                          const FeatureTemplateConfig& config, Sink&& sink) {
    const int r = config.window_radius;
    for (int off = -r; off <= r; ++off)
        sink("W[" + itos(off) + "]=" + window_token(tokens, position + off));
    for (int off = -r; off < r; ++off)
        sink("W[" + itos(off) + "," + itos(off + 1) + "]=" + window_token(tokens, position + off) + "|" +
             window_token(tokens, position + off + 1));
    const std::string& focus = tokens.at(position);
    if (config.word_shapes) sink("SH=" + word_shape(focus));
    for (int n = 1; n <= config.affix_max_length && n <= static_cast<int>(focus.size()); ++n) {
        sink("PRE" + itos(n) + "=" + focus.substr(0, n));
        sink("SUF" + itos(n) + "=" + focus.substr(focus.size() - n));
    }
}

inline void finalize(FeatureVector& fv) {
    auto& e = fv.entries;
    std::sort(e.begin(), e.end());
    // merge duplicate ids, drop zeros
    std::size_t w = 0;
    for (std::size_t r = 0; r < e.size();) {
        int id = e[r].first;
        double v = 0.0;
        while (r < e.size() && e[r].first == id) v += e[r++].second;
        if (v != 0.0) e[w++] = {id, v};
    }
    e.resize(w);
}

}  // namespace detail

/// Observation features of one position: word identities and adjacent word
/// bigrams inside the window, the focus word's shape and affixes. These are
/// the emission features of the CRF and the history-free part of the MEMM
/// templates. The mutable-alphabet overload grows the alphabet while
/// unfrozen; the const overload only looks ids up.
inline FeatureVector extract_word_features(const std::vector<std::string>& tokens, int position,
                                           const FeatureTemplateConfig& config, FeatureAlphabet& alphabet) {
    FeatureVector fv;
    detail::word_feature_strings(tokens, position, config, [&](const std::string& f) {
        int id = alphabet.add_or_get(f);
        if (id != FeatureAlphabet::kAbsent) fv.entries.emplace_back(id, 1.0);
    });
    detail::finalize(fv);
    return fv;
}

inline FeatureVector extract_word_features(const std::vector<std::string>& tokens, int position,
                                           const FeatureTemplateConfig& config,
                                           const FeatureAlphabet& alphabet) {
    FeatureVector fv;
    detail::word_feature_strings(tokens, position, config, [&](const std::string& f) {
        int id = alphabet.lookup(f);
        if (id != FeatureAlphabet::kAbsent) fv.entries.emplace_back(id, 1.0);
    });
    detail::finalize(fv);
    return fv;
}

/// History features for an order-o model: each previous tag individually and
/// the concatenated o-gram. prev_tags[0] is the oldest tag, prev_tags.back()
/// the immediately preceding one; pad with kBosLabel at sentence start.
inline std::vector<std::string> history_feature_strings(const std::vector<std::string>& prev_tags) {
    std::vector<std::string> out;
    const int o = static_cast<int>(prev_tags.size());
    for (int k = 0; k < o; ++k) out.push_back("T[" + detail::itos(k - o) + "]=" + prev_tags[k]);
    std::string gram = "TG=";
    for (int k = 0; k < o; ++k) {
        if (k) gram += '|';
        gram += prev_tags[k];
    }
    out.push_back(std::move(gram));
    return out;
}

/// Full feature vector at one position: word features plus tag-history
/// features. len(prev_tags) must equal config.tag_history_order.
template <typename Alphabet>
FeatureVector extract_features(const std::vector<std::string>& tokens, int position,
                               const std::vector<std::string>& prev_tags,
                               const FeatureTemplateConfig& config, Alphabet& alphabet) {
    if (static_cast<int>(prev_tags.size()) != config.tag_history_order)
        throw std::invalid_argument("extract_features: history length " +
                                    detail::itos(static_cast<long long>(prev_tags.size())) +
                                    " does not match order " + detail::itos(config.tag_history_order));
    FeatureVector fv = extract_word_features(tokens, position, config, alphabet);
    for (const auto& h : history_feature_strings(prev_tags)) {
        int id;
        if constexpr (std::is_const_v<Alphabet>) id = alphabet.lookup(h);
        else id = alphabet.add_or_get(h);
        if (id != FeatureAlphabet::kAbsent) fv.entries.emplace_back(id, 1.0);
    }
    detail::finalize(fv);
    return fv;
}

/// Upper bound on features per token implied by a template config.
inline int max_features_per_token(const FeatureTemplateConfig& c) {
    return (2 * c.window_radius + 1) + 2 * c.window_radius + (c.word_shapes ? 1 : 0) +
           2 * c.affix_max_length + c.tag_history_order + 1;
}

}  // namespace xlner
