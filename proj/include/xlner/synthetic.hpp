// Synthetic-language bitext generation for end-to-end testing: a
// deterministic injective word transform, identity gold alignments,
// controllable alignment/label noise, and retained gold target labels.
#pragma once

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "xlner/corpus.hpp"
#include "xlner/numeric.hpp"

namespace xlner {

struct SyntheticLanguageSpec {
    bool reverse_chars = true;      // reverse the word's bytes
    std::string suffix = "_x";      // appended after the transform
    double alignment_noise = 0.0;   // per-token: drop or redirect its link
    double label_noise = 0.0;       // per-entity: corrupt the tag before projection
    double noisy_sentence_fraction = 1.0;  // share of sentences subject to alignment noise
    std::uint64_t seed = 1;

    void check() const {
        if (alignment_noise < 0 || alignment_noise > 1 || label_noise < 0 || label_noise > 1 ||
            noisy_sentence_fraction < 0 || noisy_sentence_fraction > 1)
            throw std::invalid_argument("SyntheticLanguageSpec: rates must lie in [0,1]");
    }
};

inline std::string transform_word(const std::string& word, const SyntheticLanguageSpec& spec) {
    std::string t = word;
    if (spec.reverse_chars) std::reverse(t.begin(), t.end());
    return t + spec.suffix;
}

struct SyntheticBitext {
    std::vector<AlignedSentencePair> pairs;     // source tokens + (possibly corrupted) tags + noisy links
    std::vector<LabeledSentence> target_gold;   // clean labels on the target tokens
    long corrupted_entities = 0;
    long corrupted_links = 0;
    long noisy_sentences = 0;
};

/// Builds the synthetic bitext: target tokens are the transformed source
/// tokens, gold alignment is the identity, gold target labels mirror the
/// source labels. Noise (when enabled) corrupts the alignment links of the
/// chosen sentence fraction and the source tags fed into projection; the
/// gold target labels stay clean. Deterministic per (spec.seed, sentence).
inline SyntheticBitext synth_bitext(const std::vector<LabeledSentence>& source_corpus,
                                    const SyntheticLanguageSpec& spec) {
    spec.check();
    // injectivity check over the source vocabulary
    std::map<std::string, std::string> image;
    for (const auto& s : source_corpus)
        for (const auto& w : s.tokens) {
            auto t = transform_word(w, spec);
            auto [it, inserted] = image.emplace(t, w);
            if (!inserted && it->second != w)
                throw std::invalid_argument("synth_bitext: transform is not injective ('" + it->second +
                                            "' and '" + w + "' both map to '" + t + "')");
        }

    // entity types present, for label corruption
    std::set<std::string> type_set;
    for (const auto& s : source_corpus)
        for (const auto& m : iob_to_spans(s.tags)) type_set.insert(m.etype);
    std::vector<std::string> types(type_set.begin(), type_set.end());

    SyntheticBitext out;
    for (std::size_t si = 0; si < source_corpus.size(); ++si) {
        const auto& src = source_corpus[si];
        auto rng = make_rng(spec.seed, si);
        std::uniform_real_distribution<double> u01(0.0, 1.0);

        AlignedSentencePair pair;
        pair.source_tokens = src.tokens;
        pair.source_tags = src.tags;
        for (const auto& w : src.tokens) pair.target_tokens.push_back(transform_word(w, spec));
        const int n = static_cast<int>(src.tokens.size());
        for (int i = 0; i < n; ++i) pair.links.emplace(i, i);

        // label noise: corrupt an entity's type before projection
        if (spec.label_noise > 0 && types.size() > 1) {
            auto spans = iob_to_spans(src.tags);
            bool changed = false;
            for (auto& m : spans) {
                if (u01(rng) >= spec.label_noise) continue;
                std::uniform_int_distribution<std::size_t> pick(0, types.size() - 2);
                std::size_t k = pick(rng);
                const std::string& replacement = types[k] == m.etype ? types.back() : types[k];
                m.etype = replacement;
                ++out.corrupted_entities;
                changed = true;
            }
            if (changed) pair.source_tags = spans_to_iob(spans, n);
        }

        // alignment noise inside the noisy sentence stratum
        bool noisy = spec.alignment_noise > 0 && u01(rng) < spec.noisy_sentence_fraction;
        if (noisy) ++out.noisy_sentences;
        if (noisy && n > 0) {
            std::uniform_int_distribution<int> coin(0, 1);
            std::uniform_int_distribution<int> anywhere(0, n - 1);
            for (int i = 0; i < n; ++i) {
                if (u01(rng) >= spec.alignment_noise) continue;
                pair.links.erase({i, i});
                if (coin(rng)) pair.links.emplace(i, anywhere(rng));
                ++out.corrupted_links;
            }
        }

        out.pairs.push_back(std::move(pair));
        out.target_gold.push_back({out.pairs.back().target_tokens, src.tags});
    }
    return out;
}

}  // namespace xlner
