// Combination of two tagged outputs over the same tokens: the exclude-O
// confidence-based scheme and the rank-based scheme. Everything works at the
// entity level; combined tag sequences are rebuilt from the winning spans.
#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "xlner/corpus.hpp"

namespace xlner {

enum class ConflictKind { OverlapDifferentSpan, SameSpanDifferentType };

struct EntityConflict {
    EntityMention a;
    EntityMention b;
    ConflictKind kind;
};

/// Two entities conflict iff their spans overlap with different extents, or
/// the spans are identical but the types differ. Identical span and type is
/// agreement, not conflict.
inline bool entities_conflict(const EntityMention& a, const EntityMention& b) {
    if (a.same_span(b)) return a.etype != b.etype;
    return a.overlaps(b);
}

inline std::vector<EntityConflict> find_conflicts(const std::vector<EntityMention>& entities_a,
                                                  const std::vector<EntityMention>& entities_b) {
    std::vector<EntityConflict> out;
    for (const auto& a : entities_a)
        for (const auto& b : entities_b) {
            if (!entities_conflict(a, b)) continue;
            out.push_back({a, b,
                           a.same_span(b) ? ConflictKind::SameSpanDifferentType
                                          : ConflictKind::OverlapDifferentSpan});
        }
    return out;
}

namespace detail {

struct ScoredEntity {
    EntityMention mention;
    double confidence;
    bool from_a;
};

inline void check_same_tokens(const ConfidenceTaggedSentence& a, const ConfidenceTaggedSentence& b,
                              const char* what) {
    if (a.tokens == b.tokens) return;
    std::size_t i = 0;
    while (i < a.tokens.size() && i < b.tokens.size() && a.tokens[i] == b.tokens[i]) ++i;
    throw std::invalid_argument(std::string(what) + ": inputs disagree on the token sequence at position " +
                                itos(static_cast<long long>(i)));
}

/// Rebuilds tags from the winning entities. Leftmost-longest cleanup removes
/// residual overlaps (possible with conflict chains). Tokens inside a winning
/// span carry that entity's confidence; other tokens carry the mean of the
/// two inputs' token confidences.
inline ConfidenceTaggedSentence assemble(const ConfidenceTaggedSentence& a, const ConfidenceTaggedSentence& b,
                                         std::vector<ScoredEntity> winners) {
    std::stable_sort(winners.begin(), winners.end(), [](const ScoredEntity& x, const ScoredEntity& y) {
        if (x.mention.start != y.mention.start) return x.mention.start < y.mention.start;
        return x.mention.length() > y.mention.length();
    });
    std::vector<ScoredEntity> kept;
    int covered_until = 0;
    for (auto& w : winners) {
        if (w.mention.start < covered_until) continue;
        covered_until = w.mention.end;
        kept.push_back(std::move(w));
    }
    ConfidenceTaggedSentence out;
    out.tokens = a.tokens;
    std::vector<EntityMention> spans;
    for (const auto& k : kept) spans.push_back(k.mention);
    out.tags = spans_to_iob(spans, static_cast<int>(a.tokens.size()));
    out.confidences.resize(a.tokens.size());
    for (std::size_t i = 0; i < a.tokens.size(); ++i)
        out.confidences[i] = 0.5 * (a.confidences.at(i) + b.confidences.at(i));
    for (const auto& k : kept)
        for (int i = k.mention.start; i < k.mention.end; ++i) out.confidences[i] = k.confidence;
    return out;
}

}  // namespace detail

/// Rank-based scheme: keep every entity of the higher-precision system A
/// (annotation projection by pipeline convention) and add the entities of B
/// that conflict with none of A's.
inline ConfidenceTaggedSentence codecode_rank(const ConfidenceTaggedSentence& ap_output,
                                              const ConfidenceTaggedSentence& rp_output) {
    detail::check_same_tokens(ap_output, rp_output, "codecode_rank");
    auto ea = iob_to_spans(ap_output.tags);
    auto eb = iob_to_spans(rp_output.tags);
    std::vector<detail::ScoredEntity> winners;
    for (const auto& a : ea) winners.push_back({a, entity_confidence(ap_output, a), true});
    for (const auto& b : eb) {
        bool clean = true;
        for (const auto& a : ea) {
            if (a.same_span(b) && a.etype == b.etype) {  // agreement: already included with AP provenance
                clean = false;
                break;
            }
            if (entities_conflict(a, b)) {
                clean = false;
                break;
            }
        }
        if (clean) winners.push_back({b, entity_confidence(rp_output, b), false});
    }
    return detail::assemble(ap_output, rp_output, std::move(winners));
}

/// Exclude-O confidence-based scheme: an entity fully tagged O by the other
/// system is always kept regardless of confidence; conflicting pairs resolve
/// by higher per-entity confidence (ties go to system A); agreements are
/// kept once with the max confidence.
inline ConfidenceTaggedSentence codecode_confidence_exclude_o(const ConfidenceTaggedSentence& output_a,
                                                              const ConfidenceTaggedSentence& output_b) {
    detail::check_same_tokens(output_a, output_b, "codecode_confidence_exclude_o");
    auto ea = iob_to_spans(output_a.tags);
    auto eb = iob_to_spans(output_b.tags);
    std::vector<detail::ScoredEntity> winners;

    auto survives = [&](const EntityMention& e, double conf, bool in_a,
                        const std::vector<EntityMention>& rivals, const ConfidenceTaggedSentence& rival_out) {
        for (const auto& r : rivals) {
            if (!entities_conflict(e, r)) continue;
            double rc = entity_confidence(rival_out, r);
            if (in_a ? rc > conf : rc >= conf) return false;  // ties go to system A
        }
        return true;
    };

    for (const auto& a : ea) {
        double conf = entity_confidence(output_a, a);
        if (survives(a, conf, true, eb, output_b)) {
            // agreements carry the max of the two confidences
            for (const auto& b : eb)
                if (a.same_span(b) && a.etype == b.etype)
                    conf = std::max(conf, entity_confidence(output_b, b));
            winners.push_back({a, conf, true});
        }
    }
    for (const auto& b : eb) {
        double conf = entity_confidence(output_b, b);
        bool agreement = false;
        for (const auto& a : ea)
            if (a.same_span(b) && a.etype == b.etype) agreement = true;
        if (agreement) continue;  // included once, from the A side
        if (survives(b, conf, false, ea, output_a)) winners.push_back({b, conf, false});
    }
    return detail::assemble(output_a, output_b, std::move(winners));
}

}  // namespace xlner
