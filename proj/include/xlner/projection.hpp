// Annotation projection across word-aligned bitext, the entity frequency
// table, sentence quality scoring, threshold-based data selection, and the
// coordinate search for the thresholds.
#pragma once

#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "xlner/corpus.hpp"

namespace xlner {

/// One projected entity with its provenance.
struct ProjectedEntity {
    EntityMention target;       // span on the target sentence
    EntityMention source;       // originating source span
    std::string projected_tag;  // entity type carried over
};

/// Target sentence labeled by projection, with per-entity provenance and
/// skip/drop diagnostics.
struct ProjectedSentence {
    LabeledSentence target;
    std::vector<ProjectedEntity> entities;   // the kept projections, sorted by start
    int skipped_unaligned = 0;               // source entities with no aligned target token
    int dropped_overlaps = 0;                // candidates removed by leftmost-longest resolution
    std::optional<double> cached_quality;

    int entity_count() const { return static_cast<int>(entities.size()); }
};

/// Projects source-side IOB2 tags onto the target sentence: each source
/// entity lands on the convex hull [min J, max J] of its aligned target
/// indices; overlaps are resolved leftmost-longest; everything else is O.
inline ProjectedSentence project_annotations(const AlignedSentencePair& pair,
                                             const std::vector<std::string>& source_tags) {
    pair.check();
    if (source_tags.size() != pair.source_tokens.size())
        throw std::invalid_argument("project_annotations: source tag/token length mismatch");
    auto spans = iob_to_spans(source_tags);  // validates IOB2

    ProjectedSentence out;
    out.target.tokens = pair.target_tokens;

    std::vector<ProjectedEntity> candidates;
    for (const auto& span : spans) {
        int lo = -1, hi = -1;
        for (const auto& [i, j] : pair.links) {
            if (i < span.start || i >= span.end) continue;
            if (lo < 0 || j < lo) lo = j;
            if (hi < 0 || j > hi) hi = j;
        }
        if (lo < 0) {
            ++out.skipped_unaligned;
            continue;
        }
        candidates.push_back({{lo, hi + 1, span.etype}, span, span.etype});
    }
    // leftmost-longest: earlier start wins, longer span breaks start ties
    std::stable_sort(candidates.begin(), candidates.end(), [](const ProjectedEntity& a, const ProjectedEntity& b) {
        if (a.target.start != b.target.start) return a.target.start < b.target.start;
        return a.target.end > b.target.end;
    });
    int covered_until = 0;
    for (auto& c : candidates) {
        if (c.target.start < covered_until) {
            ++out.dropped_overlaps;
            continue;
        }
        covered_until = c.target.end;
        out.entities.push_back(std::move(c));
    }
    std::vector<EntityMention> kept;
    for (const auto& e : out.entities) kept.push_back(e.target);
    out.target.tags = spans_to_iob(kept, static_cast<int>(pair.target_tokens.size()));
    return out;
}

/// Surface form of a projected entity: space-joined target tokens, exact case.
inline std::string entity_surface(const std::vector<std::string>& tokens, const EntityMention& m) {
    std::string s;
    for (int i = m.start; i < m.end; ++i) {
        if (i > m.start) s += ' ';
        s += tokens.at(i);
    }
    return s;
}

/// Per-entity empirical tag distribution P̂(l|e) over a projected corpus,
/// with the raw counts kept alongside.
class FrequencyTable {
public:
    void add(const std::string& surface, const std::string& tag, long count = 1) {
        counts_[surface][tag] += count;
        totals_[surface] += count;
    }

    bool contains(const std::string& surface) const { return totals_.count(surface) > 0; }

    long count(const std::string& surface, const std::string& tag) const {
        auto row = counts_.find(surface);
        if (row == counts_.end()) return 0;
        auto it = row->second.find(tag);
        return it == row->second.end() ? 0 : it->second;
    }

    long total(const std::string& surface) const {
        auto it = totals_.find(surface);
        return it == totals_.end() ? 0 : it->second;
    }

    /// P̂(tag | surface); throws if the surface was never seen.
    double relative_frequency(const std::string& surface, const std::string& tag) const {
        auto it = totals_.find(surface);
        if (it == totals_.end())
            throw std::invalid_argument("FrequencyTable: entity '" + surface +
                                        "' not present (table/corpus mismatch)");
        return static_cast<double>(count(surface, tag)) / static_cast<double>(it->second);
    }

    std::size_t size() const { return counts_.size(); }

    /// Line-oriented export: "surface<TAB>tag<TAB>count<TAB>relfreq".
    void save(std::ostream& out) const {
        char buf[32];
        for (const auto& [surface, row] : counts_) {
            for (const auto& [tag, c] : row) {
                std::snprintf(buf, sizeof(buf), "%.6g",
                              static_cast<double>(c) / static_cast<double>(totals_.at(surface)));
                out << surface << '\t' << tag << '\t' << c << '\t' << buf << '\n';
            }
        }
    }

private:
    std::map<std::string, std::map<std::string, long>> counts_;
    std::map<std::string, long> totals_;
};

inline FrequencyTable build_frequency_table(const std::vector<ProjectedSentence>& corpus) {
    if (corpus.empty()) throw std::invalid_argument("build_frequency_table: empty corpus");
    FrequencyTable table;
    for (const auto& s : corpus)
        for (const auto& e : s.entities)
            table.add(entity_surface(s.target.tokens, e.target), e.projected_tag);
    return table;
}

/// Quality score of Eq.-(5) form: mean of P̂(l'(e)|e) over the sentence's
/// projected entity instances (with multiplicity); 0 when there are none.
inline double quality_score(const ProjectedSentence& s, const FrequencyTable& table) {
    if (s.entities.empty()) return 0.0;
    double sum = 0.0;
    for (const auto& e : s.entities)
        sum += table.relative_frequency(entity_surface(s.target.tokens, e.target), e.projected_tag);
    return sum / static_cast<double>(s.entities.size());
}

struct SelectionThresholds {
    double quality = 0.0;  // q
    int min_entities = 0;  // n

    void check() const {
        if (quality < 0.0 || quality > 1.0)
            throw std::invalid_argument("SelectionThresholds: q must lie in [0,1]");
        if (min_entities < 0) throw std::invalid_argument("SelectionThresholds: n must be >= 0");
    }
};

/// Fills cached_quality on every sentence.
inline void score_corpus(std::vector<ProjectedSentence>& corpus, const FrequencyTable& table) {
    for (auto& s : corpus) s.cached_quality = quality_score(s, table);
}

/// Indices of the sentences with q(y) >= q and n(y) >= n, in order.
inline std::vector<std::size_t> select_indices(const std::vector<ProjectedSentence>& corpus,
                                               const FrequencyTable& table, SelectionThresholds t) {
    t.check();
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        double q = corpus[i].cached_quality ? *corpus[i].cached_quality : quality_score(corpus[i], table);
        if (q >= t.quality && corpus[i].entity_count() >= t.min_entities) keep.push_back(i);
    }
    return keep;
}

inline std::vector<ProjectedSentence> select_data(const std::vector<ProjectedSentence>& corpus,
                                                  const FrequencyTable& table, SelectionThresholds t) {
    std::vector<ProjectedSentence> out;
    for (auto i : select_indices(corpus, table, t)) out.push_back(corpus[i]);
    return out;
}

// ---------------------------------------------------------------------------
// Coordinate search for (q, n)

/// A trained tagger as far as the search is concerned: tokens in, tags out.
using Tagger = std::function<std::vector<std::string>(const std::vector<std::string>& tokens)>;
/// Trains on the selected subset; may throw on degenerate input.
using TrainerCallback = std::function<Tagger(const std::vector<LabeledSentence>& selected)>;
/// Scores a tagger on the dev set (higher is better, typically F1).
using DevEvaluator = std::function<double(const Tagger&, const std::vector<LabeledSentence>& dev)>;

struct SearchGridPoint {
    double quality;
    int min_entities;
    std::size_t selected_sentences;
    double dev_score;
    bool trainer_failed;
};

struct CoordinateSearchResult {
    SelectionThresholds best;
    std::vector<SearchGridPoint> grid;  // 10 points of phase 1, then 5 of phase 2
};

/// Phase 1 fixes n = 3 and sweeps q over {0.0, 0.1, ..., 0.9}; phase 2 fixes
/// the winning q̂ and sweeps n over {1..5}. Ties break toward the smaller
/// threshold. An empty selection (or a trainer failure) scores 0 and is
/// flagged.
inline CoordinateSearchResult coordinate_search(const std::vector<ProjectedSentence>& corpus,
                                                const FrequencyTable& table,
                                                const std::vector<LabeledSentence>& dev_set,
                                                const TrainerCallback& trainer, const DevEvaluator& evaluator) {
    CoordinateSearchResult result;
    auto evaluate_point = [&](double q, int n) {
        SearchGridPoint point{q, n, 0, 0.0, false};
        auto selected = select_data(corpus, table, {q, n});
        point.selected_sentences = selected.size();
        if (selected.empty()) {
            point.trainer_failed = true;
        } else {
            std::vector<LabeledSentence> train;
            train.reserve(selected.size());
            for (const auto& s : selected) train.push_back(s.target);
            try {
                Tagger tagger = trainer(train);
                point.dev_score = evaluator(tagger, dev_set);
            } catch (const std::exception&) {
                point.trainer_failed = true;
                point.dev_score = 0.0;
            }
        }
        result.grid.push_back(point);
        return point.dev_score;
    };

    double best_q = 0.0, best_q_score = -1.0;
    for (int step = 0; step <= 9; ++step) {
        double q = step * 0.1;
        double score = evaluate_point(q, 3);
        if (score > best_q_score) {
            best_q_score = score;
            best_q = q;
        }
    }
    int best_n = 1;
    double best_n_score = -1.0;
    for (int n = 1; n <= 5; ++n) {
        double score = evaluate_point(best_q, n);
        if (score > best_n_score) {
            best_n_score = score;
            best_n = n;
        }
    }
    result.best = {best_q, best_n};
    return result;
}

// ---------------------------------------------------------------------------
// Sidecar exports

/// "sentence_index<TAB>q<TAB>n" for the selected sentences.
inline void write_selection_scores(std::ostream& out, const std::vector<ProjectedSentence>& corpus,
                                   const FrequencyTable& table, const std::vector<std::size_t>& indices) {
    char buf[32];
    for (auto i : indices) {
        double q = corpus[i].cached_quality ? *corpus[i].cached_quality : quality_score(corpus[i], table);
        std::snprintf(buf, sizeof(buf), "%.6g", q);
        out << i << '\t' << buf << '\t' << corpus[i].entity_count() << '\n';
    }
}

inline void write_search_grid(std::ostream& out, const CoordinateSearchResult& r) {
    char buf[32];
    out << "q\tn\tselected\tdev_score\tflag\n";
    for (const auto& p : r.grid) {
        std::snprintf(buf, sizeof(buf), "%.6g", p.dev_score);
        out << p.quality << '\t' << p.min_entities << '\t' << p.selected_sentences << '\t' << buf << '\t'
            << (p.trainer_failed ? "failed" : "ok") << '\n';
    }
    out << "# best q=" << r.best.quality << " n=" << r.best.min_entities << '\n';
}

}  // namespace xlner
