// Exact-phrasal-match precision/recall/F1 (overall and per entity type) and
// the stratified shuffling significance test with sentences as strata.
#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "xlner/corpus.hpp"
#include "xlner/numeric.hpp"

namespace xlner {

struct EvalCounts {
    long gold = 0;
    long predicted = 0;
    long correct = 0;

    double precision() const { return predicted == 0 ? 0.0 : static_cast<double>(correct) / predicted; }
    double recall() const { return gold == 0 ? 0.0 : static_cast<double>(correct) / gold; }
    double f1() const {
        double p = precision(), r = recall();
        return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
    }
};

struct EvalReport {
    EvalCounts overall;
    std::map<std::string, EvalCounts> per_type;
};

namespace detail {

inline void check_aligned(const std::vector<LabeledSentence>& gold, const std::vector<LabeledSentence>& pred,
                          const char* what) {
    if (gold.size() != pred.size())
        throw std::invalid_argument(std::string(what) + ": corpus sizes differ (" + itos(gold.size()) +
                                    " vs " + itos(pred.size()) + " sentences)");
    for (std::size_t i = 0; i < gold.size(); ++i)
        if (gold[i].tokens.size() != pred[i].tokens.size())
            throw std::invalid_argument(std::string(what) + ": tokenization differs at sentence " + itos(i));
}

/// Per-sentence (gold, predicted, correct) triple under exact phrasal match.
inline EvalCounts sentence_counts(const LabeledSentence& gold, const LabeledSentence& pred) {
    auto gs = iob_to_spans(gold.tags);
    auto ps = iob_to_spans(pred.tags);
    EvalCounts c;
    c.gold = static_cast<long>(gs.size());
    c.predicted = static_cast<long>(ps.size());
    for (const auto& p : ps)
        if (std::find(gs.begin(), gs.end(), p) != gs.end()) ++c.correct;
    return c;
}

}  // namespace detail

/// An entity is correct iff start, end and type all match a gold entity.
inline EvalReport phrasal_f1(const std::vector<LabeledSentence>& gold,
                             const std::vector<LabeledSentence>& pred) {
    detail::check_aligned(gold, pred, "phrasal_f1");
    EvalReport report;
    for (std::size_t i = 0; i < gold.size(); ++i) {
        auto gs = iob_to_spans(gold[i].tags);
        auto ps = iob_to_spans(pred[i].tags);
        report.overall.gold += static_cast<long>(gs.size());
        report.overall.predicted += static_cast<long>(ps.size());
        for (const auto& g : gs) ++report.per_type[g.etype].gold;
        for (const auto& p : ps) {
            ++report.per_type[p.etype].predicted;
            if (std::find(gs.begin(), gs.end(), p) != gs.end()) {
                ++report.overall.correct;
                ++report.per_type[p.etype].correct;
            }
        }
    }
    return report;
}

/// F1 from pre-aggregated per-sentence counts.
inline double f1_from_counts(const std::vector<EvalCounts>& counts) {
    EvalCounts total;
    for (const auto& c : counts) {
        total.gold += c.gold;
        total.predicted += c.predicted;
        total.correct += c.correct;
    }
    return total.f1();
}

/// Stratified shuffling test with sentences as strata: the observed statistic
/// is |F1(a) − F1(b)|; each iteration swaps the two systems' outputs per
/// sentence with probability 1/2 and recomputes it. Returns the add-one
/// smoothed p-value (1 + #{shuffled >= observed}) / (1 + iterations).
/// Iterations draw their RNG streams from (seed, iteration), so the result
/// does not depend on evaluation order.
inline double stratified_shuffling_test(const std::vector<LabeledSentence>& outputs_a,
                                        const std::vector<LabeledSentence>& outputs_b,
                                        const std::vector<LabeledSentence>& gold, long iterations,
                                        std::uint64_t seed) {
    if (iterations < 1) throw std::invalid_argument("stratified_shuffling_test: iterations must be >= 1");
    detail::check_aligned(gold, outputs_a, "stratified_shuffling_test");
    detail::check_aligned(gold, outputs_b, "stratified_shuffling_test");
    const std::size_t n = gold.size();
    std::vector<EvalCounts> ca(n), cb(n);
    for (std::size_t i = 0; i < n; ++i) {
        ca[i] = detail::sentence_counts(gold[i], outputs_a[i]);
        cb[i] = detail::sentence_counts(gold[i], outputs_b[i]);
    }
    const double observed = std::abs(f1_from_counts(ca) - f1_from_counts(cb));

    long at_least = 0;
    std::vector<EvalCounts> sa(n), sb(n);
    for (long it = 0; it < iterations; ++it) {
        auto rng = make_rng(seed, static_cast<std::uint64_t>(it));
        std::uniform_int_distribution<int> coin(0, 1);
        for (std::size_t i = 0; i < n; ++i) {
            if (coin(rng)) {
                sa[i] = cb[i];
                sb[i] = ca[i];
            } else {
                sa[i] = ca[i];
                sb[i] = cb[i];
            }
        }
        double stat = std::abs(f1_from_counts(sa) - f1_from_counts(sb));
        if (stat >= observed) ++at_least;
    }
    return static_cast<double>(1 + at_least) / static_cast<double>(1 + iterations);
}

// ---------------------------------------------------------------------------
// Report rendering

/// Aligned-column text table, overall row last.
inline void write_report_text(std::ostream& out, const EvalReport& r) {
    char line[160];
    std::snprintf(line, sizeof(line), "%-12s %9s %9s %9s %7s %7s %7s\n", "type", "gold", "pred", "correct",
                  "P", "R", "F1");
    out << line;
    auto row = [&](const std::string& name, const EvalCounts& c) {
        std::snprintf(line, sizeof(line), "%-12s %9ld %9ld %9ld %7.4f %7.4f %7.4f\n", name.c_str(), c.gold,
                      c.predicted, c.correct, c.precision(), c.recall(), c.f1());
        out << line;
    };
    for (const auto& [type, counts] : r.per_type) row(type, counts);
    row("OVERALL", r.overall);
}

/// Machine-readable "key<TAB>value" lines with stable keys.
inline void write_report_kv(std::ostream& out, const EvalReport& r) {
    char buf[32];
    auto emit = [&](const std::string& key, double v) {
        std::snprintf(buf, sizeof(buf), "%.6f", v);
        out << key << '\t' << buf << '\n';
    };
    out << "gold\t" << r.overall.gold << '\n';
    out << "predicted\t" << r.overall.predicted << '\n';
    out << "correct\t" << r.overall.correct << '\n';
    emit("precision", r.overall.precision());
    emit("recall", r.overall.recall());
    emit("f1", r.overall.f1());
    for (const auto& [type, c] : r.per_type) {
        emit("precision." + type, c.precision());
        emit("recall." + type, c.recall());
        emit("f1." + type, c.f1());
    }
}

}  // namespace xlner
