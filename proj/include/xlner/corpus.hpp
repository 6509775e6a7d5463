// Domain types for IOB2 sequence labeling plus readers/writers for the
// corpus file formats (CoNLL columns, Pharaoh alignments, confidence
// sidecars). All types are immutable after construction and safe for
// concurrent reads.
#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace xlner {

class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string itos(long long v) { return std::to_string(v); }

inline bool has_whitespace(std::string_view s) {
    for (char c : s)
        if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f') return true;
    return false;
}

inline std::vector<std::string> split_ws(std::string_view line) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        std::size_t j = i;
        while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
        if (j > i) out.emplace_back(line.substr(i, j - i));
        i = j;
    }
    return out;
}

// getline that accepts both LF and CRLF.
inline bool getline_any(std::istream& in, std::string& line) {
    if (!std::getline(in, line)) return false;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Tag inventory

/// Ordered set of entity type names. The derived label alphabet is
/// {O} ∪ {B-t, I-t : t ∈ entity_types}, with ids assigned as
/// O = 0, B-t_k = 2k+1, I-t_k = 2k+2.
class TagSet {
public:
    static constexpr int kOutside = 0;

    TagSet() = default;

    explicit TagSet(std::vector<std::string> entity_types) : types_(std::move(entity_types)) {
        for (const auto& t : types_) {
            if (t.empty() || detail::has_whitespace(t))
                throw std::invalid_argument("TagSet: entity type must be non-empty without whitespace: '" + t + "'");
        }
        labels_.push_back("O");
        for (const auto& t : types_) {
            labels_.push_back("B-" + t);
            labels_.push_back("I-" + t);
        }
        for (int i = 0; i < static_cast<int>(labels_.size()); ++i) {
            if (!ids_.emplace(labels_[i], i).second)
                throw std::invalid_argument("TagSet: duplicate entity type '" + labels_[i] + "'");
        }
    }

    int num_labels() const { return static_cast<int>(labels_.size()); }
    int num_types() const { return static_cast<int>(types_.size()); }
    const std::vector<std::string>& entity_types() const { return types_; }

    const std::string& label_name(int id) const { return labels_.at(id); }

    int label_id(const std::string& name) const {
        auto it = ids_.find(name);
        if (it == ids_.end()) throw std::out_of_range("TagSet: unknown label '" + name + "'");
        return it->second;
    }

    std::optional<int> find_label(const std::string& name) const {
        auto it = ids_.find(name);
        if (it == ids_.end()) return std::nullopt;
        return it->second;
    }

    bool is_begin(int id) const { return id > 0 && (id % 2) == 1; }
    bool is_inside(int id) const { return id > 0 && (id % 2) == 0; }

    /// Index into entity_types(), or -1 for the O label.
    int type_index(int id) const { return id == 0 ? -1 : (id - 1) / 2; }

    int begin_label(int type_index) const { return 2 * type_index + 1; }
    int inside_label(int type_index) const { return 2 * type_index + 2; }

    /// IOB2 rule: I-t may only follow B-t or I-t of the same type.
    bool valid_transition(int prev, int next) const {
        if (!is_inside(next)) return true;
        return (is_begin(prev) || is_inside(prev)) && type_index(prev) == type_index(next);
    }

    /// Labels admissible at sentence start (everything except I-*).
    bool valid_start(int label) const { return !is_inside(label); }

private:
    std::vector<std::string> types_;
    std::vector<std::string> labels_;
    std::map<std::string, int> ids_;
};

// ---------------------------------------------------------------------------
// Sentences and spans

/// Token sequence plus an IOB2 tag per token; the universal unit of
/// training and decoding data.
struct LabeledSentence {
    std::vector<std::string> tokens;
    std::vector<std::string> tags;

    std::size_t size() const { return tokens.size(); }
    bool operator==(const LabeledSentence&) const = default;
};

/// Half-open token span [start, end) with an entity type name.
struct EntityMention {
    int start = 0;
    int end = 0;
    std::string etype;

    int length() const { return end - start; }
    bool overlaps(const EntityMention& o) const { return start < o.end && o.start < end; }
    bool same_span(const EntityMention& o) const { return start == o.start && end == o.end; }
    bool operator==(const EntityMention&) const = default;
    auto operator<=>(const EntityMention&) const = default;
};

inline std::string to_string(const EntityMention& m) {
    return "(" + detail::itos(m.start) + "," + detail::itos(m.end) + "," + m.etype + ")";
}

using AlignmentLinks = std::set<std::pair<int, int>>;

/// Source sentence (optionally tagged), target tokens, and word-alignment
/// links (i, j): source token i aligns to target token j. Links may be
/// many-to-many.
struct AlignedSentencePair {
    std::vector<std::string> source_tokens;
    std::vector<std::string> source_tags;  // empty when the source side is unlabeled
    std::vector<std::string> target_tokens;
    AlignmentLinks links;

    void check() const {
        for (const auto& [i, j] : links) {
            if (i < 0 || i >= static_cast<int>(source_tokens.size()) || j < 0 ||
                j >= static_cast<int>(target_tokens.size()))
                throw std::invalid_argument("AlignedSentencePair: link (" + detail::itos(i) + "," +
                                            detail::itos(j) + ") out of bounds");
        }
        if (!source_tags.empty() && source_tags.size() != source_tokens.size())
            throw std::invalid_argument("AlignedSentencePair: source tag/token length mismatch");
    }
};

/// Decoded tags plus a per-token confidence in [0,1].
struct ConfidenceTaggedSentence {
    std::vector<std::string> tokens;
    std::vector<std::string> tags;
    std::vector<double> confidences;

    std::size_t size() const { return tokens.size(); }
    LabeledSentence labeled() const { return {tokens, tags}; }
};

// ---------------------------------------------------------------------------
// IOB tag sequences

/// Split "O" / "B-t" / "I-t" into (kind, type). kind: 'O', 'B' or 'I'.
inline std::pair<char, std::string_view> parse_iob_tag(std::string_view tag) {
    if (tag == "O") return {'O', {}};
    if (tag.size() >= 3 && (tag[0] == 'B' || tag[0] == 'I') && tag[1] == '-')
        return {tag[0], tag.substr(2)};
    throw ParseError("invalid tag string '" + std::string(tag) + "'");
}

inline bool is_iob_tag(std::string_view tag) {
    if (tag == "O") return true;
    return tag.size() >= 3 && (tag[0] == 'B' || tag[0] == 'I') && tag[1] == '-';
}

/// True iff every I-t immediately follows B-t or I-t of the same type.
inline bool is_iob2_valid(const std::vector<std::string>& tags) {
    std::string_view prev_type;
    char prev_kind = 'O';
    for (const auto& t : tags) {
        if (!is_iob_tag(t)) return false;
        auto [kind, type] = parse_iob_tag(t);
        if (kind == 'I' && !((prev_kind == 'B' || prev_kind == 'I') && prev_type == type)) return false;
        prev_kind = kind;
        prev_type = type;
    }
    return true;
}

/// IOB1 → IOB2: an I-t that opens an entity (at sentence start, after O, or
/// after an entity of a different type) becomes B-t. Idempotent on IOB2 input.
inline std::vector<std::string> normalize_to_iob2(const std::vector<std::string>& tags) {
    std::vector<std::string> out;
    out.reserve(tags.size());
    char prev_kind = 'O';
    std::string prev_type;
    for (const auto& t : tags) {
        auto [kind, type] = parse_iob_tag(t);
        if (kind == 'I' && !((prev_kind == 'B' || prev_kind == 'I') && prev_type == type))
            out.push_back("B-" + std::string(type));
        else
            out.push_back(t);
        prev_kind = kind;
        prev_type = std::string(type);
    }
    return out;
}

/// Extract entity spans from an IOB2 tag sequence. Spans come out sorted by
/// start and non-overlapping. Throws on an invalid sequence, naming the index.
inline std::vector<EntityMention> iob_to_spans(const std::vector<std::string>& tags) {
    std::vector<EntityMention> spans;
    char prev_kind = 'O';
    std::string prev_type;
    for (int i = 0; i < static_cast<int>(tags.size()); ++i) {
        char kind;
        std::string_view type;
        try {
            std::tie(kind, type) = parse_iob_tag(tags[i]);
        } catch (const ParseError&) {
            throw ParseError("invalid IOB tag '" + tags[i] + "' at index " + detail::itos(i));
        }
        if (kind == 'I') {
            if (!((prev_kind == 'B' || prev_kind == 'I') && prev_type == type))
                throw ParseError("I-" + std::string(type) + " at index " + detail::itos(i) +
                                 " does not continue an entity of the same type");
            spans.back().end = i + 1;
        } else if (kind == 'B') {
            spans.push_back({i, i + 1, std::string(type)});
        }
        prev_kind = kind;
        prev_type = std::string(type);
    }
    return spans;
}

/// Inverse of iob_to_spans. Spans must lie in [0, length) and be pairwise
/// non-overlapping; violations are reported naming both offenders.
inline std::vector<std::string> spans_to_iob(const std::vector<EntityMention>& spans, int length) {
    std::vector<EntityMention> sorted = spans;
    std::sort(sorted.begin(), sorted.end(),
              [](const EntityMention& a, const EntityMention& b) { return a.start < b.start; });
    std::vector<std::string> tags(length, "O");
    const EntityMention* prev = nullptr;
    for (const auto& s : sorted) {
        if (s.start < 0 || s.end > length || s.start >= s.end)
            throw std::invalid_argument("span " + to_string(s) + " out of range for length " +
                                        detail::itos(length));
        if (prev && prev->end > s.start)
            throw std::invalid_argument("overlapping spans " + to_string(*prev) + " and " + to_string(s));
        tags[s.start] = "B-" + s.etype;
        for (int i = s.start + 1; i < s.end; ++i) tags[i] = "I-" + s.etype;
        prev = &s;
    }
    return tags;
}

/// Mean of the token confidences over the entity span.
inline double entity_confidence(const ConfidenceTaggedSentence& s, const EntityMention& m) {
    double sum = 0.0;
    for (int i = m.start; i < m.end; ++i) sum += s.confidences.at(i);
    return sum / m.length();
}

// ---------------------------------------------------------------------------
// CoNLL column format

/// Read CoNLL-style columns: one token per line, whitespace-separated
/// columns, blank line ends a sentence. The token is column 0; the tag
/// column defaults to the last column (tag_column = -1). IOB1 input is
/// normalized to IOB2 on read.
inline std::vector<LabeledSentence> read_conll(std::istream& in, int tag_column = -1) {
    std::vector<LabeledSentence> sentences;
    LabeledSentence current;
    std::string line;
    long line_no = 0;

    auto flush = [&]() {
        if (current.tokens.empty()) return;
        current.tags = normalize_to_iob2(current.tags);
        sentences.push_back(std::move(current));
        current = {};
    };

    while (detail::getline_any(in, line)) {
        ++line_no;
        auto cols = detail::split_ws(line);
        if (cols.empty()) {
            flush();
            continue;
        }
        int tc = tag_column < 0 ? static_cast<int>(cols.size()) - 1 : tag_column;
        if (tc >= static_cast<int>(cols.size()))
            throw ParseError("line " + detail::itos(line_no) + ": expected tag column " +
                             detail::itos(tc) + " but found " + detail::itos(cols.size()) + " columns");
        if (tc == 0)
            throw ParseError("line " + detail::itos(line_no) + ": tag column collides with the token column");
        if (!is_iob_tag(cols[tc]))
            throw ParseError("line " + detail::itos(line_no) + ": invalid tag string '" + cols[tc] + "'");
        current.tokens.push_back(cols[0]);
        current.tags.push_back(cols[tc]);
    }
    flush();
    return sentences;
}

/// Write two-column CoNLL ("token tag"), LF line endings, one blank line
/// after every sentence. read_conll(write_conll(s)) == s.
inline void write_conll(std::ostream& out, const std::vector<LabeledSentence>& sentences) {
    for (const auto& s : sentences) {
        if (s.tokens.size() != s.tags.size())
            throw std::invalid_argument("write_conll: token/tag length mismatch");
        for (std::size_t i = 0; i < s.tokens.size(); ++i) {
            const auto& tok = s.tokens[i];
            if (tok.empty() || detail::has_whitespace(tok))
                throw std::invalid_argument("write_conll: token '" + tok + "' is empty or contains whitespace");
            if (!is_iob_tag(s.tags[i]))
                throw std::invalid_argument("write_conll: invalid tag '" + s.tags[i] + "'");
            out << tok << ' ' << s.tags[i] << '\n';
        }
        out << '\n';
    }
}

/// Tokens only, one sentence per line, space-separated (for unlabeled text).
inline std::vector<std::vector<std::string>> read_token_lines(std::istream& in) {
    std::vector<std::vector<std::string>> out;
    std::string line;
    while (detail::getline_any(in, line)) out.push_back(detail::split_ws(line));
    return out;
}

inline void write_token_lines(std::ostream& out, const std::vector<std::vector<std::string>>& sentences) {
    for (const auto& s : sentences) {
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (i) out << ' ';
            out << s[i];
        }
        out << '\n';
    }
}

// ---------------------------------------------------------------------------
// Pharaoh alignment format

/// One sentence pair per line, space-separated "i-j" pairs, 0-based.
/// An empty line yields an empty link set.
inline std::vector<AlignmentLinks> read_alignments(std::istream& in) {
    std::vector<AlignmentLinks> out;
    std::string line;
    long line_no = 0;
    while (detail::getline_any(in, line)) {
        ++line_no;
        AlignmentLinks links;
        for (const auto& tok : detail::split_ws(line)) {
            auto dash = tok.find('-');
            bool ok = dash != std::string::npos && dash > 0 && dash + 1 < tok.size();
            if (ok) {
                for (std::size_t k = 0; k < tok.size() && ok; ++k)
                    if (k != dash && !std::isdigit(static_cast<unsigned char>(tok[k]))) ok = false;
            }
            if (!ok)
                throw ParseError("line " + detail::itos(line_no) + ": malformed alignment pair '" + tok + "'");
            links.emplace(std::stoi(tok.substr(0, dash)), std::stoi(tok.substr(dash + 1)));
        }
        out.push_back(std::move(links));
    }
    return out;
}

inline void write_alignments(std::ostream& out, const std::vector<AlignmentLinks>& alignments) {
    for (const auto& links : alignments) {
        bool first = true;
        for (const auto& [i, j] : links) {
            if (!first) out << ' ';
            out << i << '-' << j;
            first = false;
        }
        out << '\n';
    }
}

// ---------------------------------------------------------------------------
// Confidence sidecar ("sent<TAB>token<TAB>conf")

inline void write_confidence_sidecar(std::ostream& out, const std::vector<ConfidenceTaggedSentence>& sents) {
    out.precision(17);
    for (std::size_t s = 0; s < sents.size(); ++s)
        for (std::size_t t = 0; t < sents[s].confidences.size(); ++t)
            out << s << '\t' << t << '\t' << sents[s].confidences[t] << '\n';
}

/// Returns per-sentence confidence vectors; sentence/token indices must be
/// dense and in order.
inline std::vector<std::vector<double>> read_confidence_sidecar(std::istream& in) {
    std::vector<std::vector<double>> out;
    std::string line;
    long line_no = 0;
    while (detail::getline_any(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto cols = detail::split_ws(line);
        if (cols.size() != 3)
            throw ParseError("line " + detail::itos(line_no) + ": expected 'sent<TAB>token<TAB>conf'");
        std::size_t s = 0, t = 0;
        double c = 0.0;
        try {
            s = std::stoul(cols[0]);
            t = std::stoul(cols[1]);
            c = std::stod(cols[2]);
        } catch (const std::exception&) {
            throw ParseError("line " + detail::itos(line_no) + ": malformed confidence entry");
        }
        if (s == out.size()) out.emplace_back();
        if (s != out.size() - 1 || t != out.back().size())
            throw ParseError("line " + detail::itos(line_no) + ": non-contiguous sidecar indices");
        out.back().push_back(c);
    }
    return out;
}

}  // namespace xlner
