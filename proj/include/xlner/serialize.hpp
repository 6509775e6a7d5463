// Helpers for the line-oriented text model container. Weights are written
// as hex floats so that a load(save(m)) round trip is bit-exact.
#pragma once

#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "xlner/corpus.hpp"

namespace xlner::detail {

inline std::string hexdouble(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%a", v);
    return buf;
}

inline double parse_double(const std::string& s) {
    const char* c = s.c_str();
    char* end = nullptr;
    double v = std::strtod(c, &end);
    if (end == c) throw ParseError("malformed number '" + s + "'");
    return v;
}

inline std::string next_line(std::istream& in, const char* what) {
    std::string line;
    if (!getline_any(in, line)) throw ParseError(std::string("model file truncated; expected ") + what);
    return line;
}

/// Reads "key value..." and checks the key.
inline std::vector<std::string> expect_fields(std::istream& in, const std::string& key, std::size_t n_values) {
    auto fields = split_ws(next_line(in, key.c_str()));
    if (fields.empty() || fields[0] != key)
        throw ParseError("expected '" + key + "' line in model file");
    if (n_values != static_cast<std::size_t>(-1) && fields.size() != n_values + 1)
        throw ParseError("'" + key + "' line has " + itos(fields.size() - 1) + " values, expected " +
                         itos(n_values));
    return fields;
}

inline void write_weights(std::ostream& out, const std::vector<double>& w) {
    out << "weights " << w.size() << '\n';
    for (double v : w) out << hexdouble(v) << '\n';
}

inline std::vector<double> read_weights(std::istream& in) {
    auto header = expect_fields(in, "weights", 1);
    std::size_t n = std::stoul(header[1]);
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) w[i] = parse_double(next_line(in, "weight value"));
    return w;
}

inline void write_tagset(std::ostream& out, const TagSet& ts) {
    out << "types " << ts.num_types() << '\n';
    for (const auto& t : ts.entity_types()) out << t << '\n';
}

inline TagSet read_tagset(std::istream& in) {
    auto header = expect_fields(in, "types", 1);
    std::size_t n = std::stoul(header[1]);
    std::vector<std::string> types(n);
    for (auto& t : types) t = next_line(in, "entity type");
    return TagSet(types);
}

}  // namespace xlner::detail
