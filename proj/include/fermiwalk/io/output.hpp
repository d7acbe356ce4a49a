#pragma once

// Result writers. Floats go out with 17 significant digits in both JSON and
// CSV, so outputs are byte-stable and round-trip exactly.

#include "fermiwalk/io/config.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace fermiwalk::io {

inline std::string fmt17(double x) {
    if (std::isnan(x)) return "NaN";
    if (std::isinf(x)) return x > 0 ? "Infinity" : "-Infinity";
    if (x == 0.0) return "0"; // no "-0"
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

namespace detail {

inline void dump_value(const json& j, std::string& out, int level) {
    const std::string pad(2 * (level + 1), ' '), close(2 * level, ' ');
    switch (j.type()) {
    case json::value_t::object: {
        if (j.empty()) {
            out += "{}";
            return;
        }
        out += "{\n";
        bool first = true;
        for (auto it = j.begin(); it != j.end(); ++it) {
            if (!first) out += ",\n";
            first = false;
            out += pad + json(it.key()).dump() + ": ";
            dump_value(it.value(), out, level + 1);
        }
        out += "\n" + close + "}";
        return;
    }
    case json::value_t::array: {
        if (j.empty()) {
            out += "[]";
            return;
        }
        // scalar arrays stay on one line
        bool flat = true;
        for (const auto& e : j) flat = flat && !e.is_structured();
        if (flat) {
            out += "[";
            for (std::size_t k = 0; k < j.size(); ++k) {
                if (k) out += ", ";
                dump_value(j[k], out, level + 1);
            }
            out += "]";
            return;
        }
        out += "[\n";
        for (std::size_t k = 0; k < j.size(); ++k) {
            if (k) out += ",\n";
            out += pad;
            dump_value(j[k], out, level + 1);
        }
        out += "\n" + close + "]";
        return;
    }
    case json::value_t::number_float: {
        const double x = j.get<double>();
        // JSON has no NaN or infinity
        out += std::isfinite(x) ? fmt17(x) : "null";
        return;
    }
    default:
        out += j.dump();
    }
}

} // namespace detail

inline std::string dump_json(const json& j) {
    std::string out;
    detail::dump_value(j, out, 0);
    out += "\n";
    return out;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ValidationError("cannot write '" + path.string() + "'");
    f << text;
}

/// Plain table with a one-line header.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    std::string str() const {
        std::string out;
        for (std::size_t k = 0; k < header.size(); ++k) out += (k ? "," : "") + header[k];
        out += "\n";
        for (const auto& r : rows) {
            for (std::size_t k = 0; k < r.size(); ++k) out += (k ? "," : "") + fmt17(r[k]);
            out += "\n";
        }
        return out;
    }
};

/// Row-major matrix CSV with quoted "re,im" cells.
inline std::string matrix_csv(const CMatrix& a) {
    std::string out;
    for (Eigen::Index r = 0; r < a.rows(); ++r) {
        for (Eigen::Index c = 0; c < a.cols(); ++c) {
            if (c) out += ",";
            out += "\"" + fmt17(a(r, c).real()) + "," + fmt17(a(r, c).imag()) + "\"";
        }
        out += "\n";
    }
    return out;
}

inline json real_json(const RVector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

inline json real_matrix_json(const RMatrix& m) {
    json a = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) a.push_back(real_json(m.row(r).transpose()));
    return a;
}

} // namespace fermiwalk::io
