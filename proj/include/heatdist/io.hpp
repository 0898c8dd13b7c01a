#pragma once

#include <charconv>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "heatdist/analysis.hpp"
#include "heatdist/diffuse.hpp"
#include "heatdist/error.hpp"
#include "heatdist/graph.hpp"
#include "heatdist/matrix.hpp"

namespace heatdist::io {

/// Shortest decimal form that parses back to the same double.
inline std::string format_double(double x) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s, const std::string& where) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size() || s.empty())
        throw ParseError(where + ": not a number: '" + std::string(s) + "'");
    return v;
}

inline long long parse_integer(std::string_view s, const std::string& where) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    long long v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size() || s.empty())
        throw ParseError(where + ": not an integer: '" + std::string(s) + "'");
    return v;
}

namespace detail {

inline std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = line.find(sep, start);
        out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) return out;
        start = pos + 1;
    }
}

inline std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
        const std::size_t start = i;
        while (i < line.size() && !(line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
        if (i > start) out.push_back(line.substr(start, i - start));
    }
    return out;
}

inline bool blank(std::string_view line) { return split_ws(line).empty(); }

inline std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw ParseError("cannot open " + path.string());
    return f;
}

inline std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot write " + path.string());
    return f;
}

}  // namespace detail

// --- graph text format --------------------------------------------------------------
// line 1 "n m", then m lines "i j w" (0-based); lines starting with '#' are comments.

inline Graph read_graph(std::istream& in, const std::string& name = "graph") {
    std::string line;
    std::vector<std::string> storage;
    while (std::getline(in, line)) {
        std::string_view v(line);
        const auto first = v.find_first_not_of(" \t");
        if (first != std::string_view::npos && v[first] == '#') continue;
        if (detail::blank(v)) continue;
        storage.push_back(line);
    }
    if (storage.empty()) throw ParseError(name + ": missing header line 'n m'");
    const auto header = detail::split_ws(storage[0]);
    if (header.size() != 2) throw ParseError(name + ": header must be 'n m'");
    const long long n = parse_integer(header[0], name + " header");
    const long long m = parse_integer(header[1], name + " header");
    if (n < 0 || m < 0) throw ParseError(name + ": negative counts in header");
    if (storage.size() - 1 != static_cast<std::size_t>(m))
        throw ParseError(name + ": header declares " + std::to_string(m) + " edges, found " +
                         std::to_string(storage.size() - 1));
    std::vector<Edge> edges;
    edges.reserve(static_cast<std::size_t>(m));
    for (std::size_t k = 1; k < storage.size(); ++k) {
        const auto f = detail::split_ws(storage[k]);
        const std::string where = name + " edge " + std::to_string(k - 1);
        if (f.size() != 3) throw ParseError(where + ": expected 'i j w'");
        const long long i = parse_integer(f[0], where), j = parse_integer(f[1], where);
        if (i < 0 || j < 0) throw ParseError(where + ": negative node index");
        edges.push_back({static_cast<std::size_t>(i), static_cast<std::size_t>(j), parse_double(f[2], where)});
    }
    return build_graph(static_cast<std::size_t>(n), std::move(edges));
}

inline Graph read_graph(const std::filesystem::path& path) {
    auto f = detail::open_in(path);
    return read_graph(f, path.string());
}

inline void write_graph(std::ostream& out, const Graph& g) {
    out << g.node_count() << ' ' << g.edge_count() << '\n';
    for (const Edge& e : g.edges()) out << e.i << ' ' << e.j << ' ' << format_double(e.w) << '\n';
}

inline void write_graph(const std::filesystem::path& path, const Graph& g) {
    auto f = detail::open_out(path);
    write_graph(f, g);
}

// --- labels: one integer per line ---------------------------------------------------

inline std::vector<int> read_labels(std::istream& in, const std::string& name = "labels") {
    std::vector<int> labels;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (detail::blank(line)) continue;
        labels.push_back(static_cast<int>(parse_integer(line, name + " line " + std::to_string(lineno))));
    }
    return labels;
}

inline std::vector<int> read_labels(const std::filesystem::path& path) {
    auto f = detail::open_in(path);
    return read_labels(f, path.string());
}

inline void write_labels(std::ostream& out, std::span<const int> labels) {
    for (int l : labels) out << l << '\n';
}

inline void write_labels(const std::filesystem::path& path, std::span<const int> labels) {
    auto f = detail::open_out(path);
    write_labels(f, labels);
}

// --- numeric CSV ------------------------------------------------------------------

inline void write_row(std::ostream& out, std::span<const double> row) {
    for (std::size_t j = 0; j < row.size(); ++j) {
        if (j) out << ',';
        out << format_double(row[j]);
    }
}

/// n header-less rows of n comma-separated values.
inline void write_distance_csv(std::ostream& out, const SymMatrix& d) {
    for (std::size_t i = 0; i < d.size(); ++i) {
        write_row(out, d.row(i));
        out << '\n';
    }
}

inline SymMatrix read_distance_csv(std::istream& in, const std::string& name = "distances") {
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (detail::blank(line)) continue;
        std::vector<double> row;
        for (auto cell : detail::split(line, ','))
            row.push_back(parse_double(cell, name + " row " + std::to_string(rows.size())));
        rows.push_back(std::move(row));
    }
    const std::size_t n = rows.size();
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        if (rows[i].size() != n) throw DimensionMismatch(name + " row " + std::to_string(i), n, rows[i].size());
        for (std::size_t j = 0; j < n; ++j) m(i, j) = rows[i][j];
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (m(i, i) != 0.0) throw ParseError(name + ": nonzero diagonal at row " + std::to_string(i));
        for (std::size_t j = i + 1; j < n; ++j) {
            if (m(i, j) != m(j, i))
                throw ParseError(name + ": not symmetric at (" + std::to_string(i) + ", " + std::to_string(j) + ")");
            if (m(i, j) < 0.0) throw ParseError(name + ": negative distance");
        }
    }
    return SymMatrix::from_upper(m);
}

inline SymMatrix read_distance_csv(const std::filesystem::path& path) {
    auto f = detail::open_in(path);
    return read_distance_csv(f, path.string());
}

/// One signal per row; with `labelled`, a final integer label column.
inline void write_signals_csv(std::ostream& out, const SignalSet& set, bool labelled) {
    set.validate();
    if (labelled && !set.labels) throw InvalidArgument("write_signals_csv: signal set has no labels");
    for (std::size_t k = 0; k < set.count(); ++k) {
        write_row(out, set.signals[k]);
        if (labelled) out << ',' << (*set.labels)[k];
        out << '\n';
    }
}

inline SignalSet read_signals_csv(std::istream& in, bool labelled, const std::string& name = "signals") {
    SignalSet set;
    if (labelled) set.labels.emplace();
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (detail::blank(line)) continue;
        auto cells = detail::split(line, ',');
        const std::string where = name + " row " + std::to_string(set.count());
        if (labelled) {
            if (cells.size() < 2) throw ParseError(where + ": missing label column");
            set.labels->push_back(static_cast<int>(parse_integer(cells.back(), where + " label")));
            cells.pop_back();
        }
        if (first) {
            set.n = cells.size();
            first = false;
        } else if (cells.size() != set.n) {
            throw DimensionMismatch(where, set.n, cells.size());
        }
        Vector v;
        v.reserve(cells.size());
        for (auto c : cells) v.push_back(parse_double(c, where));
        set.signals.push_back(std::move(v));
    }
    return set;
}

inline SignalSet read_signals_csv(const std::filesystem::path& path, bool labelled) {
    auto f = detail::open_in(path);
    return read_signals_csv(f, labelled, path.string());
}

inline void write_samples_csv(std::ostream& out, std::span<const PerturbationSample> samples) {
    out << "e_norm,dev_diff,dev_sps,norm_dev_diff,norm_dev_sps\n";
    for (const auto& s : samples) {
        const double row[] = {s.e_norm, s.dev_diff, s.dev_sps, s.norm_dev_diff, s.norm_dev_sps};
        write_row(out, row);
        out << '\n';
    }
}

/// Header x0..x{dim-1}, plus a label column when labels are given.
inline void write_coordinates_csv(std::ostream& out, const Matrix& coords, const std::vector<int>* labels = nullptr) {
    if (labels && labels->size() != coords.rows())
        throw DimensionMismatch("write_coordinates_csv: labels", coords.rows(), labels->size());
    for (std::size_t j = 0; j < coords.cols(); ++j) out << (j ? "," : "") << 'x' << j;
    if (labels) out << ",label";
    out << '\n';
    for (std::size_t i = 0; i < coords.rows(); ++i) {
        write_row(out, coords.row(i));
        if (labels) out << ',' << (*labels)[i];
        out << '\n';
    }
}

}  // namespace heatdist::io
