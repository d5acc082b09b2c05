#pragma once

// Text formats: whitespace edge lists, a Pajek .net subset, `label module`
// partition files and CSV rankings.

#include <smartwalk/graph.hpp>
#include <smartwalk/partition.hpp>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace smartwalk {

class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, const std::string& what)
        : std::runtime_error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
          line_(line) {}
    /// 1-based line number, 0 when the error is not tied to a line.
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

struct EdgeListOptions {
    /// Field separator; 0 means any run of whitespace.
    char delimiter = 0;
    /// Smallest node index in the file (0 or 1). Ignored when `labels` is set.
    int index_base = 0;
    double default_weight = 1.0;
    /// Treat the first two fields as opaque labels instead of integers.
    bool labels = false;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

inline std::vector<std::string_view> split_fields(std::string_view line, char delimiter) {
    std::vector<std::string_view> out;
    if (delimiter == 0) {
        std::size_t i = 0;
        while (i < line.size()) {
            while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
            std::size_t j = i;
            while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
            if (j > i) out.push_back(line.substr(i, j - i));
            i = j;
        }
    } else {
        std::size_t start = 0;
        for (std::size_t i = 0; i <= line.size(); ++i) {
            if (i == line.size() || line[i] == delimiter) {
                out.push_back(trim(line.substr(start, i - start)));
                start = i + 1;
            }
        }
    }
    return out;
}

inline std::optional<long long> parse_int(std::string_view s) {
    long long v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

inline std::optional<double> parse_double(std::string_view s) {
    // from_chars<double> is available in libstdc++ 11.
    double v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

inline double parse_weight(std::string_view field, std::size_t line_no) {
    auto w = parse_double(field);
    if (!w) throw ParseError(line_no, "invalid weight '" + std::string(field) + "'");
    if (!(*w > 0.0) || !std::isfinite(*w)) {
        throw ParseError(line_no, "non-positive weight " + std::string(field));
    }
    return *w;
}

}  // namespace detail

/// Reads `source target [weight]` lines. `#` starts a comment.
inline Graph load_edge_list(std::istream& in, const EdgeListOptions& opts = {}) {
    if (opts.index_base != 0 && opts.index_base != 1) {
        throw std::invalid_argument("index base must be 0 or 1");
    }
    if (!(opts.default_weight > 0.0)) throw std::invalid_argument("default weight must be positive");

    std::vector<Edge> edges;
    std::vector<std::string> labels;
    std::unordered_map<std::string, NodeId> label_index;
    long long max_index = -1;

    auto node_for = [&](std::string_view field, std::size_t line_no) -> NodeId {
        if (opts.labels) {
            auto [it, inserted] = label_index.try_emplace(std::string(field), static_cast<NodeId>(labels.size()));
            if (inserted) labels.emplace_back(field);
            return it->second;
        }
        auto v = detail::parse_int(field);
        if (!v) throw ParseError(line_no, "invalid node index '" + std::string(field) + "'");
        long long idx = *v - opts.index_base;
        if (idx < 0 || idx > static_cast<long long>(UINT32_MAX - 1)) {
            throw ParseError(line_no, "node index " + std::string(field) + " out of range");
        }
        max_index = std::max(max_index, idx);
        return static_cast<NodeId>(idx);
    };

    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string_view line = raw;
        if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        auto fields = detail::split_fields(line, opts.delimiter);
        if (fields.size() < 2 || fields.size() > 3) {
            throw ParseError(line_no, "expected 'source target [weight]', got " +
                                          std::to_string(fields.size()) + " fields");
        }
        NodeId s = node_for(fields[0], line_no);
        NodeId t = node_for(fields[1], line_no);
        double w = fields.size() == 3 ? detail::parse_weight(fields[2], line_no) : opts.default_weight;
        edges.push_back(Edge{s, t, w});
    }
    if (edges.empty()) throw ParseError(0, "edge list contains no edges");

    if (opts.labels) {
        std::size_t n = labels.size();
        return Graph(n, std::move(edges), std::move(labels));
    }
    std::size_t n = static_cast<std::size_t>(max_index + 1);
    std::vector<std::string> numeric(n);
    for (std::size_t i = 0; i < n; ++i) numeric[i] = std::to_string(i + opts.index_base);
    return Graph(n, std::move(edges), std::move(numeric));
}

inline Graph load_edge_list(std::string_view text, const EdgeListOptions& opts = {}) {
    std::istringstream in{std::string(text)};
    return load_edge_list(in, opts);
}

/// Reads the `*Vertices`, `*Arcs` and `*Edges` sections of a Pajek file.
/// Vertex ids are 1-based; `*Edges` entries are inserted in both directions.
inline Graph load_pajek(std::istream& in) {
    enum class Section { none, vertices, arcs, edges };
    Section section = Section::none;
    std::size_t n = 0;
    bool have_vertices = false;
    std::vector<std::string> labels;
    std::vector<Edge> edges;

    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string_view line = detail::trim(raw);
        if (line.empty() || line.front() == '%') continue;

        if (line.front() == '*') {
            auto fields = detail::split_fields(line, 0);
            std::string key(fields[0]);
            for (char& c : key) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
            if (key == "*vertices") {
                if (fields.size() < 2) throw ParseError(line_no, "*Vertices without a count");
                auto count = detail::parse_int(fields[1]);
                if (!count || *count < 0) throw ParseError(line_no, "invalid vertex count");
                n = static_cast<std::size_t>(*count);
                labels.resize(n);
                for (std::size_t i = 0; i < n; ++i) labels[i] = std::to_string(i + 1);
                have_vertices = true;
                section = Section::vertices;
            } else if (key == "*arcs" || key == "*edges") {
                if (!have_vertices) throw ParseError(line_no, "missing *Vertices header");
                section = key == "*arcs" ? Section::arcs : Section::edges;
            } else {
                throw ParseError(line_no, "unsupported section " + std::string(fields[0]));
            }
            continue;
        }

        switch (section) {
        case Section::none:
            throw ParseError(line_no, "missing *Vertices header");
        case Section::vertices: {
            std::size_t k = 0;
            while (k < line.size() && !std::isspace(static_cast<unsigned char>(line[k]))) ++k;
            auto id = detail::parse_int(line.substr(0, k));
            if (!id || *id < 1 || static_cast<std::size_t>(*id) > n) {
                throw ParseError(line_no, "vertex id out of range");
            }
            std::string_view rest = detail::trim(line.substr(k));
            std::string label;
            if (!rest.empty() && rest.front() == '"') {
                auto close = rest.find('"', 1);
                if (close == std::string_view::npos) throw ParseError(line_no, "unterminated vertex label");
                label = std::string(rest.substr(1, close - 1));
            } else if (!rest.empty()) {
                label = std::string(detail::split_fields(rest, 0).front());
            }
            if (!label.empty()) labels[static_cast<std::size_t>(*id - 1)] = std::move(label);
            break;
        }
        case Section::arcs:
        case Section::edges: {
            auto fields = detail::split_fields(line, 0);
            if (fields.size() < 2) throw ParseError(line_no, "expected 'source target [weight]'");
            auto s = detail::parse_int(fields[0]);
            auto t = detail::parse_int(fields[1]);
            if (!s || !t) throw ParseError(line_no, "invalid vertex id");
            if (*s < 1 || *t < 1 || static_cast<std::size_t>(*s) > n || static_cast<std::size_t>(*t) > n) {
                throw ParseError(line_no, "arc references vertex outside 1.." + std::to_string(n));
            }
            double w = fields.size() >= 3 ? detail::parse_weight(fields[2], line_no) : 1.0;
            auto src = static_cast<NodeId>(*s - 1);
            auto dst = static_cast<NodeId>(*t - 1);
            edges.push_back(Edge{src, dst, w});
            if (section == Section::edges && src != dst) edges.push_back(Edge{dst, src, w});
            break;
        }
        }
    }
    if (!have_vertices) throw ParseError(0, "missing *Vertices header");
    return Graph(n, std::move(edges), std::move(labels));
}

inline Graph load_pajek(std::string_view text) {
    std::istringstream in{std::string(text)};
    return load_pajek(in);
}

/// Writes merged edges as `source target weight` with 0-based indices.
inline void write_edge_list(const Graph& g, std::ostream& out) {
    auto old_precision = out.precision(17);
    for (const Edge& e : g.edges()) out << e.source << ' ' << e.target << ' ' << e.weight << '\n';
    out.precision(old_precision);
}

/// One `label module_id` pair per line.
struct LabeledAssignment {
    std::vector<std::string> labels;
    std::vector<std::uint32_t> modules;
};

inline LabeledAssignment read_assignment(std::istream& in) {
    LabeledAssignment out;
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string_view line = raw;
        if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        auto fields = detail::split_fields(line, 0);
        if (fields.size() != 2) throw ParseError(line_no, "expected 'node_label module_id'");
        auto m = detail::parse_int(fields[1]);
        if (!m || *m < 0) throw ParseError(line_no, "invalid module id '" + std::string(fields[1]) + "'");
        out.labels.emplace_back(fields[0]);
        out.modules.push_back(static_cast<std::uint32_t>(*m));
    }
    return out;
}

inline void write_assignment(std::span<const std::string> labels, const Partition& p, std::ostream& out) {
    if (labels.size() != p.node_count()) throw std::invalid_argument("label count does not match partition");
    for (std::size_t i = 0; i < p.node_count(); ++i) out << labels[i] << ' ' << p[i] << '\n';
}

inline void write_assignment(const Graph& g, const Partition& p, std::ostream& out) {
    std::vector<std::string> labels(g.node_count());
    for (NodeId i = 0; i < g.node_count(); ++i) labels[i] = g.label(i);
    write_assignment(labels, p, out);
}

struct RankingEntry {
    std::string label;
    double visit_rate = 0.0;
    /// 1-based; tied visit rates share the smaller rank.
    std::size_t rank = 0;
};

/// Entries sorted by descending visit rate (stable in node order).
inline std::vector<RankingEntry> make_ranking(const Graph& g, std::span<const double> pi) {
    if (pi.size() != g.node_count()) throw std::invalid_argument("ranking size does not match graph");
    std::vector<std::size_t> order(pi.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return pi[a] > pi[b]; });
    std::vector<RankingEntry> out;
    out.reserve(order.size());
    for (std::size_t k = 0; k < order.size(); ++k) {
        const std::size_t i = order[k];
        const std::size_t rank = k > 0 && pi[i] == out.back().visit_rate ? out.back().rank : k + 1;
        out.push_back({g.label(static_cast<NodeId>(i)), pi[i], rank});
    }
    return out;
}

/// CSV with header `node,visit_rate,rank`, 12 significant digits.
inline void write_ranking_csv(std::span<const RankingEntry> ranking, std::ostream& out) {
    auto old = out.precision(12);
    out << "node,visit_rate,rank\n";
    for (const auto& e : ranking) out << e.label << ',' << e.visit_rate << ',' << e.rank << '\n';
    out.precision(old);
}

inline std::vector<RankingEntry> read_ranking_csv(std::istream& in) {
    std::vector<RankingEntry> out;
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string_view line = detail::trim(raw);
        if (line.empty() || line.front() == '#') continue;
        auto fields = detail::split_fields(line, ',');
        if (line_no == 1 && !fields.empty() && fields[0] == "node") continue;
        if (fields.size() < 2) throw ParseError(line_no, "expected 'node,visit_rate[,rank]'");
        auto rate = detail::parse_double(fields[1]);
        if (!rate || *rate < 0.0) throw ParseError(line_no, "invalid visit rate '" + std::string(fields[1]) + "'");
        RankingEntry e{std::string(fields[0]), *rate, 0};
        if (fields.size() >= 3) {
            auto r = detail::parse_int(fields[2]);
            if (!r || *r < 1) throw ParseError(line_no, "invalid rank");
            e.rank = static_cast<std::size_t>(*r);
        }
        out.push_back(std::move(e));
    }
    if (out.empty()) throw ParseError(0, "ranking file contains no entries");
    return out;
}

}  // namespace smartwalk
