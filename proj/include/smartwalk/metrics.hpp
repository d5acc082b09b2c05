#pragma once

// Similarity between two rankings (cosine of visit rates and sampled
// pairwise rank-order mutual information) and between two partitions
// (visit-rate weighted mutual information). Mutual information is
// normalized by the larger of the two entropies; entropies are in bits.

#include <smartwalk/partition.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <vector>

namespace smartwalk {

struct InformationScore {
    /// I(X;Y) / max(H(X), H(Y)), in [0, 1].
    double nmi = 0.0;
    double mutual_information = 0.0;  ///< bits
    double entropy_x = 0.0;           ///< bits
    double entropy_y = 0.0;           ///< bits
    /// Both entropies vanish; nmi is set to 1 by convention.
    bool degenerate = false;
};

namespace detail {

inline double plogp(double p) { return p > 0.0 ? p * std::log2(p) : 0.0; }

/// One cell of a joint table; masses need not be normalized.
struct JointCell {
    std::size_t x;
    std::size_t y;
    double mass;
};

inline InformationScore score_joint(std::span<const JointCell> cells, std::size_t nx, std::size_t ny) {
    std::vector<double> px(nx, 0.0), py(ny, 0.0);
    double total = 0.0;
    for (const auto& c : cells) {
        px[c.x] += c.mass;
        py[c.y] += c.mass;
        total += c.mass;
    }
    if (!(total > 0.0)) throw std::invalid_argument("joint distribution has no mass");

    // I = H(X) + H(Y) - H(X,Y); identical inputs then give I = H exactly.
    InformationScore s;
    double joint = 0.0;
    for (double p : px) s.entropy_x -= plogp(p / total);
    for (double p : py) s.entropy_y -= plogp(p / total);
    for (const auto& c : cells) joint -= plogp(c.mass / total);
    s.entropy_x = std::max(0.0, s.entropy_x);
    s.entropy_y = std::max(0.0, s.entropy_y);
    s.mutual_information = std::clamp(s.entropy_x + s.entropy_y - joint, 0.0, std::min(s.entropy_x, s.entropy_y));

    const double h = std::max(s.entropy_x, s.entropy_y);
    if (h <= 1e-15) {
        s.degenerate = true;
        s.nmi = 1.0;
        s.mutual_information = 0.0;
    } else {
        s.nmi = std::clamp(s.mutual_information / h, 0.0, 1.0);
    }
    return s;
}

inline void check_same_length(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw std::invalid_argument("rankings differ in length (" + std::to_string(a.size()) + " vs " +
                                    std::to_string(b.size()) + ")");
    }
    if (a.empty()) throw std::invalid_argument("empty ranking");
}

/// Replaces each value by the index of its tie group. Sorted values whose
/// gap is at most `tolerance` times the largest magnitude are chained into
/// one group, so ties are transitive. Order between groups is preserved.
inline std::vector<double> tie_groups(std::span<const double> x, double tolerance) {
    const std::size_t n = x.size();
    double scale = 0.0;
    for (double v : x) scale = std::max(scale, std::abs(v));
    const double eps = tolerance * scale;
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    std::vector<double> group(n);
    double g = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        if (k > 0 && x[order[k]] - x[order[k - 1]] > eps) g += 1.0;
        group[order[k]] = g;
    }
    return group;
}

/// Pair-order table for rank_order_nmi: index 2*X + Y where X = [x_i >= x_j]
/// and Y = [y_i >= y_j], over ordered pairs i != j weighted by w_i w_j.
using PairTable = std::array<double, 4>;

inline PairTable pair_table_quadratic(std::span<const double> x, std::span<const double> y,
                                      std::span<const double> w) {
    PairTable t{};
    for (std::size_t i = 0; i < x.size(); ++i) {
        for (std::size_t j = 0; j < x.size(); ++j) {
            if (i == j) continue;
            const int bx = x[i] >= x[j] ? 1 : 0;
            const int by = y[i] >= y[j] ? 1 : 0;
            t[static_cast<std::size_t>(2 * bx + by)] += w[i] * w[j];
        }
    }
    return t;
}

/// Same table in O(N log N): sort by x, sweep groups of tied x through a
/// Fenwick tree keyed by the rank of y.
inline PairTable pair_table_sorted(std::span<const double> x, std::span<const double> y,
                                   std::span<const double> w) {
    const std::size_t n = x.size();
    double sum_w = 0.0, sum_w2 = 0.0;
    for (double wi : w) {
        sum_w += wi;
        sum_w2 += wi * wi;
    }

    // Dense rank of y with ties sharing a rank.
    std::vector<std::size_t> by_y(n);
    std::iota(by_y.begin(), by_y.end(), std::size_t{0});
    std::sort(by_y.begin(), by_y.end(), [&](std::size_t a, std::size_t b) { return y[a] < y[b]; });
    std::vector<std::size_t> y_rank(n);
    std::size_t rank = 0;
    for (std::size_t k = 0; k < n; ++k) {
        if (k > 0 && y[by_y[k]] != y[by_y[k - 1]]) ++rank;
        y_rank[by_y[k]] = rank;
    }
    // Sum of w_j over y_j <= y_i, including i itself.
    std::vector<double> y_below(n);
    {
        double acc = 0.0;
        std::size_t k = 0;
        while (k < n) {
            std::size_t e = k;
            while (e < n && y[by_y[e]] == y[by_y[k]]) acc += w[by_y[e++]];
            for (std::size_t q = k; q < e; ++q) y_below[by_y[q]] = acc;
            k = e;
        }
    }

    std::vector<std::size_t> by_x(n);
    std::iota(by_x.begin(), by_x.end(), std::size_t{0});
    std::sort(by_x.begin(), by_x.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });

    std::vector<double> fenwick(rank + 2, 0.0);
    auto add = [&](std::size_t pos, double val) {
        for (++pos; pos < fenwick.size(); pos += pos & (~pos + 1)) fenwick[pos] += val;
    };
    auto prefix = [&](std::size_t pos) {
        double s = 0.0;
        for (++pos; pos > 0; pos -= pos & (~pos + 1)) s += fenwick[pos];
        return s;
    };

    double s_x = 0.0, s_y = 0.0, s_xy = 0.0, x_acc = 0.0;
    std::size_t k = 0;
    while (k < n) {
        std::size_t e = k;
        while (e < n && x[by_x[e]] == x[by_x[k]]) {
            add(y_rank[by_x[e]], w[by_x[e]]);
            x_acc += w[by_x[e]];
            ++e;
        }
        for (std::size_t q = k; q < e; ++q) {
            const std::size_t i = by_x[q];
            s_x += w[i] * x_acc;
            s_y += w[i] * y_below[i];
            s_xy += w[i] * prefix(y_rank[i]);
        }
        k = e;
    }
    // Remove the i == j terms, which satisfy both comparisons.
    s_x -= sum_w2;
    s_y -= sum_w2;
    s_xy -= sum_w2;
    const double total = sum_w * sum_w - sum_w2;

    PairTable t{};
    t[3] = std::max(0.0, s_xy);
    t[2] = std::max(0.0, s_x - s_xy);
    t[1] = std::max(0.0, s_y - s_xy);
    t[0] = std::max(0.0, total - s_x - s_y + s_xy);
    return t;
}

inline InformationScore score_pair_table(const PairTable& t) {
    std::vector<JointCell> cells;
    for (std::size_t bx = 0; bx < 2; ++bx) {
        for (std::size_t by = 0; by < 2; ++by) cells.push_back({bx, by, t[2 * bx + by]});
    }
    return score_joint(cells, 2, 2);
}

}  // namespace detail

/// Cosine similarity of two visit-rate vectors.
inline double cosine_similarity(std::span<const double> x, std::span<const double> y) {
    detail::check_same_length(x, y);
    double dot = 0.0, nx = 0.0, ny = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        dot += x[i] * y[i];
        nx += x[i] * x[i];
        ny += y[i] * y[i];
    }
    if (nx == 0.0 || ny == 0.0) throw std::invalid_argument("cosine similarity of a zero vector");
    return std::clamp(dot / (std::sqrt(nx) * std::sqrt(ny)), -1.0, 1.0);
}

/// Visit rates closer than this fraction of the largest rate count as tied.
/// Differences that small are below the resolution of the stationary solver.
inline constexpr double default_tie_tolerance = 1e-10;

struct RankOrderMode {
    /// Number of sampled pairs; empty for the exact pair sum.
    std::optional<std::uint64_t> samples;
    std::uint64_t seed = 0;
    /// Relative tie tolerance; 0 compares values exactly.
    double tie_tolerance = default_tie_tolerance;

    static RankOrderMode exact(double tie_tolerance = default_tie_tolerance) { return {{}, 0, tie_tolerance}; }
    static RankOrderMode sampled(std::uint64_t n, std::uint64_t seed, double tie_tolerance = default_tie_tolerance) {
        return {n, seed, tie_tolerance};
    }
};

struct RankOrderScore : InformationScore {
    bool exact = true;
    std::uint64_t samples = 0;
    std::uint64_t seed = 0;
};

/// Below this size the exact pair sum is evaluated directly.
inline constexpr std::size_t rank_order_quadratic_limit = 64;

/// Mutual information between "which of i, j ranks higher" under x and
/// under y, for node pairs drawn proportionally to x_i x_j. Ties count as
/// the first node ranking higher; see RankOrderMode::tie_tolerance.
inline RankOrderScore rank_order_nmi(std::span<const double> x, std::span<const double> y,
                                     const RankOrderMode& mode = RankOrderMode::exact()) {
    detail::check_same_length(x, y);
    if (x.size() < 2) throw std::invalid_argument("rank order needs at least two nodes");
    for (double xi : x) {
        if (!(xi >= 0.0)) throw std::invalid_argument("reference ranking must be non-negative");
    }

    if (!(mode.tie_tolerance >= 0.0)) throw std::invalid_argument("tie tolerance must be non-negative");
    const auto gx = detail::tie_groups(x, mode.tie_tolerance);
    const auto gy = detail::tie_groups(y, mode.tie_tolerance);

    RankOrderScore out;
    if (!mode.samples) {
        auto t = x.size() <= rank_order_quadratic_limit ? detail::pair_table_quadratic(gx, gy, x)
                                                        : detail::pair_table_sorted(gx, gy, x);
        static_cast<InformationScore&>(out) = detail::score_pair_table(t);
        out.exact = true;
        return out;
    }

    const std::uint64_t n = *mode.samples;
    if (n == 0) throw std::invalid_argument("sampled rank order needs at least one pair");
    std::size_t positive = 0;
    for (double xi : x) positive += xi > 0.0 ? 1 : 0;
    if (positive < 2) throw std::invalid_argument("reference ranking has fewer than two weighted nodes");

    std::mt19937_64 rng(mode.seed);
    std::discrete_distribution<std::size_t> pick(x.begin(), x.end());
    detail::PairTable t{};
    for (std::uint64_t s = 0; s < n; ++s) {
        const std::size_t i = pick(rng);
        std::size_t j = pick(rng);
        while (j == i) j = pick(rng);
        const int bx = gx[i] >= gx[j] ? 1 : 0;
        const int by = gy[i] >= gy[j] ? 1 : 0;
        t[static_cast<std::size_t>(2 * bx + by)] += 1.0;
    }
    static_cast<InformationScore&>(out) = detail::score_pair_table(t);
    out.exact = false;
    out.samples = n;
    out.seed = mode.seed;
    return out;
}

struct RankComparison {
    double cosine = 0.0;
    RankOrderScore rank_order;
};

inline RankComparison compare_rankings(std::span<const double> x, std::span<const double> y,
                                       const RankOrderMode& mode = RankOrderMode::exact()) {
    return {cosine_similarity(x, y), rank_order_nmi(x, y, mode)};
}

/// Mutual information between two partitions with nodes weighted by
/// `weights` (the reference visit rates). Empty weights mean uniform.
inline InformationScore partition_nmi(const Partition& x, const Partition& y, std::span<const double> weights = {}) {
    if (x.empty() || y.empty()) throw std::invalid_argument("empty partition");
    if (x.node_count() != y.node_count()) {
        throw std::invalid_argument("partitions cover different node counts (" + std::to_string(x.node_count()) +
                                    " vs " + std::to_string(y.node_count()) + ")");
    }
    if (!weights.empty() && weights.size() != x.node_count()) {
        throw std::invalid_argument("weight vector size mismatch");
    }
    std::unordered_map<std::uint64_t, std::size_t> index;
    std::vector<detail::JointCell> cells;
    for (std::size_t i = 0; i < x.node_count(); ++i) {
        const double w = weights.empty() ? 1.0 : weights[i];
        if (!(w >= 0.0)) throw std::invalid_argument("negative node weight");
        const std::uint64_t key = (static_cast<std::uint64_t>(x[i]) << 32) | y[i];
        auto [it, inserted] = index.try_emplace(key, cells.size());
        if (inserted) cells.push_back({x[i], y[i], 0.0});
        cells[it->second].mass += w;
    }
    return detail::score_joint(cells, x.module_count(), y.module_count());
}

}  // namespace smartwalk
