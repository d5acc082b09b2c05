#pragma once

// Immutable weighted directed graph in compressed sparse form.
//
// Convention: an edge (source j, target i, weight w) contributes W_ij = w,
// so the in-strength of i sums over edges ending at i and the out-strength
// of j sums over edges leaving j.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace smartwalk {

using NodeId = std::uint32_t;

struct Edge {
    NodeId source;
    NodeId target;
    double weight;

    friend bool operator==(const Edge&, const Edge&) = default;
};

/// Neighbor entry in one of the two adjacency directions.
struct Arc {
    NodeId node;
    double weight;
};

class Graph {
public:
    Graph() = default;

    /// Builds from an arbitrary edge list. Parallel edges are merged by
    /// summing weights; non-positive or non-finite weights are rejected.
    Graph(std::size_t node_count, std::vector<Edge> edges, std::vector<std::string> labels = {})
        : n_(node_count), labels_(std::move(labels)) {
        if (!labels_.empty() && labels_.size() != n_) {
            throw std::invalid_argument("label count does not match node count");
        }
        for (const Edge& e : edges) {
            if (e.source >= n_ || e.target >= n_) {
                throw std::out_of_range("edge references node " +
                                        std::to_string(std::max(e.source, e.target)) +
                                        " outside [0, " + std::to_string(n_) + ")");
            }
            if (!(e.weight > 0.0) || !std::isfinite(e.weight)) {
                throw std::invalid_argument("edge weight must be positive and finite");
            }
        }
        std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
            return a.source != b.source ? a.source < b.source : a.target < b.target;
        });
        for (const Edge& e : edges) {
            if (!edges_.empty() && edges_.back().source == e.source &&
                edges_.back().target == e.target) {
                edges_.back().weight += e.weight;
            } else {
                edges_.push_back(e);
            }
        }
        build_index();
    }

    std::size_t node_count() const noexcept { return n_; }
    std::size_t edge_count() const noexcept { return edges_.size(); }

    /// Edges sorted by (source, target), parallel edges already merged.
    std::span<const Edge> edges() const noexcept { return edges_; }

    std::span<const double> in_strength() const noexcept { return w_in_; }
    std::span<const double> out_strength() const noexcept { return w_out_; }
    double in_strength(NodeId i) const { return w_in_[i]; }
    double out_strength(NodeId i) const { return w_out_[i]; }
    double total_weight() const noexcept { return total_; }

    bool is_dangling(NodeId i) const { return w_out_[i] == 0.0; }
    std::span<const NodeId> dangling() const noexcept { return dangling_; }

    /// Arcs leaving `j`, as (target, weight).
    std::span<const Arc> out_arcs(NodeId j) const {
        return std::span<const Arc>(out_arcs_).subspan(out_offset_[j], out_offset_[j + 1] - out_offset_[j]);
    }
    /// Arcs entering `i`, as (source, weight).
    std::span<const Arc> in_arcs(NodeId i) const {
        return std::span<const Arc>(in_arcs_).subspan(in_offset_[i], in_offset_[i + 1] - in_offset_[i]);
    }

    bool has_labels() const noexcept { return !labels_.empty(); }
    std::span<const std::string> labels() const noexcept { return labels_; }
    /// External identifier; falls back to the dense index.
    std::string label(NodeId i) const { return labels_.empty() ? std::to_string(i) : labels_[i]; }

private:
    void build_index() {
        w_in_.assign(n_, 0.0);
        w_out_.assign(n_, 0.0);
        out_offset_.assign(n_ + 1, 0);
        in_offset_.assign(n_ + 1, 0);
        for (const Edge& e : edges_) {
            w_out_[e.source] += e.weight;
            w_in_[e.target] += e.weight;
            ++out_offset_[e.source + 1];
            ++in_offset_[e.target + 1];
        }
        std::partial_sum(out_offset_.begin(), out_offset_.end(), out_offset_.begin());
        std::partial_sum(in_offset_.begin(), in_offset_.end(), in_offset_.begin());

        out_arcs_.resize(edges_.size());
        in_arcs_.resize(edges_.size());
        std::vector<std::size_t> in_cursor(in_offset_.begin(), in_offset_.end() - 1);
        for (std::size_t k = 0; k < edges_.size(); ++k) {
            const Edge& e = edges_[k];
            out_arcs_[k] = Arc{e.target, e.weight};
            in_arcs_[in_cursor[e.target]++] = Arc{e.source, e.weight};
        }

        total_ = std::accumulate(w_out_.begin(), w_out_.end(), 0.0);
        dangling_.clear();
        for (NodeId i = 0; i < n_; ++i) {
            if (w_out_[i] == 0.0) dangling_.push_back(i);
        }
    }

    std::size_t n_ = 0;
    std::vector<Edge> edges_;
    std::vector<double> w_in_;
    std::vector<double> w_out_;
    double total_ = 0.0;
    std::vector<NodeId> dangling_;
    std::vector<std::size_t> out_offset_;
    std::vector<Arc> out_arcs_;
    std::vector<std::size_t> in_offset_;
    std::vector<Arc> in_arcs_;
    std::vector<std::string> labels_;
};

}  // namespace smartwalk
