#pragma once

// Independent reference computations for small graphs: a direct linear
// solve, the truncated power series in alpha, and a Monte Carlo walker.
// None of these share code with the power iteration in teleport.hpp.

#include <smartwalk/graph.hpp>
#include <smartwalk/teleport.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

namespace smartwalk::oracle {

inline constexpr std::size_t default_dense_cap = 2000;

/// Column-stochastic T' (dangling columns replaced by v) with the inputs it
/// was built from.
struct DenseSystem {
    Eigen::MatrixXd t_prime;
    Eigen::VectorXd v;
    double alpha = 0.0;
};

inline DenseSystem build_dense_system(const Graph& g, std::span<const double> v, double alpha,
                                      std::size_t cap = default_dense_cap) {
    const std::size_t n = g.node_count();
    if (n > cap) {
        throw std::length_error("dense oracle limited to " + std::to_string(cap) + " nodes, graph has " +
                                std::to_string(n));
    }
    if (v.size() != n) throw std::invalid_argument("preference vector size mismatch");
    if (!(alpha >= 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in [0, 1)");

    const auto dim = static_cast<Eigen::Index>(n);
    DenseSystem sys;
    sys.alpha = alpha;
    sys.v = Eigen::Map<const Eigen::VectorXd>(v.data(), dim);
    sys.t_prime = Eigen::MatrixXd::Zero(dim, dim);
    for (const Edge& e : g.edges()) {
        sys.t_prime(e.target, e.source) += e.weight;
    }
    for (Eigen::Index j = 0; j < dim; ++j) {
        const double col = sys.t_prime.col(j).sum();
        if (col > 0.0) {
            sys.t_prime.col(j) /= col;
        } else {
            sys.t_prime.col(j) = sys.v;
        }
    }
    return sys;
}

inline std::vector<double> to_std(const Eigen::VectorXd& x) { return {x.data(), x.data() + x.size()}; }

/// pi = (1 - alpha) (I - alpha T')^{-1} v by partial-pivoting LU.
inline std::vector<double> dense_stationary(const DenseSystem& sys) {
    const auto n = sys.t_prime.rows();
    Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n) - sys.alpha * sys.t_prime;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
    Eigen::VectorXd pi = lu.solve((1.0 - sys.alpha) * sys.v);
    if (!pi.allFinite()) throw std::runtime_error("singular teleportation system");
    pi /= pi.sum();
    return to_std(pi);
}

inline std::vector<double> dense_stationary(const Graph& g, std::span<const double> v, double alpha,
                                            std::size_t cap = default_dense_cap) {
    return dense_stationary(build_dense_system(g, v, alpha, cap));
}

struct TaylorResult {
    std::vector<double> pi;
    /// Upper bound on the L1 distance to the exact solution: 2 alpha^(K+1) / (1 - alpha).
    double error_bound = 0.0;
};

/// Partial sum v + sum_{k=1..K} alpha^k (T'^k - T'^{k-1}) v, not renormalized.
inline TaylorResult taylor_stationary(const Graph& g, std::span<const double> v, double alpha, std::size_t order,
                                      std::size_t cap = default_dense_cap) {
    DenseSystem sys = build_dense_system(g, v, alpha, cap);
    Eigen::VectorXd prev = sys.v;
    Eigen::VectorXd sum = sys.v;
    double alpha_k = 1.0;
    for (std::size_t k = 1; k <= order; ++k) {
        Eigen::VectorXd cur = sys.t_prime * prev;
        alpha_k *= alpha;
        sum += alpha_k * (cur - prev);
        prev = std::move(cur);
    }
    TaylorResult out;
    out.pi = to_std(sum);
    out.error_bound = 2.0 * std::pow(alpha, static_cast<double>(order + 1)) / (1.0 - alpha);
    return out;
}

struct WalkerEstimate {
    /// Fraction of counted steps spent on each node.
    std::vector<double> frequency;
    /// Batch-means standard error of each frequency.
    std::vector<double> standard_error;
    std::uint64_t steps = 0;
    std::uint64_t counted_steps = 0;
};

/// Simulates the walk of `cfg` for `steps` moves. Recorded schemes count the
/// node reached by every move; unrecorded schemes count only arrivals along
/// links. Standard errors come from `batches` consecutive batches.
inline WalkerEstimate simulate_walker(const Graph& g, const TeleportConfig& cfg, std::uint64_t steps,
                                      std::uint64_t seed, std::size_t batches = 100) {
    cfg.validate();
    if (steps < 1) throw std::invalid_argument("walker needs at least one step");
    if (batches < 2 || batches > steps) throw std::invalid_argument("invalid batch count");
    const std::size_t n = g.node_count();
    const auto v = preference_vector(g, cfg.preference());
    const bool record_teleports = cfg.recording == Recording::recorded;

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::discrete_distribution<NodeId> teleport(v.begin(), v.end());

    // Cumulative out-weights per node for link selection.
    std::vector<std::vector<double>> cumulative(n);
    for (NodeId j = 0; j < n; ++j) {
        double acc = 0.0;
        for (const Arc& a : g.out_arcs(j)) cumulative[j].push_back(acc += a.weight);
    }

    std::vector<std::uint64_t> total(n, 0);
    std::vector<std::uint64_t> batch(n, 0);
    std::vector<double> freq_sum(n, 0.0);
    std::vector<double> freq_sq(n, 0.0);
    std::uint64_t batch_counted = 0;
    std::size_t batches_with_counts = 0;
    const std::uint64_t batch_len = steps / batches;

    auto close_batch = [&] {
        if (batch_counted > 0) {
            for (std::size_t i = 0; i < n; ++i) {
                const double f = static_cast<double>(batch[i]) / static_cast<double>(batch_counted);
                freq_sum[i] += f;
                freq_sq[i] += f * f;
            }
            ++batches_with_counts;
        }
        std::fill(batch.begin(), batch.end(), 0);
        batch_counted = 0;
    };

    NodeId at = teleport(rng);
    WalkerEstimate est;
    std::size_t closed = 0;
    for (std::uint64_t s = 0; s < steps; ++s) {
        const auto& cum = cumulative[at];
        bool counted;
        if (!cum.empty() && unit(rng) < cfg.alpha) {
            const double u = unit(rng) * cum.back();
            auto k = static_cast<std::size_t>(std::upper_bound(cum.begin(), cum.end(), u) - cum.begin());
            if (k == cum.size()) k = cum.size() - 1;
            at = g.out_arcs(at)[k].node;
            counted = true;
        } else {
            at = teleport(rng);
            counted = record_teleports;
        }
        if (counted) {
            ++total[at];
            ++batch[at];
            ++batch_counted;
            ++est.counted_steps;
        }
        if ((s + 1) % batch_len == 0 && closed + 1 < batches) {
            close_batch();
            ++closed;
        }
    }
    close_batch();

    if (est.counted_steps == 0) throw std::runtime_error("walker recorded no steps");
    est.steps = steps;
    est.frequency.resize(n);
    est.standard_error.resize(n);
    const double b = static_cast<double>(batches_with_counts);
    for (std::size_t i = 0; i < n; ++i) {
        est.frequency[i] = static_cast<double>(total[i]) / static_cast<double>(est.counted_steps);
        const double mean = freq_sum[i] / b;
        const double var = b > 1 ? std::max(0.0, (freq_sq[i] - b * mean * mean) / (b - 1.0)) : 0.0;
        est.standard_error[i] = std::sqrt(var / b);
    }
    return est;
}

}  // namespace smartwalk::oracle
