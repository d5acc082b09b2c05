#pragma once

// Directed planted-partition benchmark graphs and the sweep harnesses that
// measure how ranking and clustering respond to the teleportation rate.

#include <smartwalk/detail/parallel.hpp>
#include <smartwalk/graph.hpp>
#include <smartwalk/mapeq.hpp>
#include <smartwalk/metrics.hpp>
#include <smartwalk/partition.hpp>
#include <smartwalk/teleport.hpp>

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

namespace smartwalk {

struct BenchmarkParams {
    std::size_t n = 1000;
    std::size_t min_community = 20;
    std::size_t max_community = 50;
    /// Mean out-degree; fractional values are rounded stochastically per node.
    double out_degree = 7.5;
    /// Fraction of out-links leaving the node's community.
    double mu = 0.2;
    std::uint64_t seed = 0;

    void validate() const {
        if (!(mu >= 0.0 && mu <= 1.0)) throw std::invalid_argument("mixing rate must lie in [0, 1]");
        if (!(out_degree >= 0.0)) throw std::invalid_argument("out-degree must be non-negative");
        if (min_community < 1 || min_community > max_community) {
            throw std::invalid_argument("community size range is empty");
        }
        if (n < min_community) throw std::invalid_argument("fewer nodes than the smallest community");
        const auto k_lo = static_cast<std::size_t>(std::floor(out_degree));
        const auto k_hi = static_cast<std::size_t>(std::ceil(out_degree));
        std::size_t max_internal = 0, max_external = 0;
        for (std::size_t k : {k_lo, k_hi}) {
            const double ext = static_cast<double>(k) * mu;
            max_internal = std::max(max_internal, k - static_cast<std::size_t>(std::floor(ext)));
            max_external = std::max(max_external, static_cast<std::size_t>(std::ceil(ext)));
        }
        if (min_community < max_internal + 1) {
            throw std::invalid_argument("communities of " + std::to_string(min_community) + " nodes cannot hold " +
                                        std::to_string(max_internal) + " distinct internal targets");
        }
        if (max_external > 0 && n < max_community + max_external) {
            throw std::invalid_argument("too few nodes outside the largest community for external links");
        }
    }
};

struct Benchmark {
    Graph graph;
    Partition planted;
};

namespace detail {

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0) {
    std::seed_seq seq{static_cast<std::uint32_t>(master), static_cast<std::uint32_t>(master >> 32),
                      static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(c)};
    std::uint32_t out[2];
    seq.generate(out, out + 2);
    return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

/// floor(x) plus a Bernoulli draw of its fractional part.
inline std::size_t stochastic_round(double x, std::mt19937_64& rng) {
    const double base = std::floor(x);
    std::bernoulli_distribution up(x - base);
    return static_cast<std::size_t>(base) + (up(rng) ? 1 : 0);
}

inline std::vector<std::size_t> community_sizes(const BenchmarkParams& p, std::mt19937_64& rng) {
    std::uniform_int_distribution<std::size_t> draw(p.min_community, p.max_community);
    std::vector<std::size_t> sizes;
    std::size_t total = 0;
    while (total < p.n) {
        const std::size_t s = draw(rng);
        sizes.push_back(s);
        total += s;
    }
    // Trim the last community; if it falls below the minimum, spread its
    // nodes over the others.
    const std::size_t last = sizes.back() - (total - p.n);
    sizes.back() = last;
    if (last < p.min_community) {
        sizes.pop_back();
        std::size_t left = last;
        for (std::size_t k = 0; left > 0; k = (k + 1) % sizes.size()) {
            if (std::all_of(sizes.begin(), sizes.end(), [&](std::size_t s) { return s >= p.max_community; })) {
                throw std::invalid_argument("cannot partition " + std::to_string(p.n) +
                                            " nodes into communities within the size range");
            }
            if (sizes[k] < p.max_community) {
                ++sizes[k];
                --left;
            }
        }
    }
    return sizes;
}

}  // namespace detail

/// Each node gets round(out_degree) out-links, of which about mu are sent
/// uniformly outside its community and the rest uniformly inside. No
/// self-loops or duplicate links. Deterministic in `p.seed`.
inline Benchmark planted_partition_graph(const BenchmarkParams& p) {
    p.validate();
    std::mt19937_64 rng(p.seed);
    const auto sizes = detail::community_sizes(p, rng);

    std::vector<ModuleId> community(p.n);
    std::vector<std::vector<NodeId>> members(sizes.size());
    {
        NodeId next = 0;
        for (std::size_t c = 0; c < sizes.size(); ++c) {
            for (std::size_t k = 0; k < sizes[c]; ++k) {
                community[next] = static_cast<ModuleId>(c);
                members[c].push_back(next++);
            }
        }
    }
    if (sizes.size() < 2 && p.mu > 0.0 && p.out_degree > 0.0) {
        throw std::invalid_argument("a single community cannot host external links");
    }

    std::vector<Edge> edges;
    edges.reserve(static_cast<std::size_t>(std::ceil(p.out_degree)) * p.n);
    std::uniform_int_distribution<NodeId> any_node(0, static_cast<NodeId>(p.n - 1));
    std::vector<NodeId> pool;
    std::unordered_set<NodeId> chosen;
    for (NodeId j = 0; j < p.n; ++j) {
        const std::size_t k = detail::stochastic_round(p.out_degree, rng);
        const std::size_t ext = std::min(k, detail::stochastic_round(static_cast<double>(k) * p.mu, rng));
        const std::size_t internal = k - ext;

        // Partial Fisher-Yates over the other members of the community.
        pool.clear();
        for (NodeId m : members[community[j]]) {
            if (m != j) pool.push_back(m);
        }
        for (std::size_t q = 0; q < internal; ++q) {
            std::uniform_int_distribution<std::size_t> pick(q, pool.size() - 1);
            std::swap(pool[q], pool[pick(rng)]);
            edges.push_back({j, pool[q], 1.0});
        }

        chosen.clear();
        while (chosen.size() < ext) {
            const NodeId t = any_node(rng);
            if (community[t] == community[j] || !chosen.insert(t).second) continue;
            edges.push_back({j, t, 1.0});
        }
    }
    return {Graph(p.n, std::move(edges)), Partition(community)};
}

enum class RobustnessMode { rank_size, rank_order, clustering };

inline std::string_view to_string(RobustnessMode m) {
    switch (m) {
    case RobustnessMode::rank_size: return "rank_size";
    case RobustnessMode::rank_order: return "rank_order";
    case RobustnessMode::clustering: return "clustering";
    }
    return "?";
}

struct SweepRow {
    std::string experiment;
    double mu = std::numeric_limits<double>::quiet_NaN();
    double teleport_rate = 0.0;
    Scheme scheme;
    std::uint64_t seed = 0;
    /// What `score` measures: nmi_vs_planted, cosine, rank_order_nmi, partition_nmi.
    std::string measure;
    double score = std::numeric_limits<double>::quiet_NaN();
    double codelength_one_module = std::numeric_limits<double>::quiet_NaN();
    double codelength_planted = std::numeric_limits<double>::quiet_NaN();
    double codelength_found = std::numeric_limits<double>::quiet_NaN();
    std::size_t modules_found = 0;
    /// Non-empty when the cell failed; the other fields are then unreliable.
    std::string error;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    double reference_rate = std::numeric_limits<double>::quiet_NaN();
};

struct PhaseDiagramConfig {
    /// Graph parameters; `mu` and `seed` are overridden per cell.
    BenchmarkParams graph;
    std::vector<double> mus;
    std::vector<double> teleport_rates;
    std::vector<Scheme> schemes{{Target::node, Recording::recorded}};
    std::size_t seeds = 5;
    std::uint64_t master_seed = 1;
    OptimizerOptions optimizer;
};

/// For every (mu, seed) a benchmark graph is generated and clustered at
/// every teleportation rate under every scheme. Rows are ordered by mu,
/// seed, scheme, rate.
inline SweepResult phase_diagram(const PhaseDiagramConfig& cfg) {
    if (cfg.mus.empty() || cfg.teleport_rates.empty() || cfg.schemes.empty() || cfg.seeds == 0) {
        throw std::invalid_argument("phase diagram grids must be non-empty");
    }
    const std::size_t per_graph = cfg.schemes.size() * cfg.teleport_rates.size();
    const std::size_t graphs = cfg.mus.size() * cfg.seeds;
    SweepResult result;
    result.rows.resize(graphs * per_graph);

    detail::parallel_for(graphs * per_graph, [&](std::size_t cell) {
        const std::size_t g_index = cell / per_graph;
        const std::size_t mu_index = g_index / cfg.seeds;
        const std::size_t seed_index = g_index % cfg.seeds;
        const std::size_t scheme_index = (cell % per_graph) / cfg.teleport_rates.size();
        const std::size_t rate_index = cell % cfg.teleport_rates.size();

        SweepRow& row = result.rows[cell];
        row.experiment = "phase_diagram";
        row.mu = cfg.mus[mu_index];
        row.teleport_rate = cfg.teleport_rates[rate_index];
        row.scheme = cfg.schemes[scheme_index];
        row.seed = detail::derive_seed(cfg.master_seed, mu_index, seed_index);
        row.measure = "nmi_vs_planted";
        try {
            BenchmarkParams bp = cfg.graph;
            bp.mu = row.mu;
            bp.seed = row.seed;
            const Benchmark bench = planted_partition_graph(bp);
            const FlowModel flow = build_flow(bench.graph, TeleportConfig::with_teleport_rate(row.teleport_rate, row.scheme));
            const Partition found = optimize_partition(flow, detail::derive_seed(row.seed, rate_index, scheme_index, 1),
                                                       cfg.optimizer);
            row.score = partition_nmi(bench.planted, found, flow.node_rate).nmi;
            row.codelength_one_module = codelength(flow, Partition::one_module(flow.node_count())).total;
            row.codelength_planted = codelength(flow, bench.planted).total;
            row.codelength_found = codelength(flow, found).total;
            row.modules_found = found.module_count();
        } catch (const std::exception& e) {
            row.error = e.what();
        }
    });
    return result;
}

struct RobustnessConfig {
    std::vector<Scheme> schemes{std::begin(all_schemes), std::end(all_schemes)};
    std::vector<double> teleport_rates;
    double reference_rate = 0.15;
    RobustnessMode mode = RobustnessMode::rank_size;
    /// Optimizer runs per rate in clustering mode; run r at every rate is
    /// compared with run r at the reference rate.
    std::size_t repeats = 10;
    std::uint64_t seed = 1;
    OptimizerOptions optimizer;
    double tol = 1e-12;
    std::size_t max_iter = 10000;
};

/// Similarity of results at each teleportation rate to those at the
/// reference rate. Rows are ordered by scheme, then rate.
inline SweepResult robustness_sweep(const Graph& g, const RobustnessConfig& cfg) {
    if (cfg.teleport_rates.empty() || cfg.schemes.empty()) throw std::invalid_argument("empty robustness grid");
    if (cfg.mode == RobustnessMode::clustering && cfg.repeats == 0) {
        throw std::invalid_argument("clustering robustness needs at least one repeat");
    }
    const std::size_t rates = cfg.teleport_rates.size();
    SweepResult result;
    result.reference_rate = cfg.reference_rate;
    result.rows.resize(cfg.schemes.size() * rates);

    auto config_for = [&](double rate, Scheme s) {
        TeleportConfig c = TeleportConfig::with_teleport_rate(rate, s);
        c.tol = cfg.tol;
        c.max_iter = cfg.max_iter;
        return c;
    };
    auto converged = [](RankVector r) {
        if (!r.converged) throw ConvergenceError(r.iterations, r.residual);
        return r;
    };

    struct Reference {
        RankVector rank;
        FlowModel flow;
        std::vector<Partition> partitions;
        std::string error;
    };
    std::vector<Reference> refs(cfg.schemes.size());
    detail::parallel_for(cfg.schemes.size(), [&](std::size_t s) {
        try {
            const TeleportConfig c = config_for(cfg.reference_rate, cfg.schemes[s]);
            if (cfg.mode == RobustnessMode::clustering) {
                refs[s].flow = build_flow(g, c);
                for (std::size_t r = 0; r < cfg.repeats; ++r) {
                    refs[s].partitions.push_back(
                        optimize_partition(refs[s].flow, detail::derive_seed(cfg.seed, r), cfg.optimizer));
                }
            } else {
                refs[s].rank = converged(stationary(g, c));
            }
        } catch (const std::exception& e) {
            refs[s].error = e.what();
        }
    });

    detail::parallel_for(result.rows.size(), [&](std::size_t cell) {
        const std::size_t s = cell / rates;
        SweepRow& row = result.rows[cell];
        row.experiment = "robustness";
        row.teleport_rate = cfg.teleport_rates[cell % rates];
        row.scheme = cfg.schemes[s];
        row.seed = cfg.seed;
        const Reference& ref = refs[s];
        try {
            if (!ref.error.empty()) throw std::runtime_error("reference: " + ref.error);
            const TeleportConfig c = config_for(row.teleport_rate, row.scheme);
            switch (cfg.mode) {
            case RobustnessMode::rank_size:
                row.measure = "cosine";
                row.score = cosine_similarity(ref.rank.pi, converged(stationary(g, c)).pi);
                break;
            case RobustnessMode::rank_order:
                row.measure = "rank_order_nmi";
                row.score = rank_order_nmi(ref.rank.pi, converged(stationary(g, c)).pi).nmi;
                break;
            case RobustnessMode::clustering: {
                row.measure = "partition_nmi";
                const FlowModel flow = build_flow(g, c);
                double sum = 0.0;
                std::size_t modules = 0;
                for (std::size_t r = 0; r < cfg.repeats; ++r) {
                    const Partition p = optimize_partition(flow, detail::derive_seed(cfg.seed, r), cfg.optimizer);
                    sum += partition_nmi(ref.partitions[r], p, ref.flow.node_rate).nmi;
                    modules += p.module_count();
                }
                row.score = sum / static_cast<double>(cfg.repeats);
                row.modules_found = modules / cfg.repeats;
                break;
            }
            }
        } catch (const std::exception& e) {
            row.error = e.what();
        }
    });
    return result;
}

// Serialization. Floating-point values carry 12 significant digits; NaN
// cells are written empty (CSV) or null (JSON).

inline void write_csv(const SweepResult& r, std::ostream& out) {
    auto old = out.precision(12);
    auto num = [&](double x) -> std::ostream& {
        if (!std::isnan(x)) out << x;
        return out;
    };
    out << "experiment,mu,teleport_rate,scheme,seed,measure,score,codelength_one_module,codelength_planted,"
           "codelength_found,modules_found,error\n";
    for (const SweepRow& row : r.rows) {
        out << row.experiment << ',';
        num(row.mu) << ',';
        num(row.teleport_rate) << ',' << scheme_name(row.scheme) << ',' << row.seed << ',' << row.measure << ',';
        num(row.score) << ',';
        num(row.codelength_one_module) << ',';
        num(row.codelength_planted) << ',';
        num(row.codelength_found) << ',' << row.modules_found << ',';
        std::string err = row.error;
        std::replace(err.begin(), err.end(), ',', ';');
        std::replace(err.begin(), err.end(), '\n', ' ');
        out << err << '\n';
    }
    out.precision(old);
}

inline nlohmann::json to_json(const SweepResult& r) {
    auto num = [](double x) {
        if (std::isnan(x)) return nlohmann::json(nullptr);
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.12g", x);
        return nlohmann::json(std::strtod(buf, nullptr));
    };
    nlohmann::json rows = nlohmann::json::array();
    for (const SweepRow& row : r.rows) {
        rows.push_back({{"experiment", row.experiment},
                        {"mu", num(row.mu)},
                        {"teleport_rate", num(row.teleport_rate)},
                        {"scheme", scheme_name(row.scheme)},
                        {"seed", row.seed},
                        {"measure", row.measure},
                        {"score", num(row.score)},
                        {"codelength_one_module", num(row.codelength_one_module)},
                        {"codelength_planted", num(row.codelength_planted)},
                        {"codelength_found", num(row.codelength_found)},
                        {"modules_found", row.modules_found},
                        {"error", row.error.empty() ? nlohmann::json(nullptr) : nlohmann::json(row.error)}});
    }
    return {{"reference_rate", num(r.reference_rate)}, {"rows", rows}};
}

}  // namespace smartwalk
