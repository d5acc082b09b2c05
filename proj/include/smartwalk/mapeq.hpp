#pragma once

// Two-level map equation over a flow model derived from a teleportation
// scheme, and a greedy search for the partition minimizing it.
//
//   L = q H(Q) + sum_m p_m H(P_m)
//
// q is the total rate at which the walk crosses module boundaries, Q the
// distribution of module entry rates, p_m the module exit rate plus the
// visit rates of its nodes, and P_m that distribution normalized. Under
// recorded schemes teleportation steps are transitions like any other and
// contribute to exits and entries. Under unrecorded schemes only link steps
// exist in the flow.

#include <smartwalk/graph.hpp>
#include <smartwalk/partition.hpp>
#include <smartwalk/teleport.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <vector>

namespace smartwalk {

struct LinkFlow {
    NodeId source;
    NodeId target;
    double flow;
};

struct FlowModel {
    std::vector<double> node_rate;
    /// One entry per graph edge, self-loops included.
    std::vector<LinkFlow> links;
    /// Teleportation mass leaving each node per step; zero when unrecorded.
    std::vector<double> teleport_out;
    /// Where teleportation lands (the preference vector).
    std::vector<double> teleport_target;
    Recording recording = Recording::recorded;
    Target target = Target::node;
    double alpha = 0.0;

    std::size_t node_count() const noexcept { return node_rate.size(); }
    double total_teleport() const { return std::accumulate(teleport_out.begin(), teleport_out.end(), 0.0); }
};

/// Per-step transition rates of the walk described by `cfg`.
inline FlowModel build_flow(const Graph& g, const TeleportConfig& cfg) {
    cfg.validate();
    const std::size_t n = g.node_count();
    FlowModel f;
    f.recording = cfg.recording;
    f.target = cfg.target;
    f.alpha = cfg.alpha;
    f.teleport_target = preference_vector(g, cfg.preference());
    f.teleport_out.assign(n, 0.0);
    f.links.reserve(g.edge_count());

    RankVector walk = stationary_with_preference(g, f.teleport_target, cfg.alpha, cfg.tol, cfg.max_iter);
    if (!walk.converged) throw ConvergenceError(walk.iterations, walk.residual);
    const auto& pi = walk.pi;

    if (cfg.recording == Recording::recorded) {
        f.node_rate = pi;
        for (const Edge& e : g.edges()) {
            f.links.push_back({e.source, e.target, cfg.alpha * pi[e.source] * e.weight / g.out_strength(e.source)});
        }
        for (NodeId j = 0; j < n; ++j) {
            f.teleport_out[j] = g.is_dangling(j) ? pi[j] : (1.0 - cfg.alpha) * pi[j];
        }
        return f;
    }

    // Link steps only; dangling nodes emit nothing.
    double total = 0.0;
    for (const Edge& e : g.edges()) {
        const double x = pi[e.source] * e.weight / g.out_strength(e.source);
        f.links.push_back({e.source, e.target, x});
        total += x;
    }
    if (!(total > 0.0)) throw std::domain_error("no link flow; unrecorded flow model is undefined");
    f.node_rate.assign(n, 0.0);
    for (auto& l : f.links) {
        l.flow /= total;
        f.node_rate[l.target] += l.flow;
    }
    return f;
}

struct Codelength {
    /// Bits per step.
    double total = 0.0;
    /// q H(Q).
    double index_term = 0.0;
    /// p_m H(P_m) per module.
    std::vector<double> module_terms;
    /// Total boundary-crossing rate q.
    double exit_rate = 0.0;
    std::size_t module_count = 0;
};

namespace detail {

inline double plogp2(double p) { return p > 0.0 ? p * std::log2(p) : 0.0; }

}  // namespace detail

/// Evaluates the map equation for `p` directly from the flow model.
inline Codelength codelength(const FlowModel& flow, const Partition& p) {
    const std::size_t n = flow.node_count();
    if (p.node_count() != n) {
        throw std::invalid_argument("partition covers " + std::to_string(p.node_count()) + " nodes, flow has " +
                                    std::to_string(n));
    }
    const std::size_t k = p.module_count();
    std::vector<double> visits(k, 0.0), link_exit(k, 0.0), link_enter(k, 0.0), tp(k, 0.0), v(k, 0.0);
    std::vector<double> node_plogp(k, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        visits[p[i]] += flow.node_rate[i];
        tp[p[i]] += flow.teleport_out[i];
        v[p[i]] += flow.teleport_target[i];
        node_plogp[p[i]] += detail::plogp2(flow.node_rate[i]);
    }
    for (const LinkFlow& l : flow.links) {
        const ModuleId a = p[l.source], b = p[l.target];
        if (a == b) continue;
        link_exit[a] += l.flow;
        link_enter[b] += l.flow;
    }
    const double total_tp = flow.total_teleport();

    Codelength out;
    out.module_count = k;
    out.module_terms.resize(k);
    std::vector<double> enter(k);
    double enter_sum = 0.0;
    for (std::size_t m = 0; m < k; ++m) {
        const double exit = link_exit[m] + tp[m] * (1.0 - v[m]);
        enter[m] = link_enter[m] + (total_tp - tp[m]) * v[m];
        out.exit_rate += exit;
        enter_sum += enter[m];
        out.module_terms[m] = detail::plogp2(exit + visits[m]) - detail::plogp2(exit) - node_plogp[m];
    }
    if (enter_sum > 0.0) {
        for (double e : enter) out.index_term -= detail::plogp2(e / enter_sum) * enter_sum;
    }
    out.total = out.index_term + std::accumulate(out.module_terms.begin(), out.module_terms.end(), 0.0);
    return out;
}

struct OptimizerOptions {
    /// Independent seeded restarts; the shortest result wins.
    std::size_t passes = 10;
    /// Minimum codelength improvement for a move to be taken.
    double tolerance = 1e-10;
    std::size_t max_sweeps = 200;
    std::size_t max_rounds = 20;
};

namespace detail {

/// Network the optimizer works on: possibly aggregated nodes carrying
/// visit, teleport and preference mass, with self-loops removed.
struct FlowNetwork {
    std::vector<double> flow;
    std::vector<double> tp;
    std::vector<double> v;
    double total_tp = 0.0;
    std::vector<std::size_t> out_offset, in_offset;
    std::vector<Arc> out, in;
    std::vector<double> out_total, in_total;

    std::size_t size() const noexcept { return flow.size(); }
    std::span<const Arc> out_arcs(std::size_t u) const {
        return std::span<const Arc>(out).subspan(out_offset[u], out_offset[u + 1] - out_offset[u]);
    }
    std::span<const Arc> in_arcs(std::size_t u) const {
        return std::span<const Arc>(in).subspan(in_offset[u], in_offset[u + 1] - in_offset[u]);
    }

    /// Builds adjacency from (source, target, flow) triples, merging duplicates
    /// and dropping self-loops.
    void set_links(std::vector<LinkFlow> links) {
        const std::size_t n = size();
        std::erase_if(links, [](const LinkFlow& l) { return l.source == l.target; });
        std::sort(links.begin(), links.end(), [](const LinkFlow& a, const LinkFlow& b) {
            return a.source != b.source ? a.source < b.source : a.target < b.target;
        });
        std::vector<LinkFlow> merged;
        for (const auto& l : links) {
            if (!merged.empty() && merged.back().source == l.source && merged.back().target == l.target) {
                merged.back().flow += l.flow;
            } else {
                merged.push_back(l);
            }
        }
        out_offset.assign(n + 1, 0);
        in_offset.assign(n + 1, 0);
        out_total.assign(n, 0.0);
        in_total.assign(n, 0.0);
        for (const auto& l : merged) {
            ++out_offset[l.source + 1];
            ++in_offset[l.target + 1];
            out_total[l.source] += l.flow;
            in_total[l.target] += l.flow;
        }
        std::partial_sum(out_offset.begin(), out_offset.end(), out_offset.begin());
        std::partial_sum(in_offset.begin(), in_offset.end(), in_offset.begin());
        out.resize(merged.size());
        in.resize(merged.size());
        std::vector<std::size_t> in_cursor(in_offset.begin(), in_offset.end() - 1);
        for (std::size_t k = 0; k < merged.size(); ++k) {
            out[k] = Arc{merged[k].target, merged[k].flow};
            in[in_cursor[merged[k].target]++] = Arc{merged[k].source, merged[k].flow};
        }
    }

    static FlowNetwork from_flow(const FlowModel& f) {
        FlowNetwork net;
        net.flow = f.node_rate;
        net.tp = f.teleport_out;
        net.v = f.teleport_target;
        net.total_tp = f.total_teleport();
        net.set_links(f.links);
        return net;
    }

    /// Collapses each module of `modules` (dense ids) into one node.
    FlowNetwork aggregate(std::span<const ModuleId> modules, std::size_t count) const {
        FlowNetwork net;
        net.flow.assign(count, 0.0);
        net.tp.assign(count, 0.0);
        net.v.assign(count, 0.0);
        net.total_tp = total_tp;
        for (std::size_t u = 0; u < size(); ++u) {
            net.flow[modules[u]] += flow[u];
            net.tp[modules[u]] += tp[u];
            net.v[modules[u]] += v[u];
        }
        std::vector<LinkFlow> links;
        links.reserve(out.size());
        for (std::size_t u = 0; u < size(); ++u) {
            for (const Arc& a : out_arcs(u)) {
                if (modules[u] != modules[a.node]) links.push_back({modules[u], modules[a.node], a.weight});
            }
        }
        net.set_links(std::move(links));
        return net;
    }
};

/// Module bookkeeping for incremental codelength updates under node moves.
class ModuleState {
public:
    /// `node_entropy_term` is sum_i p_i log2 p_i over the original nodes.
    ModuleState(const FlowNetwork& net, std::span<const ModuleId> assignment, double node_entropy_term)
        : net_(&net), module_of_(assignment.begin(), assignment.end()), node_term_(node_entropy_term) {
        const std::size_t n = net.size();
        if (module_of_.size() != n) throw std::invalid_argument("assignment size mismatch");
        // Module ids are < n; unused ids form the free list.
        flow_.assign(n, 0.0);
        tp_.assign(n, 0.0);
        v_.assign(n, 0.0);
        link_exit_.assign(n, 0.0);
        link_enter_.assign(n, 0.0);
        size_.assign(n, 0);
        for (std::size_t u = 0; u < n; ++u) {
            const ModuleId m = module_of_[u];
            if (m >= n) throw std::invalid_argument("module id out of range");
            flow_[m] += net.flow[u];
            tp_[m] += net.tp[u];
            v_[m] += net.v[u];
            ++size_[m];
            for (const Arc& a : net.out_arcs(u)) {
                if (module_of_[a.node] != m) {
                    link_exit_[m] += a.weight;
                    link_enter_[module_of_[a.node]] += a.weight;
                }
            }
        }
        for (std::size_t m = n; m-- > 0;) {
            if (size_[m] == 0) free_.push_back(static_cast<ModuleId>(m));
        }
        recompute_sums();
        out_to_.assign(n, 0.0);
        in_from_.assign(n, 0.0);
        touched_flag_.assign(n, 0);
    }

    double codelength() const {
        return plogp2(sum_exit_) - sum_plogp_enter_ - sum_plogp_exit_ + sum_plogp_exit_flow_ - node_term_;
    }

    ModuleId module_of(std::size_t u) const { return module_of_[u]; }
    std::span<const ModuleId> assignment() const noexcept { return module_of_; }

    /// Codelength change if `u` moved to module `to` (an empty module is allowed).
    double move_delta(std::size_t u, ModuleId to) {
        gather(u);
        const double d = delta_for(u, to);
        clear_gather();
        return d;
    }

    void move(std::size_t u, ModuleId to) {
        gather(u);
        apply(u, to);
        clear_gather();
    }

    /// One empty module id, if any.
    std::optional<ModuleId> free_module() const {
        if (free_.empty()) return std::nullopt;
        return free_.back();
    }

    /// Sweeps nodes in random order, moving each to its best neighboring (or
    /// an empty) module while that lowers the codelength by more than
    /// `tolerance`. With `all_modules` every non-empty module is a candidate,
    /// which reaches nodes without links into the target module. Returns the
    /// number of moves made.
    std::size_t local_moves(std::mt19937_64& rng, double tolerance, std::size_t max_sweeps,
                            bool all_modules = false) {
        const std::size_t n = net_->size();
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::size_t total_moves = 0;
        for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
            std::shuffle(order.begin(), order.end(), rng);
            std::size_t moves = 0;
            for (std::size_t u : order) {
                gather(u);
                const ModuleId from = module_of_[u];
                ModuleId best = from;
                double best_delta = -tolerance;
                auto consider = [&](ModuleId m) {
                    if (m == from) return;
                    const double d = delta_for(u, m);
                    if (d < best_delta) {
                        best_delta = d;
                        best = m;
                    }
                };
                if (all_modules) {
                    for (std::size_t m = 0; m < n; ++m) {
                        if (size_[m] > 0) consider(static_cast<ModuleId>(m));
                    }
                } else {
                    for (ModuleId m : touched_) consider(m);
                }
                if (size_[from] > 1 && !free_.empty()) {
                    const double d = delta_for(u, free_.back());
                    if (d < best_delta) {
                        best_delta = d;
                        best = free_.back();
                    }
                }
                if (best != from) {
                    apply(u, best);
                    ++moves;
                }
                clear_gather();
            }
            total_moves += moves;
            if (moves == 0) break;
            recompute_sums();
        }
        return total_moves;
    }

    /// Dense relabeling of the current assignment; returns the module count.
    std::size_t dense_assignment(std::vector<ModuleId>& out) const {
        std::vector<ModuleId> map(module_of_.size(), std::numeric_limits<ModuleId>::max());
        out.resize(module_of_.size());
        ModuleId next = 0;
        for (std::size_t u = 0; u < module_of_.size(); ++u) {
            ModuleId& d = map[module_of_[u]];
            if (d == std::numeric_limits<ModuleId>::max()) d = next++;
            out[u] = d;
        }
        return next;
    }

private:
    static double plogp2(double p) { return p > 0.0 ? p * std::log2(p) : 0.0; }

    double exit_of(double link_exit, double tp, double v) const { return link_exit + tp * (1.0 - v); }
    double enter_of(double link_enter, double tp, double v) const {
        return link_enter + (net_->total_tp - tp) * v;
    }

    void recompute_sums() {
        sum_exit_ = sum_plogp_enter_ = sum_plogp_exit_ = sum_plogp_exit_flow_ = 0.0;
        for (std::size_t m = 0; m < flow_.size(); ++m) {
            if (size_[m] == 0) continue;
            const double e = exit_of(link_exit_[m], tp_[m], v_[m]);
            const double en = enter_of(link_enter_[m], tp_[m], v_[m]);
            sum_exit_ += e;
            sum_plogp_enter_ += plogp2(en);
            sum_plogp_exit_ += plogp2(e);
            sum_plogp_exit_flow_ += plogp2(e + flow_[m]);
        }
    }

    void gather(std::size_t u) {
        for (const Arc& a : net_->out_arcs(u)) {
            const ModuleId m = module_of_[a.node];
            touch(m);
            out_to_[m] += a.weight;
        }
        for (const Arc& a : net_->in_arcs(u)) {
            const ModuleId m = module_of_[a.node];
            touch(m);
            in_from_[m] += a.weight;
        }
    }
    void touch(ModuleId m) {
        if (!touched_flag_[m]) {
            touched_flag_[m] = 1;
            touched_.push_back(m);
        }
    }
    void clear_gather() {
        for (ModuleId m : touched_) {
            out_to_[m] = in_from_[m] = 0.0;
            touched_flag_[m] = 0;
        }
        touched_.clear();
    }

    struct ModuleTerms {
        double exit, enter, flow;
    };

    // Module aggregates after removing u from its module / after adding u to `to`.
    void moved_terms(std::size_t u, ModuleId to, ModuleTerms& from_new, ModuleTerms& to_new) const {
        const FlowNetwork& net = *net_;
        const ModuleId from = module_of_[u];
        const double out_u = net.out_total[u], in_u = net.in_total[u];

        const double a_exit = link_exit_[from] - (out_u - out_to_[from]) + in_from_[from];
        const double a_enter = link_enter_[from] - (in_u - in_from_[from]) + out_to_[from];
        const double a_flow = flow_[from] - net.flow[u];
        const double a_tp = tp_[from] - net.tp[u];
        const double a_v = v_[from] - net.v[u];
        if (size_[from] == 1) {
            from_new = {0.0, 0.0, 0.0};
        } else {
            from_new = {exit_of(a_exit, a_tp, a_v), enter_of(a_enter, a_tp, a_v), a_flow};
        }

        const double b_exit = link_exit_[to] + (out_u - out_to_[to]) - in_from_[to];
        const double b_enter = link_enter_[to] + (in_u - in_from_[to]) - out_to_[to];
        const double b_tp = tp_[to] + net.tp[u];
        const double b_v = v_[to] + net.v[u];
        to_new = {exit_of(b_exit, b_tp, b_v), enter_of(b_enter, b_tp, b_v), flow_[to] + net.flow[u]};
    }

    ModuleTerms current_terms(ModuleId m) const {
        if (size_[m] == 0) return {0.0, 0.0, 0.0};
        return {exit_of(link_exit_[m], tp_[m], v_[m]), enter_of(link_enter_[m], tp_[m], v_[m]), flow_[m]};
    }

    static double contribution(const ModuleTerms& t) {
        return -plogp2(t.enter) - plogp2(t.exit) + plogp2(t.exit + t.flow);
    }

    double delta_for(std::size_t u, ModuleId to) const {
        const ModuleId from = module_of_[u];
        if (to == from) return 0.0;
        ModuleTerms a_new, b_new;
        moved_terms(u, to, a_new, b_new);
        const ModuleTerms a_old = current_terms(from), b_old = current_terms(to);
        const double new_exit = sum_exit_ - a_old.exit - b_old.exit + a_new.exit + b_new.exit;
        return plogp2(new_exit) - plogp2(sum_exit_) + contribution(a_new) + contribution(b_new) -
               contribution(a_old) - contribution(b_old);
    }

    void apply(std::size_t u, ModuleId to) {
        const FlowNetwork& net = *net_;
        const ModuleId from = module_of_[u];
        if (to == from) return;
        ModuleTerms a_new, b_new;
        moved_terms(u, to, a_new, b_new);
        const ModuleTerms a_old = current_terms(from), b_old = current_terms(to);

        sum_exit_ += a_new.exit + b_new.exit - a_old.exit - b_old.exit;
        sum_plogp_enter_ += plogp2(a_new.enter) + plogp2(b_new.enter) - plogp2(a_old.enter) - plogp2(b_old.enter);
        sum_plogp_exit_ += plogp2(a_new.exit) + plogp2(b_new.exit) - plogp2(a_old.exit) - plogp2(b_old.exit);
        sum_plogp_exit_flow_ += plogp2(a_new.exit + a_new.flow) + plogp2(b_new.exit + b_new.flow) -
                                plogp2(a_old.exit + a_old.flow) - plogp2(b_old.exit + b_old.flow);

        const double out_u = net.out_total[u], in_u = net.in_total[u];
        link_exit_[from] += -(out_u - out_to_[from]) + in_from_[from];
        link_enter_[from] += -(in_u - in_from_[from]) + out_to_[from];
        link_exit_[to] += (out_u - out_to_[to]) - in_from_[to];
        link_enter_[to] += (in_u - in_from_[to]) - out_to_[to];
        flow_[from] -= net.flow[u];
        tp_[from] -= net.tp[u];
        v_[from] -= net.v[u];
        flow_[to] += net.flow[u];
        tp_[to] += net.tp[u];
        v_[to] += net.v[u];

        if (size_[to] == 0) std::erase(free_, to);
        ++size_[to];
        if (--size_[from] == 0) {
            link_exit_[from] = link_enter_[from] = flow_[from] = tp_[from] = v_[from] = 0.0;
            free_.push_back(from);
        }
        module_of_[u] = to;
    }

    const FlowNetwork* net_;
    std::vector<ModuleId> module_of_;
    double node_term_;
    std::vector<double> flow_, tp_, v_, link_exit_, link_enter_;
    std::vector<std::size_t> size_;
    std::vector<ModuleId> free_;
    double sum_exit_ = 0.0, sum_plogp_enter_ = 0.0, sum_plogp_exit_ = 0.0, sum_plogp_exit_flow_ = 0.0;

    std::vector<double> out_to_, in_from_;
    std::vector<char> touched_flag_;
    std::vector<ModuleId> touched_;
};

inline double node_entropy_term(const FlowModel& f) {
    double s = 0.0;
    for (double p : f.node_rate) s += plogp2(p);
    return s;
}

/// One restart: node moves, then repeated aggregation with moves of the
/// aggregated nodes, then refinement of the original nodes, until the
/// codelength stops improving.
inline std::vector<ModuleId> optimize_once(const FlowModel& flow, const FlowNetwork& base, std::mt19937_64& rng,
                                           const OptimizerOptions& opts, double& best_length) {
    const std::size_t n = base.size();
    const double node_term = node_entropy_term(flow);
    std::vector<ModuleId> assignment(n);
    std::iota(assignment.begin(), assignment.end(), ModuleId{0});
    std::vector<ModuleId> best = assignment;
    best_length = std::numeric_limits<double>::infinity();

    for (std::size_t round = 0; round < opts.max_rounds; ++round) {
        ModuleState fine(base, assignment, node_term);
        fine.local_moves(rng, opts.tolerance, opts.max_sweeps);
        std::size_t count = fine.dense_assignment(assignment);

        FlowNetwork net = base.aggregate(assignment, count);
        while (count > 1) {
            std::vector<ModuleId> identity(count);
            std::iota(identity.begin(), identity.end(), ModuleId{0});
            ModuleState coarse(net, identity, node_term);
            if (coarse.local_moves(rng, opts.tolerance, opts.max_sweeps) == 0) break;
            std::vector<ModuleId> level;
            const std::size_t next_count = coarse.dense_assignment(level);
            for (auto& m : assignment) m = level[m];
            net = net.aggregate(level, next_count);
            count = next_count;
        }

        const double length = ModuleState(base, assignment, node_term).codelength();
        if (length < best_length - opts.tolerance) {
            best_length = length;
            best = assignment;
        } else {
            break;
        }
    }

    ModuleState polish(base, best, node_term);
    if (polish.local_moves(rng, opts.tolerance, opts.max_sweeps, true) > 0) {
        polish.dense_assignment(best);
        best_length = polish.codelength();
    }
    return best;
}

}  // namespace detail

/// Greedy map-equation minimization; best of `opts.passes` seeded restarts.
/// Never returns a partition longer than the one-module partition.
inline Partition optimize_partition(const FlowModel& flow, std::uint64_t seed, const OptimizerOptions& opts = {}) {
    const std::size_t n = flow.node_count();
    if (n == 0) return Partition{};
    const detail::FlowNetwork base = detail::FlowNetwork::from_flow(flow);

    Partition best = Partition::one_module(n);
    double best_length = codelength(flow, best).total;
    for (std::size_t pass = 0; pass < std::max<std::size_t>(1, opts.passes); ++pass) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(pass)};
        std::mt19937_64 rng(seq);
        double length = 0.0;
        auto assignment = detail::optimize_once(flow, base, rng, opts, length);
        if (length < best_length - 1e-12) {
            best_length = length;
            best = Partition(assignment);
        }
    }
    return best;
}

}  // namespace smartwalk
