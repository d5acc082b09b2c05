#pragma once

// Stationary visit rates of random walks with teleportation.
//
// A walker at a node with out-links follows one with probability alpha
// (chosen proportionally to weight) and teleports otherwise; at a dangling
// node it always teleports. Teleportation lands on node i with probability
// v_i. Four schemes combine the teleportation target with whether
// teleportation steps are recorded:
//
//   recorded node    v uniform,        every step counted
//   recorded link    v = w_in / W,     every step counted
//   unrecorded node  v uniform,        only link steps counted
//   unrecorded link  v = w_out / W,    only link steps counted
//
// The unrecorded rates are obtained from the recorded walk with the same v
// by one extra link step, then renormalized. Dangling nodes have no link
// step, so their mass drops out of that extra step.

#include <smartwalk/graph.hpp>

#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace smartwalk {

enum class Target { node, link };
enum class Recording { recorded, unrecorded };

/// Teleportation landing distribution.
enum class Preference {
    uniform,       ///< 1/N
    in_strength,   ///< w_in / W
    out_strength,  ///< w_out / W
};

inline std::string_view to_string(Target t) { return t == Target::node ? "node" : "link"; }
inline std::string_view to_string(Recording r) { return r == Recording::recorded ? "recorded" : "unrecorded"; }
inline std::string_view to_string(Preference p) {
    switch (p) {
    case Preference::uniform: return "uniform";
    case Preference::in_strength: return "in_strength";
    case Preference::out_strength: return "out_strength";
    }
    return "?";
}

/// Landing distribution used by a scheme.
constexpr Preference preference_for(Target target, Recording recording) noexcept {
    if (target == Target::node) return Preference::uniform;
    return recording == Recording::recorded ? Preference::in_strength : Preference::out_strength;
}

/// A teleportation target paired with a recording mode.
struct Scheme {
    Target target = Target::node;
    Recording recording = Recording::recorded;

    friend bool operator==(const Scheme&, const Scheme&) = default;
};

/// Short name such as "rec-node" or "unrec-link".
inline std::string scheme_name(const Scheme& s) {
    return std::string(s.recording == Recording::recorded ? "rec-" : "unrec-") + std::string(to_string(s.target));
}

inline constexpr Scheme all_schemes[] = {
    {Target::node, Recording::recorded},
    {Target::link, Recording::recorded},
    {Target::node, Recording::unrecorded},
    {Target::link, Recording::unrecorded},
};

struct TeleportConfig {
    /// Link-following probability; the teleportation rate is 1 - alpha.
    double alpha = 0.85;
    Target target = Target::node;
    Recording recording = Recording::recorded;
    /// L1 distance between successive iterates that stops the iteration.
    double tol = 1e-12;
    std::size_t max_iter = 10000;

    static TeleportConfig with_teleport_rate(double rate, Scheme s) {
        TeleportConfig c;
        c.alpha = 1.0 - rate;
        c.target = s.target;
        c.recording = s.recording;
        return c;
    }

    Scheme scheme() const noexcept { return {target, recording}; }

    double teleport_rate() const noexcept { return 1.0 - alpha; }
    Preference preference() const noexcept { return preference_for(target, recording); }

    void validate() const {
        if (!(alpha >= 0.0 && alpha < 1.0)) {
            throw std::invalid_argument("alpha must lie in [0, 1), got " + std::to_string(alpha));
        }
        if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
        if (max_iter < 1) throw std::invalid_argument("max_iter must be at least 1");
    }
};

struct RankVector {
    std::vector<double> pi;
    double alpha = 0.0;
    Target target = Target::node;
    Recording recording = Recording::recorded;
    std::size_t iterations = 0;
    /// L1 change of the last power-iteration step.
    double residual = 0.0;
    bool converged = false;

    std::size_t size() const noexcept { return pi.size(); }
    double operator[](std::size_t i) const { return pi[i]; }
};

class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(std::size_t iterations, double residual)
        : std::runtime_error("power iteration did not converge after " + std::to_string(iterations) +
                             " iterations (residual " + std::to_string(residual) + ")"),
          iterations_(iterations), residual_(residual) {}
    std::size_t iterations() const noexcept { return iterations_; }
    double residual() const noexcept { return residual_; }

private:
    std::size_t iterations_;
    double residual_;
};

inline std::vector<double> preference_vector(const Graph& g, Preference p) {
    const std::size_t n = g.node_count();
    if (n == 0) throw std::invalid_argument("preference vector of an empty graph");
    std::vector<double> v(n);
    switch (p) {
    case Preference::uniform:
        std::fill(v.begin(), v.end(), 1.0 / static_cast<double>(n));
        break;
    case Preference::in_strength:
    case Preference::out_strength: {
        const double w = g.total_weight();
        if (!(w > 0.0)) throw std::invalid_argument("strength-proportional teleportation needs at least one edge");
        auto s = p == Preference::in_strength ? g.in_strength() : g.out_strength();
        for (std::size_t i = 0; i < n; ++i) v[i] = s[i] / w;
        break;
    }
    }
    return v;
}

inline std::vector<double> preference_vector(const Graph& g, Target t, Recording r) {
    return preference_vector(g, preference_for(t, r));
}

namespace detail {

/// y = T x over link steps only: y_i = sum_j W_ij / w_out_j * x_j. Mass on
/// dangling nodes is dropped. Returns the dropped mass.
inline double link_step(const Graph& g, std::span<const double> x, std::span<double> y) {
    const std::size_t n = g.node_count();
    std::vector<double> scaled(n);
    double dangling_mass = 0.0;
    for (NodeId j = 0; j < n; ++j) {
        const double out = g.out_strength(j);
        if (out > 0.0) {
            scaled[j] = x[j] / out;
        } else {
            scaled[j] = 0.0;
            dangling_mass += x[j];
        }
    }
    for (NodeId i = 0; i < n; ++i) {
        double acc = 0.0;
        for (const Arc& a : g.in_arcs(i)) acc += a.weight * scaled[a.node];
        y[i] = acc;
    }
    return dangling_mass;
}

}  // namespace detail

/// Power iteration on p <- alpha T' p + (1 - alpha) v, where the columns of
/// T' belonging to dangling nodes are replaced by v. Starts from v.
inline RankVector stationary_with_preference(const Graph& g, std::span<const double> v, double alpha,
                                             double tol = 1e-12, std::size_t max_iter = 10000) {
    const std::size_t n = g.node_count();
    if (v.size() != n) throw std::invalid_argument("preference vector size mismatch");
    if (!(alpha >= 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in [0, 1)");

    RankVector out;
    out.alpha = alpha;
    std::vector<double> p(v.begin(), v.end());
    std::vector<double> next(n);
    for (std::size_t it = 1; it <= max_iter; ++it) {
        const double dangling_mass = detail::link_step(g, p, next);
        const double teleport = alpha * dangling_mass + (1.0 - alpha);
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            next[i] = alpha * next[i] + teleport * v[i];
            sum += next[i];
        }
        double residual = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            next[i] /= sum;
            residual += std::abs(next[i] - p[i]);
        }
        p.swap(next);
        out.iterations = it;
        out.residual = residual;
        if (residual < tol) {
            out.converged = true;
            break;
        }
    }
    out.pi = std::move(p);
    return out;
}

/// Visit rates counting every step, teleportation included.
inline RankVector stationary_recorded(const Graph& g, const TeleportConfig& cfg) {
    cfg.validate();
    auto v = preference_vector(g, preference_for(cfg.target, Recording::recorded));
    RankVector r = stationary_with_preference(g, v, cfg.alpha, cfg.tol, cfg.max_iter);
    r.target = cfg.target;
    r.recording = Recording::recorded;
    return r;
}

/// Applies one link step to recorded visit rates and renormalizes.
inline std::vector<double> unrecorded_from_recorded(const Graph& g, std::span<const double> recorded) {
    std::vector<double> out(g.node_count());
    detail::link_step(g, recorded, out);
    const double sum = std::accumulate(out.begin(), out.end(), 0.0);
    if (!(sum > 0.0)) {
        throw std::domain_error("no link steps carry flow; unrecorded visit rates are undefined");
    }
    for (double& x : out) x /= sum;
    return out;
}

/// Visit rates counting only steps along links.
inline RankVector stationary_unrecorded(const Graph& g, const TeleportConfig& cfg) {
    cfg.validate();
    auto v = preference_vector(g, preference_for(cfg.target, Recording::unrecorded));
    RankVector r = stationary_with_preference(g, v, cfg.alpha, cfg.tol, cfg.max_iter);
    r.pi = unrecorded_from_recorded(g, r.pi);
    r.target = cfg.target;
    r.recording = Recording::unrecorded;
    return r;
}

inline RankVector stationary(const Graph& g, const TeleportConfig& cfg) {
    return cfg.recording == Recording::recorded ? stationary_recorded(g, cfg) : stationary_unrecorded(g, cfg);
}

}  // namespace smartwalk
