// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails.

#include <smartwalk/smartwalk.hpp>

#include <random_graphs.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace sw = smartwalk;
namespace oracle = smartwalk::oracle;
using namespace sw::testing;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

sw::TeleportConfig config(sw::Scheme s, double alpha) {
    auto c = sw::TeleportConfig::with_teleport_rate(1.0 - alpha, s);
    c.alpha = alpha;
    return c;
}

constexpr sw::Scheme rec_node{sw::Target::node, sw::Recording::recorded};
constexpr sw::Scheme rec_link{sw::Target::link, sw::Recording::recorded};
constexpr sw::Scheme unrec_node{sw::Target::node, sw::Recording::unrecorded};
constexpr sw::Scheme unrec_link{sw::Target::link, sw::Recording::unrecorded};

const std::vector<double> battery_alphas{0.05, 0.5, 0.85, 0.99};

/// 50 seeded random graphs, 10 to 100 nodes, with dangling nodes and leaves.
const std::vector<sw::Graph>& battery() {
    static const std::vector<sw::Graph> graphs = [] {
        std::vector<sw::Graph> out;
        std::mt19937_64 rng(2024);
        for (std::uint64_t k = 0; k < 50; ++k) {
            const std::size_t n = 10 + static_cast<std::size_t>(rng() % 91);
            const double p = std::min(0.5, 3.0 / static_cast<double>(n));
            out.push_back(random_graph(n, p, 1000 + k, 0.1, 0.1, k % 3 != 0));
        }
        return out;
    }();
    return graphs;
}

/// Uniform, in-strength, out-strength and a random personalized vector.
std::vector<std::vector<double>> preferences(const sw::Graph& g, std::uint64_t seed) {
    std::vector<std::vector<double>> out;
    for (auto p : {sw::Preference::uniform, sw::Preference::in_strength, sw::Preference::out_strength}) {
        out.push_back(sw::preference_vector(g, p));
    }
    std::mt19937_64 rng(seed);
    std::exponential_distribution<double> e(1.0);
    std::vector<double> v(g.node_count());
    for (auto& x : v) x = e(rng);
    const double s = std::accumulate(v.begin(), v.end(), 0.0);
    for (auto& x : v) x /= s;
    out.push_back(std::move(v));
    return out;
}

Outcome criterion_oracle() {
    const auto start = std::chrono::steady_clock::now();
    double worst = 0.0;
    std::size_t cases = 0;
    for (std::size_t k = 0; k < battery().size(); ++k) {
        const auto& g = battery()[k];
        for (const auto& v : preferences(g, k)) {
            for (double a : battery_alphas) {
                const auto dense = oracle::dense_stationary(g, v, a);
                const auto iter = sw::stationary_with_preference(g, v, a);
                if (!iter.converged) return {false, "power iteration did not converge"};
                worst = std::max(worst, l1_distance(iter.pi, dense));
                ++cases;
            }
        }
        // The scheme entry points use the same solver with their chosen preference.
        for (const sw::Scheme& s : {rec_node, rec_link}) {
            for (double a : battery_alphas) {
                const auto v = sw::preference_vector(g, s.target, s.recording);
                worst = std::max(worst, l1_distance(sw::stationary(g, config(s, a)).pi,
                                                    oracle::dense_stationary(g, v, a)));
            }
        }
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return {worst <= 1e-9 && seconds < 60.0,
            fmt("%zu cases, max L1 %.3g (tol 1e-9), %.1f s (limit 60 s)", cases, worst, seconds)};
}

Outcome criterion_taylor() {
    // The bound is compared with a rounding slack of 1e-12 in L1.
    const std::size_t orders[] = {0, 1, 2, 5, 10, 25, 50, 100};
    std::size_t cases = 0, violations = 0;
    double worst_ratio = 0.0, final_error = 0.0;
    for (std::size_t k = 0; k < battery().size(); ++k) {
        const auto& g = battery()[k];
        for (const auto& v : preferences(g, k)) {
            for (double a : battery_alphas) {
                const auto dense = oracle::dense_stationary(g, v, a);
                double prev_bound = std::numeric_limits<double>::infinity();
                for (std::size_t order : orders) {
                    const auto t = oracle::taylor_stationary(g, v, a, order);
                    const double err = l1_distance(t.pi, dense);
                    ++cases;
                    if (err > t.error_bound + 1e-12 || t.error_bound > prev_bound) ++violations;
                    if (t.error_bound > 1e-12) worst_ratio = std::max(worst_ratio, err / t.error_bound);
                    prev_bound = t.error_bound;
                    if (order == 100 && a <= 0.85) final_error = std::max(final_error, err);
                }
            }
        }
    }
    return {violations == 0 && final_error < 1e-6,
            fmt("%zu partial sums, %zu bound violations (slack 1e-12), max error/bound %.3g where bound > 1e-12, "
                "max error at K=100 (alpha<=0.85) %.3g",
                cases, violations, worst_ratio, final_error)};
}

Outcome criterion_alpha_independence() {
    const double alphas[] = {0.05, 0.275, 0.5, 0.725, 0.95};
    std::vector<std::pair<std::string, sw::Graph>> graphs;
    for (std::uint64_t s = 0; s < 5; ++s) {
        graphs.emplace_back("undirected", undirected(20 + 15 * s, 0.15, 300 + s));
        graphs.emplace_back("eulerian", eulerian(20 + 15 * s, 4 + s, 400 + s));
        graphs.emplace_back("mean-field", mean_field(8 + 4 * s, 500 + s));
    }
    double worst = 0.0;
    for (const auto& [kind, g] : graphs) {
        std::vector<double> expected(g.node_count());
        for (sw::NodeId i = 0; i < g.node_count(); ++i) expected[i] = g.in_strength(i) / g.total_weight();
        for (double a : alphas) {
            for (const sw::Scheme& s : {rec_link, unrec_link}) {
                worst = std::max(worst, max_abs_diff(sw::stationary(g, config(s, a)).pi, expected));
            }
        }
    }
    return {worst <= 1e-9, fmt("%zu graphs x 5 alpha x 2 link schemes, max |pi - w_in/W| %.3g (tol 1e-9)",
                               graphs.size(), worst)};
}

Outcome criterion_scheme_equivalence() {
    std::vector<const sw::Graph*> graphs;
    for (const auto& g : battery()) graphs.push_back(&g);
    static const std::vector<sw::Graph> extra = [] {
        std::vector<sw::Graph> out;
        for (std::uint64_t s = 0; s < 5; ++s) {
            out.push_back(undirected(30, 0.15, 600 + s));
            out.push_back(eulerian(30, 5, 700 + s));
            out.push_back(mean_field(10, 800 + s));
            out.push_back(strongly_connected(40, 0.05, 900 + s));
        }
        return out;
    }();
    for (const auto& g : extra) graphs.push_back(&g);

    double worst = 0.0, worst_cos = 0.0, worst_r = 0.0;
    for (const sw::Graph* g : graphs) {
        for (double a : {0.05, 0.15, 0.5, 0.85, 0.99}) {
            const auto rec = sw::stationary(*g, config(rec_link, a));
            const auto unrec = sw::stationary(*g, config(unrec_link, a));
            worst = std::max(worst, max_abs_diff(rec.pi, unrec.pi));
            worst_cos = std::max(worst_cos, std::abs(1.0 - sw::cosine_similarity(rec.pi, unrec.pi)));
            worst_r = std::max(worst_r, std::abs(1.0 - sw::rank_order_nmi(rec.pi, unrec.pi).nmi));
        }
    }
    return {worst <= 1e-9 && worst_cos <= 1e-9 && worst_r <= 1e-9,
            fmt("%zu graphs x 5 alpha, max |rec-unrec| %.3g, max |1-cosine| %.3g, max |1-R| %.3g (tol 1e-9)",
                graphs.size(), worst, worst_cos, worst_r)};
}

Outcome criterion_leaves() {
    std::size_t leaves = 0;
    double worst = 0.0;
    for (const auto& g : battery()) {
        for (double a : {0.15, 0.85}) {
            for (const sw::Scheme& s : {rec_link, unrec_link}) {
                const auto r = sw::stationary(g, config(s, a));
                for (sw::NodeId i = 0; i < g.node_count(); ++i) {
                    if (g.in_strength(i) == 0.0) {
                        worst = std::max(worst, r[i]);
                        ++leaves;
                    }
                }
            }
        }
    }
    return {leaves > 0 && worst < 1e-12, fmt("%zu leaf checks, max pi %.3g (limit 1e-12)", leaves, worst)};
}

Outcome criterion_monte_carlo() {
    std::size_t within = 0, total = 0;
    for (std::uint64_t k = 0; k < 10; ++k) {
        const sw::Graph g = random_graph(15 + 3 * k, 0.15, 1100 + k, 0.1, 0.1, k % 2 == 0);
        for (std::size_t s = 0; s < 4; ++s) {
            const auto cfg = config(sw::all_schemes[s], 0.85);
            const auto exact = sw::stationary(g, cfg);
            const auto est = oracle::simulate_walker(g, cfg, 10'000'000, sw::detail::derive_seed(77, k, s));
            for (std::size_t i = 0; i < g.node_count(); ++i) {
                within += std::abs(est.frequency[i] - exact[i]) <= 3.0 * est.standard_error[i] + 1e-15;
                ++total;
            }
        }
    }
    const double frac = static_cast<double>(within) / static_cast<double>(total);
    return {frac >= 0.95, fmt("%zu/%zu node comparisons within 3 SE (%.1f%%, need 95%%)", within, total, 100 * frac)};
}

Outcome criterion_map_equation() {
    double worst = 0.0;
    std::size_t flows = 0;
    for (const auto& g : battery()) {
        for (const sw::Scheme& s : sw::all_schemes) {
            for (double a : battery_alphas) {
                const auto f = sw::build_flow(g, config(s, a));
                double h = 0.0;
                for (double p : f.node_rate) {
                    if (p > 0.0) h -= p * std::log2(p);
                }
                worst = std::max(worst, std::abs(sw::codelength(f, sw::Partition::one_module(g.node_count())).total - h));
                ++flows;
            }
        }
    }
    const auto f = sw::build_flow(two_two_cycles(), config(unrec_node, 0.85));
    const double planted = sw::codelength(f, sw::Partition(std::vector<sw::ModuleId>{0, 0, 1, 1})).total;
    const double one = sw::codelength(f, sw::Partition::one_module(4)).total;
    return {worst <= 1e-9 && planted == 1.0 && one == 2.0,
            fmt("%zu flows, max |L1 - H| %.3g (tol 1e-9); two 2-cycles planted %.17g, one module %.17g", flows, worst,
                planted, one)};
}

std::vector<double> grid(double lo, double hi, double step) {
    std::vector<double> out;
    for (int k = 0;; ++k) {
        const double x = std::round((lo + k * step) * 1e9) / 1e9;
        if (x > hi + 1e-12) break;
        out.push_back(x);
    }
    return out;
}

/// Mean score per (mu, scheme, rate) over seeds.
std::map<std::tuple<double, std::string, double>, double> mean_scores(const sw::SweepResult& r, std::string& errors) {
    std::map<std::tuple<double, std::string, double>, std::pair<double, int>> acc;
    for (const auto& row : r.rows) {
        if (!row.error.empty()) errors = row.error;
        auto& [sum, n] = acc[{row.mu, sw::scheme_name(row.scheme), row.teleport_rate}];
        sum += row.error.empty() ? row.score : 0.0;
        ++n;
    }
    std::map<std::tuple<double, std::string, double>, double> out;
    for (const auto& [k, v] : acc) out[k] = v.first / v.second;
    return out;
}

Outcome criterion_phase_diagram() {
    const auto start = std::chrono::steady_clock::now();
    const auto rates = grid(0.05, 0.95, 0.05);
    sw::PhaseDiagramConfig cfg;
    cfg.teleport_rates = rates;
    cfg.seeds = 5;
    cfg.master_seed = 2;

    cfg.mus = {0.2, 0.6};
    cfg.schemes = {rec_node};
    const auto rec = sw::phase_diagram(cfg);
    cfg.mus = {0.2, 0.4, 0.6};
    cfg.schemes = {unrec_node};
    const auto unrec = sw::phase_diagram(cfg);

    std::string errors;
    const auto rec_mean = mean_scores(rec, errors);
    const auto unrec_mean = mean_scores(unrec, errors);
    if (!errors.empty()) return {false, "sweep cell failed: " + errors};

    // Transition: midpoint between the last rate with mean nmi >= 0.5 and the
    // first rate after it below 0.5.
    auto transition = [&](double mu) {
        for (std::size_t k = 0; k + 1 < rates.size(); ++k) {
            if (rec_mean.at({mu, "rec-node", rates[k]}) >= 0.5 && rec_mean.at({mu, "rec-node", rates[k + 1]}) < 0.5) {
                return 0.5 * (rates[k] + rates[k + 1]);
            }
        }
        return std::numeric_limits<double>::quiet_NaN();
    };
    const double t02 = transition(0.2), t06 = transition(0.6);
    double unrec_min = 1.0;
    for (const auto& [k, v] : unrec_mean) unrec_min = std::min(unrec_min, v);

    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool pass = std::abs(t02 - 0.6) <= 0.1 + 1e-9 && std::abs(t06 - 0.2) <= 0.1 + 1e-9 && unrec_min >= 0.95;
    return {pass, fmt("recorded transition %.3f at mu=0.2 (0.6 +- 0.1), %.3f at mu=0.6 (0.2 +- 0.1); "
                      "unrecorded min mean nmi %.4f over mu in {0.2,0.4,0.6} (need 0.95); %.0f s",
                      t02, t06, unrec_min, seconds)};
}

Outcome criterion_mixing_limit() {
    sw::PhaseDiagramConfig cfg;
    cfg.teleport_rates = {0.15};
    cfg.seeds = 5;
    cfg.master_seed = 3;
    cfg.mus = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.85, 0.9, 0.95};
    cfg.schemes = {unrec_node, unrec_link};
    const auto r = sw::phase_diagram(cfg);
    std::string errors;
    const auto mean = mean_scores(r, errors);
    if (!errors.empty()) return {false, "sweep cell failed: " + errors};
    double low_min = 1.0, high_max = 0.0;
    for (const auto& [k, v] : mean) {
        const double mu = std::get<0>(k);
        if (mu <= 0.6) low_min = std::min(low_min, v);
        if (mu >= 0.85) high_max = std::max(high_max, v);
    }
    return {low_min >= 0.95 && high_max <= 0.1,
            fmt("min mean nmi %.4f for mu<=0.6 (need 0.95), max mean nmi %.4f for mu>=0.85 (limit 0.1)", low_min,
                high_max)};
}

Outcome criterion_metrics() {
    std::vector<std::string> failed;
    auto check = [&](bool ok, const char* what) {
        if (!ok) failed.emplace_back(what);
    };
    const std::vector<double> x{0.5, 0.3, 0.2};
    check(sw::cosine_similarity(x, x) == 1.0, "cosine identical");
    check(sw::cosine_similarity(std::vector<double>{1, 0}, std::vector<double>{0, 1}) == 0.0, "cosine orthogonal");
    check(std::abs(sw::cosine_similarity(std::vector<double>{1, 1}, std::vector<double>{1, 0}) - 1 / std::sqrt(2.0)) <
              1e-15,
          "cosine 1/sqrt2");
    check(sw::rank_order_nmi(x, x).nmi == 1.0, "rank order identical");
    check(std::abs(sw::rank_order_nmi(x, std::vector<double>{0.2, 0.3, 0.5}).nmi - 1.0) < 1e-12,
          "rank order reversal");

    std::mt19937_64 rng(10);
    std::uniform_real_distribution<double> u(0.1, 1.0);
    std::vector<double> px(100);
    for (auto& v : px) v = u(rng);
    auto py = px;
    std::shuffle(py.begin(), py.end(), rng);
    check(sw::rank_order_nmi(px, py).nmi < 0.05, "rank order independent permutation");

    const std::vector<double> tied(4, 0.25);
    const auto deg = sw::rank_order_nmi(tied, tied);
    check(deg.nmi == 1.0 && deg.degenerate, "rank order fully tied");

    const sw::Partition p(std::vector<sw::ModuleId>{0, 0, 1, 1, 2, 2});
    check(sw::partition_nmi(p, p).nmi == 1.0, "partition identical");
    std::vector<sw::ModuleId> planted(100);
    for (std::size_t i = 0; i < 100; ++i) planted[i] = static_cast<sw::ModuleId>(i / 25);
    check(sw::partition_nmi(sw::Partition(planted), sw::Partition::one_module(100)).nmi == 0.0,
          "partition vs one module");
    auto shuffled = planted;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    check(sw::partition_nmi(sw::Partition(planted), sw::Partition(shuffled)).nmi < 0.1, "partition random");

    double worst_gap = 0.0;
    for (std::uint64_t s = 0; s < 5; ++s) {
        std::vector<double> a(100);
        for (auto& v : a) v = u(rng);
        auto b = a;
        for (int k = 0; k < 20 * static_cast<int>(s + 1); ++k) std::swap(b[rng() % 100], b[rng() % 100]);
        const double exact = sw::rank_order_nmi(a, b).nmi;
        const double sampled = sw::rank_order_nmi(a, b, sw::RankOrderMode::sampled(1'000'000, s)).nmi;
        worst_gap = std::max(worst_gap, std::abs(exact - sampled));
    }
    check(worst_gap <= 0.02, "sampled vs exact");

    std::string detail = fmt("11 examples, sampled-vs-exact max gap %.4f at 1e6 samples (tol 0.02)", worst_gap);
    for (const auto& f : failed) detail += "; failed: " + f;
    return {failed.empty(), detail};
}

Outcome criterion_robustness() {
    sw::BenchmarkParams bp;
    bp.mu = 0.4;
    bp.seed = 4242;
    const auto bench = sw::planted_partition_graph(bp);
    const auto rates = grid(0.05, 0.95, 0.05);

    auto averaged = [&](sw::RobustnessMode mode, std::size_t repeats, std::vector<double> grid_rates) {
        sw::RobustnessConfig cfg;
        cfg.teleport_rates = std::move(grid_rates);
        cfg.mode = mode;
        cfg.repeats = repeats;
        cfg.seed = 9;
        const auto r = sw::robustness_sweep(bench.graph, cfg);
        std::map<std::string, double> mean;
        std::map<std::string, int> count;
        for (const auto& row : r.rows) {
            if (!row.error.empty()) throw std::runtime_error(row.error);
            mean[sw::scheme_name(row.scheme)] += row.score;
            ++count[sw::scheme_name(row.scheme)];
        }
        for (auto& [k, v] : mean) v /= count[k];
        return mean;
    };

    const auto size = averaged(sw::RobustnessMode::rank_size, 1, rates);
    const auto clus = averaged(sw::RobustnessMode::clustering, 5, grid(0.05, 0.95, 0.1));
    const double margin = 0.02;
    const double link = std::min(size.at("rec-link"), size.at("unrec-link"));
    const bool size_ok = link >= size.at("unrec-node") - margin && size.at("unrec-node") >= size.at("rec-node") - margin;
    const bool clus_ok = clus.at("unrec-node") >= clus.at("rec-node") - margin &&
                         clus.at("unrec-link") >= clus.at("rec-link") - margin;
    return {size_ok && clus_ok,
            fmt("rank-size cosine: link %.4f >= unrec-node %.4f >= rec-node %.4f; clustering nmi: unrec-node %.4f vs "
                "rec-node %.4f, unrec-link %.4f vs rec-link %.4f (violation margin 0.02)",
                link, size.at("unrec-node"), size.at("rec-node"), clus.at("unrec-node"), clus.at("rec-node"),
                clus.at("unrec-link"), clus.at("rec-link"))};
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"oracle equivalence", criterion_oracle},
        {"taylor consistency", criterion_taylor},
        {"alpha-independence identities", criterion_alpha_independence},
        {"link scheme equivalence", criterion_scheme_equivalence},
        {"leaf property", criterion_leaves},
        {"monte carlo agreement", criterion_monte_carlo},
        {"map-equation identity", criterion_map_equation},
        {"phase diagram", criterion_phase_diagram},
        {"mixing limit", criterion_mixing_limit},
        {"metric examples", criterion_metrics},
        {"robustness ordering", criterion_robustness},
    };
    int failures = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        Outcome o;
        try {
            o = criteria[k].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failures += !o.pass;
        std::printf("%s criterion %zu (%s): %s\n", o.pass ? "PASS" : "FAIL", k + 1, criteria[k].first,
                    o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria failed\n", failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
