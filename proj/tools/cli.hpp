#pragma once

// Command-line front end. `run` takes the argument vector and output
// streams explicitly so the subcommands can be exercised in-process.
//
// Exit codes: 0 success, 1 user error (bad arguments, I/O, parse errors),
// 2 numerical failure (non-convergence, undefined flow).

#include <smartwalk/smartwalk.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace smartwalk::cli {

inline constexpr int exit_ok = 0;
inline constexpr int exit_user_error = 1;
inline constexpr int exit_numerical = 2;

class UserError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Rounds to 12 significant digits so JSON output matches the CSV text.
inline double sig12(double x) {
    if (!std::isfinite(x)) return x;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return std::stod(buf);
}

inline nlohmann::json json_number(double x) {
    return std::isfinite(x) ? nlohmann::json(sig12(x)) : nlohmann::json(nullptr);
}

struct GraphInput {
    std::string path;
    std::string format = "auto";
    int index_base = 0;
    bool labels = false;
};

inline Graph read_graph(const GraphInput& in) {
    std::ifstream file(in.path);
    if (!file) throw UserError("cannot open graph file '" + in.path + "'");
    std::string format = in.format;
    if (format == "auto") format = std::filesystem::path(in.path).extension() == ".net" ? "pajek" : "edgelist";
    try {
        if (format == "pajek") return load_pajek(file);
        EdgeListOptions opts;
        opts.index_base = in.index_base;
        opts.labels = in.labels;
        return load_edge_list(file, opts);
    } catch (const ParseError& e) {
        throw UserError(in.path + ": " + e.what());
    }
}

/// Scheme, rate and convergence flags shared by rank, cluster and sweep.
struct WalkOptions {
    std::string target = "node";
    std::string recording = "rec";
    std::optional<double> alpha;
    std::optional<double> teleport_rate;
    double tol = 1e-12;
    std::size_t max_iter = 10000;

    void add_to(CLI::App& app, bool with_rate = true) {
        app.add_option("--scheme", target, "Teleportation target")
            ->check(CLI::IsMember({"node", "link"}))
            ->capture_default_str();
        app.add_option("--recording", recording, "Whether teleportation steps are recorded")
            ->check(CLI::IsMember({"rec", "unrec", "recorded", "unrecorded"}))
            ->capture_default_str();
        if (with_rate) {
            auto* a = app.add_option("--alpha", alpha, "Link-following probability alpha");
            auto* t = app.add_option("--teleport-rate", teleport_rate, "Teleportation rate 1 - alpha (default 0.15)");
            a->excludes(t);
        }
        app.add_option("--tol", tol, "L1 convergence threshold")->capture_default_str();
        app.add_option("--max-iter", max_iter, "Power-iteration cap")->capture_default_str();
    }

    Scheme scheme() const {
        return {target == "link" ? Target::link : Target::node,
                recording.rfind("unrec", 0) == 0 ? Recording::unrecorded : Recording::recorded};
    }

    TeleportConfig config() const {
        TeleportConfig c;
        c.alpha = alpha ? *alpha : 1.0 - teleport_rate.value_or(0.15);
        c.target = scheme().target;
        c.recording = scheme().recording;
        c.tol = tol;
        c.max_iter = max_iter;
        try {
            c.validate();
        } catch (const std::invalid_argument& e) {
            throw UserError(e.what());
        }
        return c;
    }
};

/// Output destination: a file path, or the provided stream when empty or "-".
class Output {
public:
    Output(const std::string& path, std::ostream& fallback) {
        if (path.empty() || path == "-") {
            stream_ = &fallback;
        } else {
            file_ = std::make_unique<std::ofstream>(path);
            if (!*file_) throw UserError("cannot write '" + path + "'");
            stream_ = file_.get();
        }
    }
    std::ostream& operator*() { return *stream_; }

private:
    std::unique_ptr<std::ofstream> file_;
    std::ostream* stream_ = nullptr;
};

inline std::vector<RankingEntry> read_ranking_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UserError("cannot open ranking file '" + path + "'");
    try {
        return read_ranking_csv(in);
    } catch (const ParseError& e) {
        throw UserError(path + ": " + e.what());
    }
}

inline LabeledAssignment read_partition_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UserError("cannot open partition file '" + path + "'");
    try {
        return read_assignment(in);
    } catch (const ParseError& e) {
        throw UserError(path + ": " + e.what());
    }
}

/// Reorders `values` (keyed by `labels`) to follow `order`.
template <typename T>
std::vector<T> align(const std::vector<std::string>& order, const std::vector<std::string>& labels,
                     const std::vector<T>& values, const std::string& what) {
    if (labels.size() != order.size()) {
        throw UserError(what + " has " + std::to_string(labels.size()) + " entries, expected " +
                        std::to_string(order.size()));
    }
    std::unordered_map<std::string, std::size_t> pos;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (!pos.emplace(labels[i], i).second) throw UserError(what + " lists node '" + labels[i] + "' twice");
    }
    std::vector<T> out;
    out.reserve(order.size());
    for (const auto& l : order) {
        auto it = pos.find(l);
        if (it == pos.end()) throw UserError(what + " has no entry for node '" + l + "'");
        out.push_back(values[it->second]);
    }
    return out;
}

inline std::vector<double> parse_list(const std::string& text, const std::string& what) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw UserError("invalid number '" + item + "' in " + what);
        }
    }
    if (out.empty()) throw UserError(what + " is empty");
    return out;
}

inline std::vector<Scheme> parse_schemes(const std::string& text) {
    std::vector<Scheme> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        bool found = false;
        for (const Scheme& s : all_schemes) {
            if (scheme_name(s) == item) {
                out.push_back(s);
                found = true;
            }
        }
        if (!found) throw UserError("unknown scheme '" + item + "' (expected rec-node, rec-link, unrec-node, unrec-link)");
    }
    return out;
}

inline std::string default_rates() {
    return "0.05,0.1,0.15,0.2,0.25,0.3,0.35,0.4,0.45,0.5,0.55,0.6,0.65,0.7,0.75,0.8,0.85,0.9,0.95";
}

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Ranking and clustering of directed networks under random-walk teleportation schemes", "smartwalk"};
    app.require_subcommand(1);
    std::string output_path;
    std::string output_format = "csv";
    auto add_output = [&](CLI::App* sub) {
        sub->add_option("-o,--output", output_path, "Output file (default stdout)");
        sub->add_option("--output-format", output_format, "csv or json")
            ->check(CLI::IsMember({"csv", "json"}))
            ->capture_default_str();
    };
    auto add_graph = [](CLI::App* sub, GraphInput& g) {
        sub->add_option("graph", g.path, "Edge list or Pajek .net file")->required();
        sub->add_option("--format", g.format, "auto, edgelist or pajek")
            ->check(CLI::IsMember({"auto", "edgelist", "pajek"}))
            ->capture_default_str();
        sub->add_option("--index-base", g.index_base, "Smallest node index in an edge list")
            ->check(CLI::IsMember({0, 1}))
            ->capture_default_str();
        sub->add_flag("--labels", g.labels, "Edge-list node fields are labels, not indices");
    };

    // rank
    GraphInput rank_graph;
    WalkOptions rank_walk;
    auto* rank = app.add_subcommand("rank", "Stationary visit rates under a teleportation scheme");
    add_graph(rank, rank_graph);
    rank_walk.add_to(*rank);
    add_output(rank);

    // compare
    std::vector<std::string> rankings, partitions;
    std::string weights_path;
    std::optional<std::uint64_t> samples;
    std::uint64_t compare_seed = 1;
    double tie_tolerance = default_tie_tolerance;
    auto* compare = app.add_subcommand("compare", "Similarity of two rankings or two partitions");
    auto* opt_rankings = compare->add_option("--rankings", rankings, "Two ranking CSV files")->expected(2);
    auto* opt_partitions = compare->add_option("--partitions", partitions, "Two partition files")->expected(2);
    opt_rankings->excludes(opt_partitions);
    compare->add_option("--weights", weights_path, "Ranking CSV with reference visit rates for partition NMI");
    compare->add_option("--samples", samples, "Sample this many node pairs for rank-order NMI instead of the exact sum");
    compare->add_option("--seed", compare_seed, "Seed for pair sampling")->capture_default_str();
    compare->add_option("--tie-tolerance", tie_tolerance, "Visit rates within this fraction of the largest are tied")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    add_output(compare);

    // cluster
    GraphInput cluster_graph;
    WalkOptions cluster_walk;
    std::uint64_t cluster_seed = 1;
    OptimizerOptions cluster_opt;
    std::string report_path, reference_path;
    auto* cluster = app.add_subcommand("cluster", "Minimize the map equation under a teleportation scheme");
    add_graph(cluster, cluster_graph);
    cluster_walk.add_to(*cluster);
    cluster->add_option("--seed", cluster_seed, "Optimizer seed")->capture_default_str();
    cluster->add_option("--passes", cluster_opt.passes, "Optimizer restarts")->capture_default_str();
    cluster->add_option("-o,--output", output_path, "Partition file (default stdout)");
    cluster->add_option("--report", report_path, "Codelength report (JSON; default stderr)");
    cluster->add_option("--reference", reference_path, "Partition file to score the result against");

    // sweep
    auto* sweep = app.add_subcommand("sweep", "Teleportation-rate sweeps");
    sweep->require_subcommand(1);
    std::string rates_text = default_rates();
    std::string mus_text = "0.2,0.6";
    std::string phase_schemes = "rec-node,unrec-node";
    std::size_t phase_seeds = 5;
    std::uint64_t sweep_seed = 1;
    BenchmarkParams phase_graph;
    OptimizerOptions sweep_opt;
    auto* phase = sweep->add_subcommand("phase", "Benchmark recovery over mixing and teleportation rates");
    phase->add_option("--mu", mus_text, "Comma-separated mixing rates")->capture_default_str();
    phase->add_option("--rates", rates_text, "Comma-separated teleportation rates")->capture_default_str();
    phase->add_option("--schemes", phase_schemes, "Comma-separated schemes")->capture_default_str();
    phase->add_option("--seeds", phase_seeds, "Benchmark realizations per mixing rate")->capture_default_str();
    phase->add_option("--seed", sweep_seed, "Master seed")->capture_default_str();
    phase->add_option("--n", phase_graph.n, "Nodes")->capture_default_str();
    phase->add_option("--min-community", phase_graph.min_community)->capture_default_str();
    phase->add_option("--max-community", phase_graph.max_community)->capture_default_str();
    phase->add_option("--degree", phase_graph.out_degree, "Mean out-degree")->capture_default_str();
    phase->add_option("--passes", sweep_opt.passes, "Optimizer restarts")->capture_default_str();
    add_output(phase);

    GraphInput robust_graph;
    std::string robust_mode = "rank_size";
    std::string robust_schemes = "rec-node,rec-link,unrec-node,unrec-link";
    RobustnessConfig robust_cfg;
    auto* robust = sweep->add_subcommand("robustness", "Similarity to results at a reference teleportation rate");
    add_graph(robust, robust_graph);
    robust->add_option("--mode", robust_mode, "rank_size, rank_order or clustering")
        ->check(CLI::IsMember({"rank_size", "rank_order", "clustering"}))
        ->capture_default_str();
    robust->add_option("--rates", rates_text, "Comma-separated teleportation rates")->capture_default_str();
    robust->add_option("--schemes", robust_schemes, "Comma-separated schemes")->capture_default_str();
    robust->add_option("--reference", robust_cfg.reference_rate, "Reference teleportation rate")->capture_default_str();
    robust->add_option("--repeats", robust_cfg.repeats, "Optimizer runs per rate (clustering)")->capture_default_str();
    robust->add_option("--seed", robust_cfg.seed, "Seed")->capture_default_str();
    robust->add_option("--passes", robust_cfg.optimizer.passes, "Optimizer restarts")->capture_default_str();
    add_output(robust);

    // benchmark-gen
    BenchmarkParams gen;
    std::string planted_path;
    auto* bench = app.add_subcommand("benchmark-gen", "Write a planted-partition benchmark graph");
    bench->add_option("--n", gen.n, "Nodes")->capture_default_str();
    bench->add_option("--mu", gen.mu, "Mixing rate")->capture_default_str();
    bench->add_option("--degree", gen.out_degree, "Mean out-degree")->capture_default_str();
    bench->add_option("--min-community", gen.min_community)->capture_default_str();
    bench->add_option("--max-community", gen.max_community)->capture_default_str();
    bench->add_option("--seed", gen.seed)->capture_default_str();
    bench->add_option("-o,--output", output_path, "Edge list (default stdout)");
    bench->add_option("--partition", planted_path, "Write the planted partition here");

    std::vector<const char*> argv{"smartwalk"};
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return exit_ok;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return exit_ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return exit_user_error;
    }

    try {
        if (*rank) {
            const Graph g = read_graph(rank_graph);
            const TeleportConfig cfg = rank_walk.config();
            const RankVector r = stationary(g, cfg);
            const auto ranking = make_ranking(g, r.pi);
            Output o(output_path, out);
            if (output_format == "json") {
                nlohmann::json rows = nlohmann::json::array();
                for (const auto& e : ranking) {
                    rows.push_back({{"node", e.label}, {"visit_rate", json_number(e.visit_rate)}, {"rank", e.rank}});
                }
                *o << nlohmann::json{{"scheme", scheme_name(cfg.scheme())},
                                     {"teleport_rate", json_number(cfg.teleport_rate())},
                                     {"iterations", r.iterations},
                                     {"residual", r.residual},
                                     {"converged", r.converged},
                                     {"ranking", rows}}
                           .dump(2)
                   << '\n';
            } else {
                write_ranking_csv(ranking, *o);
            }
            if (!r.converged) {
                err << "error: " << ConvergenceError(r.iterations, r.residual).what() << '\n';
                return exit_numerical;
            }
            return exit_ok;
        }

        if (*compare) {
            nlohmann::json report;
            if (!rankings.empty()) {
                const auto a = read_ranking_file(rankings[0]);
                const auto b = read_ranking_file(rankings[1]);
                std::vector<std::string> la, lb;
                std::vector<double> va, vb;
                for (const auto& e : a) la.push_back(e.label), va.push_back(e.visit_rate);
                for (const auto& e : b) lb.push_back(e.label), vb.push_back(e.visit_rate);
                vb = align(la, lb, vb, rankings[1]);
                const RankOrderMode mode = samples ? RankOrderMode::sampled(*samples, compare_seed, tie_tolerance)
                                                   : RankOrderMode::exact(tie_tolerance);
                RankComparison c;
                try {
                    c = compare_rankings(va, vb, mode);
                } catch (const std::invalid_argument& e) {
                    throw UserError(e.what());
                }
                report = {{"kind", "rankings"},
                          {"nodes", va.size()},
                          {"cosine", json_number(c.cosine)},
                          {"rank_order_nmi", json_number(c.rank_order.nmi)},
                          {"rank_order_degenerate", c.rank_order.degenerate},
                          {"rank_order_exact", c.rank_order.exact}};
                if (!c.rank_order.exact) report["samples"] = c.rank_order.samples;
            } else if (!partitions.empty()) {
                const auto a = read_partition_file(partitions[0]);
                const auto b = read_partition_file(partitions[1]);
                const Partition pa(a.modules);
                const Partition pb(align(a.labels, b.labels, b.modules, partitions[1]));
                std::vector<double> w;
                if (!weights_path.empty()) {
                    const auto rk = read_ranking_file(weights_path);
                    std::vector<std::string> lw;
                    std::vector<double> vw;
                    for (const auto& e : rk) lw.push_back(e.label), vw.push_back(e.visit_rate);
                    w = align(a.labels, lw, vw, weights_path);
                }
                InformationScore s;
                try {
                    s = partition_nmi(pa, pb, w);
                } catch (const std::invalid_argument& e) {
                    throw UserError(e.what());
                }
                report = {{"kind", "partitions"},
                          {"nodes", pa.node_count()},
                          {"modules_a", pa.module_count()},
                          {"modules_b", pb.module_count()},
                          {"nmi", json_number(s.nmi)},
                          {"degenerate", s.degenerate},
                          {"weighted", !w.empty()}};
            } else {
                throw UserError("compare needs --rankings or --partitions");
            }
            Output o(output_path, out);
            if (output_format == "json") {
                *o << report.dump(2) << '\n';
            } else {
                std::string header, values;
                for (auto it = report.begin(); it != report.end(); ++it) {
                    if (!header.empty()) header += ',', values += ',';
                    header += it.key();
                    values += it->is_string() ? it->get<std::string>() : it->dump();
                }
                *o << header << '\n' << values << '\n';
            }
            return exit_ok;
        }

        if (*cluster) {
            const Graph g = read_graph(cluster_graph);
            const TeleportConfig cfg = cluster_walk.config();
            const FlowModel flow = build_flow(g, cfg);
            const Partition p = optimize_partition(flow, cluster_seed, cluster_opt);
            const Codelength len = codelength(flow, p);
            {
                Output o(output_path, out);
                write_assignment(g, p, *o);
            }
            nlohmann::json report{
                {"scheme", scheme_name(cfg.scheme())},
                {"teleport_rate", json_number(cfg.teleport_rate())},
                {"seed", cluster_seed},
                {"modules", p.module_count()},
                {"codelength", json_number(len.total)},
                {"index_codelength", json_number(len.index_term)},
                {"module_codelength", json_number(len.total - len.index_term)},
                {"exit_rate", json_number(len.exit_rate)},
                {"one_module_codelength", json_number(codelength(flow, Partition::one_module(g.node_count())).total)}};
            if (!reference_path.empty()) {
                const auto ref = read_partition_file(reference_path);
                std::vector<std::string> labels(g.node_count());
                for (NodeId i = 0; i < g.node_count(); ++i) labels[i] = g.label(i);
                const Partition rp(align(labels, ref.labels, ref.modules, reference_path));
                report["nmi_vs_reference"] = json_number(partition_nmi(rp, p, flow.node_rate).nmi);
                report["reference_codelength"] = json_number(codelength(flow, rp).total);
            }
            if (report_path.empty()) {
                err << report.dump(2) << '\n';
            } else {
                Output o(report_path, out);
                *o << report.dump(2) << '\n';
            }
            return exit_ok;
        }

        if (*sweep) {
            SweepResult result;
            if (*phase) {
                PhaseDiagramConfig cfg;
                cfg.graph = phase_graph;
                cfg.mus = parse_list(mus_text, "--mu");
                cfg.teleport_rates = parse_list(rates_text, "--rates");
                cfg.schemes = parse_schemes(phase_schemes);
                cfg.seeds = phase_seeds;
                cfg.master_seed = sweep_seed;
                cfg.optimizer = sweep_opt;
                try {
                    cfg.graph.validate();
                } catch (const std::invalid_argument& e) {
                    throw UserError(e.what());
                }
                result = phase_diagram(cfg);
            } else {
                const Graph g = read_graph(robust_graph);
                robust_cfg.teleport_rates = parse_list(rates_text, "--rates");
                robust_cfg.schemes = parse_schemes(robust_schemes);
                robust_cfg.mode = robust_mode == "rank_order"   ? RobustnessMode::rank_order
                                  : robust_mode == "clustering" ? RobustnessMode::clustering
                                                                : RobustnessMode::rank_size;
                result = robustness_sweep(g, robust_cfg);
            }
            Output o(output_path, out);
            if (output_format == "json") {
                *o << to_json(result).dump(2) << '\n';
            } else {
                write_csv(result, *o);
            }
            return exit_ok;
        }

        if (*bench) {
            Benchmark b;
            try {
                b = planted_partition_graph(gen);
            } catch (const std::invalid_argument& e) {
                throw UserError(e.what());
            }
            {
                Output o(output_path, out);
                write_edge_list(b.graph, *o);
            }
            if (!planted_path.empty()) {
                Output o(planted_path, out);
                write_assignment(b.graph, b.planted, *o);
            }
            return exit_ok;
        }
    } catch (const UserError& e) {
        err << "error: " << e.what() << '\n';
        return exit_user_error;
    } catch (const ConvergenceError& e) {
        err << "error: " << e.what() << '\n';
        return exit_numerical;
    } catch (const std::domain_error& e) {
        err << "error: " << e.what() << '\n';
        return exit_numerical;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_user_error;
    }
    return exit_user_error;
}

}  // namespace smartwalk::cli
