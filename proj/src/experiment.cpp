/*
Copyright 2026 The wormsim Authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>
#include <tuple>

#include "json.hpp"

#include "wormsim/experiment.hpp"

#ifndef WORMSIM_VERSION
#define WORMSIM_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace wormsim {

std::string_view code_version() noexcept { return WORMSIM_VERSION; }

std::uint64_t graph_seed(const ExperimentSpec& spec, std::size_t node_count, std::size_t replica) {
    const std::uint64_t topo = spec.topology == TopologyChoice::RGG ? 0 : 1;
    return derive_seed(spec.master_seed, {seed_tag::graph, node_count, replica, topo});
}

Graph build_graph(const ExperimentSpec& spec, std::size_t node_count, std::size_t replica) {
    const NetworkConfig cfg = spec.network(node_count);
    Rng rng = make_rng(graph_seed(spec, node_count, replica));
    if (spec.topology == TopologyChoice::ERMatched) return build_er_matched(node_count, mean_degree_prediction(cfg), rng);
    const auto pts = place_nodes(cfg, rng);
    return build_rgg(pts, cfg);
}

std::string format_sig6(double value) {
    if (!std::isfinite(value)) return "nan";
    if (value == 0.0) return "0.00000";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.5e", value);
    const int exponent = std::atoi(std::strchr(buf, 'e') + 1);
    const int decimals = std::max(0, 5 - exponent);
    std::snprintf(buf, sizeof buf, "%.*f", decimals, value);
    std::string out(buf);
    if (out[0] == '-' && out.find_first_not_of("-0.") == std::string::npos) out.erase(0, 1);
    return out;
}

namespace {

std::string topology_column(GraphKind g) { return std::string(to_string(g)); }
std::string mac_column(bool mac) { return mac ? "on" : "off"; }

std::string cell_file_name(const CellKey& k) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "cell_N%zu_r%zu_%s_%s_%016llx.json", k.node_count, k.graph_replica,
                  topology_column(k.graph).c_str(), mac_column(k.mac).c_str(),
                  static_cast<unsigned long long>(std::bit_cast<std::uint64_t>(k.lambda)));
    return buf;
}

std::string graph_file_name(std::size_t n, std::size_t rep) {
    return "graph_N" + std::to_string(n) + "_r" + std::to_string(rep) + ".json";
}

json to_json(const ResultRow& r) {
    return json{{"N", r.key.node_count},
                {"graph_replica", r.key.graph_replica},
                {"topology", topology_column(r.key.graph)},
                {"mac", r.key.mac},
                {"lambda", r.key.lambda},
                {"prevalence_mean", r.prevalence_mean},
                {"prevalence_conditional", r.prevalence_conditional},
                {"susceptibility", r.susceptibility},
                {"std_error", r.std_error},
                {"runs", r.runs},
                {"graph_seed", r.graph_seed},
                {"cell_seed", r.cell_seed},
                {"mean_i_curve", r.mean_i_curve},
                {"mean_r_curve", r.mean_r_curve}};
}

ResultRow row_from_json(const json& j, const CellKey& key) {
    ResultRow r;
    r.key = key;
    r.prevalence_mean = j.at("prevalence_mean").get<double>();
    r.prevalence_conditional = j.at("prevalence_conditional").get<double>();
    r.susceptibility = j.at("susceptibility").get<double>();
    r.std_error = j.at("std_error").get<double>();
    r.runs = j.at("runs").get<std::size_t>();
    r.graph_seed = j.at("graph_seed").get<std::uint64_t>();
    r.cell_seed = j.at("cell_seed").get<std::uint64_t>();
    r.mean_i_curve = j.at("mean_i_curve").get<std::vector<double>>();
    r.mean_r_curve = j.at("mean_r_curve").get<std::vector<double>>();
    return r;
}

json to_json(const GraphRow& g) {
    return json{{"N", g.node_count},         {"graph_replica", g.graph_replica},
                {"topology", topology_column(g.graph)}, {"mean_degree", g.mean_degree},
                {"clustering", g.clustering}, {"connected", g.connected},
                {"giant_frac", g.giant_frac}, {"graph_seed", g.graph_seed}};
}

GraphRow graph_row_from_json(const json& j) {
    GraphRow g;
    g.node_count = j.at("N").get<std::size_t>();
    g.graph_replica = j.at("graph_replica").get<std::size_t>();
    g.graph = j.at("topology").get<std::string>() == "RGG" ? GraphKind::RGG : GraphKind::ER;
    g.mean_degree = j.at("mean_degree").get<double>();
    g.clustering = j.at("clustering").get<double>();
    g.connected = j.at("connected").get<bool>();
    g.giant_frac = j.at("giant_frac").get<double>();
    g.graph_seed = j.at("graph_seed").get<std::uint64_t>();
    return g;
}

void write_file(const fs::path& path, const std::string& body) {
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        out << body;
        if (!out) throw std::runtime_error("write failed: " + tmp.string());
    }
    fs::rename(tmp, path);
}

std::optional<json> read_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) return std::nullopt;
    try {
        return json::parse(in);
    } catch (const json::exception&) {
        return std::nullopt;  // torn checkpoint; recompute
    }
}

GraphRow measure(const Graph& g, std::size_t n, std::size_t rep, std::uint64_t seed) {
    const auto m = compute_metrics(g);
    return GraphRow{n, rep, g.kind(), m.mean_degree, m.clustering_coefficient, m.connected,
                    m.giant_component_fraction, seed};
}

}  // namespace

ExperimentResults execute(const ExperimentSpec& spec, const ExecuteOptions& options) {
    spec.validate();
    const auto plan = execution_plan(spec);
    std::vector<std::optional<ResultRow>> rows(plan.size());
    ExperimentResults results;

    if (options.partial_dir) fs::create_directories(*options.partial_dir);
    auto log = [&](const std::string& msg) {
        if (options.progress) *options.progress << msg << '\n' << std::flush;
    };

    std::vector<std::size_t> counts = spec.node_counts;
    std::sort(counts.begin(), counts.end());
    std::size_t done = 0;
    for (std::size_t n : counts) {
        for (std::size_t rep = 0; rep < spec.graph_replicas; ++rep) {
            const std::uint64_t gseed = graph_seed(spec, n, rep);
            std::vector<std::size_t> todo;
            for (std::size_t i = 0; i < plan.size(); ++i) {
                if (plan[i].node_count != n || plan[i].graph_replica != rep) continue;
                if (options.partial_dir) {
                    if (auto j = read_json(*options.partial_dir / cell_file_name(plan[i]))) {
                        rows[i] = row_from_json(*j, plan[i]);
                        ++done;
                        continue;
                    }
                }
                todo.push_back(i);
            }

            std::optional<GraphRow> grow;
            if (options.partial_dir)
                if (auto j = read_json(*options.partial_dir / graph_file_name(n, rep))) grow = graph_row_from_json(*j);

            if (todo.empty() && grow) {
                results.graphs.push_back(*grow);
                continue;
            }

            const auto t0 = std::chrono::steady_clock::now();
            const Graph g = build_graph(spec, n, rep);
            if (!grow) {
                grow = measure(g, n, rep, gseed);
                if (options.partial_dir)
                    write_file(*options.partial_dir / graph_file_name(n, rep), to_json(*grow).dump() + "\n");
            }
            results.graphs.push_back(*grow);
            {
                std::ostringstream os;
                os << "graph N=" << n << " replica=" << rep << " <k>=" << format_sig6(grow->mean_degree)
                   << " C=" << format_sig6(grow->clustering) << " connected=" << (grow->connected ? "yes" : "no")
                   << " ("
                   << std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() << " s)";
                log(os.str());
            }

            for (std::size_t i : todo) {
                const CellKey& key = plan[i];
                const auto c0 = std::chrono::steady_clock::now();
                const std::uint64_t cseed = cell_seed(gseed, key.lambda);
                const EpidemicParams p{key.lambda, spec.patching_rate, key.mac};
                const auto st = ensemble(g, p, spec.runs_per_point, spec.seed_nodes_per_point, cseed, options.workers);
                ResultRow row{key, st.prevalence_mean, st.prevalence_conditional, st.susceptibility,
                              st.prevalence_std_error, st.run_count, gseed, cseed, st.mean_i_curve, st.mean_r_curve};
                if (options.partial_dir) write_file(*options.partial_dir / cell_file_name(key), to_json(row).dump() + "\n");
                rows[i] = std::move(row);
                ++done;
                std::ostringstream os;
                os << "[" << done << "/" << plan.size() << "] N=" << n << " " << topology_column(key.graph)
                   << " mac=" << mac_column(key.mac) << " lambda=" << format_sig6(key.lambda)
                   << " R=" << format_sig6(rows[i]->prevalence_mean) << " ("
                   << std::chrono::duration<double>(std::chrono::steady_clock::now() - c0).count() << " s)";
                log(os.str());
            }
        }
    }

    for (const auto& g : results.graphs) {
        if (!g.connected) {
            std::string w = "disconnected graph: N=" + std::to_string(g.node_count) + " replica=" +
                            std::to_string(g.graph_replica) + " giant_frac=" + format_sig6(g.giant_frac);
            log("warning: " + w);
            results.warnings.push_back(std::move(w));
        }
    }
    for (auto& r : rows) results.rows.push_back(std::move(*r));
    return results;
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) out.push_back(f);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& path, std::string_view header) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line) || line != header)
        throw std::runtime_error(path.string() + ": schema mismatch, expected header '" + std::string(header) + "'");
    const std::size_t width = split_csv(std::string(header)).size();
    std::vector<std::vector<std::string>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto f = split_csv(line);
        if (f.size() != width) throw std::runtime_error(path.string() + ": malformed row '" + line + "'");
        rows.push_back(std::move(f));
    }
    return rows;
}

// (N, topology column, mac column)
using CurveKey = std::tuple<std::size_t, std::string, std::string>;

Topology topology_of(const std::string& topo, const std::string& mac) {
    if (topo == "ER") return Topology::RG;
    return mac == "on" ? Topology::RGG_MAC : Topology::RGG;
}

std::string thresholds_body(const std::string& name, const std::vector<PrevalenceCurve>& curves,
                            std::vector<std::string>* warnings) {
    std::ostringstream out;
    out << kThresholdsHeader << '\n';
    for (const auto& c : curves) {
        const std::string topo = c.topology == Topology::RG ? "ER" : "RGG";
        const std::string mac = c.topology == Topology::RGG_MAC ? "on" : "off";
        for (ThresholdMethod m : {ThresholdMethod::CutoffCrossing, ThresholdMethod::SusceptibilityPeak}) {
            try {
                const auto est = estimate_threshold(c, m);
                out << name << ',' << c.node_count << ',' << topo << ',' << mac << ',' << to_string(m) << ','
                    << format_sig6(est.lambda_c) << ',' << format_sig6(est.uncertainty) << ','
                    << format_sig6(est.kappa_c) << ',' << format_sig6(c.mean_degree) << ','
                    << format_sig6(mean_field_threshold(c.mean_degree)) << '\n';
            } catch (const RegimeNotBracketed& e) {
                if (warnings)
                    warnings->push_back("threshold N=" + std::to_string(c.node_count) + " " + std::string(to_string(c.topology)) +
                                        " " + std::string(to_string(m)) + ": " + e.what());
            }
        }
    }
    return out.str();
}

}  // namespace

std::vector<PrevalenceCurve> load_curves(const fs::path& dir, std::string* name) {
    const auto prev = read_csv(dir / "prevalence.csv", kPrevalenceHeader);
    const auto metrics = read_csv(dir / "metrics.csv", kMetricsHeader);

    std::map<std::pair<std::size_t, std::string>, std::pair<double, int>> degree;  // (N, topo) -> sum, count
    for (const auto& m : metrics) {
        auto& d = degree[{std::stoul(m[1]), m[2]}];
        d.first += std::stod(m[4]);
        d.second += 1;
    }

    struct Acc {
        double mean = 0, cond = 0, chi = 0, se2 = 0;
        int reps = 0;
    };
    std::map<CurveKey, std::map<double, Acc>> acc;
    for (const auto& r : prev) {
        if (name) *name = r[0];
        auto& a = acc[{std::stoul(r[1]), r[2], r[3]}][std::stod(r[4])];
        a.mean += std::stod(r[6]);
        a.cond += std::stod(r[7]);
        a.chi += std::stod(r[8]);
        const double se = std::stod(r[9]);
        a.se2 += se * se;
        a.reps += 1;
    }

    std::vector<PrevalenceCurve> curves;
    for (const auto& [key, by_lambda] : acc) {
        const auto& [n, topo, mac] = key;
        PrevalenceCurve c;
        c.node_count = n;
        c.topology = topology_of(topo, mac);
        const auto it = degree.find({n, topo});
        if (it == degree.end()) throw std::runtime_error("metrics.csv has no row for N=" + std::to_string(n));
        c.mean_degree = it->second.first / it->second.second;
        for (const auto& [lambda, a] : by_lambda) {
            const double r = a.reps;
            c.points.push_back({lambda, a.mean / r, a.cond / r, a.chi / r, std::sqrt(a.se2) / r});
        }
        curves.push_back(std::move(c));
    }
    return curves;
}

void emit(const ExperimentSpec& spec, const ExperimentResults& results, const fs::path& out_dir) {
    if (results.rows.empty()) throw std::invalid_argument("emit: no results");
    fs::create_directories(out_dir);

    std::ostringstream prev, ts, met;
    prev << kPrevalenceHeader << '\n';
    for (const auto& r : results.rows) {
        prev << spec.name << ',' << r.key.node_count << ',' << topology_column(r.key.graph) << ','
             << mac_column(r.key.mac) << ',' << format_sig6(r.key.lambda) << ',' << r.key.graph_replica << ','
             << format_sig6(r.prevalence_mean) << ',' << format_sig6(r.prevalence_conditional) << ','
             << format_sig6(r.susceptibility) << ',' << format_sig6(r.std_error) << ',' << r.runs << '\n';
    }

    // Time series: replicas averaged with the same padding rules as runs.
    ts << kTimeseriesHeader << '\n';
    for (std::size_t i = 0; i < results.rows.size();) {
        std::size_t j = i;
        const CellKey& k = results.rows[i].key;
        std::size_t horizon = 0;
        while (j < results.rows.size() && results.rows[j].key.node_count == k.node_count &&
               results.rows[j].key.mac == k.mac && results.rows[j].key.lambda == k.lambda) {
            horizon = std::max(horizon, results.rows[j].mean_i_curve.size());
            ++j;
        }
        const double reps = static_cast<double>(j - i);
        for (std::size_t t = 0; t < horizon; ++t) {
            double mi = 0.0, mr = 0.0;
            for (std::size_t q = i; q < j; ++q) {
                const auto& row = results.rows[q];
                if (t < row.mean_i_curve.size()) mi += row.mean_i_curve[t];
                mr += t < row.mean_r_curve.size() ? row.mean_r_curve[t] : row.mean_r_curve.back();
            }
            ts << spec.name << ',' << k.node_count << ',' << topology_column(k.graph) << ',' << mac_column(k.mac)
               << ',' << format_sig6(k.lambda) << ',' << t << ',' << format_sig6(mi / reps) << ','
               << format_sig6(mr / reps) << '\n';
        }
        i = j;
    }

    met << kMetricsHeader << '\n';
    for (const auto& g : results.graphs) {
        met << spec.name << ',' << g.node_count << ',' << topology_column(g.graph) << ',' << g.graph_replica << ','
            << format_sig6(g.mean_degree) << ',' << format_sig6(g.clustering) << ','
            << (g.connected ? "true" : "false") << ',' << format_sig6(g.giant_frac) << '\n';
    }

    write_file(out_dir / "prevalence.csv", prev.str());
    write_file(out_dir / "timeseries.csv", ts.str());
    write_file(out_dir / "metrics.csv", met.str());

    // Thresholds come from the stored CSVs so that `analyze` reproduces them.
    std::vector<std::string> warnings = results.warnings;
    write_file(out_dir / "thresholds.csv", thresholds_body(spec.name, load_curves(out_dir), &warnings));

    json manifest;
    manifest["name"] = spec.name;
    manifest["code_version"] = std::string(code_version());
    manifest["spec"] = format_spec(spec);
    manifest["master_seed"] = spec.master_seed;
    json graphs = json::array();
    for (const auto& g : results.graphs)
        graphs.push_back({{"N", g.node_count}, {"graph_replica", g.graph_replica},
                          {"topology", topology_column(g.graph)}, {"graph_seed", g.graph_seed},
                          {"connected", g.connected}});
    manifest["graphs"] = graphs;
    manifest["warnings"] = warnings;
    manifest["files"] = {"prevalence.csv", "timeseries.csv", "thresholds.csv", "metrics.csv"};
    write_file(out_dir / "manifest.json", manifest.dump(2) + "\n");
}

ExperimentResults run_experiment(const ExperimentSpec& spec, const fs::path& out_dir, int workers, bool force,
                                 std::ostream* progress) {
    spec.validate();
    const fs::path partial = out_dir / "partial";
    const fs::path spec_echo = partial / "spec.txt";
    if (fs::exists(out_dir / "manifest.json")) {
        if (!force) throw std::runtime_error(out_dir.string() + " holds a finished experiment; use --force to overwrite");
        fs::remove_all(out_dir);
    } else if (force && fs::exists(out_dir)) {
        fs::remove_all(out_dir);
    }

    const std::string canonical = format_spec(spec);
    if (fs::exists(spec_echo)) {
        std::ifstream in(spec_echo);
        std::stringstream buf;
        buf << in.rdbuf();
        if (buf.str() != canonical)
            throw std::runtime_error(out_dir.string() + " holds a partial run of a different spec; use --force");
        if (progress) *progress << "resuming partial run in " << out_dir.string() << '\n';
    } else if (fs::exists(out_dir) && !fs::is_empty(out_dir)) {
        throw std::runtime_error(out_dir.string() + " exists and is not an experiment directory; use --force");
    }
    fs::create_directories(partial);
    write_file(spec_echo, canonical);

    ExecuteOptions opts;
    opts.workers = workers;
    opts.partial_dir = partial;
    opts.progress = progress;
    auto results = execute(spec, opts);
    emit(spec, results, out_dir);
    return results;
}

void analyze(const fs::path& dir, std::ostream& report) {
    std::string name;
    const auto curves = load_curves(dir, &name);
    std::vector<std::string> warnings;
    write_file(dir / "thresholds.csv", thresholds_body(name, curves, &warnings));

    report << "thresholds (" << to_string(kDefaultThresholdMethod) << ", default):\n";
    for (const auto& c : curves) {
        report << "  N=" << c.node_count << ' ' << to_string(c.topology) << "  <k>=" << format_sig6(c.mean_degree)
               << "  mean-field=" << format_sig6(mean_field_threshold(c.mean_degree));
        try {
            const auto est = estimate_threshold(c);
            report << "  lambda_c=" << format_sig6(est.lambda_c) << " +- " << format_sig6(est.uncertainty)
                   << "  kappa_c=" << format_sig6(est.kappa_c) << '\n';
        } catch (const RegimeNotBracketed& e) {
            report << "  " << e.what() << '\n';
        }
    }

    std::map<Topology, std::vector<PrevalenceCurve>> by_topology;
    for (const auto& c : curves) by_topology[c.topology].push_back(c);
    for (const auto& [topo, group] : by_topology) {
        if (group.size() < 2) continue;
        const auto collapse = scaling_collapse(group);
        report << "collapse " << to_string(topo) << " over " << group.size()
               << " densities: max deviation in kappa [" << kCollapseWindowLo << ", " << kCollapseWindowHi
               << "] = " << format_sig6(collapse.max_deviation) << '\n';
    }

    const auto ts = read_csv(dir / "timeseries.csv", kTimeseriesHeader);
    std::map<std::tuple<std::size_t, std::string, std::string, double>, std::vector<double>> series;
    for (const auto& r : ts) series[{std::stoul(r[1]), r[2], r[3], std::stod(r[4])}].push_back(std::stod(r[6]));
    report << "spreading speed (T_max, peak I/N):\n";
    for (const auto& [key, curve] : series) {
        const auto sm = speed_metrics(curve);
        report << "  N=" << std::get<0>(key) << ' ' << std::get<1>(key) << " mac=" << std::get<2>(key)
               << " lambda=" << format_sig6(std::get<3>(key)) << "  T_max=" << sm.t_max
               << "  peak=" << format_sig6(sm.peak_height) << '\n';
    }
    for (const auto& w : warnings) report << "warning: " << w << '\n';
}

std::vector<GraphRow> audit_graphs(const ExperimentSpec& spec, std::ostream* histogram_out,
                                   const std::optional<fs::path>& export_dir) {
    spec.validate();
    std::vector<std::size_t> counts = spec.node_counts;
    std::sort(counts.begin(), counts.end());
    std::vector<GraphRow> rows;
    for (std::size_t n : counts) {
        for (std::size_t rep = 0; rep < spec.graph_replicas; ++rep) {
            const Graph g = build_graph(spec, n, rep);
            const auto m = compute_metrics(g);
            rows.push_back(GraphRow{n, rep, g.kind(), m.mean_degree, m.clustering_coefficient, m.connected,
                                    m.giant_component_fraction, graph_seed(spec, n, rep)});
            if (histogram_out) {
                *histogram_out << "# degree histogram N=" << n << " replica=" << rep
                               << " predicted <k>=" << format_sig6(mean_degree_prediction(spec.network(n))) << '\n';
                for (const auto& [k, count] : m.degree_histogram) *histogram_out << k << ' ' << count << '\n';
            }
            if (export_dir) {
                fs::create_directories(*export_dir);
                const std::string stem = "N" + std::to_string(n) + "_r" + std::to_string(rep);
                write_edge_list(g, *export_dir / (stem + "_edges.txt"));
                if (!g.positions().empty()) write_positions(g, *export_dir / (stem + "_positions.txt"));
            }
        }
    }
    return rows;
}

}  // namespace wormsim
