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

// wormsim: worm-epidemic sweeps on wireless ad hoc network models.
//
//   wormsim run <spec-file> --out <dir> [--workers K] [--force]
//   wormsim analyze <dir>
//   wormsim graph-metrics <spec-file> [--export <dir>]
//
// Exit codes: 0 success, 1 validation error, 2 runtime failure.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <omp.h>

#include "CLI11.hpp"
#include "wormsim/experiment.hpp"

namespace {

int default_workers() {
    if (const char* env = std::getenv("WORMSIM_WORKERS")) {
        try {
            const int k = std::stoi(env);
            if (k > 0) return k;
        } catch (const std::exception&) {
        }
        std::cerr << "warning: ignoring invalid WORMSIM_WORKERS='" << env << "'\n";
    }
    return omp_get_max_threads();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Monte Carlo worm epidemics on random geometric and Erdos-Renyi networks"};
    app.require_subcommand(1);

    std::string spec_path;
    std::string out_dir;
    int workers = 0;
    bool force = false;
    auto* run = app.add_subcommand("run", "execute an experiment spec and write CSV results");
    run->add_option("spec", spec_path, "experiment spec file")->required();
    run->add_option("--out", out_dir, "output directory")->required();
    run->add_option("--workers", workers, "worker threads (default: WORMSIM_WORKERS or all cores)");
    run->add_flag("--force", force, "overwrite a finished output directory");

    std::string analyze_dir;
    auto* analyze = app.add_subcommand("analyze", "recompute thresholds and collapse from stored results");
    analyze->add_option("dir", analyze_dir, "experiment output directory")->required();

    std::string audit_spec;
    std::string export_dir;
    auto* metrics = app.add_subcommand("graph-metrics", "topology-only audit of the graphs a spec would build");
    metrics->add_option("spec", audit_spec, "experiment spec file")->required();
    metrics->add_option("--export", export_dir, "also write edge lists and positions here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*run) {
            const auto spec = wormsim::load_spec(spec_path);
            const int k = workers > 0 ? workers : default_workers();
            std::cerr << "running '" << spec.name << "' with " << k << " worker(s)\n";
            wormsim::run_experiment(spec, out_dir, k, force, &std::cerr);
            std::cerr << "wrote " << out_dir << '\n';
        } else if (*analyze) {
            wormsim::analyze(analyze_dir, std::cout);
        } else if (*metrics) {
            const auto spec = wormsim::load_spec(audit_spec);
            std::optional<std::filesystem::path> exp;
            if (!export_dir.empty()) exp = export_dir;
            const auto rows = wormsim::audit_graphs(spec, &std::cout, exp);
            std::cout << wormsim::kMetricsHeader << '\n';
            for (const auto& g : rows) {
                std::cout << spec.name << ',' << g.node_count << ',' << wormsim::to_string(g.graph) << ','
                          << g.graph_replica << ',' << wormsim::format_sig6(g.mean_degree) << ','
                          << wormsim::format_sig6(g.clustering) << ',' << (g.connected ? "true" : "false") << ','
                          << wormsim::format_sig6(g.giant_frac) << '\n';
            }
        }
    } catch (const wormsim::SpecError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
