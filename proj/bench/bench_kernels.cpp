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

// Wall-clock comparison of the OpenMP kernels against the serial reference
// implementations they are tested against.
//
//   wormsim_bench [--threads K] [--repeat R]

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <string>

#include "wormsim/epidemic.hpp"
#include "wormsim/reference.hpp"
#include "wormsim/spatial_graph.hpp"

using namespace wormsim;

namespace {

double best_of(int repeat, const std::function<void()>& fn) {
    double best = 1e300;
    for (int i = 0; i < repeat; ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        fn();
        best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    }
    return best;
}

void row(const std::string& kernel, double serial, double parallel) {
    std::printf("%-40s %10.4f %10.4f %8.2fx\n", kernel.c_str(), serial, parallel, serial / parallel);
}

}  // namespace

int main(int argc, char** argv) {
    int threads = omp_get_max_threads();
    int repeat = 3;
    for (int i = 1; i + 1 < argc; i += 2) {
        if (std::strcmp(argv[i], "--threads") == 0) threads = std::atoi(argv[i + 1]);
        else if (std::strcmp(argv[i], "--repeat") == 0) repeat = std::atoi(argv[i + 1]);
    }
    omp_set_num_threads(threads);
    std::printf("threads=%d repeat=%d (best-of, seconds)\n", threads, repeat);
    std::printf("%-40s %10s %10s %9s\n", "kernel", "serial", "openmp", "speedup");

    for (std::size_t n : {4000, 10000}) {
        const NetworkConfig cfg{n, 1000.0, 50.0, true};
        auto rng = make_rng(n);
        const auto pos = place_nodes(cfg, rng);
        const double brute = best_of(repeat, [&] { (void)reference::build_rgg_bruteforce(pos, cfg); });
        const double grid = best_of(repeat, [&] { (void)build_rgg(pos, cfg); });
        row("rgg build N=" + std::to_string(n) + " (all-pairs vs grid)", brute, grid);

        const Graph g = build_rgg(pos, cfg);
        const double cs = best_of(repeat, [&] { (void)reference::average_clustering(g); });
        const double cp = best_of(repeat, [&] { (void)compute_metrics(g); });
        row("clustering N=" + std::to_string(n), cs, cp);

        for (bool mac : {false, true}) {
            const EpidemicParams p{0.05, 1.0, mac};
            const double es = best_of(repeat, [&] { (void)reference::ensemble_serial(g, p, 200, 5, 9); });
            const double ep = best_of(repeat, [&] { (void)ensemble(g, p, 200, 5, 9, threads); });
            row("ensemble 200 runs N=" + std::to_string(n) + (mac ? " MAC" : ""), es, ep);
        }
    }
    return 0;
}
