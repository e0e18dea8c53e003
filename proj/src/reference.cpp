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

#include "wormsim/reference.hpp"

#include <algorithm>
#include <iterator>
#include <stdexcept>
#include <utility>

namespace wormsim::reference {

Graph build_rgg_bruteforce(std::span<const Position> positions, const NetworkConfig& config) {
    config.validate();
    const std::size_t n = positions.size();
    std::vector<std::pair<NodeId, NodeId>> edges;
    for (NodeId i = 0; i < n; ++i)
        for (NodeId j = i + 1; j < n; ++j)
            if (toroidal_distance(positions[i], positions[j], config.side_length, config.periodic) <=
                config.transmission_range)
                edges.emplace_back(i, j);
    Graph bare = graph_from_edges(n, edges, GraphKind::RGG);
    return Graph(GraphKind::RGG, {bare.offsets().begin(), bare.offsets().end()},
                 {bare.adjacency().begin(), bare.adjacency().end()},
                 {positions.begin(), positions.end()}, config);
}

double average_clustering(const Graph& g) {
    double sum = 0.0;
    std::size_t eligible = 0;
    std::vector<NodeId> common;
    for (NodeId v = 0; v < g.node_count(); ++v) {
        const std::size_t k = g.degree(v);
        if (k < 2) continue;
        // Each link {u, w} among neighbors is seen from both endpoints.
        std::size_t twice_links = 0;
        auto a = g.neighbors(v);
        for (NodeId u : a) {
            common.clear();
            auto b = g.neighbors(u);
            std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(common));
            twice_links += common.size();
        }
        const double links = static_cast<double>(twice_links) / 2.0;
        sum += links / (static_cast<double>(k) * static_cast<double>(k - 1) / 2.0);
        ++eligible;
    }
    return eligible > 0 ? sum / static_cast<double>(eligible) : 0.0;
}

std::vector<RunRecord> ensemble_runs_serial(const Graph& g, const EpidemicParams& p,
                                            std::size_t n_runs, std::size_t n_seed_nodes,
                                            std::uint64_t master_seed) {
    if (n_runs < 1) throw std::invalid_argument("n_runs must be >= 1");
    const auto seeds = choose_seed_nodes(g.node_count(), n_seed_nodes, master_seed);
    std::vector<RunRecord> records;
    records.reserve(n_runs);
    for (std::size_t r = 0; r < n_runs; ++r)
        records.push_back(run(g, p, seeds[r % seeds.size()], run_seed(master_seed, r)));
    return records;
}

EnsembleStats ensemble_serial(const Graph& g, const EpidemicParams& p, std::size_t n_runs,
                              std::size_t n_seed_nodes, std::uint64_t master_seed) {
    const auto records = ensemble_runs_serial(g, p, n_runs, n_seed_nodes, master_seed);
    return aggregate(records, g.node_count());
}

}  // namespace wormsim::reference
