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

#pragma once

// Serial reference implementations of the parallel kernels. They favor the
// most direct formulation over speed and exist for cross-checking in tests
// and for the benchmark baseline.

#include <cstdint>
#include <span>
#include <vector>

#include "wormsim/epidemic.hpp"
#include "wormsim/spatial_graph.hpp"

namespace wormsim::reference {

/// All-pairs distance thresholding, O(N^2).
Graph build_rgg_bruteforce(std::span<const Position> positions, const NetworkConfig& config);

/// Average local clustering by sorted-list intersection, single-threaded.
double average_clustering(const Graph& g);

/// Runs executed one after another in index order.
std::vector<RunRecord> ensemble_runs_serial(const Graph& g, const EpidemicParams& p,
                                            std::size_t n_runs, std::size_t n_seed_nodes,
                                            std::uint64_t master_seed);

EnsembleStats ensemble_serial(const Graph& g, const EpidemicParams& p, std::size_t n_runs,
                              std::size_t n_seed_nodes, std::uint64_t master_seed);

}  // namespace wormsim::reference
