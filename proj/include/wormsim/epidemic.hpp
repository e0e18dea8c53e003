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

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "wormsim/rng.hpp"
#include "wormsim/spatial_graph.hpp"

namespace wormsim {

enum class NodeState : std::uint8_t { Vulnerable, Infected, Immune };

struct EpidemicParams {
    double infection_rate = 0.0;  // per broadcast, per neighbor
    double patching_rate = 1.0;   // per timestep
    bool mac_enabled = false;

    void validate() const;
};

struct StepCounts {
    std::size_t susceptible = 0;
    std::size_t infected = 0;
    std::size_t recovered = 0;
    friend bool operator==(const StepCounts&, const StepCounts&) = default;
};

/// One run from a single seed to extinction. Series index t = 0 is the
/// initial state; index `duration` is the first state with no infected node.
struct RunRecord {
    std::vector<std::size_t> series_s;
    std::vector<std::size_t> series_i;
    std::vector<std::size_t> series_r;
    std::size_t final_recovered = 0;
    std::size_t duration = 0;
    NodeId seed_node = 0;
    std::uint64_t rng_seed = 0;
    friend bool operator==(const RunRecord&, const RunRecord&) = default;
};

/// Outbreaks whose final fraction exceeds this count as "major" for the
/// conditional prevalence.
inline constexpr double kOutbreakCutoff = 0.01;

struct EnsembleStats {
    std::vector<double> mean_i_curve;  // fraction; finished runs contribute 0
    std::vector<double> mean_r_curve;  // fraction; finished runs hold their final value
    double prevalence_mean = 0.0;
    double prevalence_conditional = 0.0;
    double prevalence_std_error = 0.0;
    double susceptibility = 0.0;  // var(s) / mean(s), s = final outbreak size in nodes
    std::size_t run_count = 0;
    friend bool operator==(const EnsembleStats&, const EnsembleStats&) = default;
};

/// Listen-before-talk transmitter selection.
///
/// The infected list is shuffled; the first remaining node transmits and
/// every infected node within its range (a graph neighbor) is struck from
/// the list. Repeats until the list is empty. The result is a maximal
/// independent set of the subgraph induced by `infected`, in selection order.
std::vector<NodeId> mac_select(const Graph& g, std::span<const NodeId> infected, Rng& rng);

/// Advances one timestep in place and returns the tallies after it.
///
/// Order within a step: transmitter selection (all infected when the MAC is
/// off), broadcast round, patching round. Nodes infected during the
/// broadcast stay inert until the next step. Patching applies to every node
/// infected at the start of the step, blocked or not.
StepCounts step(std::vector<NodeState>& states, const Graph& g, const EpidemicParams& p, Rng& rng);

/// Seeds one infection at `seed_node` and steps until no node is infected.
RunRecord run(const Graph& g, const EpidemicParams& p, NodeId seed_node, std::uint64_t rng_seed);

/// Per-run seed: derive_seed(master_seed, {seed_tag::run, run_index}).
std::uint64_t run_seed(std::uint64_t master_seed, std::size_t run_index) noexcept;

/// `count` distinct nodes drawn from the master-seed stream.
std::vector<NodeId> choose_seed_nodes(std::size_t node_count, std::size_t count,
                                      std::uint64_t master_seed);

/// Reduces run records in index order. Deterministic for a fixed input order.
EnsembleStats aggregate(std::span<const RunRecord> runs, std::size_t node_count);

/// Monte Carlo ensemble. Run r starts from seed node r mod n_seed_nodes and
/// uses run_seed(master_seed, r), so the result does not depend on the
/// number of workers. `workers` <= 0 means the OpenMP default.
EnsembleStats ensemble(const Graph& g, const EpidemicParams& p, std::size_t n_runs,
                       std::size_t n_seed_nodes, std::uint64_t master_seed, int workers = 0);

/// The same ensemble, but returning every run record (used by tests and the
/// benchmark).
std::vector<RunRecord> ensemble_runs(const Graph& g, const EpidemicParams& p, std::size_t n_runs,
                                     std::size_t n_seed_nodes, std::uint64_t master_seed,
                                     int workers = 0);

}  // namespace wormsim
