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
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "wormsim/analysis.hpp"
#include "wormsim/epidemic.hpp"
#include "wormsim/spatial_graph.hpp"

namespace wormsim {

enum class TopologyChoice { RGG, ERMatched };
enum class MacChoice { On, Off, Both };

std::string_view to_string(TopologyChoice t) noexcept;
std::string_view to_string(MacChoice m) noexcept;

/// Declarative parameter sweep: node_counts x graph_replicas x MAC arms x lambda_grid.
struct ExperimentSpec {
    std::string name;
    TopologyChoice topology = TopologyChoice::RGG;
    std::vector<std::size_t> node_counts;
    double side_length = 1000.0;
    std::optional<double> transmission_range;  // meters; falls back to pathloss, then 50 m
    std::optional<PathlossParams> pathloss;
    std::vector<double> lambda_grid;
    double patching_rate = 1.0;
    MacChoice mac = MacChoice::Both;
    std::size_t runs_per_point = 500;
    std::size_t seed_nodes_per_point = 5;
    std::uint64_t master_seed = 1;
    std::size_t graph_replicas = 1;

    double effective_range() const;
    NetworkConfig network(std::size_t node_count) const;

    /// Throws SpecError naming the offending field.
    void validate() const;
};

/// Parse or validation failure. Maps to exit code 1.
class SpecError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Flat `key = value` text; `#` starts a comment; lists are comma separated
/// and may be wrapped in brackets. Unknown and repeated keys are rejected.
ExperimentSpec parse_spec(std::string_view text, std::string_view source = "<spec>");
ExperimentSpec load_spec(const std::filesystem::path& path);

/// Canonical text form; parse_spec(format_spec(s)) reproduces s.
std::string format_spec(const ExperimentSpec& spec);

/// One (N, replica, topology, MAC arm, lambda) lattice point.
struct CellKey {
    std::size_t node_count = 0;
    std::size_t graph_replica = 0;
    GraphKind graph = GraphKind::RGG;
    bool mac = false;
    double lambda = 0.0;

    friend bool operator==(const CellKey&, const CellKey&) = default;
};

/// Cells in primary-key order (N, topology, mac, lambda, replica). ER graphs
/// only get the MAC-off arm.
std::vector<CellKey> execution_plan(const ExperimentSpec& spec);

std::uint64_t graph_seed(const ExperimentSpec& spec, std::size_t node_count, std::size_t replica);

/// Builds the graph for (N, replica) deterministically from `spec`.
Graph build_graph(const ExperimentSpec& spec, std::size_t node_count, std::size_t replica);

struct ResultRow {
    CellKey key;
    double prevalence_mean = 0.0;
    double prevalence_conditional = 0.0;
    double susceptibility = 0.0;
    double std_error = 0.0;
    std::size_t runs = 0;
    std::uint64_t graph_seed = 0;
    std::uint64_t cell_seed = 0;
    std::vector<double> mean_i_curve;
    std::vector<double> mean_r_curve;
};

struct GraphRow {
    std::size_t node_count = 0;
    std::size_t graph_replica = 0;
    GraphKind graph = GraphKind::RGG;
    double mean_degree = 0.0;
    double clustering = 0.0;
    bool connected = false;
    double giant_frac = 0.0;
    std::uint64_t graph_seed = 0;
};

struct ExperimentResults {
    std::vector<ResultRow> rows;     // execution_plan order
    std::vector<GraphRow> graphs;    // (N, replica) order
    std::vector<std::string> warnings;
};

struct ExecuteOptions {
    int workers = 0;                                    // <= 0: OpenMP default
    std::optional<std::filesystem::path> partial_dir;  // per-cell checkpoint files
    std::ostream* progress = nullptr;
};

/// Runs every cell, reusing a checkpoint from `partial_dir` where one exists
/// and writing one after each newly computed cell.
ExperimentResults execute(const ExperimentSpec& spec, const ExecuteOptions& options = {});

/// Writes prevalence.csv, timeseries.csv, thresholds.csv, metrics.csv and
/// manifest.json. Refuses a non-empty `out_dir` that holds a finished
/// experiment unless `force` is set.
void emit(const ExperimentSpec& spec, const ExperimentResults& results, const std::filesystem::path& out_dir);

/// execute + emit with checkpoints under out_dir/partial. An out_dir with a
/// manifest.json is finished: it is replaced only under `force`.
ExperimentResults run_experiment(const ExperimentSpec& spec, const std::filesystem::path& out_dir,
                                 int workers, bool force, std::ostream* progress = nullptr);

/// Six significant digits in fixed notation.
std::string format_sig6(double value);

/// Rebuilds prevalence curves per (N, topology, mac) from prevalence.csv and
/// metrics.csv, averaging graph replicas.
std::vector<PrevalenceCurve> load_curves(const std::filesystem::path& dir, std::string* name = nullptr);

/// Recomputes thresholds.csv from stored ensembles and writes a collapse and
/// threshold summary to `report`.
void analyze(const std::filesystem::path& dir, std::ostream& report);

/// Topology-only audit for every (N, replica) in `spec`.
std::vector<GraphRow> audit_graphs(const ExperimentSpec& spec, std::ostream* histogram_out = nullptr,
                                   const std::optional<std::filesystem::path>& export_dir = std::nullopt);

inline constexpr std::string_view kPrevalenceHeader =
    "name,N,topology,mac,lambda,graph_replica,prevalence_mean,prevalence_conditional,susceptibility,std_error,runs";
inline constexpr std::string_view kTimeseriesHeader = "name,N,topology,mac,lambda,t,mean_i_frac,mean_r_frac";
inline constexpr std::string_view kThresholdsHeader =
    "name,N,topology,mac,method,lambda_c,uncertainty,kappa_c,mean_degree,mean_field_lambda_c";
inline constexpr std::string_view kMetricsHeader = "name,N,topology,graph_replica,mean_degree,clustering,connected,giant_frac";

std::string_view code_version() noexcept;

}  // namespace wormsim
