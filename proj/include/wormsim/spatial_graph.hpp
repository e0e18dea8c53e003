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
#include <map>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "wormsim/rng.hpp"

namespace wormsim {

using NodeId = std::uint32_t;

/// Radio link budget: received power P / (c r^alpha) must clear
/// attenuation_threshold * noise_level for a link to exist.
struct PathlossParams {
    double transmit_power = 1.0;
    double pathloss_constant = 1.0;
    double pathloss_exponent = 2.0;
    double attenuation_threshold = 1.0;
    double noise_level = 1.0;

    /// Throws std::invalid_argument on a non-positive field or exponent < 1.
    void validate() const;
};

struct NetworkConfig {
    std::size_t node_count = 0;
    double side_length = 0.0;         // meters
    double transmission_range = 0.0;  // meters
    bool periodic = true;

    double density() const noexcept {
        return static_cast<double>(node_count) / (side_length * side_length);
    }

    /// Throws std::invalid_argument when an invariant is violated.
    void validate() const;

    friend bool operator==(const NetworkConfig&, const NetworkConfig&) = default;
};

struct Position {
    double x = 0.0;
    double y = 0.0;
    friend bool operator==(const Position&, const Position&) = default;
};

enum class GraphKind { RGG, ER };

std::string_view to_string(GraphKind kind) noexcept;

/// Undirected simple graph in compressed sparse row form. Neighbor lists are
/// sorted. Instances are immutable once built and may be shared read-only
/// between threads.
class Graph {
public:
    Graph(GraphKind kind, std::vector<std::size_t> offsets, std::vector<NodeId> neighbors,
          std::vector<Position> positions, std::optional<NetworkConfig> config);

    GraphKind kind() const noexcept { return kind_; }
    std::size_t node_count() const noexcept { return offsets_.size() - 1; }
    std::size_t edge_count() const noexcept { return neighbors_.size() / 2; }

    std::span<const NodeId> neighbors(NodeId v) const noexcept {
        return {neighbors_.data() + offsets_[v], neighbors_.data() + offsets_[v + 1]};
    }
    std::size_t degree(NodeId v) const noexcept { return offsets_[v + 1] - offsets_[v]; }
    bool adjacent(NodeId a, NodeId b) const noexcept;

    /// Empty for ER graphs.
    std::span<const Position> positions() const noexcept { return positions_; }
    /// Present for RGG graphs only.
    const std::optional<NetworkConfig>& config() const noexcept { return config_; }

    std::span<const std::size_t> offsets() const noexcept { return offsets_; }
    std::span<const NodeId> adjacency() const noexcept { return neighbors_; }

    friend bool operator==(const Graph&, const Graph&) = default;

private:
    GraphKind kind_;
    std::vector<std::size_t> offsets_;
    std::vector<NodeId> neighbors_;
    std::vector<Position> positions_;
    std::optional<NetworkConfig> config_;
};

/// Builds a CSR graph from an undirected edge list. Self-loops and duplicate
/// edges are rejected with std::invalid_argument.
Graph graph_from_edges(std::size_t node_count,
                       std::span<const std::pair<NodeId, NodeId>> edges,
                       GraphKind kind = GraphKind::ER);

struct GraphMetrics {
    std::map<std::size_t, std::size_t> degree_histogram;
    double mean_degree = 0.0;
    double clustering_coefficient = 0.0;
    bool connected = false;
    double giant_component_fraction = 0.0;
};

/// N points, each coordinate uniform in [0, L).
std::vector<Position> place_nodes(const NetworkConfig& config, Rng& rng);

/// Maximum link distance (P / (c * beta * nu))^(1/alpha).
double transmission_range(const PathlossParams& p);

/// Euclidean distance; under `periodic` each axis displacement is reduced to
/// [-L/2, L/2] first (minimum image).
double toroidal_distance(Position a, Position b, double side_length, bool periodic) noexcept;

/// Random geometric graph: i ~ j iff distance(i, j) <= r_t (ties are edges).
/// Uses a uniform cell grid with cell side >= r_t and scans the 3x3 block
/// around each node. Node loops run under OpenMP.
Graph build_rgg(std::span<const Position> positions, const NetworkConfig& config);

/// G(N, p) with p = mean_degree / (N - 1). Requires 0 < mean_degree <= N - 1.
Graph build_er_matched(std::size_t node_count, double mean_degree, Rng& rng);

/// Degree histogram, mean degree, average local clustering over nodes of
/// degree >= 2, and connectivity from a full traversal.
GraphMetrics compute_metrics(const Graph& g);

/// pi r_t^2 N / L^2.
double mean_degree_prediction(const NetworkConfig& config) noexcept;

/// Debug export: `i j` per edge (i < j) and `i x y` per node, 0-based.
void write_edge_list(const Graph& g, const std::filesystem::path& path);
void write_positions(const Graph& g, const std::filesystem::path& path);

}  // namespace wormsim
