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

#include "wormsim/spatial_graph.hpp"

#include <omp.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>

namespace wormsim {

void PathlossParams::validate() const {
    if (!(transmit_power > 0.0) || !(pathloss_constant > 0.0) || !(attenuation_threshold > 0.0) ||
        !(noise_level > 0.0)) {
        throw std::invalid_argument("pathloss parameters must be strictly positive");
    }
    if (!(pathloss_exponent >= 1.0)) {
        throw std::invalid_argument("pathloss_exponent must be >= 1");
    }
}

void NetworkConfig::validate() const {
    if (node_count < 1) throw std::invalid_argument("node_count must be >= 1");
    if (!(side_length > 0.0)) throw std::invalid_argument("side_length must be > 0");
    if (!(transmission_range > 0.0)) throw std::invalid_argument("transmission_range must be > 0");
    if (periodic && !(transmission_range < side_length / 2.0)) {
        throw std::invalid_argument("transmission_range must be < side_length/2 with periodic boundaries");
    }
}

std::string_view to_string(GraphKind kind) noexcept {
    return kind == GraphKind::RGG ? "RGG" : "ER";
}

Graph::Graph(GraphKind kind, std::vector<std::size_t> offsets, std::vector<NodeId> neighbors,
             std::vector<Position> positions, std::optional<NetworkConfig> config)
    : kind_(kind),
      offsets_(std::move(offsets)),
      neighbors_(std::move(neighbors)),
      positions_(std::move(positions)),
      config_(std::move(config)) {
    if (offsets_.empty() || offsets_.back() != neighbors_.size()) {
        throw std::invalid_argument("Graph: offsets do not match adjacency");
    }
}

bool Graph::adjacent(NodeId a, NodeId b) const noexcept {
    auto nb = neighbors(a);
    return std::binary_search(nb.begin(), nb.end(), b);
}

Graph graph_from_edges(std::size_t node_count, std::span<const std::pair<NodeId, NodeId>> edges,
                       GraphKind kind) {
    std::vector<std::size_t> offsets(node_count + 1, 0);
    for (auto [a, b] : edges) {
        if (a >= node_count || b >= node_count) throw std::invalid_argument("edge endpoint out of range");
        if (a == b) throw std::invalid_argument("self-loop");
        ++offsets[a + 1];
        ++offsets[b + 1];
    }
    std::partial_sum(offsets.begin(), offsets.end(), offsets.begin());
    std::vector<NodeId> adj(offsets.back());
    std::vector<std::size_t> fill(offsets.begin(), offsets.end() - 1);
    for (auto [a, b] : edges) {
        adj[fill[a]++] = b;
        adj[fill[b]++] = a;
    }
    for (std::size_t v = 0; v < node_count; ++v) {
        auto first = adj.begin() + static_cast<std::ptrdiff_t>(offsets[v]);
        auto last = adj.begin() + static_cast<std::ptrdiff_t>(offsets[v + 1]);
        std::sort(first, last);
        if (std::adjacent_find(first, last) != last) throw std::invalid_argument("duplicate edge");
    }
    return Graph(kind, std::move(offsets), std::move(adj), {}, std::nullopt);
}

std::vector<Position> place_nodes(const NetworkConfig& config, Rng& rng) {
    std::uniform_real_distribution<double> coord(0.0, config.side_length);
    const double below_side = std::nextafter(config.side_length, 0.0);
    std::vector<Position> pts(config.node_count);
    for (auto& p : pts) {
        p.x = std::min(coord(rng), below_side);
        p.y = std::min(coord(rng), below_side);
    }
    return pts;
}

double transmission_range(const PathlossParams& p) {
    p.validate();
    const double ratio =
        p.transmit_power / (p.pathloss_constant * p.attenuation_threshold * p.noise_level);
    return std::pow(ratio, 1.0 / p.pathloss_exponent);
}

namespace {

inline double axis_delta(double a, double b, double side, bool periodic) noexcept {
    double d = std::abs(a - b);
    if (periodic && d > 0.5 * side) d = side - d;
    return d;
}

inline double squared_distance(Position a, Position b, double side, bool periodic) noexcept {
    const double dx = axis_delta(a.x, b.x, side, periodic);
    const double dy = axis_delta(a.y, b.y, side, periodic);
    return dx * dx + dy * dy;
}

// Uniform bucket grid over [0, L)^2.
struct CellGrid {
    std::size_t cells_per_axis = 1;
    double cell_side = 0.0;
    std::vector<std::size_t> start;  // size cells^2 + 1
    std::vector<NodeId> members;

    std::size_t axis_index(double c) const noexcept {
        auto i = static_cast<std::size_t>(c / cell_side);
        return std::min(i, cells_per_axis - 1);
    }
    std::size_t cell_of(Position p) const noexcept {
        return axis_index(p.y) * cells_per_axis + axis_index(p.x);
    }
};

CellGrid bucket_positions(std::span<const Position> pts, double side, double range) {
    CellGrid grid;
    const double per_axis = std::floor(side / range);
    grid.cells_per_axis = per_axis < 1.0 ? 1 : static_cast<std::size_t>(per_axis);
    grid.cell_side = side / static_cast<double>(grid.cells_per_axis);
    const std::size_t n_cells = grid.cells_per_axis * grid.cells_per_axis;

    std::vector<std::size_t> cell(pts.size());
    grid.start.assign(n_cells + 1, 0);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        cell[i] = grid.cell_of(pts[i]);
        ++grid.start[cell[i] + 1];
    }
    std::partial_sum(grid.start.begin(), grid.start.end(), grid.start.begin());
    grid.members.resize(pts.size());
    std::vector<std::size_t> fill(grid.start.begin(), grid.start.end() - 1);
    for (std::size_t i = 0; i < pts.size(); ++i) grid.members[fill[cell[i]]++] = static_cast<NodeId>(i);
    return grid;
}

// Cells in the 3x3 block around (cx, cy), deduplicated when the grid is
// narrower than three cells.
std::size_t block_cells(const CellGrid& grid, std::size_t cx, std::size_t cy, bool periodic,
                        std::array<std::size_t, 9>& out) {
    const auto m = static_cast<long>(grid.cells_per_axis);
    std::size_t count = 0;
    for (long dy = -1; dy <= 1; ++dy) {
        for (long dx = -1; dx <= 1; ++dx) {
            long x = static_cast<long>(cx) + dx;
            long y = static_cast<long>(cy) + dy;
            if (periodic) {
                x = (x + m) % m;
                y = (y + m) % m;
            } else if (x < 0 || y < 0 || x >= m || y >= m) {
                continue;
            }
            const auto c = static_cast<std::size_t>(y * m + x);
            if (std::find(out.begin(), out.begin() + static_cast<long>(count), c) ==
                out.begin() + static_cast<long>(count)) {
                out[count++] = c;
            }
        }
    }
    return count;
}

template <typename Visit>
void for_each_in_range(const CellGrid& grid, std::span<const Position> pts, NodeId i,
                       const NetworkConfig& cfg, Visit&& visit) {
    const double r2 = cfg.transmission_range * cfg.transmission_range;
    const Position p = pts[i];
    std::array<std::size_t, 9> cells{};
    const std::size_t n = block_cells(grid, grid.axis_index(p.x), grid.axis_index(p.y), cfg.periodic, cells);
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t s = grid.start[cells[k]]; s < grid.start[cells[k] + 1]; ++s) {
            const NodeId j = grid.members[s];
            if (j != i && squared_distance(p, pts[j], cfg.side_length, cfg.periodic) <= r2) visit(j);
        }
    }
}

}  // namespace

double toroidal_distance(Position a, Position b, double side_length, bool periodic) noexcept {
    return std::sqrt(squared_distance(a, b, side_length, periodic));
}

Graph build_rgg(std::span<const Position> positions, const NetworkConfig& config) {
    config.validate();
    if (positions.size() != config.node_count) {
        throw std::invalid_argument("build_rgg: position count differs from node_count");
    }
    const auto n = static_cast<std::int64_t>(positions.size());
    const CellGrid grid = bucket_positions(positions, config.side_length, config.transmission_range);

    // Pass 1: degrees. Pass 2: fill and sort each row in place.
    std::vector<std::size_t> offsets(positions.size() + 1, 0);
#pragma omp parallel for schedule(dynamic, 256)
    for (std::int64_t i = 0; i < n; ++i) {
        std::size_t deg = 0;
        for_each_in_range(grid, positions, static_cast<NodeId>(i), config, [&](NodeId) { ++deg; });
        offsets[static_cast<std::size_t>(i) + 1] = deg;
    }
    std::partial_sum(offsets.begin(), offsets.end(), offsets.begin());

    std::vector<NodeId> adj(offsets.back());
#pragma omp parallel for schedule(dynamic, 256)
    for (std::int64_t i = 0; i < n; ++i) {
        const auto v = static_cast<std::size_t>(i);
        std::size_t pos = offsets[v];
        for_each_in_range(grid, positions, static_cast<NodeId>(i), config,
                          [&](NodeId j) { adj[pos++] = j; });
        std::sort(adj.begin() + static_cast<std::ptrdiff_t>(offsets[v]),
                  adj.begin() + static_cast<std::ptrdiff_t>(offsets[v + 1]));
    }

    return Graph(GraphKind::RGG, std::move(offsets), std::move(adj),
                 std::vector<Position>(positions.begin(), positions.end()), config);
}

Graph build_er_matched(std::size_t node_count, double mean_degree, Rng& rng) {
    if (node_count < 2 || !(mean_degree > 0.0) ||
        !(mean_degree <= static_cast<double>(node_count - 1))) {
        throw std::invalid_argument("build_er_matched: mean_degree must lie in (0, N-1]");
    }
    const double p = mean_degree / static_cast<double>(node_count - 1);
    std::vector<std::pair<NodeId, NodeId>> edges;
    edges.reserve(static_cast<std::size_t>(mean_degree * static_cast<double>(node_count) * 0.55) + 16);

    if (p >= 1.0) {
        for (NodeId v = 1; v < node_count; ++v)
            for (NodeId w = 0; w < v; ++w) edges.emplace_back(v, w);
    } else {
        // Geometric skipping over the lower-triangular pair sequence; each
        // pair is still an independent Bernoulli(p) trial.
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        const double log_q = std::log1p(-p);
        std::int64_t v = 1;
        std::int64_t w = -1;
        const auto n = static_cast<std::int64_t>(node_count);
        while (v < n) {
            const double r = unif(rng);
            w += 1 + static_cast<std::int64_t>(std::floor(std::log1p(-r) / log_q));
            while (w >= v && v < n) {
                w -= v;
                ++v;
            }
            if (v < n) edges.emplace_back(static_cast<NodeId>(v), static_cast<NodeId>(w));
        }
    }
    return graph_from_edges(node_count, edges, GraphKind::ER);
}

GraphMetrics compute_metrics(const Graph& g) {
    GraphMetrics m;
    const std::size_t n = g.node_count();
    if (n == 0) return m;

    for (NodeId v = 0; v < n; ++v) ++m.degree_histogram[g.degree(v)];
    m.mean_degree = 2.0 * static_cast<double>(g.edge_count()) / static_cast<double>(n);

    // Local clustering: mark N(v), then count marked vertices in N(u) for u in N(v).
    double clustering_sum = 0.0;
    std::int64_t eligible = 0;
#pragma omp parallel reduction(+ : clustering_sum, eligible)
    {
        std::vector<std::uint32_t> stamp(n, 0);
        std::uint32_t epoch = 0;
#pragma omp for schedule(dynamic, 64)
        for (std::int64_t vi = 0; vi < static_cast<std::int64_t>(n); ++vi) {
            const auto v = static_cast<NodeId>(vi);
            const std::size_t k = g.degree(v);
            if (k < 2) continue;
            ++epoch;
            for (NodeId u : g.neighbors(v)) stamp[u] = epoch;
            std::size_t twice_links = 0;
            for (NodeId u : g.neighbors(v))
                for (NodeId w : g.neighbors(u)) twice_links += (stamp[w] == epoch);
            const double possible = static_cast<double>(k) * static_cast<double>(k - 1);
            clustering_sum += static_cast<double>(twice_links) / possible;
            ++eligible;
        }
    }
    m.clustering_coefficient = eligible > 0 ? clustering_sum / static_cast<double>(eligible) : 0.0;

    std::vector<char> seen(n, 0);
    std::vector<NodeId> queue;
    queue.reserve(n);
    std::size_t largest = 0;
    std::size_t components = 0;
    for (NodeId s = 0; s < n; ++s) {
        if (seen[s]) continue;
        ++components;
        queue.clear();
        queue.push_back(s);
        seen[s] = 1;
        for (std::size_t head = 0; head < queue.size(); ++head) {
            for (NodeId w : g.neighbors(queue[head])) {
                if (!seen[w]) {
                    seen[w] = 1;
                    queue.push_back(w);
                }
            }
        }
        largest = std::max(largest, queue.size());
    }
    m.connected = components == 1;
    m.giant_component_fraction = static_cast<double>(largest) / static_cast<double>(n);
    return m;
}

double mean_degree_prediction(const NetworkConfig& config) noexcept {
    const double r = config.transmission_range;
    return std::numbers::pi * r * r * config.density();
}

void write_edge_list(const Graph& g, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string());
    for (NodeId v = 0; v < g.node_count(); ++v)
        for (NodeId w : g.neighbors(v))
            if (v < w) out << v << ' ' << w << '\n';
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

void write_positions(const Graph& g, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string());
    out.precision(17);
    auto pts = g.positions();
    for (std::size_t i = 0; i < pts.size(); ++i) out << i << ' ' << pts[i].x << ' ' << pts[i].y << '\n';
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace wormsim
