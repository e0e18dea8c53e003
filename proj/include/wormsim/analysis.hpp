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
#include <optional>
#include <span>
#include <stdexcept>
#include <string_view>
#include <utility>
#include <vector>

#include "wormsim/epidemic.hpp"
#include "wormsim/spatial_graph.hpp"

namespace wormsim {

/// RG: degree-matched Erdos-Renyi graph, no MAC. RGG: geometric graph, no
/// MAC. RGG_MAC: geometric graph with listen-before-talk.
enum class Topology { RG, RGG, RGG_MAC };

std::string_view to_string(Topology t) noexcept;

struct PrevalencePoint {
    double lambda = 0.0;
    double prevalence_mean = 0.0;
    double prevalence_conditional = 0.0;
    double susceptibility = 0.0;
    double std_error = 0.0;
};

struct PrevalenceCurve {
    std::vector<PrevalencePoint> points;  // strictly increasing lambda
    Topology topology = Topology::RGG;
    std::size_t node_count = 0;
    std::optional<NetworkConfig> network_config;
    double mean_degree = 0.0;  // measured on the graph the curve was run on

    /// Throws std::invalid_argument when lambda is not strictly increasing or
    /// a std_error is negative.
    void validate() const;
};

struct EnsembleSettings {
    std::size_t runs = 500;
    std::size_t seed_nodes = 5;
    std::uint64_t master_seed = 0;
    int workers = 0;
};

/// Seed for the ensemble at one lambda on one graph. Depends only on the
/// lambda value, so refining a grid keeps existing points unchanged.
std::uint64_t cell_seed(std::uint64_t graph_or_master_seed, double lambda) noexcept;

/// One ensemble per grid point on a single graph instance.
PrevalenceCurve sweep_prevalence(const Graph& g, std::span<const double> lambda_grid,
                                 double patching_rate, bool mac_enabled,
                                 const EnsembleSettings& settings);

/// Points lo * factor^i up to hi (inclusive within rounding).
std::vector<double> geometric_grid(double lo, double hi, double factor);

/// Adds the geometric midpoints of the two grid intervals adjacent to the
/// grid point closest to `lambda`.
std::vector<double> refine_grid(std::span<const double> grid, double lambda);

enum class ThresholdMethod { SusceptibilityPeak, CutoffCrossing };

std::string_view to_string(ThresholdMethod m) noexcept;

/// Onset of prevalence_mean above the outbreak cutoff recovers the
/// Erdos-Renyi threshold; the susceptibility maximum sits deep in the
/// supercritical regime for single-seed outbreaks.
inline constexpr ThresholdMethod kDefaultThresholdMethod = ThresholdMethod::CutoffCrossing;

struct ThresholdEstimate {
    double lambda_c = 0.0;
    ThresholdMethod method = kDefaultThresholdMethod;
    double uncertainty = 0.0;
    double kappa_c = 0.0;  // lambda_c * measured mean degree
};

class RegimeNotBracketed : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// SusceptibilityPeak: interior maximum of susceptibility, refined by the
/// vertex of the parabola through the peak and its two neighbors.
/// CutoffCrossing: first grid lambda with prevalence_mean > kOutbreakCutoff,
/// linearly interpolated against the previous point.
/// Throws RegimeNotBracketed when the curve has no interior peak or no
/// crossing preceded by a sub-cutoff point.
ThresholdEstimate estimate_threshold(const PrevalenceCurve& curve,
                                     ThresholdMethod method = kDefaultThresholdMethod);

/// 1 / <k>.
double mean_field_threshold(double mean_degree);

using KappaSeries = std::vector<std::pair<double, double>>;  // (kappa, prevalence_mean)

struct CollapseResult {
    std::vector<KappaSeries> series;  // in input order
    double max_deviation = 0.0;       // over the kappa window
};

inline constexpr double kCollapseWindowLo = 1.0;
inline constexpr double kCollapseWindowHi = 2.5;

/// Rescales every curve's lambda axis by its measured <k>. The quality score
/// is the largest spread between linearly interpolated curves, evaluated at
/// every knot inside the window, which is exact for piecewise-linear curves.
/// Requires >= 2 curves of the same topology.
CollapseResult scaling_collapse(std::span<const PrevalenceCurve> curves,
                                double kappa_lo = kCollapseWindowLo,
                                double kappa_hi = kCollapseWindowHi);

struct SpeedMetrics {
    std::size_t t_max = 0;
    double peak_height = 0.0;
    std::vector<double> growth_profile;  // mean I(t)/N for t in [0, t_max]
};

/// t_max is the earliest argmax of the ensemble-mean infected fraction.
SpeedMetrics speed_metrics(std::span<const double> mean_i_curve);
SpeedMetrics speed_metrics(const EnsembleStats& stats);

enum class GrowthClass { ConsistentWithExponential, SlowerThanExponential };

std::string_view to_string(GrowthClass g) noexcept;

inline constexpr double kGrowthNoiseFloor = 10.0;  // expected infected nodes
inline constexpr std::size_t kGrowthMinPoints = 5;
inline constexpr double kExponentialR2 = 0.98;

struct GrowthFit {
    GrowthClass classification = GrowthClass::SlowerThanExponential;
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    std::size_t first_t = 0;
    std::size_t points = 0;
};

class InsufficientPoints : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Least-squares fit of ln I(t) against t over the profile points holding at
/// least kGrowthNoiseFloor expected infected nodes. Exponential iff
/// R^2 >= kExponentialR2 and slope > 0. `expected_infected` is in nodes.
GrowthFit growth_classification(std::span<const double> expected_infected);

}  // namespace wormsim
