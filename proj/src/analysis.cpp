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

#include "wormsim/analysis.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

namespace wormsim {

std::string_view to_string(Topology t) noexcept {
    switch (t) {
        case Topology::RG: return "RG";
        case Topology::RGG: return "RGG";
        case Topology::RGG_MAC: return "RGG+MAC";
    }
    return "?";
}

std::string_view to_string(ThresholdMethod m) noexcept {
    return m == ThresholdMethod::SusceptibilityPeak ? "susceptibility_peak" : "cutoff_crossing";
}

std::string_view to_string(GrowthClass g) noexcept {
    return g == GrowthClass::ConsistentWithExponential ? "ConsistentWithExponential"
                                                       : "SlowerThanExponential";
}

void PrevalenceCurve::validate() const {
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (points[i].std_error < 0.0) throw std::invalid_argument("negative std_error in prevalence curve");
        if (i > 0 && !(points[i].lambda > points[i - 1].lambda))
            throw std::invalid_argument("prevalence curve lambda must be strictly increasing");
    }
}

std::uint64_t cell_seed(std::uint64_t graph_or_master_seed, double lambda) noexcept {
    return derive_seed(graph_or_master_seed, {seed_tag::cell, std::bit_cast<std::uint64_t>(lambda)});
}

PrevalenceCurve sweep_prevalence(const Graph& g, std::span<const double> lambda_grid,
                                 double patching_rate, bool mac_enabled,
                                 const EnsembleSettings& settings) {
    if (lambda_grid.empty()) throw std::invalid_argument("sweep_prevalence: empty lambda grid");
    if (!std::is_sorted(lambda_grid.begin(), lambda_grid.end()))
        throw std::invalid_argument("sweep_prevalence: lambda grid must be sorted");

    PrevalenceCurve curve;
    curve.topology = g.kind() == GraphKind::ER ? Topology::RG
                     : mac_enabled             ? Topology::RGG_MAC
                                               : Topology::RGG;
    curve.node_count = g.node_count();
    curve.network_config = g.config();
    curve.mean_degree = 2.0 * static_cast<double>(g.edge_count()) / static_cast<double>(g.node_count());

    for (double lambda : lambda_grid) {
        const EpidemicParams p{lambda, patching_rate, mac_enabled};
        const auto st = ensemble(g, p, settings.runs, settings.seed_nodes,
                                 cell_seed(settings.master_seed, lambda), settings.workers);
        curve.points.push_back({lambda, st.prevalence_mean, st.prevalence_conditional, st.susceptibility,
                                st.prevalence_std_error});
    }
    curve.validate();
    return curve;
}

std::vector<double> geometric_grid(double lo, double hi, double factor) {
    if (!(lo > 0.0) || !(hi >= lo) || !(factor > 1.0))
        throw std::invalid_argument("geometric_grid: need 0 < lo <= hi and factor > 1");
    std::vector<double> grid;
    const double limit = hi * (1.0 + 1e-12);
    for (std::size_t i = 0;; ++i) {
        const double x = lo * std::pow(factor, static_cast<double>(i));
        if (x > limit) break;
        grid.push_back(x);
    }
    return grid;
}

std::vector<double> refine_grid(std::span<const double> grid, double lambda) {
    std::vector<double> out(grid.begin(), grid.end());
    if (grid.size() < 2) return out;
    std::size_t c = 0;
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (std::abs(grid[i] - lambda) < std::abs(grid[c] - lambda)) c = i;
    if (c > 0) out.push_back(std::sqrt(grid[c - 1] * grid[c]));
    if (c + 1 < grid.size()) out.push_back(std::sqrt(grid[c] * grid[c + 1]));
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

namespace {

ThresholdEstimate susceptibility_peak(const PrevalenceCurve& curve) {
    const auto& pts = curve.points;
    std::size_t best = 0;
    for (std::size_t i = 1; i < pts.size(); ++i)
        if (pts[i].susceptibility > pts[best].susceptibility) best = i;
    if (pts.size() < 3 || best == 0 || best + 1 == pts.size())
        throw RegimeNotBracketed("regime not bracketed: susceptibility has no interior maximum");

    const double x0 = pts[best - 1].lambda, x1 = pts[best].lambda, x2 = pts[best + 1].lambda;
    const double y0 = pts[best - 1].susceptibility, y1 = pts[best].susceptibility,
                 y2 = pts[best + 1].susceptibility;
    // Vertex of the interpolating parabola (divided differences).
    const double d01 = (y1 - y0) / (x1 - x0);
    const double d12 = (y2 - y1) / (x2 - x1);
    const double curvature = (d12 - d01) / (x2 - x0);
    double vertex = x1;
    if (curvature < 0.0) {
        vertex = 0.5 * (x0 + x1) - d01 / (2.0 * curvature);
        vertex = std::clamp(vertex, x0, x2);
    }
    return {vertex, ThresholdMethod::SusceptibilityPeak, 0.25 * (x2 - x0), 0.0};
}

ThresholdEstimate cutoff_crossing(const PrevalenceCurve& curve) {
    const auto& pts = curve.points;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (pts[i].prevalence_mean > kOutbreakCutoff) {
            if (i == 0)
                throw RegimeNotBracketed("regime not bracketed: prevalence above cutoff at the first grid point");
            const auto& a = pts[i - 1];
            const auto& b = pts[i];
            const double frac = (kOutbreakCutoff - a.prevalence_mean) / (b.prevalence_mean - a.prevalence_mean);
            const double lambda = a.lambda + frac * (b.lambda - a.lambda);
            return {lambda, ThresholdMethod::CutoffCrossing, 0.5 * (b.lambda - a.lambda), 0.0};
        }
    }
    throw RegimeNotBracketed("regime not bracketed: prevalence never exceeds the outbreak cutoff");
}

double interpolate(const KappaSeries& s, double x) {
    auto it = std::lower_bound(s.begin(), s.end(), x, [](const auto& p, double v) { return p.first < v; });
    if (it == s.end()) return s.back().second;
    if (it->first == x || it == s.begin()) return it->second;
    const auto& b = *it;
    const auto& a = *(it - 1);
    return a.second + (x - a.first) / (b.first - a.first) * (b.second - a.second);
}

}  // namespace

ThresholdEstimate estimate_threshold(const PrevalenceCurve& curve, ThresholdMethod method) {
    curve.validate();
    if (curve.points.empty()) throw RegimeNotBracketed("regime not bracketed: empty curve");
    ThresholdEstimate est =
        method == ThresholdMethod::SusceptibilityPeak ? susceptibility_peak(curve) : cutoff_crossing(curve);
    est.kappa_c = est.lambda_c * curve.mean_degree;
    return est;
}

double mean_field_threshold(double mean_degree) {
    if (!(mean_degree > 0.0)) throw std::invalid_argument("mean_field_threshold: mean degree must be > 0");
    return 1.0 / mean_degree;
}

CollapseResult scaling_collapse(std::span<const PrevalenceCurve> curves, double kappa_lo, double kappa_hi) {
    if (curves.size() < 2) throw std::invalid_argument("scaling_collapse: need at least two curves");
    for (const auto& c : curves) {
        if (c.topology != curves.front().topology)
            throw std::invalid_argument("scaling_collapse: curves must share a topology");
        if (c.points.empty()) throw std::invalid_argument("scaling_collapse: empty curve");
        c.validate();
    }

    CollapseResult out;
    std::vector<double> knots{kappa_lo, kappa_hi};
    for (const auto& c : curves) {
        KappaSeries s;
        for (const auto& p : c.points) {
            const double kappa = p.lambda * c.mean_degree;
            s.emplace_back(kappa, p.prevalence_mean);
            if (kappa > kappa_lo && kappa < kappa_hi) knots.push_back(kappa);
        }
        out.series.push_back(std::move(s));
    }

    // Only curves whose kappa range covers a knot take part at that knot.
    double worst = 0.0;
    for (double x : knots) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        int covering = 0;
        for (const auto& s : out.series) {
            if (x < s.front().first || x > s.back().first) continue;
            const double y = interpolate(s, x);
            lo = std::min(lo, y);
            hi = std::max(hi, y);
            ++covering;
        }
        if (covering >= 2) worst = std::max(worst, hi - lo);
    }
    out.max_deviation = worst;
    return out;
}

SpeedMetrics speed_metrics(std::span<const double> mean_i_curve) {
    if (mean_i_curve.empty()) throw std::invalid_argument("speed_metrics: empty infected curve");
    const auto peak = std::max_element(mean_i_curve.begin(), mean_i_curve.end());
    SpeedMetrics m;
    m.t_max = static_cast<std::size_t>(peak - mean_i_curve.begin());
    m.peak_height = *peak;
    m.growth_profile.assign(mean_i_curve.begin(), peak + 1);
    return m;
}

SpeedMetrics speed_metrics(const EnsembleStats& stats) { return speed_metrics(stats.mean_i_curve); }

GrowthFit growth_classification(std::span<const double> expected_infected) {
    std::vector<std::pair<double, double>> pts;  // (t, ln I)
    std::size_t first = expected_infected.size();
    for (std::size_t t = 0; t < expected_infected.size(); ++t) {
        if (expected_infected[t] >= kGrowthNoiseFloor) {
            first = std::min(first, t);
            pts.emplace_back(static_cast<double>(t), std::log(expected_infected[t]));
        }
    }
    if (pts.size() < kGrowthMinPoints)
        throw InsufficientPoints("growth_classification: fewer than 5 points above the noise floor");

    const double n = static_cast<double>(pts.size());
    double mx = 0.0, my = 0.0;
    for (auto [x, y] : pts) {
        mx += x;
        my += y;
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (auto [x, y] : pts) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    GrowthFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 0.0;
    fit.first_t = first;
    fit.points = pts.size();
    fit.classification = (fit.r_squared >= kExponentialR2 && fit.slope > 0.0)
                             ? GrowthClass::ConsistentWithExponential
                             : GrowthClass::SlowerThanExponential;
    return fit;
}

}  // namespace wormsim
