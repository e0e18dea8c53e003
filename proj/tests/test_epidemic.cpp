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

#include <algorithm>
#include <cmath>
#include <map>
#include <bit>
#include <numeric>

#include "doctest.h"
#include "oracles.hpp"
#include "wormsim/epidemic.hpp"
#include "wormsim/reference.hpp"

using namespace wormsim;

namespace {

Graph small(std::size_t n, std::initializer_list<std::pair<NodeId, NodeId>> edges) {
    std::vector<std::pair<NodeId, NodeId>> e(edges);
    return graph_from_edges(n, e, GraphKind::RGG);
}

Graph paper_graph(std::size_t n, std::uint64_t seed) {
    const NetworkConfig cfg{n, 1000.0, 50.0, true};
    auto rng = make_rng(seed);
    return build_rgg(place_nodes(cfg, rng), cfg);
}

std::vector<NodeState> states_of(std::size_t n, std::initializer_list<NodeId> infected) {
    std::vector<NodeState> s(n, NodeState::Vulnerable);
    for (NodeId v : infected) s[v] = NodeState::Infected;
    return s;
}

}  // namespace

TEST_CASE("parameter validation") {
    CHECK_NOTHROW((EpidemicParams{0.0, 1.0, false}.validate()));
    CHECK_NOTHROW((EpidemicParams{1.0, 0.5, true}.validate()));
    CHECK_THROWS_AS((EpidemicParams{1.5, 1.0, false}.validate()), std::invalid_argument);
    CHECK_THROWS_AS((EpidemicParams{-0.1, 1.0, false}.validate()), std::invalid_argument);
    CHECK_THROWS_AS((EpidemicParams{0.1, 0.0, false}.validate()), std::invalid_argument);
}

TEST_CASE("MAC selection") {
    SUBCASE("a lone infected node always transmits") {
        const auto g = small(3, {{0, 1}, {1, 2}});
        auto rng = make_rng(1);
        const NodeId inf[] = {1};
        CHECK(mac_select(g, inf, rng) == std::vector<NodeId>{1});
    }
    SUBCASE("an adjacent pair splits evenly") {
        const auto g = small(2, {{0, 1}});
        auto rng = make_rng(2);
        const NodeId inf[] = {0, 1};
        const std::size_t trials = 20000;
        std::size_t first = 0;
        for (std::size_t i = 0; i < trials; ++i) {
            const auto sel = mac_select(g, inf, rng);
            REQUIRE(sel.size() == 1);
            first += sel[0] == 0;
        }
        CHECK(oracle::within_binomial(0.5, first, trials));
    }
    SUBCASE("mutually out of range nodes all transmit") {
        const auto g = small(10, {{0, 5}, {1, 6}, {2, 7}, {3, 8}, {4, 9}});
        auto rng = make_rng(3);
        const NodeId inf[] = {0, 1, 2, 3, 4};
        auto sel = mac_select(g, inf, rng);
        std::sort(sel.begin(), sel.end());
        CHECK(sel == std::vector<NodeId>{0, 1, 2, 3, 4});
    }
    SUBCASE("an empty list selects nobody") {
        const auto g = small(2, {{0, 1}});
        auto rng = make_rng(4);
        CHECK(mac_select(g, std::span<const NodeId>{}, rng).empty());
    }
}

TEST_CASE("MAC selection is a maximal independent set on random instances") {
    auto rng = make_rng(31337);
    std::size_t failures = 0;
    for (int inst = 0; inst < 10000; ++inst) {
        const std::size_t n = 2 + rng() % 29;
        const double p = std::uniform_real_distribution<double>(0.05, 0.8)(rng);
        std::vector<std::pair<NodeId, NodeId>> edges;
        for (NodeId a = 0; a < n; ++a)
            for (NodeId b = a + 1; b < n; ++b)
                if (std::bernoulli_distribution(p)(rng)) edges.emplace_back(a, b);
        const auto g = graph_from_edges(n, edges, GraphKind::RGG);
        std::vector<NodeId> infected;
        for (NodeId v = 0; v < n; ++v)
            if (rng() % 2) infected.push_back(v);
        const auto sel = mac_select(g, infected, rng);
        failures += !oracle::is_maximal_independent(g, infected, sel);
    }
    CHECK(failures == 0);
}

TEST_CASE("single-step examples") {
    SUBCASE("zero infection rate only patches") {
        const auto g = small(4, {{0, 1}, {1, 2}, {2, 3}});
        auto s = states_of(4, {1, 2});
        auto rng = make_rng(1);
        const auto c = step(s, g, {0.0, 1.0, false}, rng);
        CHECK(c == StepCounts{2, 0, 2});
        CHECK(s[1] == NodeState::Immune);
        CHECK(s[0] == NodeState::Vulnerable);
    }
    SUBCASE("star center infects every leaf") {
        const auto g = small(6, {{0, 1}, {0, 2}, {0, 3}, {0, 4}, {0, 5}});
        auto s = states_of(6, {0});
        auto rng = make_rng(2);
        CHECK(step(s, g, {1.0, 1.0, false}, rng) == StepCounts{0, 5, 1});
    }
    SUBCASE("two adjacent transmitters share one victim under the MAC") {
        // 0 - 1 adjacent and infected; 2 adjacent to both.
        const auto g = small(3, {{0, 1}, {0, 2}, {1, 2}});
        auto rng = make_rng(3);
        for (int i = 0; i < 200; ++i) {
            auto s = states_of(3, {0, 1});
            CHECK(step(s, g, {1.0, 1.0, true}, rng) == StepCounts{0, 1, 2});
            CHECK(s[2] == NodeState::Infected);
        }
    }
    SUBCASE("newly infected nodes neither transmit nor recover in the same step") {
        const auto g = small(3, {{0, 1}, {1, 2}});
        auto s = states_of(3, {0});
        auto rng = make_rng(4);
        CHECK(step(s, g, {1.0, 1.0, false}, rng) == StepCounts{1, 1, 1});
        CHECK(s[2] == NodeState::Vulnerable);
    }
    SUBCASE("blocked nodes are patched too") {
        const auto g = small(2, {{0, 1}});
        auto s = states_of(2, {0, 1});
        auto rng = make_rng(5);
        CHECK(step(s, g, {1.0, 1.0, true}, rng) == StepCounts{0, 0, 2});
    }
    SUBCASE("stepping without an infection is an error") {
        const auto g = small(2, {{0, 1}});
        auto s = states_of(2, {});
        auto rng = make_rng(6);
        CHECK_THROWS_AS(step(s, g, {0.5, 1.0, false}, rng), std::invalid_argument);
    }
    SUBCASE("the MAC needs a spatial graph") {
        const std::pair<NodeId, NodeId> e[] = {{0, 1}};
        const auto er = graph_from_edges(2, e, GraphKind::ER);
        auto s = states_of(2, {0});
        auto rng = make_rng(7);
        CHECK_THROWS_AS(step(s, er, {0.5, 1.0, true}, rng), std::invalid_argument);
    }
}

TEST_CASE("whole-run examples") {
    SUBCASE("a single node") {
        const auto g = small(1, {});
        const auto r = run(g, {0.7, 1.0, false}, 0, 1);
        CHECK(r.duration == 1);
        CHECK(r.final_recovered == 1);
        CHECK(r.series_i == std::vector<std::size_t>{1, 0});
    }
    SUBCASE("zero infection rate stops at the seed") {
        const auto g = paper_graph(2000, 9);
        for (std::uint64_t s = 0; s < 20; ++s) {
            const auto r = run(g, {0.0, 1.0, s % 2 == 0}, static_cast<NodeId>(s * 37), s);
            CHECK(r.final_recovered == 1);
            CHECK(r.duration == 1);
        }
    }
    SUBCASE("path of three seeded in the middle") {
        const auto g = small(3, {{0, 1}, {1, 2}});
        const auto r = run(g, {1.0, 1.0, false}, 1, 1);
        CHECK(r.final_recovered == 3);
        CHECK(r.duration == 2);
    }
    SUBCASE("seed node out of range") {
        const auto g = small(3, {{0, 1}});
        CHECK_THROWS_AS(run(g, {0.5, 1.0, false}, 3, 1), std::out_of_range);
    }
}

TEST_CASE("conservation and monotonicity along every run") {
    const auto g = paper_graph(4000, 21);
    for (bool mac : {false, true}) {
        for (double lambda : {0.02, 0.05, 0.1, 0.4}) {
            for (double delta : {1.0, 0.6}) {
                for (std::uint64_t s = 0; s < 10; ++s) {
                    const auto r = run(g, {lambda, delta, mac}, static_cast<NodeId>(s * 131), s + 17);
                    REQUIRE(r.series_s.size() == r.duration + 1);
                    for (std::size_t t = 0; t <= r.duration; ++t) {
                        REQUIRE(r.series_s[t] + r.series_i[t] + r.series_r[t] == 4000);
                        if (t > 0) {
                            REQUIRE(r.series_s[t] <= r.series_s[t - 1]);
                            REQUIRE(r.series_r[t] >= r.series_r[t - 1]);
                        }
                    }
                    CHECK(r.series_i.back() == 0);
                    CHECK(r.series_r.back() == r.final_recovered);
                }
            }
        }
    }
}

namespace {

const oracle::SmallGraph kSmallGraphs[] = {
    oracle::SmallGraph::from_edges(3, {{0, 1}, {1, 2}}),
    oracle::SmallGraph::from_edges(4, {{0, 1}, {0, 2}, {0, 3}}),
    oracle::SmallGraph::from_edges(4, {{0, 1}, {1, 2}, {2, 3}, {3, 0}}),
    oracle::SmallGraph::from_edges(5, {{0, 1}, {1, 2}, {2, 0}, {2, 3}, {3, 4}}),
    oracle::SmallGraph::from_edges(6, {{0, 1}, {0, 2}, {1, 2}, {1, 3}, {2, 4}, {3, 4}, {3, 5}, {4, 5}}),
    oracle::SmallGraph::from_edges(6, {{0, 1}, {0, 2}, {0, 3}, {0, 4}, {0, 5}, {1, 2}, {3, 4}}),
};

// Outcomes that the enumeration calls impossible must never show up, and
// every possible outcome must land inside its 3-sigma binomial band.
template <class Key>
void check_frequencies(const std::map<Key, double>& exact, const std::map<Key, std::size_t>& seen,
                       std::size_t trials) {
    for (const auto& [k, count] : seen) CHECK_MESSAGE(exact.count(k), "outcome outside the exact support");
    for (const auto& [k, p] : exact) {
        const auto it = seen.find(k);
        const std::size_t hits = it == seen.end() ? 0 : it->second;
        CAPTURE(p);
        CAPTURE(hits);
        CHECK(oracle::within_binomial(p, hits, trials));
    }
}

}  // namespace

TEST_CASE("step-level dynamics agree with exact enumeration") {
    const std::size_t trials = 20000;
    std::uint64_t seed = 500;
    for (const auto& sg : kSmallGraphs) {
        const auto g = sg.to_graph();
        const int start = sg.n - 1;
        for (double lambda : {0.0, 1.0, 0.5}) {
            for (bool mac : {false, true}) {
                CAPTURE(sg.n);
                CAPTURE(lambda);
                CAPTURE(mac);
                const auto exact = oracle::run_distribution(sg, start, lambda, mac);
                std::map<oracle::Outcome, std::size_t> seen;
                auto rng = make_rng(++seed);
                for (std::size_t i = 0; i < trials; ++i) {
                    auto s = states_of(g.node_count(), {static_cast<NodeId>(start)});
                    std::size_t t = 0;
                    for (StepCounts c{0, 1, 0}; c.infected > 0; ++t) c = step(s, g, {lambda, 1.0, mac}, rng);
                    oracle::Mask immune = 0;
                    for (NodeId v = 0; v < g.node_count(); ++v)
                        if (s[v] == NodeState::Immune) immune |= oracle::Mask{1} << v;
                    ++seen[{immune, t}];
                }
                check_frequencies(exact, seen, trials);
            }
        }
    }
}

TEST_CASE("whole runs agree with exact enumeration") {
    const std::size_t trials = 20000;
    std::uint64_t seed = 9000;
    for (const auto& sg : kSmallGraphs) {
        const auto g = sg.to_graph();
        for (int start : {0, sg.n - 1}) {
            for (double lambda : {0.0, 1.0, 0.5}) {
                for (bool mac : {false, true}) {
                    std::map<std::pair<int, std::size_t>, double> exact;
                    for (const auto& [o, p] : oracle::run_distribution(sg, start, lambda, mac))
                        exact[{std::popcount(o.first), o.second}] += p;
                    std::map<std::pair<int, std::size_t>, std::size_t> seen;
                    for (std::size_t i = 0; i < trials; ++i) {
                        const auto r = run(g, {lambda, 1.0, mac}, static_cast<NodeId>(start), ++seed);
                        ++seen[{static_cast<int>(r.final_recovered), r.duration}];
                    }
                    check_frequencies(exact, seen, trials);
                }
            }
        }
    }
}

TEST_CASE("seed node choice") {
    const auto a = choose_seed_nodes(100, 5, 3);
    CHECK(a == choose_seed_nodes(100, 5, 3));
    CHECK(a.size() == 5);
    auto sorted = a;
    std::sort(sorted.begin(), sorted.end());
    CHECK(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end());
    CHECK(sorted.back() < 100);
    auto all = choose_seed_nodes(7, 7, 1);
    std::sort(all.begin(), all.end());
    CHECK(all == std::vector<NodeId>{0, 1, 2, 3, 4, 5, 6});
    CHECK_THROWS_AS(choose_seed_nodes(4, 5, 1), std::invalid_argument);
    CHECK_THROWS_AS(choose_seed_nodes(4, 0, 1), std::invalid_argument);
}

TEST_CASE("ensemble statistics") {
    const auto g = paper_graph(4000, 3);

    SUBCASE("a single run collapses to that run") {
        const EpidemicParams p{0.1, 1.0, false};
        const auto runs = ensemble_runs(g, p, 1, 1, 77);
        REQUIRE(runs.size() == 1);
        const auto st = ensemble(g, p, 1, 1, 77);
        const auto& r = runs[0];
        CHECK(st.prevalence_mean == doctest::Approx(static_cast<double>(r.final_recovered) / 4000.0));
        CHECK(st.prevalence_std_error == 0.0);
        CHECK(st.susceptibility == 0.0);
        REQUIRE(st.mean_i_curve.size() == r.series_i.size());
        for (std::size_t t = 0; t < r.series_i.size(); ++t)
            CHECK(st.mean_i_curve[t] == doctest::Approx(static_cast<double>(r.series_i[t]) / 4000.0));
    }
    SUBCASE("zero infection rate gives one node per run") {
        const auto st = ensemble(g, {0.0, 1.0, true}, 50, 5, 1);
        CHECK(st.prevalence_mean == doctest::Approx(1.0 / 4000.0));
        CHECK(st.prevalence_conditional == doctest::Approx(1.0 / 4000.0));
        CHECK(st.susceptibility == doctest::Approx(0.0));
        CHECK(st.run_count == 50);
    }
    SUBCASE("aggregation formulas") {
        // Two hand-made runs on a 10-node graph: sizes 1 and 9.
        RunRecord a{{9, 9}, {1, 0}, {0, 1}, 1, 1, 0, 0};
        RunRecord b{{9, 6, 1, 1}, {1, 3, 5, 0}, {0, 1, 4, 9}, 9, 3, 0, 0};
        const RunRecord runs[] = {a, b};
        const auto st = aggregate(runs, 10);
        CHECK(st.prevalence_mean == doctest::Approx(0.5));
        CHECK(st.prevalence_conditional == doctest::Approx(0.5));
        // Population variance of {1, 9} is 16, mean 5.
        CHECK(st.susceptibility == doctest::Approx(16.0 / 5.0));
        CHECK(st.prevalence_std_error == doctest::Approx(std::sqrt(0.32 / 2.0)));
        REQUIRE(st.mean_i_curve.size() == 4);
        CHECK(st.mean_i_curve[1] == doctest::Approx(0.15));
        CHECK(st.mean_r_curve[3] == doctest::Approx(0.5));
    }
}

TEST_CASE("MAC throttles spreading") {
    const auto g = paper_graph(4000, 12);
    const std::size_t runs = 300;
    const auto on = ensemble(g, {0.1, 1.0, true}, runs, 5, 44);
    const auto off = ensemble(g, {0.1, 1.0, false}, runs, 5, 44);
    CHECK(on.prevalence_mean <= off.prevalence_mean + 2.0 * (on.prevalence_std_error + off.prevalence_std_error));
    // Per-t bound: each mean I(t) fraction is an average of values in [0, 1].
    const double slack = 2.0 / std::sqrt(static_cast<double>(runs));
    for (std::size_t t = 0; t < std::min(on.mean_i_curve.size(), off.mean_i_curve.size()); ++t)
        CHECK(on.mean_i_curve[t] <= off.mean_i_curve[t] + slack);
}

TEST_CASE("prevalence grows with the infection rate") {
    const auto g = paper_graph(4000, 13);
    double last = 0.0;
    for (double lambda : {0.01, 0.03, 0.05, 0.1, 0.3}) {
        const auto st = ensemble(g, {lambda, 1.0, false}, 200, 5, 5);
        CHECK(st.prevalence_mean + 2.0 * st.prevalence_std_error >= last);
        last = st.prevalence_mean;
    }
}

TEST_CASE("ensembles are reproducible at any worker count") {
    const auto g = paper_graph(4000, 14);
    for (bool mac : {false, true}) {
        const EpidemicParams p{0.06, 1.0, mac};
        const auto serial = reference::ensemble_runs_serial(g, p, 120, 5, 2718);
        for (int workers : {1, 2, 4}) {
            CAPTURE(workers);
            CHECK(ensemble_runs(g, p, 120, 5, 2718, workers) == serial);
            CHECK(ensemble(g, p, 120, 5, 2718, workers) == reference::ensemble_serial(g, p, 120, 5, 2718));
        }
    }
}
