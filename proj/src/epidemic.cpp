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

#include "wormsim/epidemic.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace wormsim {

void EpidemicParams::validate() const {
    if (!(infection_rate >= 0.0 && infection_rate <= 1.0))
        throw std::invalid_argument("infection_rate out of [0,1]");
    if (!(patching_rate > 0.0 && patching_rate <= 1.0))
        throw std::invalid_argument("patching_rate out of (0,1]");
}

namespace {

// Reusable scratch for greedy MAC selection; stamps avoid an O(N) clear per step.
class MacScheduler {
public:
    explicit MacScheduler(std::size_t node_count) : blocked_(node_count, 0) {}

    void select(const Graph& g, std::vector<NodeId>& order, Rng& rng, std::vector<NodeId>& out) {
        std::shuffle(order.begin(), order.end(), rng);
        if (++epoch_ == 0) {
            std::fill(blocked_.begin(), blocked_.end(), 0);
            epoch_ = 1;
        }
        out.clear();
        for (NodeId v : order) {
            if (blocked_[v] == epoch_) continue;
            out.push_back(v);
            for (NodeId w : g.neighbors(v)) blocked_[w] = epoch_;
        }
    }

private:
    std::vector<std::uint32_t> blocked_;
    std::uint32_t epoch_ = 0;
};

class SpreadingProcess {
public:
    SpreadingProcess(const Graph& g, const EpidemicParams& p)
        : g_(g), p_(p), state_(g.node_count(), NodeState::Vulnerable), mac_(g.node_count()) {
        p_.validate();
        if (p_.mac_enabled && g_.kind() != GraphKind::RGG)
            throw std::invalid_argument("MAC selection requires a spatial (RGG) graph");
        counts_.susceptible = g.node_count();
        if (p_.infection_rate > 0.0 && p_.infection_rate < 1.0)
            skip_ = std::geometric_distribution<std::size_t>(p_.infection_rate);
    }

    // Only valid on a freshly constructed process.
    void seed(NodeId v) {
        if (v >= g_.node_count()) throw std::out_of_range("seed node out of range");
        state_[v] = NodeState::Infected;
        infected_.push_back(v);
        --counts_.susceptible;
        ++counts_.infected;
    }

    void load_states(std::vector<NodeState> states) {
        if (states.size() != g_.node_count()) throw std::invalid_argument("state vector size differs from graph");
        state_ = std::move(states);
        infected_.clear();
        counts_ = {};
        for (NodeId v = 0; v < state_.size(); ++v) {
            switch (state_[v]) {
                case NodeState::Vulnerable: ++counts_.susceptible; break;
                case NodeState::Infected:
                    ++counts_.infected;
                    infected_.push_back(v);
                    break;
                case NodeState::Immune: ++counts_.recovered; break;
            }
        }
    }

    bool active() const noexcept { return !infected_.empty(); }
    const StepCounts& counts() const noexcept { return counts_; }
    std::vector<NodeState>& states() noexcept { return state_; }

    void advance(Rng& rng) {
        // Transmitters. `infected_` itself is left in its original order so
        // that patching below walks a fixed sequence.
        std::span<const NodeId> transmitters = infected_;
        if (p_.mac_enabled) {
            order_.assign(infected_.begin(), infected_.end());
            mac_.select(g_, order_, rng, selected_);
            transmitters = selected_;
        }

        next_.clear();
        broadcast(transmitters, rng);
        const std::size_t newly_infected = next_.size();

        // Patching round over the start-of-step infected list.
        std::size_t patched = 0;
        const bool certain = p_.patching_rate >= 1.0;
        std::bernoulli_distribution patch(p_.patching_rate);
        for (NodeId v : infected_) {
            if (certain || patch(rng)) {
                state_[v] = NodeState::Immune;
                ++patched;
            } else {
                next_.push_back(v);
            }
        }

        counts_.susceptible -= newly_infected;
        counts_.recovered += patched;
        counts_.infected = next_.size();
        infected_.swap(next_);
    }

private:
    void infect(NodeId w) {
        if (state_[w] == NodeState::Vulnerable) {
            state_[w] = NodeState::Infected;
            next_.push_back(w);
        }
    }

    // Each neighbor of each transmitter is hit independently with
    // probability lambda; geometric gaps jump straight to the hits.
    void broadcast(std::span<const NodeId> transmitters, Rng& rng) {
        const double lambda = p_.infection_rate;
        if (lambda <= 0.0) return;
        for (NodeId v : transmitters) {
            auto nb = g_.neighbors(v);
            if (lambda >= 1.0) {
                for (NodeId w : nb) infect(w);
                continue;
            }
            for (std::size_t idx = skip_(rng); idx < nb.size(); idx += 1 + skip_(rng)) infect(nb[idx]);
        }
    }

    const Graph& g_;
    EpidemicParams p_;
    std::vector<NodeState> state_;
    std::vector<NodeId> infected_;
    std::vector<NodeId> next_;
    std::vector<NodeId> order_;
    std::vector<NodeId> selected_;
    MacScheduler mac_;
    std::geometric_distribution<std::size_t> skip_;
    StepCounts counts_;
};

}  // namespace

std::vector<NodeId> mac_select(const Graph& g, std::span<const NodeId> infected, Rng& rng) {
    std::vector<NodeId> order(infected.begin(), infected.end());
    std::vector<NodeId> out;
    MacScheduler mac(g.node_count());
    mac.select(g, order, rng, out);
    return out;
}

StepCounts step(std::vector<NodeState>& states, const Graph& g, const EpidemicParams& p, Rng& rng) {
    SpreadingProcess proc(g, p);
    proc.load_states(std::move(states));
    if (!proc.active()) {
        states = std::move(proc.states());
        throw std::invalid_argument("step requires at least one infected node");
    }
    proc.advance(rng);
    states = std::move(proc.states());
    return proc.counts();
}

RunRecord run(const Graph& g, const EpidemicParams& p, NodeId seed_node, std::uint64_t rng_seed) {
    SpreadingProcess proc(g, p);
    proc.seed(seed_node);
    Rng rng = make_rng(rng_seed);

    RunRecord rec;
    rec.seed_node = seed_node;
    rec.rng_seed = rng_seed;
    auto record = [&] {
        const auto& c = proc.counts();
        rec.series_s.push_back(c.susceptible);
        rec.series_i.push_back(c.infected);
        rec.series_r.push_back(c.recovered);
    };
    record();
    while (proc.active()) {
        proc.advance(rng);
        record();
    }
    rec.duration = rec.series_i.size() - 1;
    rec.final_recovered = rec.series_r.back();
    return rec;
}

std::uint64_t run_seed(std::uint64_t master_seed, std::size_t run_index) noexcept {
    return derive_seed(master_seed, {seed_tag::run, static_cast<std::uint64_t>(run_index)});
}

std::vector<NodeId> choose_seed_nodes(std::size_t node_count, std::size_t count,
                                      std::uint64_t master_seed) {
    if (count < 1) throw std::invalid_argument("need at least one seed node");
    if (count > node_count) throw std::invalid_argument("more seed nodes requested than nodes in graph");
    Rng rng = make_rng(derive_seed(master_seed, {seed_tag::seed_nodes}));
    std::vector<NodeId> pool(node_count);
    std::iota(pool.begin(), pool.end(), NodeId{0});
    // Partial Fisher-Yates.
    for (std::size_t i = 0; i < count; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, node_count - 1);
        std::swap(pool[i], pool[pick(rng)]);
    }
    pool.resize(count);
    return pool;
}

EnsembleStats aggregate(std::span<const RunRecord> runs, std::size_t node_count) {
    if (runs.empty()) throw std::invalid_argument("aggregate: no runs");
    if (node_count == 0) throw std::invalid_argument("aggregate: empty graph");
    EnsembleStats st;
    st.run_count = runs.size();
    const double n = static_cast<double>(node_count);
    const double r = static_cast<double>(runs.size());

    std::size_t horizon = 0;
    for (const auto& rec : runs) horizon = std::max(horizon, rec.series_i.size());
    st.mean_i_curve.assign(horizon, 0.0);
    st.mean_r_curve.assign(horizon, 0.0);
    for (const auto& rec : runs) {
        for (std::size_t t = 0; t < rec.series_i.size(); ++t) {
            st.mean_i_curve[t] += static_cast<double>(rec.series_i[t]);
            st.mean_r_curve[t] += static_cast<double>(rec.series_r[t]);
        }
        for (std::size_t t = rec.series_r.size(); t < horizon; ++t)
            st.mean_r_curve[t] += static_cast<double>(rec.final_recovered);
    }
    for (std::size_t t = 0; t < horizon; ++t) {
        st.mean_i_curve[t] /= r * n;
        st.mean_r_curve[t] /= r * n;
    }

    double sum_f = 0.0, sum_f2 = 0.0, sum_major = 0.0;
    std::size_t majors = 0;
    for (const auto& rec : runs) {
        const double f = static_cast<double>(rec.final_recovered) / n;
        sum_f += f;
        sum_f2 += f * f;
        if (f > kOutbreakCutoff) {
            sum_major += f;
            ++majors;
        }
    }
    const double mean_f = sum_f / r;
    const double var_f = std::max(0.0, sum_f2 / r - mean_f * mean_f);
    st.prevalence_mean = mean_f;
    st.prevalence_conditional = majors > 0 ? std::max(mean_f, sum_major / static_cast<double>(majors)) : mean_f;
    st.prevalence_std_error = runs.size() > 1 ? std::sqrt(var_f * r / (r - 1.0) / r) : 0.0;
    // In node units: var(s)/mean(s) = N var(f)/mean(f).
    st.susceptibility = mean_f > 0.0 ? n * var_f / mean_f : 0.0;
    return st;
}

std::vector<RunRecord> ensemble_runs(const Graph& g, const EpidemicParams& p, std::size_t n_runs,
                                     std::size_t n_seed_nodes, std::uint64_t master_seed, int workers) {
    if (n_runs < 1) throw std::invalid_argument("n_runs must be >= 1");
    p.validate();
    if (p.mac_enabled && g.kind() != GraphKind::RGG)
        throw std::invalid_argument("MAC selection requires a spatial (RGG) graph");
    const auto seeds = choose_seed_nodes(g.node_count(), n_seed_nodes, master_seed);
    std::vector<RunRecord> records(n_runs);
    const int threads = workers > 0 ? workers : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(n_runs); ++i) {
        const auto r = static_cast<std::size_t>(i);
        records[r] = run(g, p, seeds[r % seeds.size()], run_seed(master_seed, r));
    }
    return records;
}

EnsembleStats ensemble(const Graph& g, const EpidemicParams& p, std::size_t n_runs,
                       std::size_t n_seed_nodes, std::uint64_t master_seed, int workers) {
    const auto records = ensemble_runs(g, p, n_runs, n_seed_nodes, master_seed, workers);
    return aggregate(records, g.node_count());
}

}  // namespace wormsim
