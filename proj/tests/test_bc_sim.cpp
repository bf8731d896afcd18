#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "bchom/bc_sim.hpp"

#include <set>

#include "bchom/metrics.hpp"
#include "bchom/null_models.hpp"

using namespace bchom;
using doctest::Approx;

namespace {

BCState state_of(std::vector<double> opinions, double lower, double upper) {
    BCState s;
    s.lower_bounds.assign(opinions.size(), lower);
    s.upper_bounds.assign(opinions.size(), upper);
    s.opinions = std::move(opinions);
    return s;
}

double spread(const std::vector<double>& v) {
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    return *hi - *lo;
}

}  // namespace

TEST_CASE("consensus is a fixed point") {
    const auto s = state_of({0.4, 0.4, 0.4, 0.4}, 0.3, 0.3);
    const auto next = bc_step(s);
    CHECK(next.opinions == s.opinions);
    CHECK(next.step == 1);
}

TEST_CASE("zero bounds freeze every agent") {
    const auto s = state_of({0.1, 0.2, 0.2, 0.9}, 0.0, 0.0);
    const auto next = bc_step(s);
    CHECK(next.opinions == s.opinions);
}

TEST_CASE("two agents inside each other's bounds meet exactly in the middle") {
    const auto s = state_of({0.4, 0.6}, 0.5, 0.5);
    const auto next = bc_step(s);
    CHECK(next.opinions[0] == 0.5);
    CHECK(next.opinions[1] == 0.5);
}

TEST_CASE("simulate argument validation") {
    const auto s = state_of({0.2, 0.8}, 0.1, 0.1);
    CHECK_THROWS_AS(simulate(s, 0, 1e-8), Error);
    CHECK_THROWS_AS(simulate(s, 10, 0.0), Error);
    const auto one_step = simulate(s, 1, 1e-12);
    CHECK(one_step.steps == 1);
    CHECK(one_step.trajectory.size() == 2);
}

TEST_CASE("wide bounds drive a uniform population to consensus") {
    const auto init = uniform_state(200, 0.5, 0.5, 42);
    const auto sim = simulate(init, 1000, 1e-10);
    CHECK(sim.converged);
    CHECK(spread(sim.trajectory.back()) < 1e-6);
    CHECK(sim.clusters.size() == 1);
}

TEST_CASE("narrow bounds fragment a uniform population into clusters") {
    const auto init = uniform_state(200, 0.05, 0.05, 42);
    const auto sim = simulate(init, 1000, 1e-10);
    CHECK(sim.converged);
    CHECK(sim.clusters.size() >= 2);
    std::size_t total = 0;
    for (const auto& c : sim.clusters) total += c.size();
    CHECK(total == 200);
}

TEST_CASE("identical initial states give identical trajectories") {
    const auto init = uniform_state(100, 0.12, 0.12, 9);
    const auto a = simulate(init, 300, 1e-9);
    const auto b = simulate(init, 300, 1e-9);
    CHECK(a.steps == b.steps);
    CHECK(a.trajectory == b.trajectory);
}

TEST_CASE("opinions stay inside the unit interval along every trajectory") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto init = uniform_state(80, 0.07, 0.21, seed);  // asymmetric bounds
        const auto sim = simulate(init, 200, 1e-9);
        for (const auto& snapshot : sim.trajectory) {
            for (double x : snapshot) {
                CHECK(x >= 0.0);
                CHECK(x <= 1.0);
            }
        }
    }
}

TEST_CASE("distinct-opinion count never grows under global bounds") {
    // agents sharing an opinion share a window, so merges are permanent
    for (std::uint64_t seed = 3; seed <= 8; ++seed) {
        const auto init = uniform_state(120, 0.08, 0.08, seed);
        const auto sim = simulate(init, 300, 1e-10);
        std::size_t prev = std::numeric_limits<std::size_t>::max();
        for (const auto& snapshot : sim.trajectory) {
            const std::set<double> distinct(snapshot.begin(), snapshot.end());
            CHECK(distinct.size() <= prev);
            prev = distinct.size();
        }
    }
}

TEST_CASE("order of opinions is preserved under symmetric global bounds") {
    const auto init = uniform_state(60, 0.15, 0.15, 4);
    auto order = init.opinions;
    const auto sim = simulate(init, 200, 1e-10);
    for (const auto& snapshot : sim.trajectory) {
        for (std::size_t i = 0; i < order.size(); ++i) {
            for (std::size_t j = i + 1; j < order.size(); ++j) {
                if (init.opinions[i] < init.opinions[j]) {
                    CHECK(snapshot[i] <= snapshot[j] + 1e-12);
                }
            }
        }
    }
}

TEST_CASE("mean opinion is conserved when every agent sees every other") {
    // complete interaction: all pairwise distances within the bounds, so all
    // agents move to the common mean in one synchronous step
    const auto s = state_of({0.2, 0.35, 0.4, 0.55}, 0.5, 0.5);
    double before = 0.0;
    for (double x : s.opinions) before += x;
    const auto next = bc_step(s);
    double after = 0.0;
    for (double x : next.opinions) after += x;
    CHECK(after == Approx(before).epsilon(1e-12));
    CHECK(spread(next.opinions) == 0.0);

    // two well-separated tight camps: each camp is complete, no cross talk
    const auto camps = state_of({0.1, 0.12, 0.14, 0.8, 0.82, 0.84}, 0.1, 0.1);
    double camp_before = 0.0;
    for (double x : camps.opinions) camp_before += x;
    const auto camp_next = bc_step(camps);
    double camp_after = 0.0;
    for (double x : camp_next.opinions) camp_after += x;
    CHECK(camp_after == Approx(camp_before).epsilon(1e-12));
}

TEST_CASE("snapshot_graph of a consensus state is the complete digraph") {
    const auto s = state_of({0.5, 0.5, 0.5, 0.5}, 0.1, 0.1);
    const auto g = snapshot_graph(s);
    CHECK(g.node_count() == 4);
    CHECK(g.edge_count() == 12);  // n(n-1), no self-loops
}

TEST_CASE("snapshot_graph of separated clusters is block diagonal") {
    const auto s = state_of({0.1, 0.12, 0.14, 0.8, 0.82, 0.84}, 0.1, 0.1);
    const auto g = snapshot_graph(s);
    for (const auto& [src, dst] : g.edges()) {
        const bool src_low = g.opinion(src) < 0.5;
        const bool dst_low = g.opinion(dst) < 0.5;
        CHECK(src_low == dst_low);
    }
    CHECK(g.edge_count() == 12);  // two complete 3-blocks
}

TEST_CASE("snapshot fixtures score high homophily rates against the randomized null") {
    // mid-trajectory snapshot: bounded neighborhoods over spread-out opinions
    const auto init = uniform_state(120, 0.08, 0.08, 21);
    const auto sim = simulate(init, 3, 1e-12);
    BCState mid = init;
    mid.opinions = sim.trajectory.back();
    const auto g = snapshot_graph(mid);
    const auto egos = g.eligible_users(Perspective::Follower, 1);
    const auto profiles = profiles_for(g, egos, Perspective::Follower);
    const auto trials = run_trials(g, Perspective::Follower, NullModel::Randomized, 3, 5);
    for (const auto& trial : trials) {
        const auto nulls = null_profiles(g, Perspective::Follower, trial, egos);
        const auto rates = population_rates(profiles, nulls, trial.seed);
        CHECK(rates.r1 > 0.9);
        CHECK(rates.r2 > 0.9);
    }
}

TEST_CASE("state validation rejects malformed inputs") {
    auto bad_opinion = state_of({0.5, 1.4}, 0.1, 0.1);
    CHECK_THROWS_AS(bc_step(bad_opinion), Error);
    auto bad_bounds = state_of({0.5, 0.6}, -0.1, 0.1);
    CHECK_THROWS_AS(bc_step(bad_bounds), Error);
    BCState mismatched;
    mismatched.opinions = {0.5};
    CHECK_THROWS_AS(bc_step(mismatched), Error);
}
