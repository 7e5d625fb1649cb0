#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "oracles.hpp"
#include "pfsq/errors.hpp"
#include "pfsq/kernel.hpp"
#include "pfsq/optimizer.hpp"

using namespace pfsq;
using namespace pfsq::opt;
using doctest::Approx;

namespace {

// Random feasible instance: service times in [1e-3, 0.1], load below capacity.
HeterogeneousArray random_array(std::mt19937_64& rng, std::size_t m, double max_load = 0.95) {
    std::uniform_real_distribution<double> service(1e-3, 0.1);
    std::uniform_real_distribution<double> load(0.01, max_load);
    std::vector<double> s(m);
    for (auto& v : s) v = service(rng);
    double cap = 0.0;
    for (double v : s) cap += 1.0 / v;
    return HeterogeneousArray(load(rng) * cap, s);
}

double sum(std::span<const double> v) { return std::accumulate(v.begin(), v.end(), 0.0); }

}  // namespace

TEST_SUITE("optimizer") {

TEST_CASE("array and routing validation") {
    CHECK_THROWS_AS(HeterogeneousArray(1.0, {}), ValidationError);
    CHECK_THROWS_AS(HeterogeneousArray(1.0, {0.1, 0.0}), ValidationError);
    CHECK_THROWS_AS(HeterogeneousArray(-1.0, {0.1}), ValidationError);
    CHECK_THROWS_AS(RoutingVector({0.5, 0.4}), ValidationError);
    CHECK_THROWS_AS(RoutingVector({1.5, -0.5}), ValidationError);
    CHECK_NOTHROW(RoutingVector({0.5, 0.5 + 5e-13}));

    const HeterogeneousArray a(1.0, {0.3, 0.1, 0.2, 0.1});
    const auto order = a.sorted_order();
    CHECK(std::vector<std::size_t>(order.begin(), order.end()) == std::vector<std::size_t>{1, 3, 2, 0});
}

TEST_CASE("feasibility") {
    const auto f = feasibility(HeterogeneousArray(166.67, {0.005, 0.015}));
    CHECK(f.feasible);
    CHECK(f.capacity == Approx(266.6666666667).epsilon(1e-12));
    CHECK_FALSE(feasibility(HeterogeneousArray(4.0, {0.5, 0.5})).feasible);
    CHECK(feasibility(HeterogeneousArray(0.0, {0.5, 0.5})).feasible);
}

TEST_CASE("objective") {
    const HeterogeneousArray dual(166.67, {0.005, 0.015});
    CHECK(objective(dual, RoutingVector({0.819612, 0.180388})) == Approx(0.017857).epsilon(1e-5 / 0.017857));

    const HeterogeneousArray homo(166.67, {0.005, 0.005});
    CHECK(objective(homo, RoutingVector({0.5, 0.5})) ==
          Approx(kernel::parallel_array_residence(166.67, 0.005, 2)).epsilon(1e-12));

    const HeterogeneousArray three(10.0, {0.01, 0.02, 0.5});
    const double two_only = 0.6 * 0.01 / (1 - 0.06) + 0.4 * 0.02 / (1 - 0.08);
    CHECK(objective(three, RoutingVector({0.6, 0.4, 0.0})) == Approx(two_only).epsilon(1e-14));

    try {
        objective(HeterogeneousArray(10.0, {0.01, 0.5}), RoutingVector({0.5, 0.5}));
        FAIL("expected saturation");
    } catch (const SaturationError& e) {
        CHECK(e.resource() == "queue 2");
    }
}

TEST_CASE("gradient") {
    const HeterogeneousArray dual(166.67, {0.005, 0.015});
    const auto g = gradient(dual, RoutingVector({0.819612, 0.180388}));
    CHECK(std::abs(g[0] - g[1]) < 1e-6);

    const HeterogeneousArray idle(0.0, {0.005, 0.015, 0.2});
    const auto g0 = gradient(idle, RoutingVector({0.2, 0.3, 0.5}));
    CHECK(g0 == std::vector<double>{0.005, 0.015, 0.2});
}

TEST_CASE("gradient matches central finite differences") {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 50; ++trial) {
        const auto array = random_array(rng, 2 + trial % 5);
        const auto s = array.service_times();
        std::vector<double> svec(s.begin(), s.end());
        // random stable point: shrink the capacity-proportional routing toward uniform
        std::vector<double> phi(svec.size());
        std::uniform_real_distribution<double> mix(0.0, 0.3);
        const double w = mix(rng);
        const auto cap = feasibility(array).capacity;
        for (std::size_t k = 0; k < phi.size(); ++k) {
            phi[k] = (1 - w) * (1.0 / svec[k]) / cap + w / static_cast<double>(phi.size());
        }
        const double total = std::accumulate(phi.begin(), phi.end(), 0.0);
        for (auto& p : phi) p /= total;
        if (!std::isfinite(oracle::routing_objective(array.arrival_rate(), svec, phi))) continue;
        const auto g = gradient(array, RoutingVector(phi));
        for (std::size_t k = 0; k < phi.size(); ++k) {
            const double fd = oracle::central_difference(array.arrival_rate(), svec, phi, k, 1e-7);
            CHECK(std::abs(g[k] - fd) <= 1e-5 * std::abs(fd));
        }
    }
}

TEST_CASE("capped simplex projection") {
    const std::vector<double> inf(3, 1.0);
    auto x = project_capped_simplex(std::vector<double>{0.2, 0.3, 0.5}, inf);
    CHECK(x == std::vector<double>{0.2, 0.3, 0.5});
    x = project_capped_simplex(std::vector<double>{1.0, 1.0, 1.0}, inf);
    for (double v : x) CHECK(v == Approx(1.0 / 3).epsilon(1e-15));
    x = project_capped_simplex(std::vector<double>{2.0, 0.0, -1.0}, inf);
    CHECK(x == std::vector<double>{1.0, 0.0, 0.0});
    x = project_capped_simplex(std::vector<double>{2.0, 0.0, 0.0}, std::vector<double>{0.6, 1.0, 1.0});
    CHECK(x[0] == 0.6);
    CHECK(x[1] == Approx(0.2));
    CHECK(x[2] == Approx(0.2));
    CHECK_THROWS_AS(project_capped_simplex(std::vector<double>{1.0, 1.0}, std::vector<double>{0.4, 0.4}),
                    ValidationError);

    // Property: result on the capped simplex and no feasible point is closer.
    std::mt19937_64 rng(5);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> cap(0.2, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 2 + trial % 6;
        std::vector<double> y(n), u(n);
        for (auto& v : y) v = normal(rng);
        for (auto& v : u) v = cap(rng);
        if (std::accumulate(u.begin(), u.end(), 0.0) < 1.0) continue;
        const auto p = project_capped_simplex(y, u);
        CHECK(std::abs(sum(p) - 1.0) <= 1e-12);
        double d0 = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            CHECK(p[k] >= 0.0);
            CHECK(p[k] <= u[k]);
            d0 += (p[k] - y[k]) * (p[k] - y[k]);
        }
        // moving mass between two coordinates never gets closer to y
        for (std::size_t a = 0; a < n; ++a) {
            for (std::size_t b = 0; b < n; ++b) {
                if (a == b) continue;
                auto q = p;
                const double t = std::min({1e-4, q[b], u[a] - q[a]});
                if (t <= 0.0) continue;
                q[a] += t;
                q[b] -= t;
                double d = 0.0;
                for (std::size_t k = 0; k < n; ++k) d += (q[k] - y[k]) * (q[k] - y[k]);
                CHECK(d >= d0 - 1e-12);
            }
        }
    }
}

TEST_CASE("optimize_dual") {
    const auto o = optimize_dual(166.67, 0.005, 0.015);
    CHECK(o.converged);
    CHECK(o.routing[0] == Approx(0.819612).epsilon(1e-4 / 0.819612));
    CHECK(o.response_time == Approx(0.017857).epsilon(1e-5 / 0.017857));
    CHECK(o.response_time == objective(HeterogeneousArray(166.67, {0.005, 0.015}), o.routing));

    CHECK(optimize_dual(166.67, 0.01, 0.01).routing[0] == 0.5);
    CHECK(optimize_dual(3.0, 0.2, 0.2).routing[0] == 0.5);

    const auto homo = optimize_dual(166.67, 0.005, 0.005);
    CHECK(homo.response_time == Approx(kernel::parallel_array_residence(166.67, 0.005, 2)).epsilon(1e-12));
    CHECK(homo.response_time == Approx(0.008571551022157458).epsilon(1e-12));

    // slow disk unused at very low load
    const auto low = optimize_dual(1.0, 0.001, 1.0);
    CHECK(low.routing[0] == 1.0);
    CHECK(low.routing[1] == 0.0);

    CHECK_THROWS_AS(optimize_dual(300.0, 0.005, 0.015), InfeasibleError);
    try {
        optimize_dual(300.0, 0.005, 0.015);
    } catch (const InfeasibleError& e) {
        CHECK(e.capacity() == Approx(800.0 / 3));
    }
}

TEST_CASE("optimize_m reproduces the quad-disk table") {
    const HeterogeneousArray quad(166.67, {0.005, 0.015, 0.020, 0.020});
    const auto o = optimize_m(quad);
    const std::vector<double> table{0.73442, 0.13119, 0.06719, 0.06719};
    for (std::size_t k = 0; k < 4; ++k) CHECK(std::abs(o.routing[k] - table[k]) <= 1e-4);
    CHECK(o.routing[2] == o.routing[3]);
    CHECK(std::abs(o.response_time - 0.0158568) <= 1e-5);
    CHECK(o.response_time == objective(quad, o.routing));
    CHECK(o.converged);
    CHECK(o.residual < 1e-10);
}

TEST_CASE("optimize_m homogeneous collapse") {
    for (int m = 1; m <= 12; ++m) {
        const HeterogeneousArray a(0.7 * m / 0.3, std::vector<double>(static_cast<std::size_t>(m), 0.3));
        const auto o = optimize_m(a);
        for (std::size_t k = 0; k < a.size(); ++k) CHECK(o.routing[k] == Approx(1.0 / m).epsilon(1e-12));
        CHECK(o.response_time == Approx(kernel::parallel_array_residence(a.arrival_rate(), 0.3, m)).epsilon(1e-12));
    }
}

TEST_CASE("optimize_m agrees with optimize_dual for m = 2") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 50; ++trial) {
        const auto a = random_array(rng, 2, 0.99);
        const auto s = a.service_times();
        const auto dual = optimize_dual(a.arrival_rate(), s[0], s[1]);
        const auto full = optimize_m(a);
        CHECK(std::abs(dual.routing[0] - full.routing[0]) <= 1e-6);
        CHECK(std::abs(dual.response_time - full.response_time) <= 1e-6);
    }
}

TEST_CASE("optimize_m properties") {
    std::mt19937_64 rng(1234);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t m = 1 + static_cast<std::size_t>(trial % 8);
        const auto a = random_array(rng, m, trial % 2 ? 0.99 : 0.3);
        const auto o = optimize_m(a);
        const auto phi = o.routing.fractions();
        CHECK(std::abs(sum(phi) - 1.0) <= 1e-12);
        const auto s = a.service_times();
        const auto g = gradient(a, o.routing);
        double common = 0.0;
        for (std::size_t k = 0; k < m; ++k) {
            CHECK(phi[k] >= 0.0);
            if (phi[k] > 0.0) common = std::max(common, g[k]);
        }
        for (std::size_t k = 0; k < m; ++k) {
            if (phi[k] > 0.0) CHECK(std::abs(g[k] - common) <= 1e-9 * common);
            else CHECK(g[k] >= common * (1 - 1e-9));
            for (std::size_t j = 0; j < m; ++j) {
                if (s[k] > s[j]) CHECK(phi[k] <= phi[j]);
            }
        }
        const auto sorted = o.sorted_fractions(a);
        CHECK(std::is_sorted(sorted.rbegin(), sorted.rend()));
    }
}

TEST_CASE("optimize_m permutes with its input and ties get equal fractions") {
    const HeterogeneousArray a(50.0, {0.02, 0.005, 0.02, 0.01, 0.02});
    const HeterogeneousArray b(50.0, {0.005, 0.01, 0.02, 0.02, 0.02});
    const auto oa = optimize_m(a);
    const auto ob = optimize_m(b);
    CHECK(oa.routing[0] == oa.routing[2]);
    CHECK(oa.routing[2] == oa.routing[4]);
    CHECK(oa.routing[1] == Approx(ob.routing[0]).epsilon(1e-9));
    CHECK(oa.routing[3] == Approx(ob.routing[1]).epsilon(1e-9));
    CHECK(oa.routing[0] == Approx(ob.routing[4]).epsilon(1e-9));
}

TEST_CASE("optimize_m matches grid search on m = 3") {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 5; ++trial) {
        const auto a = random_array(rng, 3);
        const auto s = a.service_times();
        const std::vector<double> svec(s.begin(), s.end());
        const auto grid = oracle::grid_search_simplex3(a.arrival_rate(), svec);
        const auto o = optimize_m(a);
        for (std::size_t k = 0; k < 3; ++k) CHECK(std::abs(o.routing[k] - grid[k]) <= 5e-4);
    }
}

TEST_CASE("boundary solution at low load") {
    const HeterogeneousArray a(1.0, {0.005, 0.015, 5.0});
    const auto o = optimize_m(a);
    CHECK(o.routing[2] == 0.0);
    CHECK(o.routing[0] > 0.99);
}

TEST_CASE("optimize_m failure modes") {
    CHECK_THROWS_AS(optimize_m(HeterogeneousArray(300.0, {0.005, 0.015})), InfeasibleError);
    PgdOptions tight;
    tight.max_iterations = 1;
    try {
        optimize_m(HeterogeneousArray(166.67, {0.005, 0.015, 0.02, 0.02}), tight);
        FAIL("expected non-convergence");
    } catch (const ConvergenceError& e) {
        CHECK_FALSE(e.best().converged);
        CHECK(std::abs(sum(e.best().routing.fractions()) - 1.0) <= 1e-12);
        CHECK(std::isfinite(e.best().response_time));
    }
}

}  // TEST_SUITE
