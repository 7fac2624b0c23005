#include <cmath>

#include "doctest.h"
#include "rdness/error.hpp"
#include "rdness/fields.hpp"
#include "rdness/flows.hpp"
#include "rdness/rng.hpp"

using namespace rdness;

namespace {

std::vector<double> delta0(const Torus& t) {
    std::vector<double> v(t.site_count(), 0.0);
    v[0] = 1.0;
    return v;
}

}  // namespace

TEST_SUITE("flows") {

TEST_CASE("one-dimensional flow for l = 2") {
    const auto phi = build_flow(2, 8, 1);
    CHECK(phi(0, 1) == doctest::Approx(0.75));
    CHECK(phi(1, 2) == doctest::Approx(0.25));
    CHECK(phi(1, 0) == doctest::Approx(-0.75));
    CHECK(phi(0, 7) == doctest::Approx(0.0));
    CHECK(phi.energy() == doctest::Approx(10.0 / 16.0));
    CHECK(phi.supported_in_cube(3));
    CHECK_THROWS_AS((void)phi(0, 3), ParameterError);
}

TEST_CASE("divergence matches delta minus q") {
    for (int d = 1; d <= 3; ++d)
        for (auto kind : {FlowKind::Sweep, FlowKind::MinimalEnergy}) {
            const int ell = 3, n = 12;
            const auto phi = build_flow(ell, n, d, kind);
            const auto k = block_kernels(ell, n, d);
            const auto p = delta0(phi.torus());
            CHECK(divergence_residual(phi, p, k.q) < 1e-12);
            CHECK(phi.supported_in_cube(2 * ell - 1));
            // div computed here by summing neighbour slots.
            const auto div = phi.divergence();
            for (std::size_t x = 0; x < div.size(); ++x) {
                double s = 0.0;
                for (int i = 0; i < d; ++i) s += phi.edge(i, x) - phi.edge(i, phi.torus().shift(x, i, -1));
                CHECK(div[x] == doctest::Approx(s).epsilon(1e-12));
            }
        }
    CHECK_THROWS_AS((void)build_flow(3, 8, 1), SizeError);
}

TEST_CASE("summation by parts") {
    const auto phi = build_flow(3, 12, 2);
    const auto k = block_kernels(3, 12, 2);
    const auto p = delta0(phi.torus());
    CounterRng rng(3);
    std::vector<double> g(phi.torus().site_count());
    for (auto& v : g) v = rng.normal();
    const auto r = divergence_formula_check(phi, p, k.q, g);
    CHECK(r.passed);
    double lhs = 0.0;
    for (std::size_t x = 0; x < g.size(); ++x) lhs += g[x] * (p[x] - k.q[x]);
    CHECK(r.lhs == doctest::Approx(lhs).epsilon(1e-12));
    CHECK(r.rhs == doctest::Approx(lhs).epsilon(1e-10));
}

TEST_CASE("minimal energy flow never exceeds the sweep") {
    for (int d = 1; d <= 3; ++d)
        for (int ell : {2, 3, 4}) {
            const double sweep = build_flow(ell, 4 * ell, d, FlowKind::Sweep).energy();
            const double minimal = build_flow(ell, 4 * ell, d, FlowKind::MinimalEnergy).energy();
            CHECK(minimal <= sweep * (1 + 1e-10));
            if (d == 1) CHECK(minimal == doctest::Approx(sweep).epsilon(1e-10));
        }
}

TEST_CASE("one-dimensional energy equals the sum of squared tail probabilities") {
    for (int ell = 2; ell <= 9; ++ell) {
        // q = uniform{0..l-1} * uniform{0..l-1}; the flow across (j, j+1) is P(Y > j).
        std::vector<double> q(2 * ell - 1, 0.0);
        for (int i = 0; i < ell; ++i)
            for (int j = 0; j < ell; ++j) q[i + j] += 1.0 / (ell * ell);
        double tail = 1.0, energy = 0.0;
        for (double v : q) {
            tail -= v;
            energy += tail * tail;
        }
        CHECK(build_flow(ell, 4 * ell, 1).energy() == doctest::Approx(energy).epsilon(1e-12));
    }
}

TEST_CASE("small-l doubling ratio in one dimension exceeds 2.2") {
    // E(l) is affine in l with a negative offset, so E(2l)/E(l) only tends to 2.
    const double e2 = build_flow(2, 8, 1).energy();
    const double e4 = build_flow(4, 16, 1).energy();
    const double e8 = build_flow(8, 32, 1).energy();
    CHECK(e4 / e2 > 2.2);
    CHECK(e8 / e4 > 2.2);
    CHECK(e8 / e4 < e4 / e2);
}

TEST_CASE("energy scaling") {
    const int grid1[] = {16, 32, 64};
    const auto s1 = energy_scaling(grid1, 1);
    CHECK(s1.max_doubling <= 2.2);
    CHECK(s1.max_residual < 1e-10);
    const int grid3[] = {2, 3, 4, 5, 6};
    const auto s3 = energy_scaling(grid3, 3);
    CHECK(s3.ratio < 10.0);
    const int bad[] = {1};
    CHECK_THROWS_AS((void)energy_scaling(bad, 1), ParameterError);
}

}
