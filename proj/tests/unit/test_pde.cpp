#include <cmath>
#include <numbers>

#include "doctest.h"
#include "rdness/error.hpp"
#include "rdness/pde.hpp"

using namespace rdness;

namespace {

constexpr double kPi = std::numbers::pi;

ModelParams params(double lambda, int d = 1) {
    ModelParams p;
    p.a = 1;
    p.b = 1.5;
    p.lambda = lambda;
    p.d = d;
    return p;
}

// Classical RK4 on u' = F(u) for spatially constant data.
double rk4(double u, double T, const ModelParams& p) {
    const int steps = 20000;
    const double h = T / steps;
    for (int i = 0; i < steps; ++i) {
        const double k1 = reaction_drift(u, p);
        const double k2 = reaction_drift(u + h / 2 * k1, p);
        const double k3 = reaction_drift(u + h / 2 * k2, p);
        const double k4 = reaction_drift(u + h * k3, p);
        u += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
    }
    return u;
}

}  // namespace

TEST_SUITE("pde") {

TEST_CASE("fixed point is stationary") {
    const auto p = params(0.4);
    const auto u0 = DensityProfile::constant(1, 16, rho_star(p));
    const auto tr = solve_hydro(u0, 2.0, p, 0.01);
    for (double v : tr.profiles.back().u) CHECK(v == doctest::Approx(rho_star(p)).epsilon(1e-12));
}

TEST_CASE("constant data follows the reaction ODE") {
    const auto p = params(0.6);
    const auto u0 = DensityProfile::constant(2, 8, 0.9);
    const double times[] = {0.5, 1.0};
    const auto tr = solve_hydro(u0, 1.0, p, 1e-3, times);
    REQUIRE(tr.times.size() >= 2);
    const double ref = rk4(0.9, 1.0, p);
    for (double v : tr.profiles.back().u) CHECK(v == doctest::Approx(ref).epsilon(1e-5));
    CHECK(tr.times.back() == doctest::Approx(1.0));
}

TEST_CASE("small cosine decays at the linearised rate") {
    const auto p = params(0.3);
    const double rho = rho_star(p);
    const double amp = 1e-4;
    const auto u0 = DensityProfile::sample(1, 32, [&](const std::array<double, 3>& x) {
        return rho + amp * std::cos(2 * kPi * x[0]);
    });
    const double T = 0.05;
    const auto tr = solve_hydro(u0, T, p, 2e-4);
    const double rate = -4 * kPi * kPi + reaction_drift_slope(rho, p);
    const double got = cosine_amplitude(tr.profiles.back(), Wavevector{1, 0, 0});
    CHECK(got == doctest::Approx(amp * std::exp(rate * T)).epsilon(1e-4));
    CHECK(cosine_amplitude(u0, Wavevector{1, 0, 0}) == doctest::Approx(amp).epsilon(1e-10));
}

TEST_CASE("step size and bounds guards") {
    const auto p = params(0.3);
    const auto u0 = DensityProfile::constant(1, 8, 0.5);
    CHECK_THROWS_AS((void)solve_hydro(u0, 1.0, p, 2 * hydro_max_step(p)), ParameterError);
    CHECK(hydro_max_step(p) > 0.0);
}

TEST_CASE("semigroup") {
    const auto p = params(0.2);
    const double fp = reaction_drift_slope(rho_star(p), p);
    const std::vector<Wavevector> ks = {Wavevector{0, 0, 0}, Wavevector{1, 0, 0}, Wavevector{-1, 0, 0}, Wavevector{2, 0, 0}};
    const std::vector<std::complex<double>> c = {0.5, {1.0, 0.5}, {1.0, -0.5}, 0.25};
    const auto out = semigroup_apply(ks, c, 0.1, p);
    CHECK(std::abs(out[0] - c[0] * std::exp(fp * 0.1)) < 1e-14);
    CHECK(std::abs(out[3] - c[3] * std::exp((fp - 16 * kPi * kPi) * 0.1)) < 1e-14);
    // Composition.
    const auto half = semigroup_apply(ks, semigroup_apply(ks, c, 0.05, p), 0.05, p);
    for (std::size_t i = 0; i < ks.size(); ++i) CHECK(std::abs(half[i] - out[i]) < 1e-14);
    const auto id = semigroup_energy_identity(ks, c, p);
    CHECK(id.error < 1e-9);
    CHECK(id.lhs == doctest::Approx(id.closed_form_lhs).epsilon(1e-9));
}

}
