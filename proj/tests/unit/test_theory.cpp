#include <cmath>
#include <numbers>

#include "doctest.h"
#include "rdness/error.hpp"
#include "rdness/rng.hpp"
#include "rdness/theory.hpp"

using namespace rdness;

namespace {

ModelParams params(double a, double b, double lambda, int d = 1) {
    ModelParams p;
    p.a = a;
    p.b = b;
    p.lambda = lambda;
    p.d = d;
    return p;
}

// Root of lambda rho^2 + (a + b - lambda) rho - a = 0 in (0,1); linear when lambda = 0.
double quadratic_root(double a, double b, double lambda) {
    if (lambda == 0.0) return a / (a + b);
    const double B = a + b - lambda;
    const double disc = std::sqrt(B * B + 4.0 * lambda * a);
    return 2.0 * a / (B + disc);
}

}  // namespace

TEST_SUITE("theory") {

TEST_CASE("reaction drift and noise at fixed values") {
    const auto p = params(1, 1, 0.5);
    CHECK(reaction_drift(0.0, p) == doctest::Approx(1.0));
    CHECK(reaction_drift(1.0, p) == doctest::Approx(-1.0));
    CHECK(reaction_drift(0.5, p) == doctest::Approx(0.125));
    CHECK(reaction_noise(0.5, params(1, 2, 0)) == doctest::Approx(1.5));
    for (double r = 0.0; r <= 1.0; r += 0.05) CHECK(reaction_noise(r, p) - reaction_drift(r, p) == doctest::Approx(2.0 * p.b * r));
    CHECK_THROWS_AS((void)reaction_drift(1.5, p), DomainError);
}

TEST_CASE("rho_star matches the quadratic root") {
    CHECK(rho_star(params(2, 1, 0)) == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
    CHECK(rho_star(params(1, 1, 0)) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(rho_star(params(1, 1, 0.5)) == doctest::Approx((-3.0 + std::sqrt(17.0)) / 2.0).epsilon(1e-13));
    CounterRng rng(3);
    for (int i = 0; i < 1000; ++i) {
        const double a = 0.05 + 3 * rng.uniform();
        const double b = 0.05 + 3 * rng.uniform();
        const double lambda = -0.95 * a + 4 * rng.uniform();
        const auto p = params(a, b, lambda);
        const double r = rho_star(p);
        CHECK(std::abs(reaction_drift(r, p)) < 1e-13);
        CHECK(std::abs(r - quadratic_root(a, b, lambda)) < 1e-12);
        CHECK(reaction_drift_slope(r, p) < 0.0);
    }
}

TEST_CASE("kappa closed values and symmetry") {
    const auto p = params(1, 1, 0);
    CHECK(kappa(0.25, p) == doctest::Approx(2 * 0.1875 * std::log(3.0) / 0.5).epsilon(1e-12));
    CHECK(kappa(0.25, p) == doctest::Approx(0.823959).epsilon(1e-6));
    CHECK(kappa(0.5, p) == doctest::Approx(1.0 / p.eps0()));
    CHECK(kappa(0.5 + 1e-7, p) == doctest::Approx(1.0 / p.eps0()).epsilon(1e-9));
    for (double r = 0.05; r < 0.5; r += 0.05) CHECK(kappa(r, p) == doctest::Approx(kappa(1 - r, p)));
    CHECK_THROWS_AS((void)kappa(0.0, p), DomainError);
}

TEST_CASE("green scale") {
    CHECK(green_scale(10, 1) == 10.0);
    CHECK(green_scale(10, 2) == doctest::Approx(2.302585).epsilon(1e-6));
    CHECK(green_scale(10, 3) == 1.0);
}

TEST_CASE("spectrum limits and sign of the correction") {
    const auto white = fixed_point(params(1.3, 0.7, 0.0));
    for (double k2 : {0.0, 1.0, 4.0, 100.0}) CHECK(mode_variance(k2, white) == white.chi);

    const auto fp = fixed_point(params(1, 1, 0.2));
    const double k0 = fp.chi + (fp.noise + 2 * fp.slope * fp.chi) / (-2 * fp.slope);
    CHECK(mode_variance(0.0, fp) == doctest::Approx(k0).epsilon(1e-13));
    CHECK(std::abs(mode_variance(1e10, fp) - fp.chi) < 1e-9);
    for (double lambda = -0.85; lambda <= 1.0; lambda += 0.05) {
        const auto q = fixed_point(params(1, 1, lambda));
        const double raw = q.noise + 2 * q.slope * q.chi;
        CHECK(std::abs(raw - q.excess()) < 1e-14);
        if (std::abs(lambda) > 1e-9) CHECK((raw > 0) == (lambda > 0));
        for (double k2 : {0.0, 1.0, 9.0}) CHECK(mode_variance(k2, q) > 0.0);
    }
}

TEST_CASE("mft rates") {
    const auto p = params(1, 1, 1);
    const auto r = mft_rates(0.5, p);
    CHECK(r.creation == doctest::Approx(0.75));
    CHECK(r.annihilation == doctest::Approx(0.5));
    CHECK(mft_rates(1.0, p).creation == 0.0);
    for (int i = 0; i <= 100; ++i) {
        const double rho = i / 100.0;
        const auto m = mft_rates(rho, p);
        CHECK(std::abs(m.creation - m.annihilation - reaction_drift(rho, p)) < 1e-14);
        CHECK(std::abs(m.creation + m.annihilation - reaction_noise(rho, p)) < 1e-14);
    }
}

TEST_CASE("Xi is the Gaussian relative entropy") {
    CHECK(xi(1.0) == 0.0);
    CHECK(xi(std::numbers::e) == doctest::Approx(0.359141).epsilon(1e-6));
    CHECK_THROWS_AS((void)xi(0.0), DomainError);
    CounterRng rng(4);
    for (int i = 0; i < 5; ++i) {
        const double r = 0.1 + 5 * rng.uniform();
        // KL(N(0, r) | N(0, 1)) = (log(1/r) + r - 1) / 2.
        CHECK(xi(r) == doctest::Approx(0.5 * (std::log(1.0 / r) + r - 1.0)));
    }
}

TEST_CASE("gaussian entropy sum") {
    auto p = params(1, 1, 0.2);
    CHECK(gaussian_entropy_sum(params(1, 1, 0), 50) == 0.0);
    const double s50 = gaussian_entropy_sum(p, 50);
    const double s100 = gaussian_entropy_sum(p, 100);
    const double s200 = gaussian_entropy_sum(p, 200);
    CHECK(s200 - s100 < s100 - s50);
    CHECK(s50 > 0.0);
    // Direct oracle in d = 1.
    const auto fp = fixed_point(p);
    double direct = 0.0;
    for (int k = -10; k <= 10; ++k) direct += xi(mode_variance(double(k) * k, fp) / fp.chi);
    CHECK(gaussian_entropy_sum(p, 10) == doctest::Approx(direct).epsilon(1e-12));
    CHECK(gaussian_entropy_sum(p, 10) + gaussian_entropy_shell(p, 10, 20) == doctest::Approx(gaussian_entropy_sum(p, 20)));
}

TEST_CASE("concentration lemmas at closed-form cases") {
    const auto h = hoeffding_check(bernoulli_variable(0.5), 1.0, 100000, 2);
    CHECK(h.exact == doctest::Approx(std::log(std::cosh(0.5))).epsilon(1e-9));
    CHECK(h.exact == doctest::Approx(0.120114).epsilon(1e-5));
    CHECK(h.bound == doctest::Approx(0.125));
    CHECK(h.passed);
    const auto u = hoeffding_check(uniform_variable(0, 1), 2.0, 100000, 3);
    CHECK(u.exact == doctest::Approx(std::log((std::exp(2.0) - 1.0) / 2.0) - 1.0).epsilon(1e-9));
    CHECK(u.passed);
    CHECK(hoeffding_check(constant_variable(2.0), 1.0, 1000).passed);

    const auto s = subgaussian_check(1.0, 0.25, 200000, 4);
    CHECK(s.bound == doctest::Approx(std::sqrt(2.0)));
    CHECK(s.passed);
    CHECK(subgaussian_check(2.0, 0.2, 200000, 5).bound == doctest::Approx(std::sqrt(5.0)));
    CHECK(subgaussian_check(1.0, 0.0, 1000, 6).estimate == doctest::Approx(1.0));
    CHECK_THROWS_AS((void)subgaussian_check(1.0, 0.5), ParameterError);
}

TEST_CASE("parameter validation") {
    CHECK_THROWS_AS(params(0, 1, 0).validate(), ParameterError);
    CHECK_THROWS_AS(params(1, 1, -1).validate(), ParameterError);
    CHECK_NOTHROW(params(1, 1, -0.9).validate());
    CHECK(params(1, 2, -0.5).eps0() == doctest::Approx(0.5));
    CHECK(params(1, 2, 0.5).c_max() == doctest::Approx(2.0));
}

}
