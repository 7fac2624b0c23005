#include <cmath>
#include <complex>
#include <numbers>

#include "doctest.h"
#include "rdness/error.hpp"
#include "rdness/fields.hpp"
#include "rdness/simulate.hpp"

using namespace rdness;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::complex<double> direct_mode(const ParticleConfig& eta, double rho, const Wavevector& k) {
    const auto& t = eta.torus();
    std::complex<double> s = 0.0;
    for (std::size_t x = 0; x < t.site_count(); ++x) {
        double phase = 0.0;
        for (int i = 0; i < t.dim(); ++i) phase += double(k[i]) * t.coord(x, i);
        s += (double(eta.get(x)) - rho) * std::polar(1.0, -kTwoPi * phase / t.side());
    }
    return s / std::pow(double(t.side()), t.dim() / 2.0);
}

}  // namespace

TEST_SUITE("fields") {

TEST_CASE("fluctuation field at fixed configurations") {
    const Torus t(1, 4);
    const std::uint8_t bits[] = {1, 0, 1, 1};
    const ParticleConfig eta(t, bits);
    const std::vector<double> one(4, 1.0);
    CHECK(fluctuation_field(eta, one, 0.5) == doctest::Approx((3 - 2.0) / 2.0));
    const std::vector<double> alt = {1, -1, 1, -1};
    CHECK(fluctuation_field(eta, alt, 0.5) == doctest::Approx((0.5 + 0.5 + 0.5 - 0.5) / 2.0));
    const auto f = sample_on_lattice(t, [](const std::array<double, 3>& x) { return x[0]; });
    CHECK(f == std::vector<double>{0, 0.25, 0.5, 0.75});
    CHECK_THROWS_AS((void)fluctuation_field(eta, std::vector<double>(3, 1.0), 0.5), SizeError);
}

TEST_CASE("direct, FFT and projector modes agree with the Fourier sum") {
    for (auto [d, n] : {std::pair{1, 16}, std::pair{2, 8}, std::pair{3, 6}}) {
        CounterRng rng(40 + d);
        const auto eta = bernoulli_config(Torus(d, n), 0.4, rng);
        const double rho = 0.37;
        const auto direct = fourier_modes(eta, rho, 2);
        const auto full = fourier_modes_full(eta, rho);
        CHECK(full.full);
        CHECK(full.ks.size() == Torus(d, n).site_count());
        ModeProjector proj(Torus(d, n), direct.ks);
        std::vector<std::complex<double>> out(direct.ks.size());
        proj.project(eta, rho, out);
        for (std::size_t m = 0; m < direct.ks.size(); ++m) {
            const auto ref = direct_mode(eta, rho, direct.ks[m]);
            CHECK(std::abs(direct.coef[m] - ref) < 1e-10);
            CHECK(std::abs(full.at(direct.ks[m]) - ref) < 1e-10);
            CHECK(std::abs(out[m] - ref) < 1e-5);
        }
        // Parseval over all residues.
        double modes = 0.0;
        for (const auto& c : full.coef) modes += std::norm(c);
        double sites = 0.0;
        for (std::size_t x = 0; x < eta.site_count(); ++x) sites += std::pow(double(eta.get(x)) - rho, 2);
        CHECK(modes == doctest::Approx(sites).epsilon(1e-10));
    }
    CounterRng rng(1);
    CHECK_THROWS_AS((void)fourier_modes(bernoulli_config(Torus(1, 8), 0.5, rng), 0.5, 4), SizeError);
}

TEST_CASE("Sobolev norm") {
    FluctuationField f;
    f.d = 1;
    f.n = 8;
    f.ks = {Wavevector{0, 0, 0}, Wavevector{1, 0, 0}, Wavevector{-2, 0, 0}};
    f.coef = {1.0, {0.0, 2.0}, 3.0};
    CHECK(sobolev_norm(f, 0) == doctest::Approx(std::sqrt(1 + 4 + 9.0)));
    CHECK(sobolev_norm(f, 1) == doctest::Approx(std::sqrt(1 + 4 * 2 + 9 * 5.0)));
    CHECK(sobolev_norm(f, -1) == doctest::Approx(std::sqrt(1 + 4 / 2.0 + 9 / 5.0)));
}

TEST_CASE("local observables") {
    CHECK(LocalObservable::occupation(2).mean(0.3) == doctest::Approx(0.3));
    CHECK(LocalObservable::neighbor_product(1, 0).mean(0.3) == doctest::Approx(0.09));
    CHECK(LocalObservable::neighbor_product(3, 2).mean(0.6) == doctest::Approx(0.36));
    CHECK(LocalObservable::constant(1, 2.5).mean(0.7) == doctest::Approx(2.5));
    CHECK_THROWS_AS((void)LocalObservable::occupation(1).mean(1.2), DomainError);

    const Torus t(1, 6);
    const std::uint8_t bits[] = {1, 1, 0, 1, 1, 1};
    const ParticleConfig eta(t, bits);
    const std::vector<double> one(6, 1.0);
    // Neighbour products x,x+1 occupied: (0,1),(3,4),(4,5),(5,0).
    CHECK(observable_field(eta, LocalObservable::neighbor_product(1, 0), one, 0.5) ==
          doctest::Approx((4 - 6 * 0.25) / 6.0));
    CHECK(observable_field(eta, LocalObservable::occupation(1), one, 0.5) == doctest::Approx((5 - 3.0) / 6.0));
    CHECK(observable_field(eta, LocalObservable::constant(1, 4.0), one, 0.5) == doctest::Approx(0.0));
}

TEST_CASE("block kernels") {
    const auto k = block_kernels(2, 8, 1);
    CHECK(k.q[0] == doctest::Approx(0.25));
    CHECK(k.q[1] == doctest::Approx(0.5));
    CHECK(k.q[2] == doctest::Approx(0.25));
    CHECK(k.p[0] == doctest::Approx(0.5));
    CHECK(k.p[1] == doctest::Approx(0.5));
    const auto k3 = block_kernels(3, 7, 2);
    double sp = 0.0, sq = 0.0;
    for (double v : k3.p) sp += v;
    for (double v : k3.q) sq += v;
    CHECK(sp == doctest::Approx(1.0));
    CHECK(sq == doctest::Approx(1.0));
    CHECK(k3.support.size() == 25);
    CHECK_THROWS_AS((void)block_kernels(4, 7, 1), SizeError);
}

TEST_CASE("block average variance under the product measure is chi sum q^2") {
    const int n = 16, ell = 3;
    const auto k = block_kernels(ell, n, 2);
    double q2 = 0.0;
    for (double v : k.q) q2 += v * v;
    const double rho = 0.3;
    CounterRng rng(77);
    double s2 = 0.0;
    const int draws = 20000;
    for (int i = 0; i < draws; ++i) {
        const auto eta = bernoulli_config(Torus(2, n), rho, rng);
        const double v = block_average(eta, 5, k, rho);
        s2 += v * v;
    }
    const double expect = rho * (1 - rho) * q2;
    CHECK(s2 / draws == doctest::Approx(expect).epsilon(0.05));
}

TEST_CASE("spectrum estimate is flat at chi for independent product samples") {
    ModelParams p;
    p.a = 1;
    p.b = 1;
    p.lambda = 0;
    p.n = 32;
    const double rho = rho_star(p);
    const auto ks = half_space_modes(1, 6);
    ModeProjector proj(Torus(1, 32), ks);
    SampleStream s;
    s.n = 32;
    s.rho_ref = rho;
    s.mode_set = ks;
    CounterRng rng(5);
    std::vector<std::complex<double>> out(ks.size());
    for (int j = 0; j < 6000; ++j) {
        const auto eta = bernoulli_config(Torus(1, 32), rho, rng);
        proj.project(eta, rho, out);
        s.times.push_back(j);
        s.densities.push_back(eta.density());
        for (auto c : out) s.modes.emplace_back(float(c.real()), float(c.imag()));
    }
    const std::vector<SampleStream> streams{s};
    const auto est = spectrum_estimate(streams, p);
    CHECK(est.size() == ks.size() - 1);
    for (const auto& e : est) {
        CHECK(e.theory == doctest::Approx(0.25));
        CHECK(std::abs(e.z) < 4.5);
        CHECK(e.tau_int < 2.0);
    }
}

}
