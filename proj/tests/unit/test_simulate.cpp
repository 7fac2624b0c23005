#include <cmath>
#include <map>

#include "doctest.h"
#include "rdness/exact.hpp"
#include "rdness/simulate.hpp"
#include "rdness/stats.hpp"

using namespace rdness;

namespace {

ModelParams params(double a, double b, double lambda, int d, int n) {
    ModelParams p;
    p.a = a;
    p.b = b;
    p.lambda = lambda;
    p.d = d;
    p.n = n;
    return p;
}

}  // namespace

TEST_SUITE("simulate") {

TEST_CASE("reaction rate at fixed configurations") {
    const auto p = params(1, 2, 0.6, 1, 3);
    const Torus t(1, 3);
    const std::uint8_t bits[] = {0, 1, 0};
    const ParticleConfig eta(t, bits);
    CHECK(reaction_rate(eta, 0, p) == doctest::Approx(1.3));
    CHECK(reaction_rate(eta, 1, p) == doctest::Approx(2.0));

    const auto q = params(1, 1, 0.7, 2, 4);
    ParticleConfig full(Torus(2, 4));
    for (std::size_t x = 1; x < 16; ++x) full.set(x, true);
    CHECK(reaction_rate(full, 0, q) == doctest::Approx(1.7));
    CHECK(reaction_rate(full, 5, q) == doctest::Approx(1.0));
}

TEST_CASE("thinning accepts with c_x / c_max") {
    const auto p = params(1, 0.5, 1.0, 1, 6);
    const Torus t(1, 6);
    const std::uint8_t bits[] = {0, 1, 0, 0, 1, 1};
    const ParticleConfig eta(t, bits);
    CounterRng rng(11);
    std::vector<double> proposed(6, 0.0);
    std::vector<double> accepted(6, 0.0);
    const int trials = 600000;
    for (int i = 0; i < trials; ++i) {
        const auto f = propose_flip(eta, p, rng);
        proposed[f.site] += 1;
        if (f.accepted) accepted[f.site] += 1;
    }
    for (std::size_t x = 0; x < 6; ++x) {
        const double expect = reaction_rate(eta, x, p) / p.c_max();
        const double se = std::sqrt(expect * (1 - expect) / proposed[x]);
        CHECK(std::abs(accepted[x] / proposed[x] - expect) < 4 * se + 1e-12);
        CHECK(std::abs(proposed[x] / trials - 1.0 / 6) < 0.005);
    }
}

TEST_CASE("exchanges conserve particles; flips change them by one") {
    const auto p = params(1, 1, 0.4, 2, 6);
    CounterRng init(3);
    Engine e(p, bernoulli_config(Torus(2, 6), 0.5, init), CounterRng(4));
    for (int i = 0; i < 20000; ++i) {
        const std::size_t before = e.config().particle_count();
        const auto r = e.step();
        const std::size_t after = e.config().particle_count();
        CHECK(r.dt > 0.0);
        if (r.kind == EventKind::Exchange || r.kind == EventKind::FlipRejected) CHECK(after == before);
        if (r.kind == EventKind::FlipAccepted) CHECK(std::abs(double(after) - double(before)) == 1.0);
    }
}

TEST_CASE("bound rate bookkeeping") {
    const auto p = params(1, 2, 0.5, 2, 5);
    CounterRng init(1);
    Engine e(p, bernoulli_config(Torus(2, 5), 0.3, init), CounterRng(2));
    CHECK(e.exchange_rate() == doctest::Approx(25.0 * 2 * 25));
    CHECK(e.flip_proposal_rate() == doctest::Approx(2.0 * 25));
}

TEST_CASE("identical seeds give identical streams") {
    SimConfig c;
    c.params = params(1, 1, 0.3, 1, 32);
    c.seed = 17;
    c.total_time = 6;
    c.sample_interval = 0.5;
    c.replicas = 3;
    c.threads = 2;
    c.mode_cutoff = 3;
    c.box_radius = 1;
    const auto r1 = run(c);
    c.threads = 1;
    const auto r2 = run(c);
    REQUIRE(r1.replicas.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(r1.replicas[i].times == r2.replicas[i].times);
        CHECK(r1.replicas[i].densities == r2.replicas[i].densities);
        CHECK(r1.replicas[i].modes == r2.replicas[i].modes);
        CHECK(r1.replicas[i].pattern_counts == r2.replicas[i].pattern_counts);
    }
    CHECK(r1.replicas[0].densities != r1.replicas[1].densities);
    const auto& s = r1.replicas[0];
    const double burn = c.effective_burn_in();
    for (std::size_t j = 0; j < s.size(); ++j) CHECK(s.times[j] == doctest::Approx(burn + j * c.sample_interval));
}

TEST_CASE("lambda = 0 density averages to a/(a+b)") {
    SimConfig c;
    c.params = params(2, 1, 0, 1, 8);
    c.seed = 5;
    c.total_time = 3000;
    c.sample_interval = 0.5;
    const auto s = run(c).replicas.front();
    const double m = mean(s.densities);
    const double se = std::sqrt(variance(s.densities) * integrated_autocorr_time(s.densities) / s.size());
    CHECK(std::abs(m - 2.0 / 3.0) < 3.5 * se);
}

TEST_CASE("occupation law on n = 4 matches the exact stationary law") {
    const auto p = params(1, 1, 0.5, 1, 4);
    const auto pi = stationary_distribution(build_generator(p));
    CounterRng init(9);
    Engine e(p, bernoulli_config(Torus(1, 4), rho_star(p), init), CounterRng(10));
    e.advance_to(20.0);
    std::vector<double> hist(16, 0.0);
    const int samples = 100000;
    for (int j = 1; j <= samples; ++j) {
        e.advance_to(20.0 + 0.1 * j);
        hist[e.config().code()] += 1.0 / samples;
    }
    CHECK(total_variation(hist, pi) < 0.02);
}

TEST_CASE("accepted flip rate equals the stationary mean of c_x") {
    const auto p = params(1, 2, 0.5, 1, 8);
    const auto g = build_generator(p);
    const auto pi = stationary_distribution(g);
    double mean_rate = 0.0;
    for (std::size_t s = 0; s < pi.size(); ++s)
        mean_rate += pi[s] * reaction_rate(ParticleConfig::from_code(Torus(1, 8), s), 0, p);
    CounterRng init(12);
    Engine e(p, bernoulli_config(Torus(1, 8), rho_star(p), init), CounterRng(13));
    e.advance_to(10.0);
    const auto f0 = e.flips_accepted;
    const double T = 3000.0;
    e.advance_to(10.0 + T);
    const double flips = static_cast<double>(e.flips_accepted - f0);
    const double expect = mean_rate * 8 * T;
    CHECK(std::abs(flips - expect) < 5 * std::sqrt(expect));
}

TEST_CASE("configuration validation") {
    SimConfig c;
    c.params = params(1, 1, 0, 1, 8);
    c.box_radius = 4;
    CHECK_THROWS(c.validate());
    c.box_radius = -1;
    c.sample_interval = 0;
    CHECK_THROWS(c.validate());
}

}
