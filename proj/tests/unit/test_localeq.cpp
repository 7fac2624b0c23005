#include <bit>
#include <cmath>

#include "doctest.h"
#include "rdness/error.hpp"
#include "rdness/localeq.hpp"
#include "rdness/simulate.hpp"

using namespace rdness;

TEST_SUITE("localeq") {

TEST_CASE("product marginal by independent enumeration") {
    const auto m = product_marginal(2, 1, 0.3);
    REQUIRE(m.size() == 512);
    double s = 0.0;
    for (std::size_t p = 0; p < m.size(); ++p) {
        const int ones = std::popcount(p);
        CHECK(m[p] == doctest::Approx(std::pow(0.3, ones) * std::pow(0.7, 9 - ones)));
        s += m[p];
    }
    CHECK(s == doctest::Approx(1.0));
    const auto r0 = product_marginal(1, 0, 0.25);
    CHECK(r0 == std::vector<double>{0.75, 0.25});
}

TEST_CASE("radius zero marginal is the density") {
    const Torus t(1, 8);
    const std::uint8_t bits[] = {1, 0, 0, 1, 1, 0, 1, 0};
    const std::vector<ParticleConfig> cs{ParticleConfig(t, bits)};
    const auto m = collect_marginal(cs, 0);
    CHECK(m.total == 8);
    CHECK(m.counts[1] == 4);
    const auto e = tv_to_product(m, 0.5, 0);
    CHECK(e.tv == doctest::Approx(0.0));
    CHECK(tv_to_product(m, 0.25, 0).tv == doctest::Approx(0.25));
}

TEST_CASE("total variation trivial cases") {
    const std::vector<double> a = {0.5, 0.5, 0.0};
    const std::vector<double> b = {0.0, 0.0, 1.0};
    CHECK(plug_in_tv(a, a) == 0.0);
    CHECK(plug_in_tv(a, b) == doctest::Approx(1.0));
    const std::vector<double> c = {0.25, 0.75};
    CHECK_THROWS_AS((void)plug_in_tv(a, c), ParameterError);
}

TEST_CASE("pooled and single-centre marginals") {
    CounterRng rng(8);
    std::vector<ParticleConfig> cs;
    for (int i = 0; i < 50; ++i) cs.push_back(bernoulli_config(Torus(1, 16), 0.4, rng));
    const auto pooled = collect_marginal(cs, 1, true);
    const auto single = collect_marginal(cs, 1, false);
    CHECK(pooled.total == 50 * 16);
    CHECK(single.total == 50);
    CHECK(pooled.configs() == 50);
    CHECK(single.configs() == 50);
    // The single-centre histogram counts the patterns at site 0 only.
    const Box box(1, 1);
    std::vector<std::uint64_t> ref(8, 0);
    for (const auto& c : cs) ref[project_box(c, box, 0)] += 1;
    CHECK(single.counts == ref);
    auto copy = pooled;
    CHECK_THROWS_AS(copy.merge(single), ParameterError);
}

TEST_CASE("merge is associative and adds counts") {
    CounterRng rng(9);
    auto draw = [&] {
        std::vector<ParticleConfig> cs;
        for (int i = 0; i < 5; ++i) cs.push_back(bernoulli_config(Torus(2, 6), 0.5, rng));
        return collect_marginal(cs, 1);
    };
    const auto a = draw(), b = draw(), c = draw();
    auto ab_c = a;
    ab_c.merge(b).merge(c);
    auto bc = b;
    bc.merge(c);
    auto a_bc = a;
    a_bc.merge(bc);
    CHECK(ab_c.counts == a_bc.counts);
    CHECK(ab_c.config_counts == a_bc.config_counts);
    CHECK(ab_c.total == a.total + b.total + c.total);
    ab_c.validate();
    auto bad = empty_marginal(2, 7, 1);
    CHECK_THROWS_AS(bad.merge(a), ParameterError);
}

TEST_CASE("guards") {
    CHECK_THROWS_AS((void)empty_marginal(1, 3, 1), SizeError);
    CHECK_THROWS_AS((void)empty_marginal(3, 16, 1), SizeError);
    CHECK_NOTHROW((void)empty_marginal(2, 4, 1));
    auto m = empty_marginal(1, 8, 1);
    m.total = 3;
    CHECK_THROWS_AS(m.validate(), ConsistencyError);
    CHECK_THROWS_AS((void)tv_to_product(empty_marginal(1, 8, 1), 0.5), ParameterError);
}

TEST_CASE("independent product samples sit at the bias floor") {
    CounterRng rng(10);
    std::vector<ParticleConfig> cs;
    for (int i = 0; i < 200; ++i) cs.push_back(bernoulli_config(Torus(1, 256), 0.3, rng));
    const auto m = collect_marginal(cs, 1);
    const auto e = tv_to_product(m, 0.3, 100, 2);
    CHECK(e.effective_samples > 0.5 * 200 * 256);
    CHECK(e.tv < 2.0 * e.bias_floor + 3 * e.error);
    CHECK(e.error > 0.0);
    const auto far = tv_to_product(m, 0.5, 0);
    CHECK(far.tv == doctest::Approx(plug_in_tv(product_marginal(1, 1, 0.3), product_marginal(1, 1, 0.5))).epsilon(0.05));
}

TEST_CASE("Pinsker inequality") {
    CounterRng rng(11);
    for (int i = 0; i < 200; ++i) {
        std::vector<double> f(8), g(8);
        double sf = 0, sg = 0;
        for (int p = 0; p < 8; ++p) {
            f[p] = rng.uniform() * (rng.uniform() < 0.3 ? 0.0 : 1.0);
            g[p] = 0.01 + rng.uniform();
            sf += f[p];
            sg += g[p];
        }
        if (sf == 0) continue;
        for (int p = 0; p < 8; ++p) {
            f[p] /= sf;
            g[p] /= sg;
        }
        CHECK(pinsker_audit(f, g).passed);
    }
    const std::vector<double> z = {0.0, 1.0};
    CHECK_THROWS_AS((void)pinsker_audit(z, z), ParameterError);
}

}
