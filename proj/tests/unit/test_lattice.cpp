#include <algorithm>
#include <set>
#include <sstream>

#include "doctest.h"
#include "rdness/error.hpp"
#include "rdness/lattice.hpp"
#include "rdness/rng.hpp"

using namespace rdness;

namespace {

ParticleConfig random_config(const Torus& t, CounterRng& rng) {
    ParticleConfig eta(t);
    for (std::size_t x = 0; x < t.site_count(); ++x) eta.set(x, rng.uniform() < 0.5);
    return eta;
}

}  // namespace

TEST_SUITE("lattice") {

TEST_CASE("neighbours wrap periodically") {
    const Torus t1(1, 4);
    std::set<std::size_t> n1;
    for (const auto& y : t1.neighbors(t1.index(std::size_t{0}))) n1.insert(y.linear);
    CHECK(n1 == std::set<std::size_t>{1, 3});

    const Torus t2(2, 3);
    const int origin[] = {0, 0};
    std::set<std::pair<int, int>> n2;
    for (const auto& y : t2.neighbors(t2.index(origin))) n2.insert({y.coords[0], y.coords[1]});
    CHECK(n2 == std::set<std::pair<int, int>>{{1, 0}, {2, 0}, {0, 1}, {0, 2}});

    const Torus t3(3, 5);
    const int c[] = {4, 0, 2};
    const auto x = t3.index(c);
    const auto nb = t3.neighbors(x);
    REQUIRE(nb.size() == 6);
    for (const auto& y : nb) {
        int differing = 0;
        for (int i = 0; i < 3; ++i) {
            const int diff = (y.coords[i] - x.coords[i] + 5) % 5;
            if (diff != 0) {
                ++differing;
                CHECK((diff == 1 || diff == 4));
            }
        }
        CHECK(differing == 1);
    }
}

TEST_CASE("n = 2 keeps 2d neighbour slots") {
    const Torus t(2, 2);
    CHECK(t.neighbors(t.index(std::size_t{0})).size() == 4);
    CHECK(t.edge_count() == 8);
}

TEST_CASE("linear index is row-major with axis 0 fastest") {
    const Torus t(3, 5);
    const int c[] = {1, 2, 3};
    CHECK(t.index(c).linear == 1 + 5 * 2 + 25 * 3);
    const auto back = t.index(std::size_t{1 + 5 * 2 + 25 * 3});
    CHECK(back.coords[0] == 1);
    CHECK(back.coords[1] == 2);
    CHECK(back.coords[2] == 3);
}

TEST_CASE("flip and exchange are involutions") {
    CounterRng rng(5);
    const Torus t(2, 6);
    for (int rep = 0; rep < 20; ++rep) {
        auto eta = random_config(t, rng);
        const auto orig = eta;
        const auto x = rng.below(t.site_count());
        const auto y = rng.below(t.site_count());
        eta.flip(x);
        CHECK(eta != orig);
        eta.flip(x);
        CHECK(eta == orig);
        const std::size_t count = eta.particle_count();
        eta.exchange(x, y);
        CHECK(eta.particle_count() == count);
        eta.exchange(x, y);
        CHECK(eta == orig);
    }
}

TEST_CASE("translation is a group action") {
    CounterRng rng(6);
    const Torus t(2, 4);
    const auto eta = random_config(t, rng);
    for (std::size_t x = 0; x < t.site_count(); ++x) {
        CHECK(eta.translated(x).get(0) == eta.get(x));
        for (std::size_t y = 0; y < t.site_count(); ++y) CHECK(eta.translated(y).translated(x) == eta.translated(t.add(x, y)));
    }
}

TEST_CASE("box projection reads through the wrap") {
    const Torus t(1, 5);
    const std::uint8_t bits[] = {1, 0, 1, 1, 0};
    const ParticleConfig eta(t, bits);
    const Box box(1, 1);
    // Offsets -1, 0, +1 are bits 0, 1, 2: (eta_4, eta_0, eta_1) = (0, 1, 0).
    CHECK(project_box(eta, box, 0) == 0b010);
    CHECK(project_box(eta, Box(1, 0), 2) == 1);
    CHECK_THROWS_AS((void)project_box(eta, Box(1, 2), 0), SizeError);
}

TEST_CASE("box projection commutes with translation") {
    CounterRng rng(7);
    for (int d = 1; d <= 3; ++d) {
        const Torus t(d, d == 3 ? 5 : 7);
        const Box box(d, 1);
        for (int rep = 0; rep < 10; ++rep) {
            const auto eta = random_config(t, rng);
            const auto x = rng.below(t.site_count());
            // Oracle: read each offset by coordinate arithmetic.
            std::uint64_t expect = 0;
            const auto cx = t.index(x);
            for (std::size_t j = 0; j < box.size(); ++j) {
                int c[3] = {0, 0, 0};
                for (int i = 0; i < d; ++i) c[i] = ((cx.coords[i] + box.offset(j)[i]) % t.side() + t.side()) % t.side();
                if (eta.get(t.index(std::span<const int>(c, d)).linear)) expect |= std::uint64_t{1} << j;
            }
            CHECK(project_box(eta, box, x) == expect);
            CHECK(project_box(eta.translated(x), box, 0) == expect);
        }
    }
}

TEST_CASE("snapshot round trip and layout") {
    CounterRng rng(8);
    const Torus t(2, 9);
    Snapshot s{random_config(t, rng), 12.5};
    std::stringstream buf;
    write_snapshot(buf, s);
    const std::string bytes = buf.str();
    CHECK(bytes.substr(0, 8) == "RDNSNAP1");
    CHECK(bytes.size() == 40 + 8 * ((81 + 63) / 64));
    const auto r = read_snapshot(buf);
    CHECK(r.config == s.config);
    CHECK(r.time == 12.5);
    std::stringstream bad("NOTASNAP");
    CHECK_THROWS_AS((void)read_snapshot(bad), IoError);
}

TEST_CASE("invalid tori are rejected") {
    CHECK_THROWS((void)Torus(0, 4));
    CHECK_THROWS((void)Torus(4, 4));
    CHECK_THROWS((void)Torus(1, 1));
}

}
