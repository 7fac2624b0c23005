#include <cmath>
#include <filesystem>
#include <random>

#include "doctest.h"
#include "rdness/error.hpp"
#include "rdness/io.hpp"
#include "rdness/rng.hpp"
#include "rdness/stats.hpp"

using namespace rdness;

TEST_SUITE("support") {

TEST_CASE("digests") {
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(git_blob_sha1("hello\n") == "ce013625030ba8dba906f756967f9e9ca394464a");
    CHECK(git_blob_sha1("") == "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
}

TEST_CASE("csv writer") {
    const auto dir = std::filesystem::temp_directory_path() / "rdness_support_test";
    std::filesystem::create_directories(dir);
    const auto path = dir / "t.csv";
    {
        CsvWriter w(path, {"a", "b", "c"});
        w.field(1).field(0.5).field("x");
        w.end_row();
        w.field(true);
        CHECK_THROWS_AS(w.end_row(), IoError);
    }
    CHECK(read_file(path).rfind("a,b,c\n1,0.5,x\n", 0) == 0);
    CHECK(sha256_file(path) == sha256_hex(read_file(path)));
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(std::nan("")) == "nan");
    CHECK(format_double(-INFINITY) == "-inf");
    std::filesystem::remove_all(dir);
}

TEST_CASE("moments and fits") {
    const std::vector<double> x = {1, 2, 3, 4};
    CHECK(mean(x) == doctest::Approx(2.5));
    CHECK(variance(x) == doctest::Approx(5.0 / 3.0));
    const std::vector<double> y = {3, 5, 7, 9};
    const auto f = linear_fit(x, y);
    CHECK(f.slope == doctest::Approx(2.0));
    CHECK(f.intercept == doctest::Approx(1.0));
    CHECK(f.r2 == doctest::Approx(1.0));
    const std::vector<double> sig = {1, 1, 1, 1};
    CHECK(weighted_linear_fit(x, y, sig).slope == doctest::Approx(2.0));
    // A point with a huge error bar carries no weight.
    const std::vector<double> y2 = {3, 5, 7, 100};
    const std::vector<double> sig2 = {1, 1, 1, 1e6};
    CHECK(weighted_linear_fit(x, y2, sig2).slope == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(batch_means(x, 3) == std::vector<double>{2.0});
}

TEST_CASE("integrated autocorrelation time of AR(1)") {
    // phi = 0.5 gives tau = (1 + phi) / (1 - phi) = 3.
    CounterRng rng(1);
    std::vector<double> s(400000);
    double v = 0.0;
    for (auto& e : s) {
        v = 0.5 * v + rng.normal();
        e = v;
    }
    CHECK(integrated_autocorr_time(s) == doctest::Approx(3.0).epsilon(0.05));
    const auto r = autocorrelation(s, 3);
    CHECK(r[0] == doctest::Approx(1.0));
    CHECK(r[1] == doctest::Approx(0.5).epsilon(0.02));
    CHECK(r[2] == doctest::Approx(0.25).epsilon(0.05));
    const std::vector<double> flat(10, 2.0);
    CHECK(integrated_autocorr_time(flat) == 1.0);
}

TEST_CASE("bootstrap standard deviation of a mean") {
    CounterRng rng(2);
    std::vector<double> x(400);
    for (auto& e : x) e = rng.normal();
    const double sd = bootstrap_sd(x.size(), 2000, 3, [&](std::span<const std::size_t> idx) {
        double s = 0.0;
        for (auto i : idx) s += x[i];
        return s / idx.size();
    });
    CHECK(sd == doctest::Approx(std::sqrt(variance(x) / 400.0)).epsilon(0.1));
}

TEST_CASE("counter generator") {
    CounterRng a(5), b(5);
    for (int i = 0; i < 10; ++i) CHECK(a() == b());
    CounterRng c(5, 3);
    CounterRng d(5);
    d();
    d();
    d();
    CHECK(c() == d());
    CHECK(CounterRng::for_replica(1, 0)() != CounterRng::for_replica(1, 1)());
    CounterRng r(6);
    double m = 0.0, m2 = 0.0, e = 0.0;
    const int n = 200000;
    std::vector<int> hist(7, 0);
    for (int i = 0; i < n; ++i) {
        const double z = r.normal();
        m += z;
        m2 += z * z;
        e += r.exponential(2.0);
        const double u = r.uniform();
        if (u < 0.0 || u >= 1.0) e = NAN;
        hist[r.below(7)] += 1;
    }
    CHECK(std::abs(m / n) < 0.015);
    CHECK(m2 / n == doctest::Approx(1.0).epsilon(0.02));
    CHECK(e / n == doctest::Approx(0.5).epsilon(0.02));
    for (int h : hist) CHECK(std::abs(h - n / 7.0) < 5 * std::sqrt(n / 7.0));
    std::uniform_int_distribution<int> dist(0, 9);
    CHECK(dist(r) <= 9);
    KahanSum k;
    for (int i = 0; i < 10000000; ++i) k.add(1e-7);
    CHECK(k.value() == doctest::Approx(1.0).epsilon(1e-14));
}

}
