#include <cmath>
#include <map>

#include "doctest.h"
#include "rdness/error.hpp"
#include "rdness/exact.hpp"
#include "rdness/rng.hpp"
#include "rdness/simulate.hpp"

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

// Independent ring generator for d = 1, n >= 3: states are bit masks, site x is bit x.
std::map<std::pair<unsigned, unsigned>, double> ring_rates(const ModelParams& p) {
    const int n = p.n;
    std::map<std::pair<unsigned, unsigned>, double> q;
    for (unsigned s = 0; s < (1u << n); ++s) {
        auto bit = [&](int x) { return (s >> (((x % n) + n) % n)) & 1u; };
        for (int x = 0; x < n; ++x) {
            const int y = (x + 1) % n;
            if (bit(x) != bit(y)) q[{s, s ^ (1u << x) ^ (1u << y)}] += double(n) * n;
            const double c = bit(x) ? p.b : (p.a + p.lambda / 2.0 * (bit(x - 1) + bit(x + 1)));
            q[{s, s ^ (1u << x)}] += c;
        }
    }
    return q;
}

}  // namespace

TEST_SUITE("exact") {

TEST_CASE("generator entries match an independent ring construction") {
    const auto p = params(1, 1.5, 0.4, 1, 3);
    const auto g = build_generator(p);
    CHECK(g.states() == 8);
    CHECK(row_sum_residual(g) < 1e-13);
    const auto dense = g.dense();
    const auto ref = ring_rates(p);
    for (unsigned s = 0; s < 8; ++s)
        for (unsigned t = 0; t < 8; ++t) {
            if (s == t) continue;
            const auto it = ref.find({s, t});
            CHECK(dense(s, t) == doctest::Approx(it == ref.end() ? 0.0 : it->second));
        }
    CHECK_THROWS_AS((void)build_generator(params(1, 1, 0, 1, 17)), SizeError);
}

TEST_CASE("flip part is reversible for lambda = 0 and not otherwise") {
    const auto p = params(1, 2, 0, 1, 4);
    const auto g = build_generator(p, GeneratorPart::Reaction);
    const auto nu = product_measure(g.torus, rho_star(p));
    const auto q = g.dense();
    for (Eigen::Index s = 0; s < q.rows(); ++s)
        for (Eigen::Index t = 0; t < q.cols(); ++t)
            if (s != t) CHECK(nu[s] * q(s, t) == doctest::Approx(nu[t] * q(t, s)).epsilon(1e-12));
    const auto cyc0 = most_irreversible_flip_cycle(build_generator(p));
    CHECK(std::abs(cycle_log_ratio(build_generator(p), cyc0)) < 1e-12);
    const auto g1 = build_generator(params(1, 2, 0.5, 1, 4));
    CHECK(std::abs(cycle_log_ratio(g1, most_irreversible_flip_cycle(g1))) > 1e-3);
}

TEST_CASE("stationary law") {
    const auto p = params(1, 1, 0, 1, 4);
    const auto g = build_generator(p);
    const auto pi = stationary_distribution(g);
    for (double v : pi) CHECK(v == doctest::Approx(1.0 / 16).epsilon(1e-12));
    const auto q = params(1, 3, 0, 2, 2);
    const auto gq = build_generator(q);
    CHECK(total_variation(stationary_distribution(gq), product_measure(gq.torus, 0.25)) < 1e-10);
    const auto r = params(1, 1, 0.5, 1, 4);
    const auto gr = build_generator(r);
    const auto pr = stationary_distribution(gr);
    CHECK(stationary_residual(gr, pr) < 1e-12);
    double s = 0.0;
    for (double v : pr) s += v;
    CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("adjoint of one: routes agree and ordered pairs are counted") {
    CHECK(adjoint_one(params(1, 1, 0.4, 1, 3)).max_residual < 1e-12);
    for (auto [d, n] : {std::pair{1, 4}, std::pair{2, 2}, std::pair{1, 3}, std::pair{2, 3}}) {
        const auto p = params(1.2, 0.8, 0.7, d, n);
        const auto r = adjoint_one(p);
        const double rho = rho_star(p);
        const std::size_t all = r.closed_form.size() - 1;
        const double sites = std::pow(double(n), d);
        // Every site has 2d ordered neighbour slots.
        CHECK(r.closed_form[all] == doctest::Approx(p.lambda / (2 * d * rho) * (2 * d * sites) * (1 - rho) * (1 - rho)).epsilon(1e-12));
        CHECK(r.density_ratio[all] == doctest::Approx(r.closed_form[all]).epsilon(1e-12));
    }
    const auto z = adjoint_one(params(1, 2, 0, 1, 4));
    for (double v : z.closed_form) CHECK(v == 0.0);
    for (double v : z.matrix) CHECK(std::abs(v) < 1e-12);
}

TEST_CASE("adjoint of one from an independent ring generator") {
    const auto p = params(0.9, 1.3, -0.4, 1, 4);
    const auto ref = ring_rates(p);
    const double rho = rho_star(p);
    const auto nu = product_measure(Torus(1, 4), rho);
    std::vector<double> lstar(16, 0.0);
    for (const auto& [key, rate] : ref) lstar[key.second] += nu[key.first] * rate / nu[key.second];
    for (unsigned s = 0; s < 16; ++s) {
        double out = 0.0;
        for (const auto& [key, rate] : ref)
            if (key.first == s) out += rate;
        lstar[s] -= out;
    }
    const auto r = adjoint_one(p);
    for (unsigned s = 0; s < 16; ++s) CHECK(r.closed_form[s] == doctest::Approx(lstar[s]).epsilon(1e-11));
}

TEST_CASE("carre du champ") {
    const auto p = params(1, 1, 0.3, 1, 3);
    const auto g = build_generator(p);
    std::vector<double> one(8, 2.5);
    for (double v : carre_du_champ(g, one)) CHECK(std::abs(v) < 1e-12);
    CounterRng rng(21);
    std::vector<double> f(8);
    for (auto& v : f) v = rng.normal();
    const auto full = carre_du_champ(f, GeneratorPart::Full, p);
    const auto ex = carre_du_champ(f, GeneratorPart::Exchange, p);
    const auto re = carre_du_champ(f, GeneratorPart::Reaction, p);
    const auto jump = carre_du_champ_jump(g, f);
    for (int s = 0; s < 8; ++s) {
        CHECK(full[s] == doctest::Approx(ex[s] + re[s]).epsilon(1e-12));
        CHECK(full[s] == doctest::Approx(jump[s]).epsilon(1e-12));
    }
    std::vector<double> sq(8);
    for (int s = 0; s < 8; ++s) sq[s] = std::sqrt(std::abs(f[s]) + 0.1);
    for (double v : carre_du_champ(g, sq)) CHECK(v >= -1e-12);
}

TEST_CASE("carre du champ of the fluctuation field") {
    const auto p = params(1, 1, 0.5, 1, 4);
    const auto g = build_generator(p);
    const double rho = rho_star(p);
    const Torus t(1, 4);
    CounterRng rng(22);
    for (int rep = 0; rep < 5; ++rep) {
        std::vector<double> gx(4);
        for (auto& v : gx) v = rng.normal();
        std::vector<double> X(16);
        for (std::size_t s = 0; s < 16; ++s) {
            const auto eta = ParticleConfig::from_code(t, s);
            for (int x = 0; x < 4; ++x) X[s] += (eta.get(x) - rho) * gx[x] / 2.0;
        }
        const auto gam = carre_du_champ(g, X);
        for (std::size_t s = 0; s < 16; ++s) {
            const auto eta = ParticleConfig::from_code(t, s);
            // n^{-d} [ n^2 sum_{edges} (eta_x - eta_y)^2 (g_x - g_y)^2 + sum_x c_x g_x^2 ]
            double expect = 0.0;
            for (int x = 0; x < 4; ++x) {
                const int y = (x + 1) % 4;
                const double de = double(eta.get(x)) - double(eta.get(y));
                expect += 16.0 * de * de * (gx[x] - gx[y]) * (gx[x] - gx[y]);
                expect += reaction_rate(eta, x, p) * gx[x] * gx[x];
            }
            CHECK(gam[s] == doctest::Approx(expect / 4.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("relative entropy and total variation") {
    const Torus t(1, 3);
    const auto mu = product_measure(t, 0.3);
    const auto nu = product_measure(t, 0.6);
    const double kl1 = 0.3 * std::log(0.3 / 0.6) + 0.7 * std::log(0.7 / 0.4);
    CHECK(relative_entropy(mu, nu) == doctest::Approx(3 * kl1).epsilon(1e-12));
    CHECK(relative_entropy(mu, mu) == 0.0);
    std::vector<double> point(8, 0.0);
    point[3] = 1.0;
    std::vector<double> miss(8, 1.0 / 7);
    miss[3] = 0.0;
    CHECK(std::isinf(relative_entropy(point, miss)));
    CHECK(2 * std::pow(total_variation(mu, nu), 2) <= relative_entropy(mu, nu));
}

TEST_CASE("stationary entropy shrinks with lambda") {
    double prev = 1.0;
    for (double lambda : {0.3, 0.1, 0.01}) {
        const auto p = params(1, 1, lambda, 1, 4);
        const auto g = build_generator(p);
        const double h = relative_entropy(stationary_distribution(g), product_measure(g.torus, rho_star(p)));
        CHECK(std::isfinite(h));
        CHECK(h < prev);
        prev = h;
    }
}

TEST_CASE("Yau inequality") {
    const double times[] = {0.01, 0.1, 1.0};
    const auto r = yau_inequality_check(params(1, 1, 0.3, 1, 3), times);
    CHECK(r.passed);
    CHECK(r.max_fd_error < 1e-6);
    for (const auto& pt : r.points) CHECK(pt.slack >= -1e-6);
    const auto z = yau_inequality_check(params(1, 1, 0, 1, 3), times);
    for (const auto& pt : z.points) {
        CHECK(std::abs(pt.entropy) < 1e-12);
        CHECK(std::abs(pt.source) < 1e-12);
    }
}

TEST_CASE("entropy inequality") {
    const auto nu = product_measure(Torus(1, 3), 0.4);
    std::vector<double> one(8, 1.0);
    CounterRng rng(31);
    std::vector<double> h(8);
    for (auto& v : h) v = rng.normal();
    CHECK(entropy_inequality_check(h, one, 0.7, nu).passed);
    std::vector<double> c(8, 1.3);
    const auto f = random_density(nu, 3, 5);
    const auto eq = entropy_inequality_check(c, f, 2.0, nu);
    CHECK(eq.rhs - eq.lhs == doctest::Approx(density_entropy(f, nu) / 2.0).epsilon(1e-9));
    int failures = 0;
    for (int i = 0; i < 1000; ++i) {
        const auto fi = random_density(nu, i, 7);
        for (auto& v : h) v = 3 * rng.normal();
        if (!entropy_inequality_check(h, fi, 0.05 + 3 * rng.uniform(), nu).passed) ++failures;
    }
    CHECK(failures == 0);
}

TEST_CASE("log-Sobolev inequality") {
    const auto r = log_sobolev_check(params(1, 1, 0, 1, 3), 2000, 3);
    CHECK(r.passed);
    CHECK(r.violations == 0);
    CHECK(r.worst_ratio <= r.kappa);
    CHECK(r.kappa == doctest::Approx(1.0));
    const auto g = build_generator(params(1, 1, 0.3, 1, 3), GeneratorPart::Reaction);
    const auto nu = product_measure(g.torus, rho_star(g.params));
    std::vector<double> one(8, 1.0);
    const auto t = log_sobolev_terms(g, one, nu);
    CHECK(std::abs(t.entropy) < 1e-14);
    CHECK(std::abs(t.dirichlet) < 1e-14);
    // Near point mass.
    std::vector<double> spike(8, 1e-6);
    spike[5] = 1.0;
    double z = 0.0;
    for (int s = 0; s < 8; ++s) z += spike[s] * nu[s];
    for (auto& v : spike) v /= z;
    const auto ts = log_sobolev_terms(g, spike, nu);
    CHECK(ts.entropy <= fixed_point(g.params).kappa * ts.dirichlet + 1e-10);
}

}
