#include "rdness/exact.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <Eigen/SparseLU>

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

#include "rdness/error.hpp"
#include "rdness/rng.hpp"

namespace rdness {

namespace {

double rate_from_code(std::uint64_t code, std::size_t x, const ModelParams& p, std::span<const std::uint32_t> nbr) {
    if ((code >> x) & 1u) return p.b;
    const std::size_t deg = 2 * static_cast<std::size_t>(p.d);
    int occupied = 0;
    for (std::size_t j = 0; j < deg; ++j) occupied += static_cast<int>((code >> nbr[x * deg + j]) & 1u);
    return p.a + p.lambda / static_cast<double>(deg) * occupied;
}

void check_states(const GeneratorMatrix& g, std::size_t size, const char* what) {
    if (size != g.states()) throw SizeError(std::string(what) + ": vector length != number of states");
}

double plogq(double mu, double log_mu_over_nu) { return mu > 0.0 ? mu * log_mu_over_nu : 0.0; }

}  // namespace

Eigen::MatrixXd GeneratorMatrix::dense() const {
    if (states() > kExactMaxDenseStates) throw SizeError("GeneratorMatrix::dense: state space too large");
    return Eigen::MatrixXd(q);
}

GeneratorMatrix build_generator(const ModelParams& p, GeneratorPart part) {
    p.validate();
    const Torus t(p.d, p.n);
    if (t.site_count() > kExactMaxSites) throw SizeError("build_generator: more than 16 sites");
    const std::size_t sites = t.site_count();
    const std::size_t states = std::size_t{1} << sites;
    const auto nbr = t.neighbor_table();
    const double n2 = static_cast<double>(p.n) * p.n;

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(states * (sites * static_cast<std::size_t>(p.d) + sites + 1));
    for (std::size_t s = 0; s < states; ++s) {
        double out = 0.0;
        if (part != GeneratorPart::Reaction) {
            for (std::size_t e = 0; e < t.edge_count(); ++e) {
                const std::size_t x = t.edge_tail(e);
                const std::size_t y = t.edge_head(e);
                if (((s >> x) & 1u) == ((s >> y) & 1u)) continue;
                trip.emplace_back(static_cast<int>(s), static_cast<int>(s ^ (std::size_t{1} << x) ^ (std::size_t{1} << y)), n2);
                out += n2;
            }
        }
        if (part != GeneratorPart::Exchange) {
            for (std::size_t x = 0; x < sites; ++x) {
                const double c = rate_from_code(s, x, p, nbr);
                trip.emplace_back(static_cast<int>(s), static_cast<int>(s ^ (std::size_t{1} << x)), c);
                out += c;
            }
        }
        trip.emplace_back(static_cast<int>(s), static_cast<int>(s), -out);
    }
    GeneratorMatrix g;
    g.params = p;
    g.torus = t;
    g.part = part;
    g.q.resize(static_cast<Eigen::Index>(states), static_cast<Eigen::Index>(states));
    g.q.setFromTriplets(trip.begin(), trip.end());
    g.q.makeCompressed();
    return g;
}

double row_sum_residual(const GeneratorMatrix& g) {
    double worst = 0.0;
    for (Eigen::Index r = 0; r < g.q.outerSize(); ++r) {
        double s = 0.0;
        for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(g.q, r); it; ++it) s += it.value();
        worst = std::max(worst, std::abs(s));
    }
    return worst;
}

Distribution stationary_distribution(const GeneratorMatrix& g) {
    const auto n = static_cast<Eigen::Index>(g.states());
    const Eigen::Index last = n - 1;
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(g.q.nonZeros()) + static_cast<std::size_t>(n));
    for (Eigen::Index r = 0; r < g.q.outerSize(); ++r)
        for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(g.q, r); it; ++it)
            if (it.col() != last) trip.emplace_back(it.col(), it.row(), it.value());
    for (Eigen::Index j = 0; j < n; ++j) trip.emplace_back(last, j, 1.0);
    Eigen::SparseMatrix<double> a(n, n);
    a.setFromTriplets(trip.begin(), trip.end());
    a.makeCompressed();
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(a);
    if (lu.info() != Eigen::Success) throw NumericalError("stationary_distribution: singular system (reducible generator?)");
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
    rhs(last) = 1.0;
    const Eigen::VectorXd pi = lu.solve(rhs);
    if (lu.info() != Eigen::Success || !pi.allFinite()) throw NumericalError("stationary_distribution: solve failed");
    Distribution out(pi.data(), pi.data() + n);
    for (double& v : out) {
        if (v < -1e-12) throw NumericalError("stationary_distribution: negative mass beyond round-off");
        v = std::max(v, 0.0);
    }
    return out;
}

double stationary_residual(const GeneratorMatrix& g, const Distribution& pi) {
    check_states(g, pi.size(), "stationary_residual");
    const Eigen::Map<const Eigen::VectorXd> v(pi.data(), static_cast<Eigen::Index>(pi.size()));
    const Eigen::VectorXd r = g.q.transpose() * v;
    return r.cwiseAbs().maxCoeff();
}

std::vector<double> log_product_measure(const Torus& t, double rho) {
    if (!(rho > 0.0 && rho < 1.0)) throw DomainError("product_measure: density must lie in (0,1)");
    if (t.site_count() > kExactMaxSites) throw SizeError("product_measure: more than 16 sites");
    const std::size_t sites = t.site_count();
    const std::size_t states = std::size_t{1} << sites;
    const double l1 = std::log(rho);
    const double l0 = std::log1p(-rho);
    std::vector<double> out(states);
    for (std::size_t s = 0; s < states; ++s) {
        const int ones = std::popcount(s);
        out[s] = ones * l1 + (static_cast<int>(sites) - ones) * l0;
    }
    return out;
}

Distribution product_measure(const Torus& t, double rho) {
    auto out = log_product_measure(t, rho);
    for (double& v : out) v = std::exp(v);
    return out;
}

StateFunction apply_generator(const GeneratorMatrix& g, std::span<const double> f) {
    check_states(g, f.size(), "apply_generator");
    const Eigen::Map<const Eigen::VectorXd> v(f.data(), static_cast<Eigen::Index>(f.size()));
    const Eigen::VectorXd r = g.q * v;
    return {r.data(), r.data() + r.size()};
}

double expectation(std::span<const double> mu, std::span<const double> f) {
    if (mu.size() != f.size()) throw SizeError("expectation: length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i) s += mu[i] * f[i];
    return s;
}

AdjointReport adjoint_one(const ModelParams& p, double tolerance) {
    const auto g = build_generator(p, GeneratorPart::Full);
    const auto fp = fixed_point(p);
    const double rho = fp.rho;
    const auto& t = g.torus;
    const std::size_t sites = t.site_count();
    const std::size_t states = g.states();
    const auto nbr = t.neighbor_table();
    const std::size_t deg = 2 * static_cast<std::size_t>(p.d);
    const auto lognu = log_product_measure(t, rho);

    AdjointReport r;
    r.density_ratio.assign(states, 0.0);
    r.closed_form.assign(states, 0.0);
    r.matrix.assign(states, 0.0);
    const double up = rho / (1.0 - rho);    // nu(eta^x)/nu(eta) when eta_x = 0
    const double down = (1.0 - rho) / rho;  // ... when eta_x = 1
    const double coef = p.lambda / (2.0 * p.d * rho);
    for (std::size_t s = 0; s < states; ++s) {
        double dr = 0.0;
        double cf = 0.0;
        for (std::size_t x = 0; x < sites; ++x) {
            const bool occ = (s >> x) & 1u;
            const std::size_t flipped = s ^ (std::size_t{1} << x);
            dr += rate_from_code(flipped, x, p, nbr) * (occ ? down : up) - rate_from_code(s, x, p, nbr);
            const double ex = (occ ? 1.0 : 0.0) - rho;
            for (std::size_t j = 0; j < deg; ++j) {
                const double ey = (((s >> nbr[x * deg + j]) & 1u) ? 1.0 : 0.0) - rho;
                cf += ex * ey;
            }
        }
        r.density_ratio[s] = dr;
        r.closed_form[s] = coef * cf;
    }
    // (Q^T nu)(eta)/nu(eta) = sum_xi Q(xi, eta) nu(xi)/nu(eta).
    for (Eigen::Index row = 0; row < g.q.outerSize(); ++row)
        for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(g.q, row); it; ++it) {
            const auto xi = static_cast<std::size_t>(it.row());
            const auto eta = static_cast<std::size_t>(it.col());
            r.matrix[eta] += it.value() * std::exp(lognu[xi] - lognu[eta]);
        }
    for (std::size_t s = 0; s < states; ++s) {
        r.max_residual = std::max({r.max_residual, std::abs(r.density_ratio[s] - r.closed_form[s]),
                                   std::abs(r.density_ratio[s] - r.matrix[s]), std::abs(r.closed_form[s] - r.matrix[s])});
    }
    if (!(r.max_residual <= tolerance))
        throw ConsistencyError("adjoint_one: computation routes disagree (residual " + std::to_string(r.max_residual) + ")");
    return r;
}

StateFunction carre_du_champ(const GeneratorMatrix& g, std::span<const double> f) {
    check_states(g, f.size(), "carre_du_champ");
    std::vector<double> f2(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) f2[i] = f[i] * f[i];
    const auto lf2 = apply_generator(g, f2);
    const auto lf = apply_generator(g, f);
    StateFunction out(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) out[i] = lf2[i] - 2.0 * f[i] * lf[i];
    return out;
}

StateFunction carre_du_champ(std::span<const double> f, GeneratorPart which, const ModelParams& p) {
    return carre_du_champ(build_generator(p, which), f);
}

StateFunction carre_du_champ_jump(const GeneratorMatrix& g, std::span<const double> f) {
    check_states(g, f.size(), "carre_du_champ_jump");
    StateFunction out(f.size(), 0.0);
    for (Eigen::Index row = 0; row < g.q.outerSize(); ++row)
        for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(g.q, row); it; ++it) {
            if (it.row() == it.col()) continue;
            const double diff = f[static_cast<std::size_t>(it.col())] - f[static_cast<std::size_t>(it.row())];
            out[static_cast<std::size_t>(row)] += it.value() * diff * diff;
        }
    return out;
}

double relative_entropy(std::span<const double> mu, std::span<const double> nu) {
    if (mu.size() != nu.size()) throw SizeError("relative_entropy: length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i) {
        if (mu[i] <= 0.0) continue;
        if (nu[i] <= 0.0) return std::numeric_limits<double>::infinity();
        s += mu[i] * std::log(mu[i] / nu[i]);
    }
    return s;
}

double total_variation(std::span<const double> mu, std::span<const double> nu) {
    if (mu.size() != nu.size()) throw SizeError("total_variation: length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i) s += std::abs(mu[i] - nu[i]);
    return 0.5 * s;
}

double cycle_log_ratio(const GeneratorMatrix& g, std::span<const std::size_t> cycle) {
    if (cycle.size() < 2) throw ParameterError("cycle_log_ratio: need at least two states");
    double fwd = 0.0;
    double bwd = 0.0;
    for (std::size_t i = 0; i < cycle.size(); ++i) {
        const auto a = static_cast<Eigen::Index>(cycle[i]);
        const auto b = static_cast<Eigen::Index>(cycle[(i + 1) % cycle.size()]);
        const double qf = g.q.coeff(a, b);
        const double qb = g.q.coeff(b, a);
        if (!(qf > 0.0) || !(qb > 0.0)) throw ParameterError("cycle_log_ratio: path uses a zero-rate transition");
        fwd += std::log(qf);
        bwd += std::log(qb);
    }
    return fwd - bwd;
}

std::vector<std::size_t> most_irreversible_flip_cycle(const GeneratorMatrix& g) {
    if (g.part == GeneratorPart::Exchange) throw ParameterError("most_irreversible_flip_cycle: generator has no flips");
    const auto& t = g.torus;
    std::vector<std::size_t> best;
    double best_val = -1.0;
    for (std::size_t s = 0; s < g.states(); ++s)
        for (std::size_t e = 0; e < t.edge_count(); ++e) {
            const std::size_t bx = std::size_t{1} << t.edge_tail(e);
            const std::size_t by = std::size_t{1} << t.edge_head(e);
            const std::vector<std::size_t> cyc{s, s ^ bx, s ^ bx ^ by, s ^ by};
            const double v = std::abs(cycle_log_ratio(g, cyc));
            if (v > best_val) {
                best_val = v;
                best = cyc;
            }
        }
    return best;
}

namespace {

double entropy_of(const Eigen::VectorXd& mu, std::span<const double> lognu) {
    double h = 0.0;
    for (Eigen::Index i = 0; i < mu.size(); ++i) {
        const double m = std::max(mu(i), 0.0);
        h += plogq(m, m > 0.0 ? std::log(m) - lognu[static_cast<std::size_t>(i)] : 0.0);
    }
    return h;
}

}  // namespace

YauReport yau_inequality_check(const ModelParams& p, std::span<const double> times, double limit_time,
                               double slack_tol, double limit_tol) {
    const auto g = build_generator(p, GeneratorPart::Full);
    if (g.states() > 1024) throw SizeError("yau_inequality_check: more than 10 sites");
    const Eigen::MatrixXd q = g.dense();
    const auto fp = fixed_point(p);
    const auto lognu_v = log_product_measure(g.torus, fp.rho);
    const auto nu_v = product_measure(g.torus, fp.rho);
    const auto adj = adjoint_one(p);
    const auto n = static_cast<Eigen::Index>(g.states());
    const Eigen::Map<const Eigen::VectorXd> nu(nu_v.data(), n);

    YauReport rep;
    rep.passed = true;
    const auto pi = stationary_distribution(g);
    rep.stationary_entropy = relative_entropy(pi, nu_v);

    for (double t : times) {
        if (!(t >= 0.0)) throw ParameterError("yau_inequality_check: times must be >= 0");
        YauPoint pt;
        pt.t = t;
        const Eigen::MatrixXd pt_mat = (q * t).exp();
        const Eigen::VectorXd mu = pt_mat.transpose() * nu;
        pt.entropy = entropy_of(mu, lognu_v);

        std::vector<double> logf(static_cast<std::size_t>(n));
        std::vector<double> sqrtf(static_cast<std::size_t>(n));
        for (Eigen::Index i = 0; i < n; ++i) {
            logf[static_cast<std::size_t>(i)] = std::log(std::max(mu(i), std::numeric_limits<double>::min())) -
                                                lognu_v[static_cast<std::size_t>(i)];
            sqrtf[static_cast<std::size_t>(i)] = std::exp(0.5 * logf[static_cast<std::size_t>(i)]);
        }
        const Eigen::VectorXd flux = q.transpose() * mu;  // d mu / dt
        for (Eigen::Index i = 0; i < n; ++i) pt.derivative += flux(i) * logf[static_cast<std::size_t>(i)];

        const double h = std::min(1e-4, std::max(1e-3 * t, 1e-7));
        const Eigen::VectorXd mu_p = (q * h).exp().transpose() * mu;
        const Eigen::VectorXd mu_m = (q * (-h)).exp().transpose() * mu;
        pt.derivative_fd = (entropy_of(mu_p, lognu_v) - entropy_of(mu_m, lognu_v)) / (2.0 * h);

        const auto gam = carre_du_champ_jump(g, sqrtf);
        pt.dissipation = expectation(nu_v, gam);
        for (Eigen::Index i = 0; i < n; ++i) pt.source += mu(i) * adj.matrix[static_cast<std::size_t>(i)];
        pt.slack = -pt.dissipation + pt.source - pt.derivative;
        pt.holds = pt.slack >= -slack_tol;
        rep.passed = rep.passed && pt.holds;
        rep.max_fd_error = std::max(rep.max_fd_error, std::abs(pt.derivative - pt.derivative_fd));
        rep.points.push_back(pt);
    }
    rep.limit_time = limit_time;
    const Eigen::VectorXd mu_inf = (q * limit_time).exp().transpose() * nu;
    rep.limit_entropy = entropy_of(mu_inf, lognu_v);
    rep.limit_error = std::abs(rep.limit_entropy - rep.stationary_entropy);
    rep.passed = rep.passed && rep.limit_error <= limit_tol;
    return rep;
}

double density_entropy(std::span<const double> f, std::span<const double> nu) {
    if (f.size() != nu.size()) throw SizeError("density_entropy: length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i)
        if (f[i] > 0.0) s += nu[i] * f[i] * std::log(f[i]);
    return s;
}

InequalityResult entropy_inequality_check(std::span<const double> h, std::span<const double> f, double gamma,
                                          std::span<const double> nu, double slack) {
    if (!(gamma > 0.0)) throw ParameterError("entropy_inequality_check: gamma must be > 0");
    if (h.size() != nu.size() || f.size() != nu.size()) throw SizeError("entropy_inequality_check: length mismatch");
    InequalityResult r;
    for (std::size_t i = 0; i < h.size(); ++i) r.lhs += h[i] * f[i] * nu[i];
    // log int e^{gamma h} dnu by log-sum-exp.
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < h.size(); ++i)
        if (nu[i] > 0.0) top = std::max(top, gamma * h[i] + std::log(nu[i]));
    double acc = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i)
        if (nu[i] > 0.0) acc += std::exp(gamma * h[i] + std::log(nu[i]) - top);
    const double log_mgf = top + std::log(acc);
    r.rhs = (density_entropy(f, nu) + log_mgf) / gamma;
    r.passed = r.lhs <= r.rhs + slack;
    return r;
}

LogSobolevTerms log_sobolev_terms(const GeneratorMatrix& reaction, std::span<const double> f, std::span<const double> nu) {
    if (reaction.part != GeneratorPart::Reaction) throw ParameterError("log_sobolev_terms: need the reaction generator");
    check_states(reaction, f.size(), "log_sobolev_terms");
    std::vector<double> s(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) s[i] = std::sqrt(std::max(f[i], 0.0));
    LogSobolevTerms t;
    t.entropy = density_entropy(f, nu);
    t.dirichlet = expectation(nu, carre_du_champ_jump(reaction, s));
    return t;
}

StateFunction random_density(std::span<const double> nu, std::uint64_t index, std::uint64_t seed) {
    CounterRng rng(CounterRng::mix(seed ^ 0x10C50B0Cull) + index * 0x9E3779B97F4A7C15ull);
    const std::size_t n = nu.size();
    StateFunction w(n);
    switch (index % 4) {
        case 0: {  // log-normal weights at a random roughness scale
            const double scale = std::exp(std::log(0.01) + rng.uniform() * (std::log(5.0) - std::log(0.01)));
            for (auto& v : w) v = std::exp(scale * rng.normal());
            break;
        }
        case 1: {  // a few heavy states on a small background
            const double bg = std::pow(10.0, -6.0 * rng.uniform());
            for (auto& v : w) v = bg;
            const std::size_t k = 1 + rng.below(4);
            for (std::size_t j = 0; j < k; ++j) w[rng.below(n)] += rng.uniform_pos();
            break;
        }
        case 2: {  // product-form tilt exp(sum theta_x eta_x)
            const auto sites = static_cast<std::size_t>(std::countr_zero(n));
            std::vector<double> theta(sites);
            for (auto& th : theta) th = 2.0 * rng.normal();
            for (std::size_t s = 0; s < n; ++s) {
                double e = 0.0;
                for (std::size_t x = 0; x < sites; ++x)
                    if ((s >> x) & 1u) e += theta[x];
                w[s] = std::exp(e);
            }
            break;
        }
        default: {  // point mass smoothed by eps
            const double eps = std::pow(10.0, -1.0 - 7.0 * rng.uniform());
            for (auto& v : w) v = eps;
            w[rng.below(n)] += 1.0;
            break;
        }
    }
    double z = 0.0;
    for (std::size_t i = 0; i < n; ++i) z += w[i] * nu[i];
    for (auto& v : w) v /= z;
    return w;
}

LogSobolevReport log_sobolev_check(const ModelParams& p, std::size_t trials, std::uint64_t seed, double slack) {
    const auto g = build_generator(p, GeneratorPart::Reaction);
    const auto fp = fixed_point(p);
    const auto nu = product_measure(g.torus, fp.rho);
    LogSobolevReport r;
    r.trials = trials;
    r.kappa = fp.kappa;
    r.max_excess = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < trials; ++i) {
        const auto f = random_density(nu, i, seed);
        const auto t = log_sobolev_terms(g, f, nu);
        const double excess = t.entropy - r.kappa * t.dirichlet;
        r.max_excess = std::max(r.max_excess, excess);
        if (excess > slack) ++r.violations;
        if (t.dirichlet > 0.0) r.worst_ratio = std::max(r.worst_ratio, t.entropy / t.dirichlet);
    }
    r.passed = r.violations == 0;
    return r;
}

}  // namespace rdness
