#include "rdness/flows.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <limits>

#include "rdness/error.hpp"
#include "rdness/fields.hpp"
#include "rdness/theory.hpp"

namespace rdness {

Flow::Flow(Torus torus) : torus_(torus), values_(torus.edge_count(), 0.0) {}

double Flow::operator()(std::size_t x, std::size_t y) const {
    for (int i = 0; i < torus_.dim(); ++i) {
        if (torus_.shift(x, i, +1) == y) return edge(i, x);
        if (torus_.shift(y, i, +1) == x) return -edge(i, y);
    }
    throw ParameterError("Flow: sites are not neighbours");
}

std::vector<double> Flow::divergence() const {
    std::vector<double> div(torus_.site_count(), 0.0);
    for (int i = 0; i < torus_.dim(); ++i)
        for (std::size_t x = 0; x < torus_.site_count(); ++x) {
            const double v = edge(i, x);
            div[x] += v;
            div[torus_.shift(x, i, +1)] -= v;
        }
    return div;
}

double Flow::energy() const {
    double s = 0.0;
    for (double v : values_) s += v * v;
    return s;
}

bool Flow::supported_in_cube(int side) const {
    auto inside = [&](std::size_t x) {
        for (int i = 0; i < torus_.dim(); ++i)
            if (torus_.coord(x, i) >= side) return false;
        return true;
    };
    for (int i = 0; i < torus_.dim(); ++i)
        for (std::size_t x = 0; x < torus_.site_count(); ++x)
            if (edge(i, x) != 0.0 && !(inside(x) && inside(torus_.shift(x, i, +1)))) return false;
    return true;
}

namespace {

std::vector<double> q1_weights(int ell) {
    std::vector<double> q1(static_cast<std::size_t>(2 * ell - 1), 0.0);
    for (int i = 0; i < ell; ++i)
        for (int j = 0; j < ell; ++j) q1[static_cast<std::size_t>(i + j)] += 1.0 / (static_cast<double>(ell) * ell);
    return q1;
}

Flow sweep_flow(int ell, const Torus& t) {
    const int d = t.dim();
    const int side = 2 * ell - 1;
    const auto q1 = q1_weights(ell);
    // One-dimensional unit flow from delta_0 to q1: phi(z, z+1) = 1 - sum_{w <= z} q1(w).
    std::vector<double> line(static_cast<std::size_t>(side - 1));
    double cum = 0.0;
    for (int z = 0; z + 1 < side; ++z) {
        cum += q1[static_cast<std::size_t>(z)];
        line[static_cast<std::size_t>(z)] = 1.0 - cum;
    }
    Flow phi(t);
    for (int axis = 0; axis < d; ++axis) {
        // Stage `axis`: lines along `axis`; coordinates below it follow q1, above it sit at 0.
        std::array<int, 3> c{};
        const int lo_count = axis;
        const std::size_t combos = static_cast<std::size_t>(std::pow(side, lo_count));
        for (std::size_t m = 0; m < combos; ++m) {
            std::size_t rem = m;
            double w = 1.0;
            for (int j = 0; j < lo_count; ++j) {
                c[static_cast<std::size_t>(j)] = static_cast<int>(rem % static_cast<std::size_t>(side));
                rem /= static_cast<std::size_t>(side);
                w *= q1[static_cast<std::size_t>(c[static_cast<std::size_t>(j)])];
            }
            for (int j = axis; j < d; ++j) c[static_cast<std::size_t>(j)] = 0;
            for (int z = 0; z + 1 < side; ++z) {
                c[static_cast<std::size_t>(axis)] = z;
                const auto x = t.index(std::span<const int>(c.data(), static_cast<std::size_t>(d))).linear;
                phi.edge(axis, x) += w * line[static_cast<std::size_t>(z)];
            }
        }
    }
    return phi;
}

Flow minimal_energy_flow(int ell, const Torus& t) {
    const int d = t.dim();
    const int side = 2 * ell - 1;
    const auto kern = block_kernels(ell, t.side(), d);
    const Torus cube(d, side);  // local indexing of the cube, no wrap edges used
    const auto m = static_cast<Eigen::Index>(cube.site_count());
    auto to_torus = [&](std::size_t local) {
        std::array<int, 3> c{};
        for (int i = 0; i < d; ++i) c[static_cast<std::size_t>(i)] = cube.coord(local, i);
        return t.index(std::span<const int>(c.data(), static_cast<std::size_t>(d))).linear;
    };
    std::vector<Eigen::Triplet<double>> trip;
    for (std::size_t x = 0; x < cube.site_count(); ++x)
        for (int i = 0; i < d; ++i) {
            if (cube.coord(x, i) + 1 >= side) continue;
            const std::size_t y = cube.shift(x, i, +1);
            const auto xi = static_cast<Eigen::Index>(x);
            const auto yi = static_cast<Eigen::Index>(y);
            trip.emplace_back(xi, xi, 1.0);
            trip.emplace_back(yi, yi, 1.0);
            trip.emplace_back(xi, yi, -1.0);
            trip.emplace_back(yi, xi, -1.0);
        }
    // Pin the potential at the far corner to remove the constant null space.
    const Eigen::Index pin = m - 1;
    std::vector<Eigen::Triplet<double>> pinned;
    for (const auto& tr : trip)
        if (tr.row() != pin && tr.col() != pin) pinned.push_back(tr);
    pinned.emplace_back(pin, pin, 1.0);
    Eigen::SparseMatrix<double> lap(m, m);
    lap.setFromTriplets(pinned.begin(), pinned.end());
    Eigen::VectorXd rhs(m);
    for (Eigen::Index x = 0; x < m; ++x) rhs(x) = (x == 0 ? 1.0 : 0.0) - kern.q[to_torus(static_cast<std::size_t>(x))];
    rhs(pin) = 0.0;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(lap);
    if (solver.info() != Eigen::Success) throw NumericalError("minimal_energy_flow: factorisation failed");
    Eigen::VectorXd u = solver.solve(rhs);
    // One step of iterative refinement.
    Eigen::VectorXd r = rhs - lap * u;
    u += solver.solve(r);

    Flow phi(t);
    for (std::size_t x = 0; x < cube.site_count(); ++x)
        for (int i = 0; i < d; ++i) {
            if (cube.coord(x, i) + 1 >= side) continue;
            const std::size_t y = cube.shift(x, i, +1);
            phi.edge(i, to_torus(x)) = u(static_cast<Eigen::Index>(x)) - u(static_cast<Eigen::Index>(y));
        }
    return phi;
}

}  // namespace

Flow build_flow(int ell, int n, int d, FlowKind kind) {
    if (ell < 1) throw ParameterError("build_flow: l must be >= 1");
    if (!(2 * (2 * ell - 1) < n)) throw SizeError("build_flow: need 2l - 1 < n/2");
    const Torus t(d, n);
    if (ell == 1) return Flow(t);
    return kind == FlowKind::Sweep ? sweep_flow(ell, t) : minimal_energy_flow(ell, t);
}

double divergence_residual(const Flow& phi, std::span<const double> p, std::span<const double> q) {
    const auto div = phi.divergence();
    if (p.size() != div.size() || q.size() != div.size()) throw SizeError("divergence_residual: length mismatch");
    double worst = 0.0;
    for (std::size_t x = 0; x < div.size(); ++x) worst = std::max(worst, std::abs(div[x] - (p[x] - q[x])));
    return worst;
}

DivergenceCheck divergence_formula_check(const Flow& phi, std::span<const double> p, std::span<const double> q,
                                         std::span<const double> g, double tolerance) {
    const auto& t = phi.torus();
    if (p.size() != t.site_count() || q.size() != t.site_count() || g.size() != t.site_count())
        throw SizeError("divergence_formula_check: length mismatch");
    DivergenceCheck c;
    for (std::size_t x = 0; x < g.size(); ++x) c.lhs += g[x] * (p[x] - q[x]);
    for (int i = 0; i < t.dim(); ++i)
        for (std::size_t x = 0; x < t.site_count(); ++x) c.rhs += phi.edge(i, x) * (g[x] - g[t.shift(x, i, +1)]);
    c.passed = std::abs(c.lhs - c.rhs) <= tolerance;
    return c;
}

EnergyScaling energy_scaling(std::span<const int> ells, int d, FlowKind kind) {
    EnergyScaling s;
    s.d = d;
    s.kind = kind;
    s.min_scaled = std::numeric_limits<double>::infinity();
    for (int ell : ells) {
        if (ell < 2) throw ParameterError("energy_scaling: grid values must be >= 2");
        EnergyRow r;
        r.ell = ell;
        r.n = 4 * ell;
        const auto phi = build_flow(ell, r.n, d, kind);
        const auto kern = block_kernels(ell, r.n, d);
        std::vector<double> delta(kern.q.size(), 0.0);
        delta[0] = 1.0;
        r.energy = phi.energy();
        r.scaled = r.energy / green_scale(ell, d);
        r.residual = divergence_residual(phi, delta, kern.q);
        s.max_scaled = std::max(s.max_scaled, r.scaled);
        s.min_scaled = std::min(s.min_scaled, r.scaled);
        s.max_residual = std::max(s.max_residual, r.residual);
        s.rows.push_back(r);
    }
    for (const auto& a : s.rows)
        for (const auto& b : s.rows)
            if (b.ell == 2 * a.ell) s.max_doubling = std::max(s.max_doubling, b.energy / a.energy);
    s.ratio = s.rows.empty() ? 0.0 : s.max_scaled / s.min_scaled;
    return s;
}

}  // namespace rdness
