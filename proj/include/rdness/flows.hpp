#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "rdness/lattice.hpp"

namespace rdness {

/**
 * Antisymmetric edge function on T_n^d. One value per edge (x, x + e_i),
 * stored at index i * n^d + x; phi(x + e_i, x) is its negative.
 */
class Flow {
public:
    explicit Flow(Torus torus);

    [[nodiscard]] const Torus& torus() const noexcept { return torus_; }
    /// phi(x, y) for neighbours x ~ y. Throws ParameterError otherwise.
    [[nodiscard]] double operator()(std::size_t x, std::size_t y) const;
    /// Value on the positively oriented edge (tail, tail + e_axis).
    [[nodiscard]] double& edge(int axis, std::size_t tail) { return values_[static_cast<std::size_t>(axis) * torus_.site_count() + tail]; }
    [[nodiscard]] double edge(int axis, std::size_t tail) const { return values_[static_cast<std::size_t>(axis) * torus_.site_count() + tail]; }
    [[nodiscard]] std::span<const double> values() const noexcept { return values_; }

    /// div phi(x) = sum_{y ~ x} phi(x, y).
    [[nodiscard]] std::vector<double> divergence() const;
    /// sum over edges of phi^2.
    [[nodiscard]] double energy() const;
    /// True when phi vanishes on every edge with an endpoint outside the cube {0..side-1}^d.
    [[nodiscard]] bool supported_in_cube(int side) const;

private:
    Torus torus_;
    std::vector<double> values_;
};

enum class FlowKind { Sweep, MinimalEnergy };

/**
 * Flow with divergence delta_0 - q^l supported in C_0^{2l-1}.
 *
 * Sweep: mass moves along axis 0 inside each line, then axis 1, and so on,
 * through the intermediate measures q1^{(x)i} (x) delta^{(x)(d-i)}.
 * MinimalEnergy: the gradient of the potential solving the Neumann Laplace
 * equation on the cube graph (least energy among flows supported in the cube).
 * Throws SizeError unless 2l - 1 < n/2.
 */
[[nodiscard]] Flow build_flow(int ell, int n, int d, FlowKind kind = FlowKind::Sweep);

/// max_x |div phi(x) - (p(x) - q(x))|.
[[nodiscard]] double divergence_residual(const Flow& phi, std::span<const double> p, std::span<const double> q);

struct DivergenceCheck {
    double lhs = 0.0;   ///< sum_x g(x)(p(x) - q(x))
    double rhs = 0.0;   ///< sum_{x~y} phi(x,y)(g(x) - g(y)), each edge once
    bool passed = false;
};
[[nodiscard]] DivergenceCheck divergence_formula_check(const Flow& phi, std::span<const double> p,
                                                       std::span<const double> q, std::span<const double> g,
                                                       double tolerance = 1e-10);

struct EnergyRow {
    int ell = 0;
    int n = 0;
    double energy = 0.0;
    double scaled = 0.0;      ///< energy / g_d(l)
    double residual = 0.0;    ///< divergence residual
};

struct EnergyScaling {
    int d = 1;
    FlowKind kind = FlowKind::Sweep;
    std::vector<EnergyRow> rows;
    double max_scaled = 0.0;
    double min_scaled = 0.0;
    double ratio = 0.0;           ///< max_scaled / min_scaled
    double max_doubling = 0.0;    ///< max E(2l)/E(l) over pairs in the grid
    double max_residual = 0.0;
};

/// Builds flows on the torus of side 4l for each l in the grid (l >= 2).
[[nodiscard]] EnergyScaling energy_scaling(std::span<const int> ells, int d, FlowKind kind = FlowKind::Sweep);

}  // namespace rdness
