#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "rdness/stream.hpp"
#include "rdness/theory.hpp"

namespace rdness {

/// Values u(x) at the M^d grid points x = j/M of the unit torus, axis 0 fastest.
struct DensityProfile {
    int d = 1;
    int m = 0;
    std::vector<double> u;

    [[nodiscard]] static DensityProfile sample(int d, int m, const std::function<double(const std::array<double, 3>&)>& f);
    [[nodiscard]] static DensityProfile constant(int d, int m, double value);
    [[nodiscard]] double mean() const;
};

struct HydroTrajectory {
    std::vector<double> times;
    std::vector<DensityProfile> profiles;
    double min_value = 1.0;
    double max_value = 0.0;
};

/// Largest step accepted by solve_hydro: 1 / max_{[0,1]} |F'|.
[[nodiscard]] double hydro_max_step(const ModelParams& p);

/**
 * d_t u = Laplacian u + F(u) on the unit torus by the second-order IMEX
 * Runge-Kutta scheme ARS(2,2,2): Laplacian implicit and spectral, F explicit.
 * Profiles are recorded at `output_times` (each in [0, T]; T always included).
 * Throws ParameterError when dt exceeds hydro_max_step, NumericalError when a
 * value leaves [-bound_tol, 1 + bound_tol].
 */
[[nodiscard]] HydroTrajectory solve_hydro(const DensityProfile& u0, double T, const ModelParams& p, double dt,
                                          std::span<const double> output_times = {}, double bound_tol = 1e-9);

/// Amplitude of the cos(2 pi k.x) component of a profile.
[[nodiscard]] double cosine_amplitude(const DensityProfile& u, const Wavevector& k);

/// hat(P_t f)(k) = exp((-4 pi^2 |k|^2 + F'(rho*)) t) hat f(k).
[[nodiscard]] std::vector<std::complex<double>> semigroup_apply(std::span<const Wavevector> ks,
                                                                std::span<const std::complex<double>> coef, double t,
                                                                const ModelParams& p);

struct SemigroupIdentity {
    double gradient_integral = 0.0;  ///< int_0^inf ||grad P_t f||^2 dt, by quadrature
    double mass_integral = 0.0;      ///< int_0^inf ||P_t f||^2 dt, by quadrature
    double lhs = 0.0;
    double rhs = 0.0;                ///< ||f||^2 / 2 + F'(rho*) mass_integral
    double closed_form_lhs = 0.0;    ///< sum |f_k|^2 4 pi^2 |k|^2 / (8 pi^2 |k|^2 - 2F')
    double error = 0.0;              ///< |lhs - rhs|
};

/// The energy identity for the semigroup, with the time integrals done by double-exponential quadrature.
[[nodiscard]] SemigroupIdentity semigroup_energy_identity(std::span<const Wavevector> ks,
                                                          std::span<const std::complex<double>> coef,
                                                          const ModelParams& p);

struct HydroComparisonRow {
    int n = 0;
    double t = 0.0;
    double l2_error = 0.0;        ///< discrete L^2 distance of the replica-averaged block density from the PDE
    double mean_replica_error = 0.0;
    std::vector<double> particle; ///< replica-averaged block density on the grid
    std::vector<double> pde;      ///< PDE solution on the grid
};

struct HydroComparison {
    int grid = 0;
    int replicas = 0;
    std::vector<HydroComparisonRow> rows;
    std::uint64_t events = 0;
};

/**
 * Particles from the product measure with profile u0(x/n), block-averaged
 * with q^l (l = n/M, centred) at each time, averaged over replicas and
 * compared to solve_hydro on the M-point grid.
 */
[[nodiscard]] HydroComparison hydro_vs_particles(const std::function<double(const std::array<double, 3>&)>& u0,
                                                 const ModelParams& p, int grid, std::span<const double> times,
                                                 int replicas, std::uint64_t seed, int threads = 1);

}  // namespace rdness
