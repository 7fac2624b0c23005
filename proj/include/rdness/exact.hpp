#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "rdness/lattice.hpp"
#include "rdness/theory.hpp"

namespace rdness {

/// Largest torus handled by the exact solver (2^16 states).
inline constexpr std::size_t kExactMaxSites = 16;
/// Largest state space for dense operations (matrix exponential, dense export).
inline constexpr std::size_t kExactMaxDenseStates = 4096;

enum class GeneratorPart { Full, Exchange, Reaction };

/// Probability vector over all 2^{n^d} configurations, indexed by ParticleConfig::code().
using Distribution = std::vector<double>;
/// Real function over configurations, same indexing.
using StateFunction = std::vector<double>;

/**
 * Q(eta, xi): rate of eta -> xi. Exchange entries n^2 per oriented edge
 * (so n^2 per neighbour pair when n >= 3), flip entries c_x(eta).
 * Diagonal = -(row sum of off-diagonals).
 */
struct GeneratorMatrix {
    ModelParams params;
    Torus torus{1, 2};
    GeneratorPart part = GeneratorPart::Full;
    Eigen::SparseMatrix<double, Eigen::RowMajor> q;

    [[nodiscard]] std::size_t states() const noexcept { return static_cast<std::size_t>(q.rows()); }
    /// Throws SizeError above kExactMaxDenseStates.
    [[nodiscard]] Eigen::MatrixXd dense() const;
};

/// Throws SizeError when n^d > 16.
[[nodiscard]] GeneratorMatrix build_generator(const ModelParams& p, GeneratorPart part = GeneratorPart::Full);

/// max_eta |sum_xi Q(eta, xi)|.
[[nodiscard]] double row_sum_residual(const GeneratorMatrix& g);

/// pi with pi^T Q = 0 and sum pi = 1, from an LU solve of the system with one balance row replaced by the normalisation.
[[nodiscard]] Distribution stationary_distribution(const GeneratorMatrix& g);

/// ||pi^T Q||_inf.
[[nodiscard]] double stationary_residual(const GeneratorMatrix& g, const Distribution& pi);

/// nu_rho on {0,1}^{T_n^d}, and its logarithm.
[[nodiscard]] Distribution product_measure(const Torus& t, double rho);
[[nodiscard]] std::vector<double> log_product_measure(const Torus& t, double rho);

/// (L f)(eta).
[[nodiscard]] StateFunction apply_generator(const GeneratorMatrix& g, std::span<const double> f);

/// sum_eta mu(eta) f(eta).
[[nodiscard]] double expectation(std::span<const double> mu, std::span<const double> f);

/// L*1 computed three ways with respect to nu_{rho*}.
struct AdjointReport {
    StateFunction density_ratio;  ///< sum_x [c_x(eta^x) nu(eta^x)/nu(eta) - c_x(eta)]
    StateFunction closed_form;    ///< lambda/(2 d rho*) sum over ordered neighbour pairs of bar-eta_x bar-eta_y
    StateFunction matrix;         ///< (Q^T nu)(eta) / nu(eta)
    double max_residual = 0.0;    ///< largest pointwise disagreement among the three
};

/// Throws ConsistencyError when the routes disagree by more than `tolerance`.
[[nodiscard]] AdjointReport adjoint_one(const ModelParams& p, double tolerance = 1e-12);

/// Gamma f = L(f^2) - 2 f L f for the selected part of the generator.
[[nodiscard]] StateFunction carre_du_champ(const GeneratorMatrix& g, std::span<const double> f);
[[nodiscard]] StateFunction carre_du_champ(std::span<const double> f, GeneratorPart which, const ModelParams& p);

/// Gamma f(eta) = sum_xi Q(eta, xi) (f(xi) - f(eta))^2, the jump form.
[[nodiscard]] StateFunction carre_du_champ_jump(const GeneratorMatrix& g, std::span<const double> f);

/// sum mu log(mu/nu); +infinity when mu is not absolutely continuous w.r.t. nu.
[[nodiscard]] double relative_entropy(std::span<const double> mu, std::span<const double> nu);

/// (1/2) sum |mu - nu|.
[[nodiscard]] double total_variation(std::span<const double> mu, std::span<const double> nu);

/// Sum of log forward rates minus sum of log backward rates around a closed path of states.
[[nodiscard]] double cycle_log_ratio(const GeneratorMatrix& g, std::span<const std::size_t> cycle);

/// Some 4-cycle eta -> eta^x -> eta^{x,y} -> eta^y -> eta (flips at neighbours) maximising |cycle_log_ratio|.
[[nodiscard]] std::vector<std::size_t> most_irreversible_flip_cycle(const GeneratorMatrix& g);

struct YauPoint {
    double t = 0.0;
    double entropy = 0.0;       ///< H_n(t)
    double derivative = 0.0;    ///< H_n'(t) = sum (mu_t Q) log f_t
    double derivative_fd = 0.0; ///< central difference
    double dissipation = 0.0;   ///< int Gamma_n sqrt(f_t) d nu
    double source = 0.0;        ///< int L*1 f_t d nu
    double slack = 0.0;         ///< -dissipation + source - derivative
    bool holds = false;
};

struct YauReport {
    std::vector<YauPoint> points;
    double stationary_entropy = 0.0;  ///< H(f_ss; nu_{rho*})
    double limit_time = 0.0;
    double limit_entropy = 0.0;       ///< H_n(limit_time)
    double limit_error = 0.0;
    double max_fd_error = 0.0;        ///< max |derivative - derivative_fd|
    bool passed = false;
};

/**
 * Evolves nu_{rho*} by the forward equation (dense matrix exponential) and
 * checks H' <= -int Gamma sqrt f dnu + int L*1 f dnu at each time with slack
 * >= -slack_tol, and |H(limit_time) - H(f_ss)| <= limit_tol.
 * Throws SizeError above kExactMaxDenseStates states.
 */
[[nodiscard]] YauReport yau_inequality_check(const ModelParams& p, std::span<const double> times,
                                             double limit_time = 60.0, double slack_tol = 1e-6,
                                             double limit_tol = 1e-8);

struct InequalityResult {
    double lhs = 0.0;
    double rhs = 0.0;
    bool passed = false;
};

/// int h f dnu <= (H(f; nu) + log int e^{gamma h} dnu) / gamma, with additive `slack`.
[[nodiscard]] InequalityResult entropy_inequality_check(std::span<const double> h, std::span<const double> f,
                                                        double gamma, std::span<const double> nu,
                                                        double slack = 1e-10);

/// H(f; nu) for a density f w.r.t. nu.
[[nodiscard]] double density_entropy(std::span<const double> f, std::span<const double> nu);

struct LogSobolevTerms {
    double entropy = 0.0;     ///< H(f; nu_{rho*})
    double dirichlet = 0.0;   ///< int Gamma^r sqrt f dnu_{rho*}
};
[[nodiscard]] LogSobolevTerms log_sobolev_terms(const GeneratorMatrix& reaction, std::span<const double> f,
                                                std::span<const double> nu);

struct LogSobolevReport {
    std::size_t trials = 0;
    std::size_t violations = 0;
    double kappa = 0.0;          ///< kappa(rho*)
    double worst_ratio = 0.0;    ///< max H / int Gamma^r sqrt f; an empirical lower bound for the optimal constant
    double max_excess = 0.0;     ///< max (H - kappa * dirichlet)
    bool passed = false;
};

/// Random densities w.r.t. nu_{rho*}: H(f) <= kappa(rho*) int Gamma^r sqrt f dnu + slack.
[[nodiscard]] LogSobolevReport log_sobolev_check(const ModelParams& p, std::size_t trials, std::uint64_t seed = 1,
                                                 double slack = 1e-10);

/// A random probability density w.r.t. nu (positive, int f dnu = 1), of varying roughness.
[[nodiscard]] StateFunction random_density(std::span<const double> nu, std::uint64_t index, std::uint64_t seed);

}  // namespace rdness
