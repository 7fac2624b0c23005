#pragma once

#include <array>
#include <complex>
#include <functional>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "rdness/lattice.hpp"
#include "rdness/stream.hpp"
#include "rdness/theory.hpp"

namespace rdness {

/// X^n(eta, f) = n^{-d/2} sum_x (eta_x - rho) f(x/n); `f` holds f(x/n) at linear index x.
[[nodiscard]] double fluctuation_field(const ParticleConfig& eta, std::span<const double> f, double rho);

/// Samples f at the lattice points x/n, in linear-index order.
[[nodiscard]] std::vector<double> sample_on_lattice(const Torus& t, const std::function<double(const std::array<double, 3>&)>& f);

/// Fourier coefficients X^n(k) = n^{-d/2} sum_x (eta_x - rho) e^{-2 pi i k.x/n} on a list of wavevectors.
struct FluctuationField {
    int d = 1;
    int n = 0;
    double rho = 0.0;
    bool full = false;   ///< true when `ks` covers all n^d residues
    std::vector<Wavevector> ks;
    std::vector<std::complex<double>> coef;

    /// Coefficient at k (reduced mod n). Throws when k is not in the set.
    [[nodiscard]] std::complex<double> at(const Wavevector& k) const;
};

/// Direct evaluation on the cube ||k||_inf <= cutoff. Throws SizeError unless cutoff < n/2.
[[nodiscard]] FluctuationField fourier_modes(const ParticleConfig& eta, double rho, int cutoff);

/// All n^d modes via FFT, k_i in (-n/2, n/2].
[[nodiscard]] FluctuationField fourier_modes_full(const ParticleConfig& eta, double rho);

/**
 * Evaluates X^n(k) for a fixed wavevector list from per-axis phase tables,
 * summing over occupied sites only (k != 0 mod n) or counting particles (k = 0).
 */
class ModeProjector {
public:
    ModeProjector(const Torus& t, std::vector<Wavevector> ks);

    [[nodiscard]] const std::vector<Wavevector>& modes() const noexcept { return ks_; }
    void project(const ParticleConfig& eta, double rho, std::span<std::complex<double>> out) const;

private:
    Torus torus_;
    std::vector<Wavevector> ks_;
    std::vector<std::complex<double>> phase_;   // phase_[(m * d + axis) * n + c] = e^{-2 pi i k_axis c / n}
    std::vector<bool> zero_;                     // k == 0 mod n
};

/// (sum_k |X(k)|^2 (1 + |k|^2)^m)^{1/2} over the field's mode set.
[[nodiscard]] double sobolev_norm(const FluctuationField& field, double m);

/// psi: {0,1}^{B_R} -> R given by a lookup table indexed by the projected pattern.
struct LocalObservable {
    Box box;
    std::vector<double> table;

    /// <psi> under the Bernoulli(rho) product, by exact enumeration of all patterns.
    [[nodiscard]] double mean(double rho) const;
    [[nodiscard]] double operator()(std::uint64_t pattern) const { return table[pattern]; }

    static LocalObservable occupation(int d);                 ///< psi = eta_0
    static LocalObservable neighbor_product(int d, int axis);  ///< psi = eta_0 eta_{e_axis}
    static LocalObservable constant(int d, double c);
};

/// Psi^n(f) = n^{-d} sum_x (psi(tau_x eta) - <psi>_rho) f(x/n). Throws SizeError when n <= 2R+1.
[[nodiscard]] double observable_field(const ParticleConfig& eta, const LocalObservable& psi, std::span<const double> f,
                                      double rho);

/// p^l uniform on the cube C_0^l and q^l = p^l * p^l, both as functions on T_n^d.
struct BlockKernels {
    int ell = 1;
    Torus torus;
    std::vector<double> p;
    std::vector<double> q;
    std::vector<std::size_t> support;   ///< sites of C_0^{2l-1}, where q may be nonzero
};

/// Throws SizeError unless 2l - 1 < n.
[[nodiscard]] BlockKernels block_kernels(int ell, int n, int d);

/// bar-eta^l_x = sum_y q^l(y) (eta_{x+y} - rho).
[[nodiscard]] double block_average(const ParticleConfig& eta, std::size_t x, const BlockKernels& k, double rho);

/// Empirical mode variance paired with the limit prediction.
struct SpectrumEstimate {
    Wavevector k{};
    double k2 = 0.0;
    double variance = 0.0;      ///< E|X(k) - mean|^2
    double std_error = 0.0;     ///< batch-means standard error
    double theory = 0.0;        ///< lambda_k
    double z = 0.0;             ///< (variance - theory) / std_error
    double tau_int = 0.0;       ///< integrated autocorrelation time of |X(k)|^2, in samples
    std::size_t batch_length = 0;
    std::size_t batches = 0;
    bool insufficient = false;  ///< fewer than 30 batches
};

/**
 * Per-mode variance with batch-means error bars over stationary samples
 * pooled from all replicas. Batches span >= 20 integrated autocorrelation
 * times of the |X(k)|^2 series.
 */
[[nodiscard]] std::vector<SpectrumEstimate> spectrum_estimate(std::span<const SampleStream> streams,
                                                              const ModelParams& p, bool skip_zero = true);

}  // namespace rdness
