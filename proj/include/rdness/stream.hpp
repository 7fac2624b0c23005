#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace rdness {

using Wavevector = std::array<int, 3>;

/**
 * Observables recorded at the sample times of one replica, stored column-wise.
 *
 * modes[s * mode_set.size() + m] is the Fourier coefficient of the
 * fluctuation field for wavevector mode_set[m] at sample s;
 * pattern_counts[s * pattern_space + p] counts the box centres showing pattern p.
 */
struct SampleStream {
    int d = 1;
    int n = 0;
    double rho_ref = 0.0;                  ///< reference density used for centring
    std::uint64_t replica = 0;
    std::vector<double> times;
    std::vector<double> densities;
    std::vector<Wavevector> mode_set;
    std::vector<std::complex<float>> modes;
    int box_radius = -1;                   ///< -1: no pattern counts recorded
    std::size_t pattern_space = 0;
    std::vector<std::uint32_t> pattern_counts;

    [[nodiscard]] std::size_t size() const noexcept { return times.size(); }
    [[nodiscard]] std::complex<double> mode(std::size_t sample, std::size_t m) const {
        const auto& c = modes[sample * mode_set.size() + m];
        return {c.real(), c.imag()};
    }
    [[nodiscard]] std::span<const std::uint32_t> patterns(std::size_t sample) const {
        return {pattern_counts.data() + sample * pattern_space, pattern_space};
    }
};

}  // namespace rdness
