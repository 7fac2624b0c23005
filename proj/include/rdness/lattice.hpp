#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace rdness {

inline constexpr int kMaxDim = 3;

/**
 * Site of the discrete torus {0,...,n-1}^d.
 *
 * `linear` is the row-major encoding with axis 0 fastest:
 * linear = c[0] + n*c[1] + n^2*c[2].
 */
struct TorusIndex {
    std::array<int, kMaxDim> coords{};
    std::size_t linear = 0;

    friend bool operator==(const TorusIndex& a, const TorusIndex& b) {
        return a.linear == b.linear;
    }
};

/**
 * Geometry of the periodic lattice of side n in dimension d (1 <= d <= 3).
 *
 * Nearest neighbours of x are x +- e_i for i < d. For n == 2 the two
 * neighbours along an axis coincide; they are still listed twice, so the
 * torus behaves as a multigraph with exactly 2d neighbour slots per site and
 * d * n^d oriented edges (x, x + e_i).
 */
class Torus {
public:
    Torus(int d, int n);

    [[nodiscard]] int dim() const noexcept { return d_; }
    [[nodiscard]] int side() const noexcept { return n_; }
    [[nodiscard]] std::size_t site_count() const noexcept { return sites_; }
    [[nodiscard]] std::size_t edge_count() const noexcept { return sites_ * static_cast<std::size_t>(d_); }
    [[nodiscard]] std::size_t stride(int axis) const noexcept { return stride_[static_cast<std::size_t>(axis)]; }

    [[nodiscard]] TorusIndex index(std::span<const int> coords) const;
    [[nodiscard]] TorusIndex index(std::size_t linear) const;

    /// Coordinate of `linear` along `axis`.
    [[nodiscard]] int coord(std::size_t linear, int axis) const noexcept {
        return static_cast<int>((linear / stride_[static_cast<std::size_t>(axis)]) % static_cast<std::size_t>(n_));
    }

    /// x + s*e_axis (mod n), s in {-1,+1} or any integer.
    [[nodiscard]] std::size_t shift(std::size_t linear, int axis, int s) const noexcept;

    /// The 2d nearest neighbours, ordered (x+e_0, x-e_0, x+e_1, x-e_1, ...).
    [[nodiscard]] std::vector<TorusIndex> neighbors(const TorusIndex& x) const;

    /// Linear indices of the 2d neighbours written into `out` (size >= 2d).
    void neighbor_sites(std::size_t linear, std::span<std::size_t> out) const noexcept;

    /// Componentwise (x + y) mod n.
    [[nodiscard]] std::size_t add(std::size_t x, std::size_t y) const noexcept;
    /// Componentwise (x - y) mod n.
    [[nodiscard]] std::size_t sub(std::size_t x, std::size_t y) const noexcept;
    /// Site at integer offset `offset` (components may be negative) from `x`.
    [[nodiscard]] std::size_t offset(std::size_t x, std::span<const int> offset) const noexcept;

    /// Oriented edge e in [0, d*n^d): axis = e / n^d, tail = e % n^d, head = tail + e_axis.
    [[nodiscard]] std::size_t edge_tail(std::size_t e) const noexcept { return e % sites_; }
    [[nodiscard]] std::size_t edge_head(std::size_t e) const noexcept {
        return shift(e % sites_, static_cast<int>(e / sites_), +1);
    }

    /// Flat table nbr[x*2d + 2i] = x+e_i, nbr[x*2d + 2i + 1] = x-e_i.
    [[nodiscard]] std::vector<std::uint32_t> neighbor_table() const;

    friend bool operator==(const Torus& a, const Torus& b) { return a.d_ == b.d_ && a.n_ == b.n_; }

private:
    int d_;
    int n_;
    std::size_t sites_;
    std::array<std::size_t, kMaxDim> stride_{};
};

/**
 * Occupancy configuration eta in {0,1}^{T_n^d}, bit-packed in 64-bit words
 * (site x is bit x % 64 of word x / 64).
 */
class ParticleConfig {
public:
    explicit ParticleConfig(Torus torus);
    ParticleConfig(Torus torus, std::span<const std::uint8_t> bits);

    /// Configuration with the low n^d bits of `code` as occupancies (tiny systems, n^d <= 64).
    static ParticleConfig from_code(Torus torus, std::uint64_t code);

    [[nodiscard]] const Torus& torus() const noexcept { return torus_; }
    [[nodiscard]] std::size_t site_count() const noexcept { return torus_.site_count(); }

    [[nodiscard]] bool get(std::size_t x) const noexcept { return (words_[x >> 6] >> (x & 63)) & 1u; }
    void set(std::size_t x, bool v) noexcept {
        const std::uint64_t m = std::uint64_t{1} << (x & 63);
        words_[x >> 6] = v ? (words_[x >> 6] | m) : (words_[x >> 6] & ~m);
    }
    /// eta -> eta^x.
    void flip(std::size_t x) noexcept { words_[x >> 6] ^= std::uint64_t{1} << (x & 63); }
    /// eta -> eta^{x,y}.
    void exchange(std::size_t x, std::size_t y) noexcept {
        if (get(x) != get(y)) {
            flip(x);
            flip(y);
        }
    }

    [[nodiscard]] std::size_t particle_count() const noexcept;
    [[nodiscard]] double density() const noexcept {
        return static_cast<double>(particle_count()) / static_cast<double>(site_count());
    }

    /// tau_shift: site z of the result holds eta_{z + shift}, so (tau_x eta)_0 = eta_x.
    [[nodiscard]] ParticleConfig translated(std::size_t shift) const;

    /// Encoding as integer (n^d <= 64); the state index used by the exact solver.
    [[nodiscard]] std::uint64_t code() const;

    [[nodiscard]] std::span<const std::uint64_t> words() const noexcept { return words_; }
    [[nodiscard]] std::span<std::uint64_t> words() noexcept { return words_; }

    friend bool operator==(const ParticleConfig& a, const ParticleConfig& b) {
        return a.torus_ == b.torus_ && a.words_ == b.words_;
    }

private:
    Torus torus_;
    std::vector<std::uint64_t> words_;
};

/**
 * The cube B_R = {y in Z^d : |y_i| <= R}. Offsets are listed row-major with
 * axis 0 fastest, starting at (-R,...,-R); offset j is bit j of a projected
 * pattern.
 */
class Box {
public:
    Box(int d, int radius);

    [[nodiscard]] int dim() const noexcept { return d_; }
    [[nodiscard]] int radius() const noexcept { return radius_; }
    [[nodiscard]] std::size_t size() const noexcept { return offsets_.size(); }
    [[nodiscard]] std::span<const int> offset(std::size_t j) const noexcept {
        return {offsets_[j].data(), static_cast<std::size_t>(d_)};
    }
    /// Index of the origin offset in the listing.
    [[nodiscard]] std::size_t origin() const noexcept { return origin_; }

private:
    int d_;
    int radius_;
    std::vector<std::array<int, kMaxDim>> offsets_;
    std::size_t origin_ = 0;
};

/// Pi_R^center: bit j of the result is eta at center + offset_j. Throws SizeError when n <= 2R+1 or |B_R| > 64.
[[nodiscard]] std::uint64_t project_box(const ParticleConfig& eta, const Box& box, std::size_t center);

/// Binary checkpoint of one configuration plus its model time.
struct Snapshot {
    ParticleConfig config;
    double time = 0.0;
};

/**
 * Snapshot byte layout (all integers little-endian):
 *   offset 0   8 bytes  magic "RDNSNAP1"
 *   offset 8   u32      format version (1)
 *   offset 12  u32      d
 *   offset 16  u32      n
 *   offset 20  u32      reserved (0)
 *   offset 24  f64      model time (IEEE-754 bits, little-endian)
 *   offset 32  u64      word count W = ceil(n^d / 64)
 *   offset 40  W x u64  occupancy words
 */
void write_snapshot(std::ostream& out, const Snapshot& snap);
[[nodiscard]] Snapshot read_snapshot(std::istream& in);
void save_snapshot(const std::string& path, const Snapshot& snap);
[[nodiscard]] Snapshot load_snapshot(const std::string& path);

}  // namespace rdness
