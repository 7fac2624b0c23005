#include "rdness/lattice.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "rdness/error.hpp"

namespace rdness {

Torus::Torus(int d, int n) : d_(d), n_(n) {
    if (d < 1 || d > kMaxDim) throw ParameterError("Torus: dimension must be 1, 2 or 3");
    if (n < 2) throw ParameterError("Torus: side length must be >= 2");
    std::size_t s = 1;
    for (int i = 0; i < kMaxDim; ++i) {
        stride_[static_cast<std::size_t>(i)] = s;
        if (i < d) s *= static_cast<std::size_t>(n);
    }
    sites_ = s;
    if (sites_ > (std::size_t{1} << 31)) throw SizeError("Torus: more than 2^31 sites");
}

TorusIndex Torus::index(std::span<const int> coords) const {
    if (coords.size() != static_cast<std::size_t>(d_)) throw ParameterError("Torus::index: wrong coordinate count");
    TorusIndex t;
    for (int i = 0; i < d_; ++i) {
        int c = coords[static_cast<std::size_t>(i)] % n_;
        if (c < 0) c += n_;
        t.coords[static_cast<std::size_t>(i)] = c;
        t.linear += static_cast<std::size_t>(c) * stride_[static_cast<std::size_t>(i)];
    }
    return t;
}

TorusIndex Torus::index(std::size_t linear) const {
    if (linear >= sites_) throw ParameterError("Torus::index: linear index out of range");
    TorusIndex t;
    t.linear = linear;
    for (int i = 0; i < d_; ++i) t.coords[static_cast<std::size_t>(i)] = coord(linear, i);
    return t;
}

std::size_t Torus::shift(std::size_t linear, int axis, int s) const noexcept {
    const auto st = stride_[static_cast<std::size_t>(axis)];
    const int c = coord(linear, axis);
    int c2 = (c + s) % n_;
    if (c2 < 0) c2 += n_;
    return linear + static_cast<std::size_t>(c2) * st - static_cast<std::size_t>(c) * st;
}

std::vector<TorusIndex> Torus::neighbors(const TorusIndex& x) const {
    std::vector<TorusIndex> out;
    out.reserve(static_cast<std::size_t>(2 * d_));
    for (int i = 0; i < d_; ++i) {
        out.push_back(index(shift(x.linear, i, +1)));
        out.push_back(index(shift(x.linear, i, -1)));
    }
    return out;
}

void Torus::neighbor_sites(std::size_t linear, std::span<std::size_t> out) const noexcept {
    for (int i = 0; i < d_; ++i) {
        out[static_cast<std::size_t>(2 * i)] = shift(linear, i, +1);
        out[static_cast<std::size_t>(2 * i + 1)] = shift(linear, i, -1);
    }
}

std::size_t Torus::add(std::size_t x, std::size_t y) const noexcept {
    std::size_t r = 0;
    for (int i = 0; i < d_; ++i) {
        const int c = (coord(x, i) + coord(y, i)) % n_;
        r += static_cast<std::size_t>(c) * stride_[static_cast<std::size_t>(i)];
    }
    return r;
}

std::size_t Torus::sub(std::size_t x, std::size_t y) const noexcept {
    std::size_t r = 0;
    for (int i = 0; i < d_; ++i) {
        const int c = (coord(x, i) - coord(y, i) + n_) % n_;
        r += static_cast<std::size_t>(c) * stride_[static_cast<std::size_t>(i)];
    }
    return r;
}

std::size_t Torus::offset(std::size_t x, std::span<const int> off) const noexcept {
    std::size_t r = 0;
    for (int i = 0; i < d_; ++i) {
        int c = (coord(x, i) + off[static_cast<std::size_t>(i)]) % n_;
        if (c < 0) c += n_;
        r += static_cast<std::size_t>(c) * stride_[static_cast<std::size_t>(i)];
    }
    return r;
}

std::vector<std::uint32_t> Torus::neighbor_table() const {
    const auto deg = static_cast<std::size_t>(2 * d_);
    std::vector<std::uint32_t> t(sites_ * deg);
    for (std::size_t x = 0; x < sites_; ++x)
        for (int i = 0; i < d_; ++i) {
            t[x * deg + 2 * static_cast<std::size_t>(i)] = static_cast<std::uint32_t>(shift(x, i, +1));
            t[x * deg + 2 * static_cast<std::size_t>(i) + 1] = static_cast<std::uint32_t>(shift(x, i, -1));
        }
    return t;
}

ParticleConfig::ParticleConfig(Torus torus)
    : torus_(torus), words_((torus.site_count() + 63) / 64, 0) {}

ParticleConfig::ParticleConfig(Torus torus, std::span<const std::uint8_t> bits) : ParticleConfig(torus) {
    if (bits.size() != site_count()) throw ParameterError("ParticleConfig: bit count does not match n^d");
    for (std::size_t x = 0; x < bits.size(); ++x)
        if (bits[x]) set(x, true);
}

ParticleConfig ParticleConfig::from_code(Torus torus, std::uint64_t code) {
    if (torus.site_count() > 64) throw SizeError("ParticleConfig::from_code: more than 64 sites");
    ParticleConfig c(torus);
    c.words_[0] = code;
    return c;
}

std::size_t ParticleConfig::particle_count() const noexcept {
    std::size_t k = 0;
    for (auto w : words_) k += static_cast<std::size_t>(std::popcount(w));
    return k;
}

ParticleConfig ParticleConfig::translated(std::size_t shift) const {
    ParticleConfig out(torus_);
    for (std::size_t z = 0; z < site_count(); ++z)
        if (get(torus_.add(z, shift))) out.set(z, true);
    return out;
}

std::uint64_t ParticleConfig::code() const {
    if (site_count() > 64) throw SizeError("ParticleConfig::code: more than 64 sites");
    return words_[0];
}

Box::Box(int d, int radius) : d_(d), radius_(radius) {
    if (d < 1 || d > kMaxDim) throw ParameterError("Box: dimension must be 1, 2 or 3");
    if (radius < 0) throw ParameterError("Box: radius must be >= 0");
    const int side = 2 * radius + 1;
    std::size_t total = 1;
    for (int i = 0; i < d; ++i) total *= static_cast<std::size_t>(side);
    offsets_.resize(total);
    for (std::size_t j = 0; j < total; ++j) {
        std::size_t r = j;
        bool at_origin = true;
        for (int i = 0; i < d; ++i) {
            const int c = static_cast<int>(r % static_cast<std::size_t>(side)) - radius;
            r /= static_cast<std::size_t>(side);
            offsets_[j][static_cast<std::size_t>(i)] = c;
            at_origin = at_origin && c == 0;
        }
        if (at_origin) origin_ = j;
    }
}

std::uint64_t project_box(const ParticleConfig& eta, const Box& box, std::size_t center) {
    const auto& t = eta.torus();
    if (t.dim() != box.dim()) throw ParameterError("project_box: dimension mismatch");
    if (t.side() <= 2 * box.radius() + 1) throw SizeError("project_box: box too large for torus (need n > 2R+1)");
    if (box.size() > 64) throw SizeError("project_box: box has more than 64 sites");
    std::uint64_t pattern = 0;
    for (std::size_t j = 0; j < box.size(); ++j)
        if (eta.get(t.offset(center, box.offset(j)))) pattern |= std::uint64_t{1} << j;
    return pattern;
}

namespace {

constexpr char kMagic[8] = {'R', 'D', 'N', 'S', 'N', 'A', 'P', '1'};
constexpr std::uint32_t kSnapshotVersion = 1;

template <typename T>
void put_le(std::ostream& out, T v) {
    unsigned char buf[sizeof(T)];
    for (std::size_t i = 0; i < sizeof(T); ++i) buf[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xFF);
    out.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <typename T>
T get_le(std::istream& in) {
    unsigned char buf[sizeof(T)];
    in.read(reinterpret_cast<char*>(buf), sizeof(T));
    if (!in) throw IoError("snapshot: truncated stream");
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(buf[i]) << (8 * i);
    return v;
}

}  // namespace

void write_snapshot(std::ostream& out, const Snapshot& snap) {
    const auto& t = snap.config.torus();
    out.write(kMagic, sizeof(kMagic));
    put_le<std::uint32_t>(out, kSnapshotVersion);
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(t.dim()));
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(t.side()));
    put_le<std::uint32_t>(out, 0);
    put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(snap.time));
    const auto words = snap.config.words();
    put_le<std::uint64_t>(out, words.size());
    for (auto w : words) put_le<std::uint64_t>(out, w);
    if (!out) throw IoError("snapshot: write failed");
}

Snapshot read_snapshot(std::istream& in) {
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) throw IoError("snapshot: bad magic");
    const auto version = get_le<std::uint32_t>(in);
    if (version != kSnapshotVersion) throw IoError("snapshot: unsupported version");
    const auto d = static_cast<int>(get_le<std::uint32_t>(in));
    const auto n = static_cast<int>(get_le<std::uint32_t>(in));
    (void)get_le<std::uint32_t>(in);
    const double time = std::bit_cast<double>(get_le<std::uint64_t>(in));
    const auto count = get_le<std::uint64_t>(in);
    Snapshot snap{ParticleConfig(Torus(d, n)), time};
    auto words = snap.config.words();
    if (count != words.size()) throw IoError("snapshot: word count does not match header geometry");
    for (auto& w : words) w = get_le<std::uint64_t>(in);
    const auto tail = snap.config.site_count() % 64;
    if (tail != 0 && (words.back() >> tail) != 0) throw IoError("snapshot: padding bits set");
    return snap;
}

void save_snapshot(const std::string& path, const Snapshot& snap) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path);
    write_snapshot(out, snap);
}

Snapshot load_snapshot(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    return read_snapshot(in);
}

}  // namespace rdness
