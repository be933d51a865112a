#ifndef DOTMAT_RNG_HPP
#define DOTMAT_RNG_HPP

#include <cstdint>
#include <cstring>
#include <random>
#include <string_view>
#include <vector>

namespace dotmat::rng {

// splitmix64 step; used for seed stretching and stateless per-key draws.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t mix(std::uint64_t x) {
    return splitmix64(x);
}

// FNV-1a accumulator for deriving independent seeds from structured keys.
// The byte feed is explicit so results do not depend on platform layout.
class SeedDigest {
public:
    SeedDigest& bytes(const void* data, std::size_t n) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < n; ++i) {
            h_ ^= p[i];
            h_ *= 0x100000001b3ULL;
        }
        return *this;
    }
    SeedDigest& u64(std::uint64_t v) {
        unsigned char b[8];
        for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
        return bytes(b, 8);
    }
    SeedDigest& f64(double v) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, sizeof bits);
        return u64(bits);
    }
    SeedDigest& str(std::string_view s) {
        bytes(s.data(), s.size());
        return u64(s.size());
    }
    std::uint64_t value() const {
        std::uint64_t s = h_;
        return splitmix64(s);
    }

private:
    std::uint64_t h_ = 0xcbf29ce484222325ULL;
};

inline std::uint64_t derive_seed(std::uint64_t master, std::string_view tag) {
    return SeedDigest{}.u64(master).str(tag).value();
}

inline std::uint64_t derive_seed(std::uint64_t master, std::string_view tag, std::uint64_t a) {
    return SeedDigest{}.u64(master).str(tag).u64(a).value();
}

// mt19937_64 output is pinned by the standard; only the raw stream is used
// so draws are identical across standard libraries.
using Engine = std::mt19937_64;

inline Engine make_engine(std::uint64_t seed) {
    return Engine{seed};
}

// Uniform double in the open interval (0, 1).
inline double uniform_unit(Engine& gen) {
    return (static_cast<double>(gen() >> 11) + 0.5) * 0x1.0p-53;
}

// Uniform double in the half-open interval (0, 1].
inline double uniform_unit_closed_top(Engine& gen) {
    return (static_cast<double>(gen() >> 11) + 1.0) * 0x1.0p-53;
}

// Unbiased integer in [0, n) by rejection.
inline std::uint64_t uniform_below(Engine& gen, std::uint64_t n) {
    const std::uint64_t limit = (UINT64_MAX / n) * n;
    std::uint64_t x;
    do {
        x = gen();
    } while (x >= limit);
    return x % n;
}

// Fisher-Yates; avoids std::shuffle's implementation-defined draw pattern.
template <typename T>
void shuffle(std::vector<T>& v, Engine& gen) {
    for (std::size_t i = v.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(uniform_below(gen, i));
        std::swap(v[i - 1], v[j]);
    }
}

}  // namespace dotmat::rng

#endif  // DOTMAT_RNG_HPP
