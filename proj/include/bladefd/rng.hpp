#ifndef BLADEFD_RNG_HPP
#define BLADEFD_RNG_HPP

#include <cmath>
#include <cstdint>
#include <string_view>

namespace bladefd {

/// Deterministic, platform-independent random streams.
///
/// Every random quantity in the project is drawn from a SplitMix64 stream
/// whose seed is derived from the master seed plus a list of 64-bit tags
/// (stream name hash, class label hash, unit id, trial id). The derivation
/// is a fold: state = mix(state ^ tag) for each tag, so distinct tag lists
/// give unrelated streams and results never depend on evaluation order.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1) with 53-bit resolution.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) {
        return lo + (hi - lo) * next_double();
    }

    /// Standard normal via Box-Muller (explicit implementation so the byte
    /// stream is identical across standard libraries).
    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = next_double();
        double u2 = next_double();
        while (u1 <= 0.0) u1 = next_double();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    /// Uniform integer in [0, n). Modulo bias is irrelevant here (n is tiny
    /// compared to 2^64) and the simple form keeps the stream portable.
    std::uint64_t next_below(std::uint64_t n) {
        return next_u64() % n;
    }

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// FNV-1a over a string; used to fold stream names and class labels into
/// seed derivations and to fingerprint configuration files.
inline std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 0xcbf29ce484222325ULL) {
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Seed derivation: fold tags into the master seed. Stable contract —
/// changing it invalidates recorded datasets, so treat it as a file format.
template <typename... Tags>
std::uint64_t derive_seed(std::uint64_t master, Tags... tags) {
    std::uint64_t s = mix64(master ^ 0x243f6a8885a308d3ULL);
    ((s = mix64(s ^ static_cast<std::uint64_t>(tags))), ...);
    return s;
}

} // namespace bladefd

#endif
