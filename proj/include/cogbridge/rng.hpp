#pragma once
// Deterministic RNG helpers. All sampling maps raw mt19937_64 output through
// our own transforms so results do not depend on libstdc++ distribution
// internals.

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace cogbridge {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// A tag in a seed-derivation path: either a number or a name (hashed).
struct SeedTag {
    std::uint64_t v;
    SeedTag(std::uint64_t x) : v(x) {}
    SeedTag(int x) : v(static_cast<std::uint64_t>(x)) {}
    SeedTag(const char* s) : v(1469598103934665603ULL) {
        for (; *s; ++s) {
            v ^= static_cast<unsigned char>(*s);
            v *= 1099511628211ULL;
        }
    }
    SeedTag(const std::string& s) : SeedTag(s.c_str()) {}
};

// Derive a stream seed from a master seed and a tag path, e.g.
// mix_seed(master, {"fold", f}). Distinct paths give independent streams.
inline std::uint64_t mix_seed(std::uint64_t master, std::initializer_list<SeedTag> tags) {
    std::uint64_t s = splitmix64(master);
    for (SeedTag t : tags) s = splitmix64(s ^ (t.v + 0x632be59bd9b4e019ULL));
    return s;
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t u64() { return eng_(); }

    // Uniform in [0, 1).
    double uniform() { return static_cast<double>(u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n). n must be > 0.
    std::uint64_t below(std::uint64_t n) {
        return static_cast<std::uint64_t>(
            (static_cast<__uint128_t>(u64()) * n) >> 64);
    }

    int range_int(int lo, int hi_inclusive) {
        return lo + static_cast<int>(below(static_cast<std::uint64_t>(hi_inclusive - lo + 1)));
    }

    // Standard normal via Box-Muller (cached pair).
    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double theta = 2.0 * M_PI * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 eng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace cogbridge
