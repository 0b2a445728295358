#ifndef KINKSCAN_RNG_HPP
#define KINKSCAN_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>

namespace kinkscan {

// splitmix64 step, used to derive decorrelated substream seeds from a master
// seed. Fixed algorithm so seed derivation is part of the reproducibility
// contract.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
    return splitmix64(splitmix64(master ^ 0xD1B54A32D192ED03ULL) + stream);
}

// Deterministic random source. mt19937_64 is fully specified by the standard;
// the gaussian transform is pinned here (polar Marsaglia) instead of using
// std::normal_distribution, whose stream is implementation-defined.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    // Uniform on (0,1); zero is rejected so quantile transforms stay finite.
    double uniform01() {
        for (;;) {
            double u = static_cast<double>(gen_() >> 11) * 0x1.0p-53;
            if (u > 0.0) return u;
        }
    }

    double uniform(double a, double b) { return a + (b - a) * uniform01(); }

    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform01() - 1.0;
            v = 2.0 * uniform01() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        double m = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * m;
        have_spare_ = true;
        return u * m;
    }

    double gaussian(double mean, double sd) { return mean + sd * gaussian(); }

private:
    std::mt19937_64 gen_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

} // namespace kinkscan

#endif
