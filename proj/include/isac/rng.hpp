// Counter-based PRNG (Philox4x32-10) with 64-bit seeding.
//
// Chosen over std::mt19937 because counter-based generation makes every
// Monte Carlo trial independently reproducible: trial k draws from
// sub_seed(seed, k) without consuming state shared with other trials,
// so results are bit-identical no matter how trials are scheduled.

#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>

namespace isac {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Derives the seed for trial `index` of a run seeded with `seed`.
inline std::uint64_t sub_seed(std::uint64_t seed, std::uint64_t index) {
    return seed ^ splitmix64(index + 1);
}

class Philox {
public:
    explicit Philox(std::uint64_t seed, std::uint64_t stream = 0)
        : key_{static_cast<std::uint32_t>(seed),
               static_cast<std::uint32_t>(seed >> 32)},
          ctr_{0, 0,
               static_cast<std::uint32_t>(stream),
               static_cast<std::uint32_t>(stream >> 32)} {}

    std::uint32_t next_u32() {
        if (have_ == 0) {
            block_ = round10(ctr_, key_);
            bump();
            have_ = 4;
        }
        return block_[4 - have_--];
    }

    std::uint64_t next_u64() {
        std::uint64_t lo = next_u32();
        std::uint64_t hi = next_u32();
        return lo | (hi << 32);
    }

    // Uniform on (0, 1]; never returns 0 so log() in Box-Muller is safe.
    double next_unit() {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    double next_uniform(double a, double b) {
        return a + (b - a) * next_unit();
    }

    // Standard normal via Box-Muller; draws come in pairs.
    double next_normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = next_unit();
        double u2 = next_unit();
        double r = std::sqrt(-2.0 * std::log(u1));
        double t = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(t);
        has_spare_ = true;
        return r * std::cos(t);
    }

    // CN(0,1): real and imaginary parts each N(0, 1/2).
    std::complex<double> next_cnormal() {
        double re = next_normal();
        double im = next_normal();
        return {re * 0.70710678118654752440, im * 0.70710678118654752440};
    }

private:
    static constexpr std::uint32_t kMul0 = 0xD2511F53u;
    static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

    static std::array<std::uint32_t, 4> round10(std::array<std::uint32_t, 4> c,
                                                std::array<std::uint32_t, 2> k) {
        for (int i = 0; i < 10; ++i) {
            std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * c[0];
            std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * c[2];
            std::array<std::uint32_t, 4> n;
            n[0] = static_cast<std::uint32_t>(p1 >> 32) ^ c[1] ^ k[0];
            n[1] = static_cast<std::uint32_t>(p1);
            n[2] = static_cast<std::uint32_t>(p0 >> 32) ^ c[3] ^ k[1];
            n[3] = static_cast<std::uint32_t>(p0);
            c = n;
            k[0] += kWeyl0;
            k[1] += kWeyl1;
        }
        return c;
    }

    void bump() {
        if (++ctr_[0] == 0 && ++ctr_[1] == 0 && ++ctr_[2] == 0) ++ctr_[3];
    }

    std::array<std::uint32_t, 2> key_;
    std::array<std::uint32_t, 4> ctr_;
    std::array<std::uint32_t, 4> block_{};
    int have_ = 0;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace isac
