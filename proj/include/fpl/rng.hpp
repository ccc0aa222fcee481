#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace fpl {

// Deterministic random source. mt19937_64 has a standard-specified output
// sequence and all transforms below are hand-rolled, so streams are
// bit-stable across compilers and platforms (std::normal_distribution is not).
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    double uniform01() {
        // 53 mantissa bits -> [0,1)
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    double uniform(double a, double b) { return a + (b - a) * uniform01(); }

    std::uint64_t bits() { return gen_(); }

    std::uint64_t index(std::uint64_t n) { return gen_() % n; }

    // Box-Muller, no cached spare (keeps the stream layout obvious).
    double normal() {
        double u1 = uniform01();
        while (u1 <= 0x1.0p-60)
            u1 = uniform01();
        const double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
    }

    std::vector<double> normal_vec(int n) {
        std::vector<double> v(static_cast<std::size_t>(n));
        for (auto& x : v)
            x = normal();
        return v;
    }

    // Uniform direction on the unit sphere.
    std::vector<double> unit_vector(int n) {
        std::vector<double> v;
        double s = 0.0;
        do {
            v = normal_vec(n);
            s = 0.0;
            for (double x : v)
                s += x * x;
        } while (s < 1e-300);
        const double inv = 1.0 / std::sqrt(s);
        for (auto& x : v)
            x *= inv;
        return v;
    }

  private:
    std::mt19937_64 gen_;
};

// Stateless mixer for deriving independent per-item seeds (splitmix64 step).
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t item) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (item + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace fpl
