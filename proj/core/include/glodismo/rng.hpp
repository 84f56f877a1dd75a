#ifndef GLODISMO_RNG_HPP
#define GLODISMO_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>

namespace glodismo {

/// Deterministic random stream. All distributions are generated by hand on
/// top of mt19937_64 so that the same seed yields the same draws on every
/// platform (std::*_distribution output is implementation-defined).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t raw() { return eng_(); }

    /// Uniform on the open interval (0, 1).
    double uniform() {
        // 53 mantissa bits, offset by half an ulp so 0 and 1 are excluded.
        return (static_cast<double>(eng_() >> 11) + 0.5) * 0x1p-53;
    }

    /// Uniform integer in [0, bound).
    std::uint64_t below(std::uint64_t bound) { return eng_() % bound; }

    /// Standard normal via Box-Muller (cached spare).
    double gaussian() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform(), u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 2.0 * M_PI * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    /// Standard Gumbel(0,1): -log(-log(u)), u clamped to [eps, 1-eps].
    double gumbel() {
        constexpr double eps = 1e-12;
        double u = uniform();
        if (u < eps) u = eps;
        if (u > 1.0 - eps) u = 1.0 - eps;
        return -std::log(-std::log(u));
    }

    /// Standard Cauchy, i.e. Student t with 1 degree of freedom.
    double cauchy() { return std::tan(M_PI * (uniform() - 0.5)); }

    /// Beta(a, b) for small integer a, b via Gamma ratios built from
    /// products of uniforms (Gamma(k) = -log(u_1 ... u_k)).
    double beta_int(int a, int b) {
        double ga = 0.0, gb = 0.0;
        for (int i = 0; i < a; ++i) ga -= std::log(uniform());
        for (int i = 0; i < b; ++i) gb -= std::log(uniform());
        return ga / (ga + gb);
    }

    /// Deterministically derived child stream.
    Rng split(std::uint64_t stream) {
        std::uint64_t z = seed_mix_ ^ (stream + 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        z ^= eng_();
        return Rng(z ^ (z >> 31));
    }

    std::mt19937_64& engine() { return eng_; }

private:
    std::mt19937_64 eng_;
    std::uint64_t seed_mix_ = 0x2545f4914f6cdd1dULL;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace glodismo

#endif
