#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>

namespace dbicm {

/// Deterministic random source. mt19937_64's output stream is fixed by the
/// standard and the Gaussian path is a hand-rolled Box-Muller, so streams are
/// reproducible across platforms and compilers for a given seed.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next_u64() { return eng_(); }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n).
    std::uint32_t uniform_int(std::uint32_t n) {
        // Rejection-free modulo is fine here: n is tiny compared to 2^64.
        return static_cast<std::uint32_t>(eng_() % n);
    }

    /// Standard normal via Box-Muller, caching the spare deviate.
    double gaussian() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        double u2 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double phi = 2.0 * M_PI * u2;
        spare_ = r * std::sin(phi);
        has_spare_ = true;
        return r * std::cos(phi);
    }

    /// Circular complex Gaussian with std dev `sigma` per real dimension.
    std::complex<double> cgaussian(double sigma) {
        const double re = gaussian();
        const double im = gaussian();
        return {sigma * re, sigma * im};
    }

  private:
    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace dbicm
