#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "dbicm/rng.hpp"

namespace dbicm {

/// AWGN noise bookkeeping for unit-energy complex symbols.
/// sigma2 is the noise variance per real dimension, so Es/N0 = 1/(2*sigma2).
struct NoiseModel {
    double sigma2 = 0.5;

    static NoiseModel from_sigma2(double s2);
    static NoiseModel from_esn0_db(double esn0_db);
    /// Eb/N0 given code rate R and modulation level m; uses the nominal
    /// spectral efficiency m*R.
    static NoiseModel from_ebn0_db(double ebn0_db, double rate, int bits);

    double esn0_linear() const { return 1.0 / (2.0 * sigma2); }
    double esn0_db() const;
    double ebn0_db(double rate, int bits) const;

    /// log p(y|z) = -|y-z|^2 / (2*sigma2). Callers exponentiate with
    /// max-subtraction.
    double log_likelihood(std::complex<double> y, std::complex<double> z) const {
        const double dr = y.real() - z.real();
        const double di = y.imag() - z.imag();
        return -(dr * dr + di * di) / (2.0 * sigma2);
    }
};

/// i.i.d. circular Gaussian samples, variance sigma2 per dimension,
/// deterministic under a fixed seed.
std::vector<std::complex<double>> sample_noise(const NoiseModel& nm, std::size_t count,
                                               std::uint64_t seed);

}  // namespace dbicm
