#include "dbicm/channel.hpp"

#include <cmath>
#include <stdexcept>

namespace dbicm {

NoiseModel NoiseModel::from_sigma2(double s2) {
    if (!(s2 > 0.0)) throw std::invalid_argument("NoiseModel: sigma2 must be > 0");
    return NoiseModel{s2};
}

NoiseModel NoiseModel::from_esn0_db(double esn0_db) {
    const double esn0 = std::pow(10.0, esn0_db / 10.0);
    return NoiseModel{1.0 / (2.0 * esn0)};
}

NoiseModel NoiseModel::from_ebn0_db(double ebn0_db, double rate, int bits) {
    if (!(rate > 0.0) || bits <= 0)
        throw std::invalid_argument("NoiseModel: rate and bits must be positive");
    return from_esn0_db(ebn0_db + 10.0 * std::log10(rate * bits));
}

double NoiseModel::esn0_db() const { return 10.0 * std::log10(esn0_linear()); }

double NoiseModel::ebn0_db(double rate, int bits) const {
    return esn0_db() - 10.0 * std::log10(rate * bits);
}

std::vector<std::complex<double>> sample_noise(const NoiseModel& nm, std::size_t count,
                                               std::uint64_t seed) {
    const double sigma = std::sqrt(nm.sigma2);
    Rng rng(seed);
    std::vector<std::complex<double>> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) out.push_back(rng.cgaussian(sigma));
    return out;
}

}  // namespace dbicm
