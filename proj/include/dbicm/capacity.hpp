#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "dbicm/channel.hpp"
#include "dbicm/constellation.hpp"

namespace dbicm {

struct Estimate {
    double value = 0.0;
    double stderr_ = 0.0;
};

/// One Monte-Carlo pass worth of capacity figures for a (constellation,
/// delay scheme, SNR) cell. Delayed bit positions carry their unconditioned
/// bit-channel capacity; undelayed positions carry the capacity conditioned
/// on the delayed bits. `cm` is the constellation-constrained mutual
/// information of the same sample stream.
struct CellCapacities {
    std::vector<Estimate> bit;
    Estimate aggregate;  // sum over bit positions
    Estimate cm;
};

/// Single-pass estimator over `samples` draws of (symbol, noise). The sample
/// stream depends only on (seed, samples, constellation order), so runs for
/// different delay schemes at the same SNR share common random numbers.
CellCapacities measure_capacities(const Constellation& c, const DelayScheme& scheme,
                                  const NoiseModel& nm, std::size_t samples,
                                  std::uint64_t seed);

Estimate bicm_bit_capacity(const Constellation& c, int bit, const NoiseModel& nm,
                           std::size_t samples, std::uint64_t seed);
Estimate dbicm_bit_capacity(const Constellation& c, int bit, const DelayScheme& scheme,
                            const NoiseModel& nm, std::size_t samples, std::uint64_t seed);
Estimate bicm_capacity(const Constellation& c, const NoiseModel& nm, std::size_t samples,
                       std::uint64_t seed);
Estimate dbicm_capacity(const Constellation& c, const DelayScheme& scheme,
                        const NoiseModel& nm, std::size_t samples, std::uint64_t seed);
Estimate cm_capacity(const Constellation& c, const NoiseModel& nm, std::size_t samples,
                     std::uint64_t seed);

/// Monotone bisection for the Es/N0 (dB) at which `capacity_at_esn0_db`
/// reaches `target`, to `tol_db`. Throws if the target is outside the
/// bracket's capacity range.
double snr_for_rate(const std::function<double(double)>& capacity_at_esn0_db, double target,
                    double lo_db, double hi_db, double tol_db = 0.01);

/// Per-bit and aggregate capacities over an SNR grid, with standard errors.
struct CapacityReport {
    std::string constellation_id;
    DelayScheme scheme;
    std::vector<double> snr_db;          // Es/N0 grid
    std::vector<CellCapacities> cells;   // one per grid point
    std::size_t samples = 0;
    std::uint64_t seed = 0;

    std::string to_csv() const;
};

CapacityReport capacity_report(const Constellation& c, const std::string& constellation_id,
                               const DelayScheme& scheme, const std::vector<double>& snr_db,
                               std::size_t samples, std::uint64_t seed, bool with_cm = false);

/// Piecewise-linear per-bit capacity curves over Es/N0 dB, clamped at the
/// grid edges. Backs the PEXIT surrogate channels.
struct CapacityProfile {
    std::vector<double> snr_db;                 // ascending
    std::vector<std::vector<double>> bit_cap;   // [bit][grid index]

    int bits() const { return static_cast<int>(bit_cap.size()); }
    double at(int bit, double snr) const;
};

CapacityProfile make_profile(const Constellation& c, const DelayScheme& scheme, double lo_db,
                             double hi_db, double step_db, std::size_t samples,
                             std::uint64_t seed);

}  // namespace dbicm
