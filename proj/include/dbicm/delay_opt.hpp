#pragma once

#include <cstdint>
#include <vector>

#include "dbicm/capacity.hpp"
#include "dbicm/constellation.hpp"

namespace dbicm {

/// All length-`m_half` delay vectors with entries in [0, t_max], excluding
/// the all-equal vectors (which coincide with BICM behavior).
std::vector<DelayScheme> enumerate_schemes(int m_half, int t_max);

/// {T, half-swapped T}, deduplicated. Requires even length.
std::vector<DelayScheme> scheme_equivalence_class(const DelayScheme& scheme);

struct DelayCandidate {
    DelayScheme scheme;       // PAM half scheme
    double pam_esn0_db = 0;   // Es/N0 at which the PAM reaches the half-rate target
};

struct DelaySearchResult {
    DelayScheme best;                       // full QAM scheme [T_A*, T_A*]
    std::vector<DelayScheme> equivalence;   // Theorem-2 class of `best`
    std::vector<DelayCandidate> candidates; // PAM search table, includes BICM baseline
    double qam_esn0_db = 0;        // required QAM Es/N0 at target spectral efficiency
    double bicm_esn0_db = 0;       // same for the undelayed baseline
    double gain_db = 0;            // bicm - dbicm requirement
    double target_rate = 0;        // code rate R; spectral efficiency is m*R
};

/// Two-step search: optimize the half scheme on the underlying sqrt(M)-PAM
/// (the half-rate target is (m/2)*R bits per PAM symbol), then duplicate it
/// onto both halves. SNR objectives use common random numbers and bisection.
DelaySearchResult optimize_delay(const Constellation& qam, double target_rate, int t_max,
                                 std::size_t samples, std::uint64_t seed,
                                 double window_lo_db = -12.0, double window_hi_db = 30.0,
                                 double tol_db = 0.02);

}  // namespace dbicm
