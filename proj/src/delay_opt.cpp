#include "dbicm/delay_opt.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dbicm {

std::vector<DelayScheme> enumerate_schemes(int m_half, int t_max) {
    if (m_half < 1) throw std::invalid_argument("enumerate_schemes: m_half must be >= 1");
    std::vector<DelayScheme> out;
    std::vector<int> t(m_half, 0);
    const long total = static_cast<long>(std::pow(t_max + 1, m_half));
    for (long idx = 0; idx < total; ++idx) {
        long v = idx;
        for (int i = 0; i < m_half; ++i) {
            t[i] = static_cast<int>(v % (t_max + 1));
            v /= (t_max + 1);
        }
        bool all_equal = true;
        for (int i = 1; i < m_half; ++i) all_equal &= (t[i] == t[0]);
        if (all_equal) continue;
        if (*std::min_element(t.begin(), t.end()) != 0) continue;  // T_min = 0 convention
        out.push_back(DelayScheme(t));
    }
    std::sort(out.begin(), out.end(),
              [](const DelayScheme& a, const DelayScheme& b) { return a.delays < b.delays; });
    return out;
}

std::vector<DelayScheme> scheme_equivalence_class(const DelayScheme& scheme) {
    const int m = scheme.size();
    if (m % 2 != 0)
        throw std::invalid_argument("scheme_equivalence_class: even length required");
    std::vector<int> swapped(scheme.delays.begin() + m / 2, scheme.delays.end());
    swapped.insert(swapped.end(), scheme.delays.begin(), scheme.delays.begin() + m / 2);
    std::vector<DelayScheme> out{scheme};
    if (swapped != scheme.delays) out.push_back(DelayScheme(swapped));
    return out;
}

DelaySearchResult optimize_delay(const Constellation& qam, double target_rate, int t_max,
                                 std::size_t samples, std::uint64_t seed, double window_lo_db,
                                 double window_hi_db, double tol_db) {
    if (qam.kind() != ModKind::Qam)
        throw std::invalid_argument("optimize_delay: QAM constellation required");
    if (!(target_rate > 0.0 && target_rate < 1.0))
        throw std::invalid_argument("optimize_delay: rate must be in (0, 1)");
    const int m_half = qam.bits() / 2;
    const Constellation pam = Constellation::gray_pam(1 << m_half);
    const double pam_target = m_half * target_rate;  // bits per PAM symbol

    auto required_snr = [&](const DelayScheme& t) {
        return snr_for_rate(
            [&](double esn0_db) {
                return dbicm_capacity(pam, t, NoiseModel::from_esn0_db(esn0_db), samples, seed)
                    .value;
            },
            pam_target, window_lo_db, window_hi_db, tol_db);
    };

    DelaySearchResult res;
    res.target_rate = target_rate;
    const double bicm_pam_snr = required_snr(DelayScheme::all_zero(m_half));
    res.candidates.push_back({DelayScheme::all_zero(m_half), bicm_pam_snr});

    DelayScheme best_half = DelayScheme::all_zero(m_half);
    double best_snr = bicm_pam_snr;
    for (const DelayScheme& cand : enumerate_schemes(m_half, t_max)) {
        const double snr = required_snr(cand);
        res.candidates.push_back({cand, snr});
        // Lexicographically smallest wins ties; candidates come pre-sorted.
        if (snr < best_snr - 1e-12) {
            best_snr = snr;
            best_half = cand;
        }
    }

    std::vector<int> full = best_half.delays;
    full.insert(full.end(), best_half.delays.begin(), best_half.delays.end());
    res.best = DelayScheme(full);
    res.equivalence = scheme_equivalence_class(res.best);
    // PAM and QAM SNR requirements differ by the 3.01 dB split of the symbol
    // energy across the two dimensions; the gain in dB is the same.
    const double dim_split_db = 10.0 * std::log10(2.0);
    res.qam_esn0_db = best_snr + dim_split_db;
    res.bicm_esn0_db = bicm_pam_snr + dim_split_db;
    res.gain_db = bicm_pam_snr - best_snr;
    return res;
}

}  // namespace dbicm
