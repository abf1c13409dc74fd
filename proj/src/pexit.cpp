#include "dbicm/pexit.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace dbicm {

namespace {

constexpr double kSigmaMax = 40.0;
constexpr double kSigmaStep = 0.01;

/// E[log2(1 + e^{-L})] with L ~ N(sigma^2/2, sigma^2), by quadrature over
/// the standard normal.
double softbit_entropy(double sigma) {
    const double lo = -10.0, hi = 10.0;
    const int n = 2000;
    const double h = (hi - lo) / n;
    const double inv_sqrt_2pi = 0.3989422804014327;
    double acc = 0.0;
    for (int k = 0; k <= n; ++k) {
        const double x = lo + k * h;
        const double l = 0.5 * sigma * sigma + sigma * x;
        double v;
        if (l < -30.0)
            v = -l;
        else
            v = std::log1p(std::exp(-l));
        const double w = (k == 0 || k == n) ? 0.5 : 1.0;
        acc += w * inv_sqrt_2pi * std::exp(-0.5 * x * x) * v;
    }
    return acc * h / std::log(2.0);
}

struct JTable {
    std::vector<double> mi;  // mi[k] = J(k * kSigmaStep), nondecreasing

    JTable() {
        const int n = static_cast<int>(kSigmaMax / kSigmaStep) + 1;
        mi.resize(n);
        double running = 0.0;
        for (int k = 0; k < n; ++k) {
            running = std::max(running, 1.0 - softbit_entropy(k * kSigmaStep));
            mi[k] = std::min(running, 1.0);
        }
    }
};

const JTable& j_table() {
    static const JTable t;
    return t;
}

}  // namespace

double j_function(double sigma) {
    const auto& t = j_table().mi;
    if (sigma <= 0.0) return 0.0;
    if (sigma >= kSigmaMax) return t.back();
    const double pos = sigma / kSigmaStep;
    const std::size_t k = static_cast<std::size_t>(pos);
    const double frac = pos - k;
    return t[k] + frac * (t[k + 1] - t[k]);
}

double j_inverse(double mi) {
    const auto& t = j_table().mi;
    if (mi <= 0.0) return 0.0;
    if (mi >= t.back()) return kSigmaMax;
    // Exact inverse of the piecewise-linear j_function.
    const auto it = std::upper_bound(t.begin(), t.end(), mi);
    const std::size_t k = (it - t.begin()) - 1;
    const double diff = t[k + 1] - t[k];
    const double frac = diff > 0.0 ? (mi - t[k]) / diff : 0.0;
    return (k + frac) * kSigmaStep;
}

double surrogate_sigma_from_capacity(double c) {
    if (c < 0.0 || c > 1.0)
        throw std::invalid_argument("surrogate_sigma_from_capacity: capacity out of [0,1]");
    return j_inverse(c);
}

PexitRun pexit_run(const TannerCode& code, const std::vector<double>& vn_capacity,
                   const PexitOptions& opt) {
    if (static_cast<int>(vn_capacity.size()) != code.n)
        throw std::invalid_argument("pexit_run: capacity vector size != n");

    // Flat edge layout: per-VN slices, plus the CN-side view of edge ids.
    const std::size_t n_edges = code.edge_count();
    std::vector<std::size_t> vn_start(code.n + 1, 0);
    for (int v = 0; v < code.n; ++v)
        vn_start[v + 1] = vn_start[v] + code.vn_edges[v].size();
    std::vector<std::vector<std::size_t>> cn_eids(code.n_checks);
    {
        std::size_t eid = 0;
        for (int v = 0; v < code.n; ++v)
            for (int c : code.vn_edges[v]) cn_eids[c].push_back(eid++);
    }

    std::vector<double> sig_ch(code.n);
    for (int v = 0; v < code.n; ++v) sig_ch[v] = surrogate_sigma_from_capacity(vn_capacity[v]);

    std::vector<double> i_vc(n_edges, 0.0);  // VN -> CN mutual information
    std::vector<double> i_cv(n_edges, 0.0);  // CN -> VN mutual information
    std::vector<double> s_cv(n_edges, 0.0);  // J^{-1}(i_cv)^2 cache

    PexitRun run;
    double prev_min = -1.0;
    int stalls = 0;
    for (int it = 1; it <= opt.max_iters; ++it) {
        for (int v = 0; v < code.n; ++v) {
            double total = sig_ch[v] * sig_ch[v];
            for (std::size_t e = vn_start[v]; e < vn_start[v + 1]; ++e) {
                const double s = j_inverse(i_cv[e]);
                s_cv[e] = s * s;
                total += s_cv[e];
            }
            for (std::size_t e = vn_start[v]; e < vn_start[v + 1]; ++e)
                i_vc[e] = j_function(std::sqrt(std::max(0.0, total - s_cv[e])));
        }
        for (int c = 0; c < code.n_checks; ++c) {
            double total = 0.0;
            for (std::size_t e : cn_eids[c]) {
                const double s = j_inverse(1.0 - i_vc[e]);
                s_cv[e] = s * s;  // reuse as scratch for this CN pass
                total += s_cv[e];
            }
            for (std::size_t e : cn_eids[c])
                i_cv[e] = 1.0 - j_function(std::sqrt(std::max(0.0, total - s_cv[e])));
        }

        double min_app = 1.0;
        for (int v = 0; v < code.n; ++v) {
            double total = sig_ch[v] * sig_ch[v];
            for (std::size_t e = vn_start[v]; e < vn_start[v + 1]; ++e) {
                const double s = j_inverse(i_cv[e]);
                total += s * s;
            }
            min_app = std::min(min_app, j_function(std::sqrt(total)));
        }
        run.iterations = it;
        run.min_app_mi = min_app;
        if (min_app > opt.target_mi) {
            run.converged = true;
            return run;
        }
        if (min_app - prev_min < 1e-10) {
            if (++stalls >= 3) return run;  // fixed point below target
        } else {
            stalls = 0;
        }
        prev_min = min_app;
    }
    return run;
}

ThresholdResult pexit_threshold(const TannerCode& code, const CapacityProfile& profile,
                                double window_lo_db, double window_hi_db, double tol_db,
                                const PexitOptions& opt) {
    const int m = profile.bits();
    auto run_at = [&](double snr_db) {
        std::vector<double> cap(code.n);
        for (int v = 0; v < code.n; ++v)
            cap[v] = std::clamp(profile.at(v % m, snr_db), 0.0, 1.0);
        return pexit_run(code, cap, opt);
    };

    ThresholdResult res;
    PexitRun hi = run_at(window_hi_db);
    if (!hi.converged) {
        res.theta_db = window_hi_db;
        res.in_window = false;
        res.iterations = hi.iterations;
        return res;
    }
    PexitRun at_theta = hi;
    double lo = window_lo_db, hi_db = window_hi_db;
    const PexitRun at_lo = run_at(lo);
    if (at_lo.converged) {
        res.theta_db = lo;
        res.in_window = true;
        res.iterations = at_lo.iterations;
        return res;
    }
    while (hi_db - lo > tol_db) {
        const double mid = 0.5 * (lo + hi_db);
        const PexitRun r = run_at(mid);
        if (r.converged) {
            hi_db = mid;
            at_theta = r;
        } else {
            lo = mid;
        }
    }
    res.theta_db = hi_db;
    res.in_window = true;
    res.iterations = at_theta.iterations;
    return res;
}

}  // namespace dbicm
