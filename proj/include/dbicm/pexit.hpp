#pragma once

#include <vector>

#include "dbicm/capacity.hpp"
#include "dbicm/ldpc.hpp"

namespace dbicm {

/// Mutual information of a consistent Gaussian LLR message N(sigma^2/2,
/// sigma^2); monotone from J(0) = 0 towards 1.
double j_function(double sigma);

/// Numeric inverse of j_function on [0, 1); round-trips within 1e-6.
double j_inverse(double mi);

/// Message std dev of the binary-input AWGN surrogate whose capacity is C.
double surrogate_sigma_from_capacity(double c);

struct PexitOptions {
    int max_iters = 1000;
    double target_mi = 1.0 - 1e-6;  // per-VN a-posteriori MI for convergence
};

struct PexitRun {
    bool converged = false;
    int iterations = 0;
    double min_app_mi = 0.0;
};

/// Per-edge EXIT iteration on the concrete graph, each VN fed by a surrogate
/// channel of capacity vn_capacity[v]. Stops at convergence or stall.
PexitRun pexit_run(const TannerCode& code, const std::vector<double>& vn_capacity,
                   const PexitOptions& opt = {});

struct ThresholdResult {
    double theta_db = 0.0;   // Es/N0 dB
    bool in_window = false;  // false: no convergence up to the window top
    int iterations = 0;      // iteration count at theta
};

/// Smallest Es/N0 (bisection to tol_db) at which pexit_run converges, with
/// VN v reading bit-channel (v mod m) of the capacity profile.
ThresholdResult pexit_threshold(const TannerCode& code, const CapacityProfile& profile,
                                double window_lo_db, double window_hi_db,
                                double tol_db = 0.01, const PexitOptions& opt = {});

}  // namespace dbicm
