#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "dbicm/capacity.hpp"
#include "dbicm/ldpc.hpp"
#include "dbicm/pexit.hpp"

namespace dbicm {

struct DeConfig {
    int population = 0;   // N1; >= 4 whenever generations > 0
    int generations = 0;  // N2
    double f = 0.5;       // differential weight
    double cr = 0.5;      // crossover probability
    std::uint64_t seed = 0;
};

/// Everything a candidate evaluation needs: the bit-channel capacity curves
/// at the design point, the threshold search window, and the code ensemble
/// parameters (scoring uses a reduced-length construction).
struct DesignPoint {
    CapacityProfile profile;
    double window_lo_db = -10.0;  // Es/N0 dB
    double window_hi_db = 20.0;
    int d_c = 0;
    double rate = 0.0;
    int n_proto = 1200;  // scoring code length, multiple of profile.bits()
    double pexit_tol_db = 0.01;
};

/// Projects x onto {x in [0,1]^V : sum x = 1, sum d_j x_j = avg_target} by
/// alternating clipping with the affine projection.
void repair_lambda(std::vector<double>& x, const std::vector<int>& degrees, double avg_target);

/// Alternating row/column rescaling of the S x V matrix (flattened row-major)
/// towards the given marginals, with clipping at zero. Returns false when the
/// violation does not fall below 1e-9.
bool repair_assignment(std::vector<double>& p_flat, const std::vector<double>& row_target,
                       const std::vector<double>& col_target);

using RepairFn = std::function<void(std::vector<double>&)>;

/// Classic rand/1/bin step over the whole population, children repaired.
std::vector<std::vector<double>> mutate_recombine(const std::vector<std::vector<double>>& pop,
                                                  double f, double cr, std::uint64_t seed,
                                                  const RepairFn& repair);

struct LambdaStageResult {
    DegreeDistribution lambda;
    double theta_db = 0.0;  // Es/N0 dB
    TannerCode code;
    // best-ever theta after the initial scoring and after each generation
    // (size generations + 1)
    std::vector<double> generation_best;
};

/// Stage one: DE over the VN degree distribution, each candidate scored by a
/// conventional PEG construction plus its PEXIT threshold.
LambdaStageResult optimize_lambda(const DeConfig& cfg, const DesignPoint& dp,
                                  const std::vector<int>& degrees);

struct AssignmentStageResult {
    ChannelAssignment assignment;
    double theta_db = 0.0;
    TannerCode code;
    std::vector<double> generation_best;
};

/// Stage two: DE over the channel assignment matrix under the fixed lambda,
/// candidates scored by the constrained construction.
AssignmentStageResult optimize_assignment(const DeConfig& cfg, const DesignPoint& dp,
                                          const DegreeDistribution& lambda,
                                          const std::vector<int>& type_of_bit);

}  // namespace dbicm
