#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dbicm/capacity.hpp"

namespace dbicm {

/// Node-perspective variable-node degree distribution: fraction[j] of all VNs
/// has degree degrees[j]. Check-node degrees are concentrated at d_c.
struct DegreeDistribution {
    std::vector<int> degrees;      // ascending, distinct
    std::vector<double> fraction;  // same length, in [0,1], sums to 1

    double average_degree() const;
    void validate() const;
};

/// Channel assignment: p[i][j] is the fraction of all VNs that have degree
/// degrees[j] and are mapped to bit-channel type i. Row sums are m_i/m,
/// column sums reproduce the degree distribution.
struct ChannelAssignment {
    int m = 0;                      // modulation level
    std::vector<int> type_of_bit;   // phi, size m, values in [0, S)
    std::vector<int> degrees;
    std::vector<std::vector<double>> p;  // S x V

    int num_types() const { return static_cast<int>(p.size()); }
    std::vector<int> type_multiplicity() const;  // m_i
    DegreeDistribution column_sums() const;
    /// Max violation of the box/total/row/column constraints against the
    /// given degree distribution.
    double constraint_violation(const DegreeDistribution& lambda) const;
    void validate(const DegreeDistribution& lambda, double tol = 1e-6) const;
};

/// Groups bit positions whose capacities at the design SNR agree within
/// `tol`, ordered by descending capacity. Returns an assignment skeleton
/// (phi and S); p is left empty.
ChannelAssignment classify_bit_channels(const std::vector<double>& bit_capacity, double tol = 1e-3);

/// Integer per-type degree sequences g_0..g_{S-1}: g_i lists, in ascending
/// blocks, the degrees of the N*m_i/m VNs of type i, with block sizes
/// N*p[i][j] rounded by largest remainder under both marginals.
std::vector<std::vector<int>> expand_degree_sequences(const ChannelAssignment& ca, int N);

/// Sparse Tanner graph, VNs indexed 0..n-1, CNs 0..n_checks-1.
struct TannerCode {
    int n = 0;
    int n_checks = 0;
    std::vector<std::vector<int>> vn_edges;  // per VN: sorted CN indices
    std::vector<std::vector<int>> cn_edges;  // per CN: sorted VN indices
    std::uint64_t seed = 0;

    int k() const { return n - n_checks; }
    double rate() const { return static_cast<double>(k()) / n; }
    std::size_t edge_count() const;
    std::vector<int> vn_degrees() const;
    std::vector<int> cn_degrees() const;
    /// Syndrome of hard bits; true when all checks are satisfied.
    bool syndrome_ok(const std::vector<std::uint8_t>& bits) const;
};

/// PEG-like construction honoring both the degree sequences and the channel
/// assignment: VN v_i is mapped to bit-channel (i-1) mod m and takes the
/// next degree from its type's sequence. Edges go to the most distant
/// minimum-degree CN with residual capacity below d_c (random tie-break).
TannerCode constrained_peg(const ChannelAssignment& ca, int N, int d_c, double R,
                           std::uint64_t seed);

/// Single-type PEG on a plain degree distribution (ascending degree order).
TannerCode conventional_peg(const DegreeDistribution& lambda, int N, int d_c, double R,
                            std::uint64_t seed);

/// Shortest cycle length in the Tanner graph; 0 for forests.
int girth(const TannerCode& code);

/// Re-measures the channel assignment realized by a constructed code under
/// the continuous bit mapping, as per-cell VN counts over (type, degree).
std::vector<std::vector<int>> measure_assignment_counts(const TannerCode& code,
                                                        const ChannelAssignment& ca);

// alist text format
std::string to_alist(const TannerCode& code);
TannerCode from_alist(const std::string& text);
void write_alist_file(const TannerCode& code, const std::string& path);
TannerCode read_alist_file(const std::string& path);

// Self-describing sidecar for a code file: phi, P, degrees, seed.
std::string assignment_to_json(const ChannelAssignment& ca, std::uint64_t seed);
ChannelAssignment assignment_from_json(const std::string& text, std::uint64_t* seed = nullptr);

}  // namespace dbicm
