#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "dbicm/channel.hpp"
#include "dbicm/constellation.hpp"
#include "dbicm/ldpc.hpp"

namespace dbicm {

/// Per-bit demapper prior. LLR sign convention throughout: positive means
/// bit value 0 is more likely.
struct BitPrior {
    enum class Kind { Unknown, Known, Soft };
    Kind kind = Kind::Unknown;
    int value = 0;      // for Known
    double llr = 0.0;   // for Soft

    static BitPrior unknown() { return {}; }
    static BitPrior known(int v) { return {Kind::Known, v, 0.0}; }
    static BitPrior soft(double llr) { return {Kind::Soft, 0, llr}; }
};

/// Exact per-bit LLRs of one received symbol via log-sum-exp over the
/// constellation, with each label weighted by the bit priors.
std::vector<double> demap(const Constellation& c, std::complex<double> y, const NoiseModel& nm,
                          const std::vector<BitPrior>& priors);

/// All-uniform priors.
std::vector<double> demap_initial(const Constellation& c, std::complex<double> y,
                                  const NoiseModel& nm);

struct DecodeResult {
    std::vector<std::uint8_t> bits;
    bool success = false;
    std::vector<double> extrinsic;  // total posterior minus channel input
    int iterations = 0;
};

/// Flooding-schedule sum-product decoding; stops at zero syndrome. Inputs
/// are clamped to +/-50.
DecodeResult bp_decode(const TannerCode& code, const std::vector<double>& llr, int max_iter);

/// Systematic-by-permutation encoder: Gaussian elimination over GF(2) picks
/// pivot columns; the remaining (free) columns carry the information bits.
class Encoder {
  public:
    explicit Encoder(const TannerCode& code);

    int n() const { return n_; }
    int k() const { return static_cast<int>(info_cols_.size()); }
    const std::vector<int>& info_positions() const { return info_cols_; }

    std::vector<std::uint8_t> encode(const std::vector<std::uint8_t>& info) const;

  private:
    int n_ = 0;
    std::vector<int> info_cols_;
    std::vector<int> pivot_cols_;                       // one per reduced row
    std::vector<std::vector<std::uint64_t>> rows_;      // RREF rows, bit-packed
};

/// One DBICM (or BICM, when the scheme is all-zero) frame of t_n codewords
/// over t_n + t_max slots. Codeword bit j rides symbol j / m at bit position
/// j mod m, delayed by the position's slot count.
struct FramePipeline {
    const TannerCode* code = nullptr;
    const Encoder* encoder = nullptr;
    const Constellation* constellation = nullptr;
    DelayScheme scheme;
    int t_n = 10;
    int max_bp_iters = 50;
};

struct Tally {
    std::uint64_t bits = 0;
    std::uint64_t bit_errors = 0;
    std::uint64_t codewords = 0;
    std::uint64_t word_errors = 0;

    double ber() const { return bits ? static_cast<double>(bit_errors) / bits : 0.0; }
    double fer() const { return codewords ? static_cast<double>(word_errors) / codewords : 0.0; }
    void add(const Tally& o);
};

/// Runs one frame: encode, map with sub-block delays, AWGN, demap with
/// decoded-feedback refinement, decode each codeword exactly once. Errors
/// are counted over all coded bits.
Tally run_frame(const FramePipeline& p, const NoiseModel& nm, std::uint64_t seed);

/// Spectrum efficiency in information bits per channel use.
double spectral_efficiency(int m, double rate, int t_n, int t_max);

struct BerPoint {
    double ebn0_db = 0.0;
    double esn0_db = 0.0;
    Tally tally;
    std::uint64_t frames = 0;
};

struct BerSweepConfig {
    std::vector<double> ebn0_db;
    std::uint64_t min_word_errors = 100;  // stop a point after this many
    std::uint64_t max_frames = 1000;
    std::uint64_t seed = 0;
    std::string checkpoint_path;  // optional resumable tally file
};

/// Monte-Carlo BER/FER sweep; frames run in parallel with per-frame seeds.
std::vector<BerPoint> run_ber(const FramePipeline& p, const BerSweepConfig& cfg);

std::string ber_to_csv(const std::vector<BerPoint>& points);

}  // namespace dbicm
