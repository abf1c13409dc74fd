#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <vector>

#include "dbicm/rng.hpp"
#include "dbicm/transceiver.hpp"
#include "doctest.h"

using namespace dbicm;

namespace {

TannerCode make_code(int n, int n_checks, const std::vector<std::vector<int>>& cn_edges) {
    TannerCode c;
    c.n = n;
    c.n_checks = n_checks;
    c.vn_edges.assign(n, {});
    c.cn_edges = cn_edges;
    for (int ch = 0; ch < n_checks; ++ch)
        for (int v : cn_edges[ch]) c.vn_edges[v].push_back(ch);
    return c;
}

TannerCode regular_code(int n, int dv, int dc, std::uint64_t seed) {
    DegreeDistribution lambda;
    lambda.degrees = {dv};
    lambda.fraction = {1.0};
    return conventional_peg(lambda, n, dc, 1.0 - static_cast<double>(dv) / dc, seed);
}

// Exact bitwise marginal LLRs by enumeration over all words satisfying the
// checks, weighting word x by exp(sum_v +/- llr_v / 2).
std::vector<double> exact_marginals(const TannerCode& code, const std::vector<double>& llr) {
    std::vector<double> s0(code.n, 0.0), s1(code.n, 0.0);
    for (std::uint32_t w = 0; w < (1u << code.n); ++w) {
        std::vector<std::uint8_t> x(code.n);
        for (int v = 0; v < code.n; ++v) x[v] = (w >> v) & 1;
        if (!code.syndrome_ok(x)) continue;
        double lw = 0.0;
        for (int v = 0; v < code.n; ++v) lw += x[v] ? -0.5 * llr[v] : 0.5 * llr[v];
        const double e = std::exp(lw);
        for (int v = 0; v < code.n; ++v) (x[v] ? s1[v] : s0[v]) += e;
    }
    std::vector<double> out(code.n);
    for (int v = 0; v < code.n; ++v) out[v] = std::log(s0[v]) - std::log(s1[v]);
    return out;
}

}  // namespace

TEST_CASE("qpsk demapper has the known closed form") {
    const Constellation q = Constellation::gray_qam(4);
    const NoiseModel nm = NoiseModel::from_esn0_db(2.0);
    Rng rng(3);
    for (int trial = 0; trial < 200; ++trial) {
        const std::complex<double> y{4.0 * rng.uniform() - 2.0, 4.0 * rng.uniform() - 2.0};
        const auto llr = demap_initial(q, y, nm);
        CHECK(std::abs(llr[0] - (-std::sqrt(2.0) * y.real() / nm.sigma2)) < 1e-9);
        CHECK(std::abs(llr[1] - (-std::sqrt(2.0) * y.imag() / nm.sigma2)) < 1e-9);
    }
}

TEST_CASE("vanishing noise recovers the transmitted label") {
    const Constellation q = Constellation::gray_qam(16);
    const NoiseModel nm = NoiseModel::from_sigma2(1e-4);
    for (int v = 0; v < 16; ++v) {
        const auto llr = demap_initial(q, q.point(v), nm);
        for (int i = 0; i < 4; ++i) {
            if (q.label_bit(v, i))
                CHECK(llr[i] < -10.0);
            else
                CHECK(llr[i] > 10.0);
        }
    }
}

TEST_CASE("hard priors restrict the demapper to the label subset") {
    const Constellation q = Constellation::gray_qam(16);
    const NoiseModel nm = NoiseModel::from_esn0_db(4.0);
    const std::complex<double> y{0.31, -0.77};

    std::vector<BitPrior> priors(4);
    priors[1] = BitPrior::known(1);
    priors[3] = BitPrior::known(0);
    const auto llr = demap(q, y, nm, priors);

    const std::vector<std::pair<int, int>> fixed{{1, 1}, {3, 0}};
    const auto labels = q.subset(fixed);
    for (int i : {0, 2}) {
        double s0 = 0.0, s1 = 0.0;
        for (auto v : labels) {
            const double e = std::exp(nm.log_likelihood(y, q.point(v)));
            (q.label_bit(v, i) ? s1 : s0) += e;
        }
        CHECK(llr[i] == doctest::Approx(std::log(s0 / s1)).epsilon(1e-9));
    }
}

TEST_CASE("soft priors interpolate between uniform and hard") {
    const Constellation q = Constellation::gray_qam(16);
    const NoiseModel nm = NoiseModel::from_esn0_db(4.0);
    const std::complex<double> y{-0.42, 0.13};

    std::vector<BitPrior> zero(4);
    zero[2] = BitPrior::soft(0.0);
    const auto with_zero = demap(q, y, nm, zero);
    const auto uniform = demap_initial(q, y, nm);
    for (int i = 0; i < 4; ++i) CHECK(with_zero[i] == doctest::Approx(uniform[i]).epsilon(1e-12));

    std::vector<BitPrior> soft(4), hard(4);
    soft[1] = BitPrior::soft(40.0);   // overwhelming evidence for bit value 0
    hard[1] = BitPrior::known(0);
    const auto a = demap(q, y, nm, soft);
    const auto b = demap(q, y, nm, hard);
    for (int i = 0; i < 4; ++i)
        if (i != 1) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-6));
}

TEST_CASE("negating the real part flips exactly the leading bit") {
    const Constellation q = Constellation::gray_qam(16);
    const NoiseModel nm = NoiseModel::from_esn0_db(6.0);
    Rng rng(8);
    for (int trial = 0; trial < 100; ++trial) {
        const std::complex<double> y{3.0 * rng.uniform() - 1.5, 3.0 * rng.uniform() - 1.5};
        const auto a = demap_initial(q, y, nm);
        const auto b = demap_initial(q, {-y.real(), y.imag()}, nm);
        // mirroring the real axis flips the MSB of the in-phase label half
        CHECK(b[0] == doctest::Approx(-a[0]).epsilon(1e-9));
        CHECK(b[1] == doctest::Approx(a[1]).epsilon(1e-9));
        CHECK(b[2] == doctest::Approx(a[2]).epsilon(1e-9));
        CHECK(b[3] == doctest::Approx(a[3]).epsilon(1e-9));
    }
}

TEST_CASE("decoder accepts a noiseless codeword without iterating") {
    const TannerCode code = regular_code(48, 3, 6, 2);
    const Encoder enc(code);
    Rng rng(4);
    std::vector<std::uint8_t> info(enc.k());
    for (auto& b : info) b = static_cast<std::uint8_t>(rng.uniform_int(2));
    const auto cw = enc.encode(info);
    REQUIRE(code.syndrome_ok(cw));

    std::vector<double> llr(code.n);
    for (int v = 0; v < code.n; ++v) llr[v] = cw[v] ? -5.0 : 5.0;
    const DecodeResult dec = bp_decode(code, llr, 50);
    CHECK(dec.success);
    CHECK(dec.iterations == 0);
    CHECK(dec.bits == cw);
    for (double e : dec.extrinsic) CHECK(e == 0.0);
}

TEST_CASE("sum-product totals equal exact marginals on a cycle-free code") {
    // tree-shaped graph: three chained checks over six variables
    const TannerCode code = make_code(6, 3, {{0, 1, 2}, {2, 3, 4}, {4, 5}});
    Rng rng(21);
    int tested = 0;
    for (int trial = 0; trial < 40 && tested < 5; ++trial) {
        std::vector<double> llr(code.n);
        for (auto& l : llr) l = 4.0 * rng.uniform() - 2.0;
        const auto exact = exact_marginals(code, llr);
        std::vector<std::uint8_t> map_word(code.n);
        for (int v = 0; v < code.n; ++v) map_word[v] = exact[v] < 0.0 ? 1 : 0;
        // only configurations whose bitwise-MAP word violates a check keep
        // the decoder iterating to its fixed point
        if (code.syndrome_ok(map_word)) continue;
        const DecodeResult dec = bp_decode(code, llr, 30);
        CHECK_FALSE(dec.success);
        for (int v = 0; v < code.n; ++v)
            CHECK(llr[v] + dec.extrinsic[v] == doctest::Approx(exact[v]).epsilon(1e-6));
        ++tested;
    }
    CHECK(tested >= 5);
}

TEST_CASE("encoder produces valid codewords with the advertised dimension") {
    const ChannelAssignment ca = [] {
        ChannelAssignment a;
        a.m = 4;
        a.type_of_bit = {0, 1, 0, 1};
        a.degrees = {2, 3, 6};
        a.p = {{0.30, 0.15, 0.05}, {0.25, 0.20, 0.05}};
        return a;
    }();
    const TannerCode code = constrained_peg(ca, 400, 5, 0.4, 6);
    const Encoder enc(code);
    CHECK(enc.n() == 400);
    CHECK(enc.k() >= code.k());  // dependent checks only add dimension
    Rng rng(17);
    for (int trial = 0; trial < 5; ++trial) {
        std::vector<std::uint8_t> info(enc.k());
        for (auto& b : info) b = static_cast<std::uint8_t>(rng.uniform_int(2));
        const auto cw = enc.encode(info);
        CHECK(code.syndrome_ok(cw));
        const auto& pos = enc.info_positions();
        for (std::size_t j = 0; j < pos.size(); ++j) CHECK(cw[pos[j]] == info[j]);
    }
}

TEST_CASE("all-zero scheme reproduces a plain bicm loop bit for bit") {
    const Constellation q = Constellation::gray_qam(4);
    const TannerCode code = regular_code(48, 3, 6, 2);
    const Encoder enc(code);
    FramePipeline p;
    p.code = &code;
    p.encoder = &enc;
    p.constellation = &q;
    p.scheme = DelayScheme::all_zero(2);
    p.t_n = 4;
    p.max_bp_iters = 30;
    const NoiseModel nm = NoiseModel::from_esn0_db(1.0);
    const std::uint64_t seed = 555;
    const Tally got = run_frame(p, nm, seed);

    // independent re-implementation sharing only the raw random stream
    Rng rng(seed);
    std::vector<std::vector<std::uint8_t>> cw(p.t_n);
    for (int t = 0; t < p.t_n; ++t) {
        std::vector<std::uint8_t> info(enc.k());
        for (auto& b : info) b = static_cast<std::uint8_t>(rng.uniform_int(2));
        cw[t] = enc.encode(info);
    }
    Tally want;
    const int n_sym = code.n / 2;
    const double sigma = std::sqrt(nm.sigma2);
    for (int t = 0; t < p.t_n; ++t) {
        std::vector<double> llr(code.n);
        for (int s = 0; s < n_sym; ++s) {
            std::uint32_t label = 0;
            if (cw[t][2 * s]) label |= q.bit_mask(0);
            if (cw[t][2 * s + 1]) label |= q.bit_mask(1);
            const std::complex<double> y = q.point(label) + rng.cgaussian(sigma);
            const auto bits = demap_initial(q, y, nm);
            llr[2 * s] = bits[0];
            llr[2 * s + 1] = bits[1];
        }
        const DecodeResult dec = bp_decode(code, llr, p.max_bp_iters);
        std::uint64_t errs = 0;
        for (int j = 0; j < code.n; ++j) errs += dec.bits[j] != cw[t][j];
        want.codewords++;
        want.bits += code.n;
        want.bit_errors += errs;
        want.word_errors += errs != 0;
    }
    CHECK(got.bits == want.bits);
    CHECK(got.bit_errors == want.bit_errors);
    CHECK(got.codewords == want.codewords);
    CHECK(got.word_errors == want.word_errors);
}

TEST_CASE("delayed scheme runs and accounts every codeword once") {
    const Constellation q = Constellation::gray_qam(16);
    const TannerCode code = regular_code(48, 3, 6, 2);
    const Encoder enc(code);
    FramePipeline p;
    p.code = &code;
    p.encoder = &enc;
    p.constellation = &q;
    p.scheme = DelayScheme({0, 1, 0, 1});
    p.t_n = 3;
    p.max_bp_iters = 30;
    const Tally t = run_frame(p, NoiseModel::from_esn0_db(8.0), 1);
    CHECK(t.codewords == 3);
    CHECK(t.bits == 3u * 48u);

    // identical seeds give identical tallies
    const Tally again = run_frame(p, NoiseModel::from_esn0_db(8.0), 1);
    CHECK(t.bit_errors == again.bit_errors);

    FramePipeline bad = p;
    bad.scheme = DelayScheme({0, 2, 0, 2});
    CHECK_THROWS(run_frame(bad, NoiseModel::from_esn0_db(8.0), 1));
    bad.scheme = DelayScheme({0, 1});
    CHECK_THROWS(run_frame(bad, NoiseModel::from_esn0_db(8.0), 1));
}

TEST_CASE("spectral efficiency accounts for the tail slot") {
    CHECK(spectral_efficiency(4, 0.5, 100, 1) == doctest::Approx(200.0 / 101.0).epsilon(1e-12));
    CHECK(spectral_efficiency(4, 0.5, 100, 0) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("ber sweep is deterministic and clean at high snr") {
    const Constellation q = Constellation::gray_qam(4);
    const TannerCode code = regular_code(48, 3, 6, 2);
    const Encoder enc(code);
    FramePipeline p;
    p.code = &code;
    p.encoder = &enc;
    p.constellation = &q;
    p.scheme = DelayScheme::all_zero(2);
    p.t_n = 4;
    p.max_bp_iters = 30;

    BerSweepConfig cfg;
    cfg.ebn0_db = {2.0, 12.0};
    cfg.min_word_errors = 5;
    cfg.max_frames = 20;
    cfg.seed = 77;
    const auto a = run_ber(p, cfg);
    const auto b = run_ber(p, cfg);
    REQUIRE(a.size() == 2);
    CHECK(a[0].tally.bit_errors == b[0].tally.bit_errors);
    CHECK(a[0].frames == b[0].frames);
    CHECK(a[1].tally.bit_errors == 0);  // 12 dB Eb/N0 on QPSK is error-free here
    const double rate = static_cast<double>(enc.k()) / enc.n();
    CHECK(a[0].esn0_db ==
          doctest::Approx(2.0 + 10.0 * std::log10(rate * 2.0)).epsilon(1e-9));

    const std::string csv = ber_to_csv(a);
    CHECK(csv.find("ebn0_db,esn0_db") != std::string::npos);

    // checkpointed rerun resumes every finished point untouched
    cfg.checkpoint_path = "/tmp/dbicm_test_ckpt.json";
    std::remove(cfg.checkpoint_path.c_str());
    const auto first = run_ber(p, cfg);
    const auto resumed = run_ber(p, cfg);
    CHECK(resumed[0].tally.bit_errors == first[0].tally.bit_errors);
    CHECK(resumed[1].frames == first[1].frames);
    std::remove(cfg.checkpoint_path.c_str());
}
