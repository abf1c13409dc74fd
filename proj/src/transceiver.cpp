#include "dbicm/transceiver.hpp"

#include <algorithm>
#include <bit>
#include <cfloat>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "dbicm/rng.hpp"
#include "dbicm/util.hpp"
#include "json.hpp"

namespace dbicm {

std::vector<double> demap(const Constellation& c, std::complex<double> y, const NoiseModel& nm,
                          const std::vector<BitPrior>& priors) {
    const int m = c.bits();
    const int order = c.order();
    if (static_cast<int>(priors.size()) != m)
        throw std::invalid_argument("demap: priors size != modulation level");
    const auto& pts = c.points();

    // log weight of each label: channel likelihood plus per-bit log priors.
    std::vector<double> lp0(m, 0.0), lp1(m, 0.0);
    for (int i = 0; i < m; ++i) {
        switch (priors[i].kind) {
            case BitPrior::Kind::Unknown:
                break;
            case BitPrior::Kind::Known:
                lp0[i] = priors[i].value == 0 ? 0.0 : -DBL_MAX;
                lp1[i] = priors[i].value == 1 ? 0.0 : -DBL_MAX;
                break;
            case BitPrior::Kind::Soft: {
                // llr = log(P0/P1); log P0 = -log1p(e^-llr), log P1 = -log1p(e^llr)
                const double l = priors[i].llr;
                lp0[i] = l > 30.0 ? 0.0 : (l < -30.0 ? l : -std::log1p(std::exp(-l)));
                lp1[i] = l < -30.0 ? 0.0 : (l > 30.0 ? -l : -std::log1p(std::exp(l)));
                break;
            }
        }
    }

    std::vector<double> lw(order);
    double mx = -DBL_MAX;
    for (int v = 0; v < order; ++v) {
        double w = nm.log_likelihood(y, pts[v]);
        for (int i = 0; i < m; ++i)
            w += c.label_bit(static_cast<std::uint32_t>(v), i) ? lp1[i] : lp0[i];
        lw[v] = w;
        mx = std::max(mx, w);
    }

    std::vector<double> llr(m);
    for (int i = 0; i < m; ++i) {
        double s0 = 0.0, s1 = 0.0;
        for (int v = 0; v < order; ++v) {
            if (lw[v] <= -DBL_MAX / 2) continue;
            const double e = std::exp(lw[v] - mx);
            if (c.label_bit(static_cast<std::uint32_t>(v), i))
                s1 += e;
            else
                s0 += e;
        }
        llr[i] = std::log(std::max(s0, DBL_MIN)) - std::log(std::max(s1, DBL_MIN));
    }
    return llr;
}

std::vector<double> demap_initial(const Constellation& c, std::complex<double> y,
                                  const NoiseModel& nm) {
    return demap(c, y, nm, std::vector<BitPrior>(c.bits()));
}

DecodeResult bp_decode(const TannerCode& code, const std::vector<double>& llr, int max_iter) {
    if (static_cast<int>(llr.size()) != code.n)
        throw std::invalid_argument("bp_decode: llr size != n");
    DecodeResult res;
    std::vector<double> ch(code.n);
    for (int v = 0; v < code.n; ++v) ch[v] = std::clamp(llr[v], -50.0, 50.0);

    auto harden = [&](const std::vector<double>& total) {
        std::vector<std::uint8_t> bits(code.n);
        for (int v = 0; v < code.n; ++v) bits[v] = total[v] < 0.0 ? 1 : 0;
        return bits;
    };

    res.bits = harden(ch);
    res.extrinsic.assign(code.n, 0.0);
    if (code.syndrome_ok(res.bits)) {
        res.success = true;
        return res;
    }

    // Flat edge arrays in VN-major order, with the CN-side view.
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

    std::vector<double> msg_vc(n_edges), msg_cv(n_edges, 0.0);
    std::vector<double> total(code.n);
    for (int it = 1; it <= max_iter; ++it) {
        for (int v = 0; v < code.n; ++v) {
            double sum = ch[v];
            for (std::size_t e = vn_start[v]; e < vn_start[v + 1]; ++e) sum += msg_cv[e];
            total[v] = sum;
            for (std::size_t e = vn_start[v]; e < vn_start[v + 1]; ++e)
                msg_vc[e] = std::clamp(sum - msg_cv[e], -50.0, 50.0);
        }
        for (int c = 0; c < code.n_checks; ++c) {
            double prod = 1.0;
            for (std::size_t e : cn_eids[c]) prod *= std::tanh(0.5 * msg_vc[e]);
            for (std::size_t e : cn_eids[c]) {
                const double t = std::tanh(0.5 * msg_vc[e]);
                double rest = std::abs(t) > 1e-12 ? prod / t : 1.0;
                if (std::abs(t) <= 1e-12) {
                    // recompute excluding this edge
                    rest = 1.0;
                    for (std::size_t e2 : cn_eids[c])
                        if (e2 != e) rest *= std::tanh(0.5 * msg_vc[e2]);
                }
                rest = std::clamp(rest, -0.999999999999, 0.999999999999);
                msg_cv[e] = 2.0 * std::atanh(rest);
            }
        }
        for (int v = 0; v < code.n; ++v) {
            double sum = ch[v];
            for (std::size_t e = vn_start[v]; e < vn_start[v + 1]; ++e) sum += msg_cv[e];
            total[v] = sum;
        }
        res.iterations = it;
        res.bits = harden(total);
        if (code.syndrome_ok(res.bits)) {
            res.success = true;
            break;
        }
    }
    for (int v = 0; v < code.n; ++v) res.extrinsic[v] = total[v] - ch[v];
    return res;
}

Encoder::Encoder(const TannerCode& code) : n_(code.n) {
    const int words = (n_ + 63) / 64;
    std::vector<std::vector<std::uint64_t>> rows(code.n_checks,
                                                 std::vector<std::uint64_t>(words, 0));
    for (int c = 0; c < code.n_checks; ++c)
        for (int v : code.cn_edges[c]) rows[c][v / 64] |= 1ull << (v % 64);

    auto get = [&](const std::vector<std::uint64_t>& r, int col) {
        return (r[col / 64] >> (col % 64)) & 1ull;
    };
    auto xor_into = [&](std::vector<std::uint64_t>& dst, const std::vector<std::uint64_t>& src) {
        for (int w = 0; w < words; ++w) dst[w] ^= src[w];
    };

    int rank = 0;
    std::vector<char> is_pivot(n_, 0);
    for (int col = 0; col < n_ && rank < code.n_checks; ++col) {
        int pr = -1;
        for (int r = rank; r < code.n_checks; ++r)
            if (get(rows[r], col)) {
                pr = r;
                break;
            }
        if (pr < 0) continue;
        std::swap(rows[rank], rows[pr]);
        for (int r = 0; r < code.n_checks; ++r)
            if (r != rank && get(rows[r], col)) xor_into(rows[r], rows[rank]);
        pivot_cols_.push_back(col);
        is_pivot[col] = 1;
        ++rank;
    }
    rows.resize(rank);
    rows_ = std::move(rows);
    for (int col = 0; col < n_; ++col)
        if (!is_pivot[col]) info_cols_.push_back(col);
}

std::vector<std::uint8_t> Encoder::encode(const std::vector<std::uint8_t>& info) const {
    if (info.size() != info_cols_.size())
        throw std::invalid_argument("Encoder::encode: info size != k");
    const int words = (n_ + 63) / 64;
    std::vector<std::uint64_t> x(words, 0);
    for (std::size_t j = 0; j < info.size(); ++j)
        if (info[j]) x[info_cols_[j] / 64] |= 1ull << (info_cols_[j] % 64);
    for (std::size_t r = 0; r < rows_.size(); ++r) {
        int parity = 0;
        for (int w = 0; w < words; ++w)
            parity ^= std::popcount(rows_[r][w] & x[w]) & 1;
        if (parity) x[pivot_cols_[r] / 64] |= 1ull << (pivot_cols_[r] % 64);
    }
    std::vector<std::uint8_t> out(n_);
    for (int v = 0; v < n_; ++v) out[v] = (x[v / 64] >> (v % 64)) & 1ull;
    return out;
}

void Tally::add(const Tally& o) {
    bits += o.bits;
    bit_errors += o.bit_errors;
    codewords += o.codewords;
    word_errors += o.word_errors;
}

double spectral_efficiency(int m, double rate, int t_n, int t_max) {
    return m * rate * static_cast<double>(t_n) / (t_n + t_max);
}

Tally run_frame(const FramePipeline& p, const NoiseModel& nm, std::uint64_t seed) {
    const Constellation& c = *p.constellation;
    const int m = c.bits();
    const TannerCode& code = *p.code;
    if (p.scheme.size() != m)
        throw std::invalid_argument("run_frame: scheme length != modulation level");
    if (p.scheme.t_max() > 1)
        throw std::invalid_argument("run_frame: only t_max <= 1 is supported");
    if (code.n % m != 0)
        throw std::invalid_argument("run_frame: code length not a multiple of m");
    const int n_sym = code.n / m;
    const int t_max = p.scheme.t_max();
    const int t_n = p.t_n;

    Rng rng(seed);
    // All information bits are drawn up front so the bit stream does not
    // depend on the slot loop details.
    std::vector<std::vector<std::uint8_t>> cw(t_n);
    for (int q = 0; q < t_n; ++q) {
        std::vector<std::uint8_t> info(p.encoder->k());
        for (auto& b : info) b = static_cast<std::uint8_t>(rng.uniform_int(2));
        cw[q] = p.encoder->encode(info);
    }

    const double sigma = std::sqrt(nm.sigma2);
    // slot_llr[s][i]: current (possibly refined) LLR of bit position i on
    // symbol s of the previous slot, kept one slot long.
    std::vector<std::vector<double>> prev_llr, cur_llr(n_sym);
    std::vector<std::complex<double>> y(n_sym);
    std::vector<BitPrior> priors(m);

    Tally tally;
    for (int t = 0; t < t_n + t_max; ++t) {
        // Source codeword of position i at this slot; -1 marks a vacant
        // all-zero sub-block known to both ends.
        std::vector<int> src(m);
        for (int i = 0; i < m; ++i) {
            const int q = t - p.scheme.delays[i];
            src[i] = (q >= 0 && q < t_n) ? q : -1;
        }

        for (int s = 0; s < n_sym; ++s) {
            std::uint32_t label = 0;
            for (int i = 0; i < m; ++i) {
                const int bit = src[i] < 0 ? 0 : cw[src[i]][s * m + i];
                if (bit) label |= c.bit_mask(i);
            }
            y[s] = c.point(label) + rng.cgaussian(sigma);
        }

        for (int i = 0; i < m; ++i)
            priors[i] = src[i] < 0 ? BitPrior::known(0) : BitPrior::unknown();
        for (int s = 0; s < n_sym; ++s) cur_llr[s] = demap(c, y[s], nm, priors);

        const int q = t - t_max;  // codeword completed at this slot
        if (q >= 0 && q < t_n) {
            std::vector<double> frame_llr(code.n);
            for (int j = 0; j < code.n; ++j) {
                const int i = j % m, s = j / m;
                frame_llr[j] =
                    p.scheme.delays[i] == 0 && t_max == 1 ? prev_llr[s][i] : cur_llr[s][i];
            }
            const DecodeResult dec = bp_decode(code, frame_llr, p.max_bp_iters);

            tally.codewords++;
            std::uint64_t errs = 0;
            for (int j = 0; j < code.n; ++j) errs += dec.bits[j] != cw[q][j];
            tally.bits += code.n;
            tally.bit_errors += errs;
            tally.word_errors += errs != 0;

            // Refine this slot's undelayed LLRs with the freshly decoded
            // delayed sub-blocks: hard values on success, soft extrinsic
            // otherwise.
            bool any_delayed = false;
            bool any_live_undelayed = false;
            for (int i = 0; i < m; ++i) {
                any_delayed |= p.scheme.delays[i] != 0 && src[i] == q;
                any_live_undelayed |= p.scheme.delays[i] == 0 && src[i] >= 0;
            }
            if (any_delayed && any_live_undelayed) {
                for (int s = 0; s < n_sym; ++s) {
                    for (int i = 0; i < m; ++i) {
                        if (p.scheme.delays[i] != 0 && src[i] == q) {
                            const int j = s * m + i;
                            priors[i] = dec.success
                                            ? BitPrior::known(dec.bits[j])
                                            : BitPrior::soft(dec.extrinsic[j]);
                        } else if (src[i] < 0) {
                            priors[i] = BitPrior::known(0);
                        } else {
                            priors[i] = BitPrior::unknown();
                        }
                    }
                    const std::vector<double> refined = demap(c, y[s], nm, priors);
                    for (int i = 0; i < m; ++i)
                        if (p.scheme.delays[i] == 0) cur_llr[s][i] = refined[i];
                }
            }
        }
        prev_llr = cur_llr;
    }
    return tally;
}

namespace {

std::uint64_t frame_seed(std::uint64_t base, std::size_t point, std::uint64_t frame) {
    std::uint64_t z = base + 0x9E3779B97F4A7C15ull * (point * 0x100000001ull + frame + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

}  // namespace

std::vector<BerPoint> run_ber(const FramePipeline& p, const BerSweepConfig& cfg) {
    const double rate = static_cast<double>(p.encoder->k()) / p.encoder->n();
    const int m = p.constellation->bits();

    std::vector<BerPoint> done;
    if (!cfg.checkpoint_path.empty()) {
        std::ifstream f(cfg.checkpoint_path);
        if (f) {
            nlohmann::json j;
            f >> j;
            for (const auto& e : j["points"]) {
                BerPoint pt;
                pt.ebn0_db = e.at("ebn0_db").get<double>();
                pt.esn0_db = e.at("esn0_db").get<double>();
                pt.frames = e.at("frames").get<std::uint64_t>();
                pt.tally.bits = e.at("bits").get<std::uint64_t>();
                pt.tally.bit_errors = e.at("bit_errors").get<std::uint64_t>();
                pt.tally.codewords = e.at("codewords").get<std::uint64_t>();
                pt.tally.word_errors = e.at("word_errors").get<std::uint64_t>();
                done.push_back(pt);
            }
        }
    }
    auto save_checkpoint = [&](const std::vector<BerPoint>& pts) {
        if (cfg.checkpoint_path.empty()) return;
        nlohmann::json j;
        j["points"] = nlohmann::json::array();
        for (const auto& pt : pts) {
            j["points"].push_back({{"ebn0_db", pt.ebn0_db},
                                   {"esn0_db", pt.esn0_db},
                                   {"frames", pt.frames},
                                   {"bits", pt.tally.bits},
                                   {"bit_errors", pt.tally.bit_errors},
                                   {"codewords", pt.tally.codewords},
                                   {"word_errors", pt.tally.word_errors}});
        }
        const std::string tmp = cfg.checkpoint_path + ".tmp";
        {
            std::ofstream f(tmp, std::ios::trunc);
            f << j.dump(2) << "\n";
        }
        std::rename(tmp.c_str(), cfg.checkpoint_path.c_str());
    };

    std::vector<BerPoint> out;
    for (std::size_t g = 0; g < cfg.ebn0_db.size(); ++g) {
        const double ebn0 = cfg.ebn0_db[g];
        bool resumed = false;
        for (const auto& pt : done)
            if (std::abs(pt.ebn0_db - ebn0) < 1e-9) {
                out.push_back(pt);
                resumed = true;
                break;
            }
        if (resumed) continue;

        const NoiseModel nm = NoiseModel::from_ebn0_db(ebn0, rate, m);
        BerPoint pt;
        pt.ebn0_db = ebn0;
        pt.esn0_db = nm.esn0_db();
        const std::size_t batch = std::max<std::size_t>(1, 2 * worker_count());
        while (pt.tally.word_errors < cfg.min_word_errors && pt.frames < cfg.max_frames) {
            const std::size_t todo =
                std::min<std::uint64_t>(batch, cfg.max_frames - pt.frames);
            std::vector<Tally> parts(todo);
            parallel_for(todo, [&](std::size_t i) {
                parts[i] = run_frame(p, nm, frame_seed(cfg.seed, g, pt.frames + i));
            });
            for (const auto& t : parts) pt.tally.add(t);
            pt.frames += todo;
        }
        out.push_back(pt);
        save_checkpoint(out);
    }
    return out;
}

std::string ber_to_csv(const std::vector<BerPoint>& points) {
    std::ostringstream os;
    os.precision(10);
    os << "ebn0_db,esn0_db,frames,codewords,bits,bit_errors,word_errors,ber,fer\n";
    for (const auto& pt : points)
        os << pt.ebn0_db << "," << pt.esn0_db << "," << pt.frames << "," << pt.tally.codewords
           << "," << pt.tally.bits << "," << pt.tally.bit_errors << "," << pt.tally.word_errors
           << "," << pt.tally.ber() << "," << pt.tally.fer() << "\n";
    return os.str();
}

}  // namespace dbicm
