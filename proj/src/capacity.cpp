#include "dbicm/capacity.hpp"

#include <cfloat>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "dbicm/util.hpp"

namespace dbicm {

namespace {

constexpr std::size_t kChunks = 16;  // fixed so streams do not depend on worker count

std::uint64_t chunk_seed(std::uint64_t seed, std::size_t chunk) {
    // splitmix64 step
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (chunk + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

struct Accum {
    std::vector<double> sum;    // per bit, of log2 ratio
    std::vector<double> sumsq;
    double cm_sum = 0.0;
    double cm_sumsq = 0.0;
    std::size_t n = 0;

    explicit Accum(int m) : sum(m, 0.0), sumsq(m, 0.0) {}

    void merge(const Accum& o) {
        for (std::size_t i = 0; i < sum.size(); ++i) {
            sum[i] += o.sum[i];
            sumsq[i] += o.sumsq[i];
        }
        cm_sum += o.cm_sum;
        cm_sumsq += o.cm_sumsq;
        n += o.n;
    }
};

Estimate from_moments(double s, double sq, std::size_t n) {
    const double mean = s / static_cast<double>(n);
    const double var = std::max(0.0, sq / static_cast<double>(n) - mean * mean);
    return {mean, std::sqrt(var / static_cast<double>(n))};
}

void run_chunk(const Constellation& c, const DelayScheme& scheme, const NoiseModel& nm,
               std::size_t samples, std::uint64_t seed, Accum& acc) {
    const int m = c.bits();
    const int order = c.order();
    const auto& pts = c.points();
    const double sigma = std::sqrt(nm.sigma2);
    const double inv_two_sigma2 = 1.0 / (2.0 * nm.sigma2);
    const double log2e = 1.0 / std::log(2.0);

    // Bit i is demapped once every bit with a strictly larger delay has been
    // decoded, so its capacity conditions on exactly those bits. At
    // t_max = 1 this is the usual split: undelayed bits condition on the
    // whole delayed set, delayed bits condition on nothing.
    std::vector<std::uint32_t> cond_mask(m, 0);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            if (scheme.delays[j] > scheme.delays[i]) cond_mask[i] |= c.bit_mask(j);

    std::vector<std::uint32_t> bit_masks(m);
    for (int i = 0; i < m; ++i) bit_masks[i] = c.bit_mask(i);

    Rng rng(seed);
    std::vector<double> ll(order);
    std::vector<double> num_sum(m);
    std::vector<double> match_sum(m);

    for (std::size_t s = 0; s < samples; ++s) {
        const std::uint32_t tx = rng.uniform_int(static_cast<std::uint32_t>(order));
        const std::complex<double> noise = rng.cgaussian(sigma);
        const std::complex<double> y = pts[tx] + noise;

        double mx = -DBL_MAX;
        for (int v = 0; v < order; ++v) {
            const double dr = y.real() - pts[v].real();
            const double di = y.imag() - pts[v].imag();
            ll[v] = -(dr * dr + di * di) * inv_two_sigma2;
            mx = std::max(mx, ll[v]);
        }

        double full = 0.0;
        for (int i = 0; i < m; ++i) num_sum[i] = match_sum[i] = 0.0;
        for (std::uint32_t v = 0; v < static_cast<std::uint32_t>(order); ++v) {
            const double e = std::exp(ll[v] - mx);
            full += e;
            const std::uint32_t diff = v ^ static_cast<std::uint32_t>(tx);
            for (int i = 0; i < m; ++i) {
                if (diff & cond_mask[i]) continue;
                num_sum[i] += e;  // chi matching tx on the conditioning bits
                if (!(diff & bit_masks[i])) match_sum[i] += e;  // ... and on bit i
            }
        }

        for (int i = 0; i < m; ++i) {
            const double x = std::log2(num_sum[i] / std::max(match_sum[i], DBL_MIN));
            acc.sum[i] += x;
            acc.sumsq[i] += x * x;
        }
        const double xc =
            std::log2(full) - (ll[tx] - mx) * log2e;  // log2(sum p / p(y|tx))
        acc.cm_sum += xc;
        acc.cm_sumsq += xc * xc;
        ++acc.n;
    }
}

}  // namespace

CellCapacities measure_capacities(const Constellation& c, const DelayScheme& scheme,
                                  const NoiseModel& nm, std::size_t samples,
                                  std::uint64_t seed) {
    if (scheme.size() != c.bits())
        throw std::invalid_argument("measure_capacities: scheme length != modulation level");
    const int m = c.bits();
    const std::size_t per = samples / kChunks;
    const std::size_t extra = samples % kChunks;

    std::vector<Accum> parts(kChunks, Accum(m));
    parallel_for(kChunks, [&](std::size_t k) {
        run_chunk(c, scheme, nm, per + (k < extra ? 1 : 0), chunk_seed(seed, k), parts[k]);
    });
    Accum total(m);
    for (const auto& p : parts) total.merge(p);

    CellCapacities out;
    out.bit.resize(m);
    double agg = 0.0;
    double agg_var = 0.0;
    for (int i = 0; i < m; ++i) {
        const Estimate e = from_moments(total.sum[i], total.sumsq[i], total.n);
        out.bit[i] = {1.0 - e.value, e.stderr_};
        agg += out.bit[i].value;
        agg_var += e.stderr_ * e.stderr_;
    }
    out.aggregate = {agg, std::sqrt(agg_var)};
    const Estimate ecm = from_moments(total.cm_sum, total.cm_sumsq, total.n);
    out.cm = {std::log2(static_cast<double>(c.order())) - ecm.value, ecm.stderr_};
    return out;
}

Estimate bicm_bit_capacity(const Constellation& c, int bit, const NoiseModel& nm,
                           std::size_t samples, std::uint64_t seed) {
    if (bit < 0 || bit >= c.bits())
        throw std::invalid_argument("bicm_bit_capacity: bit out of range");
    return measure_capacities(c, DelayScheme::all_zero(c.bits()), nm, samples, seed).bit[bit];
}

Estimate dbicm_bit_capacity(const Constellation& c, int bit, const DelayScheme& scheme,
                            const NoiseModel& nm, std::size_t samples, std::uint64_t seed) {
    if (bit < 0 || bit >= c.bits())
        throw std::invalid_argument("dbicm_bit_capacity: bit out of range");
    if (scheme.delays.at(bit) != 0)
        throw std::invalid_argument("dbicm_bit_capacity: bit position is delayed");
    return measure_capacities(c, scheme, nm, samples, seed).bit[bit];
}

Estimate bicm_capacity(const Constellation& c, const NoiseModel& nm, std::size_t samples,
                       std::uint64_t seed) {
    return measure_capacities(c, DelayScheme::all_zero(c.bits()), nm, samples, seed).aggregate;
}

Estimate dbicm_capacity(const Constellation& c, const DelayScheme& scheme, const NoiseModel& nm,
                        std::size_t samples, std::uint64_t seed) {
    return measure_capacities(c, scheme, nm, samples, seed).aggregate;
}

Estimate cm_capacity(const Constellation& c, const NoiseModel& nm, std::size_t samples,
                     std::uint64_t seed) {
    return measure_capacities(c, DelayScheme::all_zero(c.bits()), nm, samples, seed).cm;
}

double snr_for_rate(const std::function<double(double)>& capacity_at_esn0_db, double target,
                    double lo_db, double hi_db, double tol_db) {
    double f_lo = capacity_at_esn0_db(lo_db);
    double f_hi = capacity_at_esn0_db(hi_db);
    if (target < f_lo || target > f_hi)
        throw std::runtime_error("snr_for_rate: target rate not bracketed by SNR window");
    while (hi_db - lo_db > tol_db) {
        const double mid = 0.5 * (lo_db + hi_db);
        if (capacity_at_esn0_db(mid) < target)
            lo_db = mid;
        else
            hi_db = mid;
    }
    return 0.5 * (lo_db + hi_db);
}

std::string CapacityReport::to_csv() const {
    std::ostringstream os;
    os.precision(10);
    os << "snr_db,bit,capacity,stderr\n";
    for (std::size_t g = 0; g < snr_db.size(); ++g) {
        for (std::size_t i = 0; i < cells[g].bit.size(); ++i)
            os << snr_db[g] << "," << i << "," << cells[g].bit[i].value << ","
               << cells[g].bit[i].stderr_ << "\n";
        os << snr_db[g] << ",aggregate," << cells[g].aggregate.value << ","
           << cells[g].aggregate.stderr_ << "\n";
    }
    return os.str();
}

CapacityReport capacity_report(const Constellation& c, const std::string& constellation_id,
                               const DelayScheme& scheme, const std::vector<double>& snr_db,
                               std::size_t samples, std::uint64_t seed, bool with_cm) {
    CapacityReport rep;
    rep.constellation_id = constellation_id;
    rep.scheme = scheme;
    rep.snr_db = snr_db;
    rep.samples = samples;
    rep.seed = seed;
    rep.cells.resize(snr_db.size());
    for (std::size_t g = 0; g < snr_db.size(); ++g)
        rep.cells[g] = measure_capacities(c, scheme, NoiseModel::from_esn0_db(snr_db[g]),
                                          samples, seed);
    (void)with_cm;  // cm is always carried in the cell
    return rep;
}

double CapacityProfile::at(int bit, double snr) const {
    const auto& cap = bit_cap.at(bit);
    if (snr <= snr_db.front()) return cap.front();
    if (snr >= snr_db.back()) return cap.back();
    std::size_t hi = 1;
    while (snr_db[hi] < snr) ++hi;
    const double t = (snr - snr_db[hi - 1]) / (snr_db[hi] - snr_db[hi - 1]);
    return cap[hi - 1] + t * (cap[hi] - cap[hi - 1]);
}

CapacityProfile make_profile(const Constellation& c, const DelayScheme& scheme, double lo_db,
                             double hi_db, double step_db, std::size_t samples,
                             std::uint64_t seed) {
    CapacityProfile p;
    for (double s = lo_db; s <= hi_db + 1e-9; s += step_db) p.snr_db.push_back(s);
    p.bit_cap.assign(c.bits(), std::vector<double>(p.snr_db.size(), 0.0));
    std::vector<CellCapacities> cells(p.snr_db.size());
    for (std::size_t g = 0; g < p.snr_db.size(); ++g)
        cells[g] = measure_capacities(c, scheme, NoiseModel::from_esn0_db(p.snr_db[g]),
                                      samples, seed);
    for (int i = 0; i < c.bits(); ++i)
        for (std::size_t g = 0; g < p.snr_db.size(); ++g)
            p.bit_cap[i][g] = cells[g].bit[i].value;
    return p;
}

}  // namespace dbicm
