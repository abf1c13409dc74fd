// dbicm: batch front-end for capacity analysis, delay-scheme search, code
// design, and Monte-Carlo simulation.

#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "dbicm/capacity.hpp"
#include "dbicm/de_opt.hpp"
#include "dbicm/delay_opt.hpp"
#include "dbicm/ldpc.hpp"
#include "dbicm/pexit.hpp"
#include "dbicm/transceiver.hpp"
#include "dbicm/util.hpp"

namespace {

using namespace dbicm;

class ConfigError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

Constellation parse_modulation(const std::string& s) {
    if (s == "4pam") return Constellation::gray_pam(4);
    if (s == "8pam") return Constellation::gray_pam(8);
    if (s == "qpsk" || s == "4qam") return Constellation::gray_qam(4);
    if (s == "16qam") return Constellation::gray_qam(16);
    if (s == "64qam") return Constellation::gray_qam(64);
    if (s == "256qam") return Constellation::gray_qam(256);
    throw ConfigError("unknown modulation: " + s);
}

std::vector<double> parse_range(const std::string& s) {
    // "lo:step:hi" or a single value
    std::vector<double> parts;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ':')) parts.push_back(std::stod(tok));
    if (parts.size() == 1) return parts;
    if (parts.size() != 3 || parts[1] <= 0.0)
        throw ConfigError("bad range (want lo:step:hi): " + s);
    std::vector<double> out;
    for (double v = parts[0]; v <= parts[2] + 1e-9; v += parts[1]) out.push_back(v);
    return out;
}

DelayScheme parse_scheme_checked(const std::string& s) {
    try {
        return DelayScheme::parse(s);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("bad delay scheme '") + s + "': " + e.what());
    }
}

void atomic_write(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream f(tmp, std::ios::trunc);
        if (!f) throw std::runtime_error("cannot open " + tmp);
        f << content;
        if (!f) throw std::runtime_error("write failed: " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw std::runtime_error("rename failed: " + path);
}

std::string stamp(const std::string& config) {
    std::ostringstream os;
    os << "# toolkit_version=" << kToolkitVersion << " config_hash=" << std::hex
       << fnv1a(config) << "\n# config: " << config << "\n";
    return os.str();
}

int cmd_dump_constellation(const std::string& mod, const std::string& out) {
    const Constellation c = parse_modulation(mod);
    const std::string cfg = "dump-constellation modulation=" + mod;
    atomic_write(out, stamp(cfg) + c.to_csv());
    return 0;
}

int cmd_capacity(const std::string& mod, const std::string& scheme_s, const std::string& snr_s,
                 std::size_t samples, std::uint64_t seed, const std::string& out) {
    const Constellation c = parse_modulation(mod);
    const DelayScheme scheme =
        scheme_s.empty() ? DelayScheme::all_zero(c.bits()) : parse_scheme_checked(scheme_s);
    if (scheme.size() != c.bits()) throw ConfigError("scheme length != modulation level");
    const std::vector<double> grid = parse_range(snr_s);
    const CapacityReport rep = capacity_report(c, mod, scheme, grid, samples, seed);
    std::ostringstream cfg;
    cfg << "capacity modulation=" << mod << " scheme=" << scheme.to_string()
        << " snr=" << snr_s << " samples=" << samples << " seed=" << seed;
    atomic_write(out, stamp(cfg.str()) + rep.to_csv());
    return 0;
}

int cmd_optimize_delay(const std::string& mod, double rate, int t_max, std::size_t samples,
                       std::uint64_t seed, const std::string& out) {
    const Constellation c = parse_modulation(mod);
    if (c.kind() != ModKind::Qam || c.bits() % 2 != 0)
        throw ConfigError("optimize-delay requires a square QAM modulation");
    if (!(rate > 0.0 && rate < 1.0)) throw ConfigError("rate must be in (0,1)");
    const DelaySearchResult res = optimize_delay(c, rate, t_max, samples, seed);

    nlohmann::json j;
    std::ostringstream cfg;
    cfg << "optimize-delay modulation=" << mod << " rate=" << rate << " tmax=" << t_max
        << " samples=" << samples << " seed=" << seed;
    j["toolkit_version"] = kToolkitVersion;
    j["config"] = cfg.str();
    j["config_hash"] = fnv1a(cfg.str());
    j["best_scheme"] = res.best.delays;
    j["equivalent_schemes"] = nlohmann::json::array();
    for (const auto& s : res.equivalence) j["equivalent_schemes"].push_back(s.delays);
    j["qam_esn0_db"] = res.qam_esn0_db;
    j["bicm_esn0_db"] = res.bicm_esn0_db;
    j["gain_db"] = res.gain_db;
    j["target_rate"] = res.target_rate;
    j["pam_candidates"] = nlohmann::json::array();
    for (const auto& cand : res.candidates)
        j["pam_candidates"].push_back(
            {{"scheme", cand.scheme.delays}, {"pam_esn0_db", cand.pam_esn0_db}});
    atomic_write(out, j.dump(2) + "\n");
    return 0;
}

int cmd_design_code(const std::string& mod, double rate, const std::string& scheme_s, int n,
                    int n_proto, int v_max, int d_c, int population_scale, int generations,
                    std::size_t samples, std::uint64_t seed, double classify_tol,
                    const std::string& out_prefix) {
    const Constellation c = parse_modulation(mod);
    const DelayScheme scheme =
        scheme_s.empty() ? DelayScheme::all_zero(c.bits()) : parse_scheme_checked(scheme_s);
    if (scheme.size() != c.bits()) throw ConfigError("scheme length != modulation level");
    if (!(rate > 0.0 && rate < 1.0)) throw ConfigError("rate must be in (0,1)");
    const int m = c.bits();
    if (n % m != 0 || n_proto % m != 0)
        throw ConfigError("code lengths must be multiples of the modulation level");
    if (d_c <= 0) {
        // concentrated CN degree giving an average VN degree near 3
        d_c = std::max(3, static_cast<int>(std::lround(3.0 / (1.0 - rate))));
    }

    // Design Es/N0: where the aggregate capacity meets the spectral
    // efficiency m*R.
    const double esn0 = snr_for_rate(
        [&](double db) {
            return dbicm_capacity(c, scheme, NoiseModel::from_esn0_db(db), samples, seed).value;
        },
        m * rate, -15.0, 30.0);

    const CellCapacities cell =
        measure_capacities(c, scheme, NoiseModel::from_esn0_db(esn0), samples, seed);
    std::vector<double> caps(m);
    for (int i = 0; i < m; ++i) caps[i] = cell.bit[i].value;
    ChannelAssignment skeleton = classify_bit_channels(caps, classify_tol);
    const int s_types = skeleton.num_types();

    DesignPoint dp;
    dp.window_lo_db = esn0 - 3.0;
    dp.window_hi_db = esn0 + 8.0;
    dp.profile = make_profile(c, scheme, dp.window_lo_db, dp.window_hi_db, 0.25, samples, seed);
    dp.d_c = d_c;
    dp.rate = rate;
    dp.n_proto = n_proto;

    std::vector<int> degrees;
    for (int d = 2; d <= v_max; ++d) degrees.push_back(d);

    DeConfig cfg1;
    cfg1.population = population_scale * (v_max - 1);
    cfg1.generations = generations;
    cfg1.seed = seed;
    std::cerr << "stage 1: lambda DE, population " << cfg1.population << "\n";
    const LambdaStageResult st1 = optimize_lambda(cfg1, dp, degrees);
    std::cerr << "stage 1 threshold: " << st1.theta_db << " dB (Es/N0)\n";

    DeConfig cfg2 = cfg1;
    cfg2.population = population_scale * (s_types * (v_max - 1) + s_types - 1);
    std::cerr << "stage 2: P DE, population " << cfg2.population << "\n";
    const AssignmentStageResult st2 =
        optimize_assignment(cfg2, dp, st1.lambda, skeleton.type_of_bit);
    std::cerr << "stage 2 threshold: " << st2.theta_db << " dB (Es/N0)\n";

    const TannerCode final_code = constrained_peg(st2.assignment, n, d_c, rate, seed);

    std::ostringstream cfgs;
    cfgs << "design-code modulation=" << mod << " rate=" << rate
         << " scheme=" << scheme.to_string() << " n=" << n << " n_proto=" << n_proto
         << " vmax=" << v_max << " dc=" << d_c << " generations=" << generations
         << " samples=" << samples << " seed=" << seed;

    write_alist_file(final_code, out_prefix + ".alist");
    atomic_write(out_prefix + ".assign.json", assignment_to_json(st2.assignment, seed));

    std::ostringstream csv;
    csv << stamp(cfgs.str());
    csv << "design_esn0_db," << esn0 << "\n";
    csv << "theta_esn0_db," << st2.theta_db << "\n";
    csv << "theta_ebn0_db," << st2.theta_db - 10.0 * std::log10(m * rate) << "\n";
    csv << "types," << s_types << "\nrow,";
    for (int d : degrees) csv << "d" << d << (d == v_max ? "\n" : ",");
    csv << "lambda,";
    for (std::size_t jj = 0; jj < st1.lambda.fraction.size(); ++jj)
        csv << st1.lambda.fraction[jj] << (jj + 1 == st1.lambda.fraction.size() ? "\n" : ",");
    for (int i = 0; i < s_types; ++i) {
        csv << "p" << i << ",";
        for (std::size_t jj = 0; jj < st2.assignment.p[i].size(); ++jj)
            csv << st2.assignment.p[i][jj]
                << (jj + 1 == st2.assignment.p[i].size() ? "\n" : ",");
    }
    atomic_write(out_prefix + ".design.csv", csv.str());
    return 0;
}

int cmd_simulate(const std::string& code_path, const std::string& mod,
                 const std::string& scheme_s, const std::string& ebn0_s, int t_n,
                 std::uint64_t min_errors, std::uint64_t max_frames, int bp_iters,
                 std::uint64_t seed, const std::string& checkpoint, const std::string& out) {
    const Constellation c = parse_modulation(mod);
    const DelayScheme scheme =
        scheme_s.empty() ? DelayScheme::all_zero(c.bits()) : parse_scheme_checked(scheme_s);
    if (scheme.size() != c.bits()) throw ConfigError("scheme length != modulation level");
    const TannerCode code = read_alist_file(code_path);
    if (code.n % c.bits() != 0)
        throw ConfigError("code length is not a multiple of the modulation level");
    const Encoder enc(code);

    FramePipeline p;
    p.code = &code;
    p.encoder = &enc;
    p.constellation = &c;
    p.scheme = scheme;
    p.t_n = t_n;
    p.max_bp_iters = bp_iters;

    BerSweepConfig sweep;
    sweep.ebn0_db = parse_range(ebn0_s);
    sweep.min_word_errors = min_errors;
    sweep.max_frames = max_frames;
    sweep.seed = seed;
    sweep.checkpoint_path = checkpoint;

    const std::vector<BerPoint> pts = run_ber(p, sweep);
    std::ostringstream cfg;
    cfg << "simulate code=" << code_path << " modulation=" << mod
        << " scheme=" << scheme.to_string() << " ebn0=" << ebn0_s << " tn=" << t_n
        << " min_errors=" << min_errors << " max_frames=" << max_frames
        << " bp_iters=" << bp_iters << " seed=" << seed;
    atomic_write(out, stamp(cfg.str()) + ber_to_csv(pts));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"DBICM toolkit: capacity, delay-scheme and LDPC code design, simulation"};
    app.require_subcommand(1);

    std::string mod = "16qam", scheme_s, out = "out.csv", snr_s = "0:1:10";
    std::size_t samples = 200000;
    std::uint64_t seed = 1;

    auto* dump = app.add_subcommand("dump-constellation", "Write the labeled signal set");
    dump->add_option("--modulation", mod);
    dump->add_option("--out", out);

    auto* cap = app.add_subcommand("capacity", "Bit/aggregate capacities over an Es/N0 grid");
    cap->add_option("--modulation", mod);
    cap->add_option("--scheme", scheme_s, "delay scheme, e.g. 0,1,0,1 (default all-zero)");
    cap->add_option("--snr", snr_s, "Es/N0 dB grid lo:step:hi");
    cap->add_option("--samples", samples);
    cap->add_option("--seed", seed);
    cap->add_option("--out", out);

    double rate = 0.25;
    int t_max = 1;
    auto* od = app.add_subcommand("optimize-delay", "Search the best delay scheme");
    od->add_option("--modulation", mod);
    od->add_option("--rate", rate);
    od->add_option("--tmax", t_max);
    od->add_option("--samples", samples);
    od->add_option("--seed", seed);
    od->add_option("--out", out);

    int n = 12000, n_proto = 1200, v_max = 10, d_c = 0, pop_scale = 10, generations = 10;
    double classify_tol = 0.02;
    std::string out_prefix = "code";
    auto* dc = app.add_subcommand("design-code", "Two-stage DE code design");
    dc->add_option("--modulation", mod);
    dc->add_option("--rate", rate);
    dc->add_option("--scheme", scheme_s);
    dc->add_option("--n", n, "final code length");
    dc->add_option("--n-proto", n_proto, "scoring code length");
    dc->add_option("--vmax", v_max, "maximum VN degree");
    dc->add_option("--dc", d_c, "concentrated CN degree (0 = auto)");
    dc->add_option("--pop-scale", pop_scale, "population per free dimension");
    dc->add_option("--generations", generations);
    dc->add_option("--samples", samples);
    dc->add_option("--seed", seed);
    dc->add_option("--classify-tol", classify_tol);
    dc->add_option("--out-prefix", out_prefix);

    std::string code_path, ebn0_s = "0:0.25:3", checkpoint;
    int t_n = 20, bp_iters = 50;
    std::uint64_t min_errors = 100, max_frames = 1000;
    auto* sim = app.add_subcommand("simulate", "Monte-Carlo BER/FER sweep");
    sim->add_option("--code", code_path)->required();
    sim->add_option("--modulation", mod);
    sim->add_option("--scheme", scheme_s);
    sim->add_option("--ebn0", ebn0_s, "Eb/N0 dB grid lo:step:hi");
    sim->add_option("--tn", t_n, "codewords per frame");
    sim->add_option("--min-errors", min_errors);
    sim->add_option("--max-frames", max_frames);
    sim->add_option("--bp-iters", bp_iters);
    sim->add_option("--seed", seed);
    sim->add_option("--checkpoint", checkpoint);
    sim->add_option("--out", out);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (dump->parsed()) return cmd_dump_constellation(mod, out);
        if (cap->parsed()) return cmd_capacity(mod, scheme_s, snr_s, samples, seed, out);
        if (od->parsed()) return cmd_optimize_delay(mod, rate, t_max, samples, seed, out);
        if (dc->parsed())
            return cmd_design_code(mod, rate, scheme_s, n, n_proto, v_max, d_c, pop_scale,
                                   generations, samples, seed, classify_tol, out_prefix);
        if (sim->parsed())
            return cmd_simulate(code_path, mod, scheme_s, ebn0_s, t_n, min_errors, max_frames,
                                bp_iters, seed, checkpoint, out);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
