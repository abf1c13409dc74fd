#include "dbicm/de_opt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include "dbicm/rng.hpp"
#include "dbicm/util.hpp"

namespace dbicm {

namespace {

constexpr double kInfeasible = std::numeric_limits<double>::infinity();

std::vector<long long> cache_key(const std::vector<double>& x) {
    std::vector<long long> k(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) k[i] = std::llround(x[i] * 1e4);
    return k;
}

void check_config(const DeConfig& cfg) {
    if (cfg.population < 1) throw std::invalid_argument("DeConfig: population must be >= 1");
    if (cfg.generations > 0 && cfg.population < 4)
        throw std::invalid_argument("DeConfig: population must be >= 4 for evolution");
    if (cfg.f < 0.0 || cfg.f > 1.0 || cfg.cr < 0.0 || cfg.cr > 1.0)
        throw std::invalid_argument("DeConfig: F and CR must lie in [0,1]");
}

/// Runs the generic DE loop; `evaluate` scores a whole generation in one
/// call (so it can parallelize and cache internally).
struct DeDriver {
    const DeConfig& cfg;
    RepairFn repair;
    std::function<std::vector<double>(const std::vector<std::vector<double>>&)> evaluate;

    std::vector<double> best_genome;
    double best_theta = kInfeasible;
    std::vector<double> generation_best;

    void run(std::vector<std::vector<double>> pop) {
        std::vector<double> score = evaluate(pop);
        auto track = [&] {
            for (std::size_t i = 0; i < pop.size(); ++i) {
                if (score[i] < best_theta) {
                    best_theta = score[i];
                    best_genome = pop[i];
                }
            }
            generation_best.push_back(best_theta);
        };
        track();
        for (int g = 1; g <= cfg.generations; ++g) {
            auto children = mutate_recombine(pop, cfg.f, cfg.cr, cfg.seed + g, repair);
            const std::vector<double> child_score = evaluate(children);
            for (std::size_t i = 0; i < pop.size(); ++i) {
                if (child_score[i] < score[i]) {
                    pop[i] = std::move(children[i]);
                    score[i] = child_score[i];
                }
            }
            track();
        }
    }
};

/// Generation evaluator with a persistent cache keyed by the rounded genome.
struct CachedScorer {
    std::function<double(const std::vector<double>&)> score_one;
    std::map<std::vector<long long>, double> cache;

    std::vector<double> operator()(const std::vector<std::vector<double>>& gen) {
        std::vector<double> out(gen.size(), 0.0);
        std::vector<std::size_t> todo;
        for (std::size_t i = 0; i < gen.size(); ++i) {
            const auto it = cache.find(cache_key(gen[i]));
            if (it != cache.end())
                out[i] = it->second;
            else
                todo.push_back(i);
        }
        std::vector<double> fresh(todo.size());
        parallel_for(todo.size(), [&](std::size_t t) { fresh[t] = score_one(gen[todo[t]]); });
        for (std::size_t t = 0; t < todo.size(); ++t) {
            out[todo[t]] = fresh[t];
            cache.emplace(cache_key(gen[todo[t]]), fresh[t]);
        }
        return out;
    }
};

DegreeDistribution lambda_from_genome(const std::vector<int>& degrees,
                                      const std::vector<double>& x) {
    DegreeDistribution d;
    d.degrees = degrees;
    d.fraction = x;
    return d;
}

}  // namespace

void repair_lambda(std::vector<double>& x, const std::vector<int>& degrees, double avg_target) {
    const std::size_t v = x.size();
    if (degrees.size() != v) throw std::invalid_argument("repair_lambda: size mismatch");
    // A = [1...1; d_1...d_V], b = [1; avg_target]; Gram matrix of A.
    double sd = 0.0, sdd = 0.0;
    for (int d : degrees) {
        sd += d;
        sdd += static_cast<double>(d) * d;
    }
    const double det = v * sdd - sd * sd;
    if (std::abs(det) < 1e-12) throw std::invalid_argument("repair_lambda: degenerate degrees");

    for (int it = 0; it < 200; ++it) {
        double r1 = -1.0, r2 = -avg_target;
        for (std::size_t j = 0; j < v; ++j) {
            r1 += x[j];
            r2 += degrees[j] * x[j];
        }
        if (std::abs(r1) < 1e-12 && std::abs(r2) < 1e-12) {
            bool boxed = true;
            for (double e : x) boxed &= (e >= 0.0 && e <= 1.0);
            if (boxed) return;
        }
        const double a = (sdd * r1 - sd * r2) / det;
        const double b = (v * r2 - sd * r1) / det;
        for (std::size_t j = 0; j < v; ++j)
            x[j] = std::clamp(x[j] - a - b * degrees[j], 0.0, 1.0);
    }
}

bool repair_assignment(std::vector<double>& p, const std::vector<double>& row_target,
                       const std::vector<double>& col_target) {
    const std::size_t s = row_target.size();
    const std::size_t v = col_target.size();
    if (p.size() != s * v) throw std::invalid_argument("repair_assignment: size mismatch");
    for (double& e : p) e = std::max(e, 0.0);

    for (int it = 0; it < 10000; ++it) {
        for (std::size_t i = 0; i < s; ++i) {
            double sum = 0.0;
            for (std::size_t j = 0; j < v; ++j) sum += p[i * v + j];
            if (sum <= 0.0) {
                for (std::size_t j = 0; j < v; ++j) p[i * v + j] = row_target[i] / v;
            } else {
                const double g = row_target[i] / sum;
                for (std::size_t j = 0; j < v; ++j) p[i * v + j] *= g;
            }
        }
        double viol = 0.0;
        for (std::size_t j = 0; j < v; ++j) {
            double sum = 0.0;
            for (std::size_t i = 0; i < s; ++i) sum += p[i * v + j];
            if (sum <= 0.0) {
                for (std::size_t i = 0; i < s; ++i) p[i * v + j] = col_target[j] / s;
            } else {
                const double g = col_target[j] / sum;
                for (std::size_t i = 0; i < s; ++i) p[i * v + j] *= g;
            }
        }
        // Violation after the column pass: only rows can be off.
        for (std::size_t i = 0; i < s; ++i) {
            double sum = 0.0;
            for (std::size_t j = 0; j < v; ++j) sum += p[i * v + j];
            viol = std::max(viol, std::abs(sum - row_target[i]));
        }
        if (viol < 1e-9) return true;
    }
    return false;
}

std::vector<std::vector<double>> mutate_recombine(const std::vector<std::vector<double>>& pop,
                                                  double f, double cr, std::uint64_t seed,
                                                  const RepairFn& repair) {
    const std::size_t n = pop.size();
    if (n < 4) throw std::invalid_argument("mutate_recombine: population must be >= 4");
    const std::size_t dim = pop[0].size();
    Rng rng(seed);
    std::vector<std::vector<double>> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t r1, r2, r3;
        do r1 = rng.uniform_int(static_cast<std::uint32_t>(n));
        while (r1 == i);
        do r2 = rng.uniform_int(static_cast<std::uint32_t>(n));
        while (r2 == i || r2 == r1);
        do r3 = rng.uniform_int(static_cast<std::uint32_t>(n));
        while (r3 == i || r3 == r1 || r3 == r2);
        std::vector<double> child = pop[i];
        const std::size_t jrand =
            cr > 0.0 ? rng.uniform_int(static_cast<std::uint32_t>(dim)) : dim;
        for (std::size_t j = 0; j < dim; ++j) {
            if (j == jrand || rng.uniform() < cr)
                child[j] = pop[r1][j] + f * (pop[r2][j] - pop[r3][j]);
        }
        repair(child);
        out[i] = std::move(child);
    }
    return out;
}

LambdaStageResult optimize_lambda(const DeConfig& cfg, const DesignPoint& dp,
                                  const std::vector<int>& degrees) {
    check_config(cfg);
    const double avg_target = (1.0 - dp.rate) * dp.d_c;
    RepairFn repair = [&](std::vector<double>& x) { repair_lambda(x, degrees, avg_target); };
    const std::uint64_t peg_seed = cfg.seed ^ 0xD1CE5EEDull;

    CachedScorer scorer;
    scorer.score_one = [&](const std::vector<double>& x) -> double {
        try {
            const TannerCode code =
                conventional_peg(lambda_from_genome(degrees, x), dp.n_proto, dp.d_c, dp.rate,
                                 peg_seed);
            const ThresholdResult t = pexit_threshold(code, dp.profile, dp.window_lo_db,
                                                      dp.window_hi_db, dp.pexit_tol_db);
            return t.in_window ? t.theta_db : kInfeasible;
        } catch (const std::exception&) {
            return kInfeasible;
        }
    };

    Rng rng(cfg.seed);
    std::vector<std::vector<double>> pop(cfg.population);
    for (auto& x : pop) {
        x.resize(degrees.size());
        for (double& e : x) e = rng.uniform();
        repair(x);
    }

    DeDriver drv{cfg, repair, [&](const auto& gen) { return scorer(gen); }, {}, kInfeasible, {}};
    drv.run(std::move(pop));
    if (!std::isfinite(drv.best_theta))
        throw std::runtime_error("optimize_lambda: no candidate converged inside the window");

    LambdaStageResult res;
    res.lambda = lambda_from_genome(degrees, drv.best_genome);
    res.theta_db = drv.best_theta;
    res.code = conventional_peg(res.lambda, dp.n_proto, dp.d_c, dp.rate, peg_seed);
    res.generation_best = std::move(drv.generation_best);
    return res;
}

AssignmentStageResult optimize_assignment(const DeConfig& cfg, const DesignPoint& dp,
                                          const DegreeDistribution& lambda,
                                          const std::vector<int>& type_of_bit) {
    check_config(cfg);
    lambda.validate();
    const int m = static_cast<int>(type_of_bit.size());
    const int s = 1 + *std::max_element(type_of_bit.begin(), type_of_bit.end());
    const std::size_t v = lambda.degrees.size();
    std::vector<double> row_target(s, 0.0);
    for (int t : type_of_bit) row_target[t] += 1.0 / m;

    RepairFn repair = [&](std::vector<double>& x) {
        if (!repair_assignment(x, row_target, lambda.fraction))
            x.assign(x.size(), -1.0);  // poisoned: scored as infeasible
    };
    const std::uint64_t peg_seed = cfg.seed ^ 0xD1CE5EEDull;

    auto to_assignment = [&](const std::vector<double>& x) {
        ChannelAssignment ca;
        ca.m = m;
        ca.type_of_bit = type_of_bit;
        ca.degrees = lambda.degrees;
        ca.p.assign(s, std::vector<double>(v));
        for (int i = 0; i < s; ++i)
            for (std::size_t j = 0; j < v; ++j) ca.p[i][j] = x[i * v + j];
        return ca;
    };

    CachedScorer scorer;
    scorer.score_one = [&](const std::vector<double>& x) -> double {
        if (!x.empty() && x[0] < 0.0) return kInfeasible;
        try {
            const ChannelAssignment ca = to_assignment(x);
            ca.validate(lambda, 1e-6);
            const TannerCode code = constrained_peg(ca, dp.n_proto, dp.d_c, dp.rate, peg_seed);
            const ThresholdResult t = pexit_threshold(code, dp.profile, dp.window_lo_db,
                                                      dp.window_hi_db, dp.pexit_tol_db);
            return t.in_window ? t.theta_db : kInfeasible;
        } catch (const std::exception&) {
            return kInfeasible;
        }
    };

    // Initial candidates: the product form p_ij = r_i * lambda_j plus jitter.
    Rng rng(cfg.seed + 1);
    std::vector<std::vector<double>> pop(cfg.population);
    for (std::size_t c = 0; c < pop.size(); ++c) {
        auto& x = pop[c];
        x.resize(static_cast<std::size_t>(s) * v);
        for (int i = 0; i < s; ++i)
            for (std::size_t j = 0; j < v; ++j) {
                const double jitter = c == 0 ? 0.0 : 0.5 + rng.uniform();
                x[i * v + j] = row_target[i] * lambda.fraction[j] * jitter;
            }
        repair(x);
    }

    DeDriver drv{cfg, repair, [&](const auto& gen) { return scorer(gen); }, {}, kInfeasible, {}};
    drv.run(std::move(pop));
    if (!std::isfinite(drv.best_theta))
        throw std::runtime_error("optimize_assignment: no candidate converged inside the window");

    AssignmentStageResult res;
    res.assignment = to_assignment(drv.best_genome);
    res.theta_db = drv.best_theta;
    res.code = constrained_peg(res.assignment, dp.n_proto, dp.d_c, dp.rate, peg_seed);
    res.generation_best = std::move(drv.generation_best);
    return res;
}

}  // namespace dbicm
