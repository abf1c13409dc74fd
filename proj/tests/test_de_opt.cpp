#include <cmath>
#include <numeric>
#include <vector>

#include "dbicm/de_opt.hpp"
#include "dbicm/rng.hpp"
#include "doctest.h"

using namespace dbicm;

namespace {

CapacityProfile logistic_profile(double shift_db) {
    CapacityProfile p;
    for (double db = -10.0; db <= 20.0 + 1e-9; db += 0.5) p.snr_db.push_back(db);
    std::vector<double> hi, lo;
    for (double db : p.snr_db) {
        hi.push_back(1.0 / (1.0 + std::exp(-(db - shift_db) / 2.0)));
        lo.push_back(1.0 / (1.0 + std::exp(-(db - shift_db - 2.5) / 2.0)));
    }
    p.bit_cap = {hi, lo};
    return p;
}

DesignPoint sample_design_point() {
    DesignPoint dp;
    dp.profile = logistic_profile(-2.0);
    dp.window_lo_db = -10.0;
    dp.window_hi_db = 20.0;
    dp.d_c = 6;
    dp.rate = 0.5;
    dp.n_proto = 240;
    return dp;
}

double weighted_avg(const std::vector<double>& x, const std::vector<int>& d) {
    double s = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) s += x[j] * d[j];
    return s;
}

}  // namespace

TEST_CASE("lambda repair lands on the constraint set and is idempotent") {
    const std::vector<int> degrees{2, 3, 6, 10};
    const double avg = 3.0;
    Rng rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> x(degrees.size());
        for (auto& v : x) v = 2.0 * rng.uniform() - 0.5;  // includes out-of-box values
        repair_lambda(x, degrees, avg);

        double sum = 0.0;
        for (double v : x) {
            CHECK(v >= -1e-12);
            CHECK(v <= 1.0 + 1e-12);
            sum += v;
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(weighted_avg(x, degrees) == doctest::Approx(avg).epsilon(1e-9));

        std::vector<double> again = x;
        repair_lambda(again, degrees, avg);
        for (std::size_t j = 0; j < x.size(); ++j)
            CHECK(again[j] == doctest::Approx(x[j]).epsilon(1e-9));
    }
}

TEST_CASE("assignment repair restores both marginals") {
    const std::vector<double> row{0.5, 0.5};
    const std::vector<double> col{0.55, 0.35, 0.10};
    Rng rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> p(6);
        for (auto& v : p) v = rng.uniform() + 0.01;
        REQUIRE(repair_assignment(p, row, col));
        for (int i = 0; i < 2; ++i)
            CHECK(p[3 * i] + p[3 * i + 1] + p[3 * i + 2] ==
                  doctest::Approx(row[i]).epsilon(1e-8));
        for (int j = 0; j < 3; ++j)
            CHECK(p[j] + p[3 + j] == doctest::Approx(col[j]).epsilon(1e-8));
        for (double v : p) CHECK(v >= 0.0);
    }

    // a zero column target zeroes the whole column
    std::vector<double> p{0.3, 0.3, 0.1, 0.2, 0.2, 0.1};
    REQUIRE(repair_assignment(p, {0.5, 0.5}, {0.6, 0.4, 0.0}));
    CHECK(p[2] == 0.0);
    CHECK(p[5] == 0.0);
}

TEST_CASE("rand/1/bin with f = cr = 0 reproduces the parents") {
    std::vector<std::vector<double>> pop{
        {0.1, 0.9}, {0.4, 0.6}, {0.7, 0.3}, {0.25, 0.75}};
    const auto same = mutate_recombine(pop, 0.0, 0.0, 99, [](std::vector<double>&) {});
    REQUIRE(same.size() == pop.size());
    for (std::size_t i = 0; i < pop.size(); ++i) CHECK(same[i] == pop[i]);

    const auto a = mutate_recombine(pop, 0.5, 0.5, 7, [](std::vector<double>&) {});
    const auto b = mutate_recombine(pop, 0.5, 0.5, 7, [](std::vector<double>&) {});
    const auto c = mutate_recombine(pop, 0.5, 0.5, 8, [](std::vector<double>&) {});
    CHECK(a == b);
    CHECK(a != c);
    bool changed = false;
    for (std::size_t i = 0; i < pop.size(); ++i) changed |= (a[i] != pop[i]);
    CHECK(changed);
}

TEST_CASE("zero generations returns the scored initial candidate") {
    DeConfig cfg;
    cfg.population = 1;
    cfg.generations = 0;
    cfg.seed = 3;
    const DesignPoint dp = sample_design_point();
    const LambdaStageResult res = optimize_lambda(cfg, dp, {2, 3, 6});
    res.lambda.validate();
    CHECK(res.lambda.average_degree() == doctest::Approx(3.0).epsilon(1e-6));
    CHECK(res.theta_db > dp.window_lo_db);
    CHECK(res.theta_db < dp.window_hi_db);
    CHECK(res.code.n == 240);
    REQUIRE(res.generation_best.size() == 1);  // initial scoring only
    CHECK(res.generation_best[0] == res.theta_db);
}

TEST_CASE("two-stage optimization improves monotonically") {
    DeConfig cfg;
    cfg.population = 6;
    cfg.generations = 2;
    cfg.seed = 42;
    const DesignPoint dp = sample_design_point();

    const LambdaStageResult st1 = optimize_lambda(cfg, dp, {2, 3, 6});
    st1.lambda.validate();
    REQUIRE(st1.generation_best.size() == 3);  // initial + two generations
    CHECK(st1.generation_best[1] <= st1.generation_best[0]);
    CHECK(st1.generation_best[2] <= st1.generation_best[1]);
    CHECK(st1.theta_db == doctest::Approx(st1.generation_best.back()));

    const AssignmentStageResult st2 =
        optimize_assignment(cfg, dp, st1.lambda, {0, 1});
    st2.assignment.validate(st1.lambda);
    REQUIRE(st2.generation_best.size() == 3);
    CHECK(st2.generation_best[1] <= st2.generation_best[0]);
    CHECK(st2.generation_best[2] <= st2.generation_best[1]);
    CHECK(st2.theta_db == doctest::Approx(st2.generation_best.back()));
    CHECK(st2.code.rate() == doctest::Approx(0.5).epsilon(1e-12));

    // reproducible under the same configuration
    const LambdaStageResult rerun = optimize_lambda(cfg, dp, {2, 3, 6});
    CHECK(rerun.theta_db == st1.theta_db);
    CHECK(rerun.lambda.fraction == st1.lambda.fraction);
}

TEST_CASE("a single bit-channel type pins the assignment to lambda") {
    DeConfig cfg;
    cfg.population = 4;
    cfg.generations = 1;
    cfg.seed = 9;
    DesignPoint dp = sample_design_point();
    dp.profile.bit_cap[1] = dp.profile.bit_cap[0];  // both bits identical

    const LambdaStageResult st1 = optimize_lambda(cfg, dp, {2, 3, 6});
    const AssignmentStageResult st2 =
        optimize_assignment(cfg, dp, st1.lambda, {0, 0});
    REQUIRE(st2.assignment.num_types() == 1);
    for (std::size_t j = 0; j < st1.lambda.fraction.size(); ++j)
        CHECK(st2.assignment.p[0][j] ==
              doctest::Approx(st1.lambda.fraction[j]).epsilon(1e-6));
}

TEST_CASE("configuration validation") {
    DeConfig cfg;
    cfg.population = 2;  // too small for rand/1
    cfg.generations = 1;
    CHECK_THROWS(optimize_lambda(cfg, sample_design_point(), {2, 3}));
}
