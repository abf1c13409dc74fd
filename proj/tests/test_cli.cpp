#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "dbicm/ldpc.hpp"
#include "doctest.h"

#ifndef DBICM_CLI_PATH
#error "DBICM_CLI_PATH must point at the command-line binary"
#endif

namespace {

int run(const std::string& args) {
    const std::string cmd = std::string(DBICM_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const std::string& path) {
    std::ifstream f(path);
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

}  // namespace

TEST_CASE("usage errors exit with status 2") {
    CHECK(run("") == 2);
    CHECK(run("no-such-subcommand") == 2);
    CHECK(run("capacity --modulation 16qam --scheme 0,x --out /tmp/x.csv") == 2);
    CHECK(run("capacity --modulation 16qam --scheme 0,1 --out /tmp/x.csv") == 2);
    CHECK(run("capacity --modulation 13qam --out /tmp/x.csv") == 2);
    CHECK(run("optimize-delay --modulation 4pam --out /tmp/x.json") == 2);
    CHECK(run("simulate --code /nonexistent.alist --modulation qpsk --out /tmp/x.csv") == 1);
}

TEST_CASE("constellation dump is stamped and reproducible") {
    const std::string out = "/tmp/dbicm_cli_const.csv";
    REQUIRE(run("dump-constellation --modulation 16qam --out " + out) == 0);
    const std::string first = slurp(out);
    CHECK(first.find("# toolkit_version=") != std::string::npos);
    CHECK(first.find("config_hash=") != std::string::npos);
    REQUIRE(run("dump-constellation --modulation 16qam --out " + out) == 0);
    CHECK(slurp(out) == first);
    std::remove(out.c_str());
}

TEST_CASE("capacity runs end to end and is seed-stable") {
    const std::string out = "/tmp/dbicm_cli_cap.csv";
    const std::string args =
        "capacity --modulation 16qam --scheme 0,1,0,1 --snr 2:2:6 --samples 20000 --seed 5 "
        "--out " + out;
    REQUIRE(run(args) == 0);
    const std::string first = slurp(out);
    CHECK(first.find("snr_db,bit,capacity,stderr") != std::string::npos);
    REQUIRE(run(args) == 0);
    CHECK(slurp(out) == first);
    std::remove(out.c_str());
}

TEST_CASE("simulate consumes a code file and writes a sweep") {
    using namespace dbicm;
    DegreeDistribution lambda;
    lambda.degrees = {3};
    lambda.fraction = {1.0};
    const TannerCode code = conventional_peg(lambda, 48, 6, 0.5, 2);
    const std::string alist = "/tmp/dbicm_cli_code.alist";
    write_alist_file(code, alist);

    const std::string out = "/tmp/dbicm_cli_ber.csv";
    const std::string args = "simulate --code " + alist +
                             " --modulation qpsk --ebn0 2:4:6 --tn 4 --min-errors 3 "
                             "--max-frames 8 --bp-iters 20 --seed 9 --out " + out;
    REQUIRE(run(args) == 0);
    const std::string first = slurp(out);
    CHECK(first.find("ebn0_db,esn0_db") != std::string::npos);
    REQUIRE(run(args) == 0);
    CHECK(slurp(out) == first);

    // a delay scheme with the wrong length is a configuration error
    CHECK(run("simulate --code " + alist + " --modulation qpsk --scheme 0,1,0,1 --out " + out) ==
          2);
    std::remove(alist.c_str());
    std::remove(out.c_str());
}
