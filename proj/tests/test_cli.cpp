#include "mvtl/csv.hpp"

#include "temp_dir.hpp"

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <sys/wait.h>

namespace {

struct Run {
    int code = -1;
    std::string output;
};

Run run(const std::string& args, const TempDir& dir) {
    const std::string log = dir / "cli.log";
    const std::string cmd = std::string(MVTL_CLI_PATH) + " " + args + " > " + log + " 2>&1";
    const int status = std::system(cmd.c_str());
    Run r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.output = mvtl::csv::read_file(log);
    return r;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("usage errors exit with code 2") {
    TempDir dir;
    std::filesystem::create_directories(dir / "empty");
    auto r = run("extract " + (dir / "empty") + " --out " + (dir / "feat"), dir);
    CHECK(r.code == 2);
    CHECK(r.output.find("no records found") != std::string::npos);

    CHECK(run("", dir).code == 2);
    CHECK(run("transfer --bogus", dir).code == 2);
    CHECK(run("transfer --folds 1 --features " + dir.str(), dir).code == 2);
    CHECK(run("--help", dir).code == 0);
}

TEST_CASE("malformed input exits with code 1 and names the file") {
    TempDir dir;
    mvtl::csv::write_file(dir / "results.csv", "# mvtl-results v1\nkind,method,source,target,fold,accuracy,status\nfold,mvtl,A,B,0,oops,ok\n");
    auto r = run("report " + (dir / "results.csv") + " --out " + (dir / "rep"), dir);
    CHECK(r.code == 1);
    CHECK(r.output.find("results.csv:3") != std::string::npos);
}

TEST_CASE("pipeline runs end to end and is byte-deterministic") {
    TempDir dir;
    REQUIRE(run("synth --out " + (dir / "raw") + " --seed 5", dir).code == 0);
    REQUIRE(run("extract " + (dir / "raw") + " --out " + (dir / "f1") + " --keep 0.5", dir).code == 0);
    REQUIRE(run("extract " + (dir / "raw") + " --out " + (dir / "f2") + " --keep 0.5", dir).code == 0);
    for (const char* name : {"D1_time.csv", "D1_freq.csv", "D1_wavelet.csv", "D2_time.csv", "D2_freq.csv",
                             "D2_wavelet.csv", "D1_norm.csv", "D2_norm.csv"}) {
        CHECK(mvtl::csv::read_file((dir / "f1") + "/" + name) == mvtl::csv::read_file((dir / "f2") + "/" + name));
    }
    mvtl::csv::write_file(dir / "cfg.txt", "features_dir=" + (dir / "f1") + "\nK=2\nlabel_fraction=0.1\n");
    REQUIRE(run("transfer --config " + (dir / "cfg.txt") + " --out " + (dir / "r1"), dir).code == 0);
    REQUIRE(run("transfer --config " + (dir / "cfg.txt") + " --threads 3 --out " + (dir / "r2"), dir).code == 0);
    const auto a = mvtl::csv::read_file((dir / "r1") + "/results.csv");
    CHECK(a == mvtl::csv::read_file((dir / "r2") + "/results.csv"));
    CHECK(mvtl::csv::read_file((dir / "r1") + "/predictions.csv") ==
          mvtl::csv::read_file((dir / "r2") + "/predictions.csv"));
    auto rep = run("report " + (dir / "r1") + "/results.csv --out " + (dir / "rep"), dir);
    CHECK(rep.code == 0);
    CHECK(rep.output.find("D1>D2") != std::string::npos);
    CHECK(std::filesystem::exists((dir / "rep") + "/report.csv"));

    REQUIRE(run("transfer --config " + (dir / "cfg.txt") + " --lambda-t 0 --lambda-d 0 --out " + (dir / "abl"), dir).code == 0);
    CHECK(mvtl::csv::read_file((dir / "abl") + "/results.csv").find("mvtl_ablation") != std::string::npos);
}

}
