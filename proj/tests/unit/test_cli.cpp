#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "cli.hpp"
#include "huberfactor/io.hpp"
#include "huberfactor/panel.hpp"
#include "huberfactor/synth.hpp"

using namespace huberfactor;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("huberfactor_cli_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::directory_iterator(dir)) files[e.path().filename().string()] = slurp(e.path());
    return files;
}

std::string write_panel(const fs::path& dir, const GroundTruth& g) {
    const fs::path p = dir / "panel.csv";
    write_panel_csv(p, g.panel);
    return p.string();
}

}  // namespace

TEST_CASE("fit subcommand") {
    const fs::path dir = scratch("fit");
    const std::string panel = write_panel(dir, gen_scenario(scenario_config('A', 1, 100, 100, 1)));
    const std::string out = (dir / "out").string();

    const Result ok = run({"fit", "--input", panel, "--method", "hpca", "--r", "3", "--out", out});
    CHECK(ok.code == 0);
    CHECK(ok.err.empty());
    CHECK(fs::exists(fs::path(out) / "loadings.csv"));
    CHECK(fs::exists(fs::path(out) / "factors.csv"));
    CHECK(fs::exists(fs::path(out) / "meta.json"));
    CHECK(fs::exists(fs::path(out) / "run.json"));

    const Result zero = run({"fit", "--input", panel, "--method", "hpca", "--r", "0", "--out", out});
    CHECK(zero.code == 2);
    CHECK(zero.err.find("--r") != std::string::npos);

    CHECK(run({"fit", "--input", panel, "--method", "pca", "--r", "101", "--out", out}).code == 2);
    CHECK(run({"fit", "--input", panel, "--method", "svd", "--r", "2", "--out", out}).code == 2);
    CHECK(run({"fit", "--input", (dir / "nope.csv").string(), "--method", "pca", "--r", "2"}).code == 3);

    std::ofstream(dir / "bad.csv") << "time,a,b\nt1,1,2\nt2,3,4\nt3,5,6\nt4,oops,8\n";
    const Result bad = run({"fit", "--input", (dir / "bad.csv").string(), "--method", "pca", "--r", "1"});
    CHECK(bad.code == 3);
    CHECK(bad.err.find("row 5") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("rank subcommand") {
    const fs::path dir = scratch("rank");
    SimConfig cfg = scenario_config('C', 1, 100, 100, 2);
    cfg.theta = 0.0;
    const std::string panel = write_panel(dir, gen_scenario(cfg));
    const std::string out = (dir / "out").string();

    const Result ok = run({"rank", "--input", panel, "--method", "rm-hpca", "--k", "8", "--out", out});
    REQUIRE(ok.code == 0);
    const Json j = Json::parse(ok.out);
    CHECK(j.at("r_hat") == 3);
    CHECK(j.at("method") == "rm_hpca");
    CHECK(slurp(fs::path(out) / "rank.json") == ok.out);

    CHECK(run({"rank", "--input", panel, "--method", "er", "--k", "8", "--out", out}).code == 0);
    CHECK(run({"rank", "--input", panel, "--method", "rm-hpca", "--P", "-1", "--out", out}).code == 2);
    CHECK(run({"rank", "--input", panel, "--method", "rm-hpca", "--k", "9999", "--out", out}).code == 2);
    fs::remove_all(dir);
}

TEST_CASE("simulate subcommand") {
    const fs::path dir = scratch("simulate");
    const std::vector<std::string> args{"simulate", "--scenario", "A", "--case", "1", "--n", "100", "--t", "100",
                                        "--seed", "7", "--out", dir.string()};
    REQUIRE(run(args).code == 0);
    const auto first = snapshot(dir);
    CHECK(first.size() == 5);
    REQUIRE(run(args).code == 0);
    CHECK(snapshot(dir) == first);

    CHECK(run({"simulate", "--scenario", "A", "--case", "9", "--n", "10", "--t", "10", "--seed", "1", "--out",
               dir.string()})
              .code == 2);
    REQUIRE(run({"simulate", "--scenario", "B", "--case", "3", "--n", "50", "--t", "50", "--seed", "1", "--out",
                 dir.string()})
                .code == 0);
    CHECK(read_json_file(dir / "config.json").at("J") == 10);
    fs::remove_all(dir);
}

TEST_CASE("mc subcommand") {
    const fs::path dir = scratch("mc");
    const std::vector<std::string> base{"mc", "--scenario", "A", "--case", "1", "--n", "30", "--t", "30", "--seed", "3"};
    auto args = base;
    args.insert(args.end(), {"--methods", "pca,ihr,er", "--reps", "1", "--out", dir.string()});
    REQUIRE(run(args).code == 0);
    const Json rep = read_json_file(dir / "mc_report.json");
    CHECK(rep.at("methods").at(0).at("mee_cc_iqr") == 0.0);
    CHECK(rep.at("methods").at(0).at("ave_fl_sd") == 0.0);
    const auto first = snapshot(dir);
    REQUIRE(run(args).code == 0);
    CHECK(snapshot(dir) == first);

    auto bad = base;
    bad.insert(bad.end(), {"--methods", "pca,svd", "--reps", "1", "--out", dir.string()});
    const Result r = run(bad);
    CHECK(r.code == 2);
    CHECK(r.err.find("rm-hpca") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("backtest subcommand") {
    const fs::path dir = scratch("backtest");
    ReturnSimConfig sim;
    sim.n = 100;
    sim.t = 84;
    sim.seed = 4;
    const std::string panel = write_panel(dir, gen_factor_returns(sim));
    const std::string out = (dir / "out").string();

    const Result ok = run({"backtest", "--input", panel, "--method", "ihr", "--r", "2", "--window", "72",
                           "--thresh-const", "0.5", "--weights", "--out", out});
    REQUIRE(ok.code == 0);
    const Json rep = read_json_file(fs::path(out) / "report.json");
    CHECK(rep.at("months") == 12);
    const std::string oos = slurp(fs::path(out) / "oos_returns.csv");
    CHECK(std::count(oos.begin(), oos.end(), '\n') == 13);
    CHECK(fs::exists(fs::path(out) / "weights.csv"));

    CHECK(run({"backtest", "--input", panel, "--window", "100", "--out", out}).code == 2);
    CHECK(run({"backtest", "--window", "72", "--out", out}).code == 2);
    fs::remove_all(dir);
}

TEST_CASE("run.json reproduces every subcommand") {
    const fs::path dir = scratch("replay");
    const std::string panel = write_panel(dir, gen_scenario(scenario_config('A', 2, 40, 50, 5)));
    const std::vector<std::vector<std::string>> invocations{
        {"fit", "--input", panel, "--method", "ihr", "--r", "2", "--tau", "1.5"},
        {"rank", "--input", panel, "--method", "rm-ihr"},
        {"simulate", "--scenario", "D", "--case", "2", "--n", "30", "--t", "20", "--seed", "9"},
        {"mc", "--scenario", "B", "--case", "2", "--n", "20", "--t", "20", "--seed", "9", "--methods", "pca,rm-hpca",
         "--reps", "2"},
        {"backtest", "--input", panel, "--r", "2", "--window", "45", "--weights"},
    };
    for (const auto& base : invocations) {
        const fs::path out = dir / base.front();
        auto args = base;
        args.insert(args.end(), {"--out", out.string()});
        const Result first = run(args);
        REQUIRE(first.code == 0);
        const auto files = snapshot(out);
        const Result again = run({base.front(), "--config", (out / "run.json").string()});
        CHECK(again.code == 0);
        CHECK(again.out == first.out);
        CHECK(snapshot(out) == files);
    }
    CHECK(run({"fit", "--config", (dir / "rank" / "run.json").string()}).code == 2);
    CHECK(run({"fit", "--config", (dir / "missing.json").string()}).code == 3);
    fs::remove_all(dir);
}

TEST_CASE("explicit flags override run.json") {
    const fs::path dir = scratch("override");
    const std::string panel = write_panel(dir, gen_scenario(scenario_config('A', 1, 30, 30, 6)));
    const fs::path out = dir / "fit";
    REQUIRE(run({"fit", "--input", panel, "--method", "pca", "--r", "2", "--out", out.string()}).code == 0);
    REQUIRE(run({"fit", "--config", (out / "run.json").string(), "--r", "3"}).code == 0);
    CHECK(read_json_file(out / "meta.json").at("r") == 3);
    CHECK(read_json_file(out / "run.json").at("options").at("method") == "pca");
    fs::remove_all(dir);
}

TEST_CASE("usage errors and help") {
    CHECK(run({}).code == 2);
    CHECK(run({"frobnicate"}).code == 2);
    const Result help = run({"--help"});
    CHECK(help.code == 0);
    CHECK(help.out.find("backtest") != std::string::npos);
}
