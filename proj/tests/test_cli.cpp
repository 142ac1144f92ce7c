#include "divbar/cli.hpp"

#include <catch2/catch_amalgamated.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace {

struct RunResult {
    int code = -1;
    std::string out;
    std::string err;
};

RunResult run_cli(const std::vector<std::string>& args) {
    std::vector<const char*> argv{"divbar"};
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    RunResult r;
    r.code = divbar::cli::dispatch(static_cast<int>(argv.size()), argv.data(), out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    f << text;
}

int count_lines(const std::string& s) {
    int n = 0;
    for (char c : s)
        if (c == '\n') ++n;
    return n;
}

}  // namespace

TEST_CASE("solve emits the scheme summary and curve rows", "[cli]") {
    const auto r = run_cli({"solve", "--n_points", "3", "--x_max", "100"});
    REQUIRE(r.code == 0);
    REQUIRE(r.out.find("# x_alpha = 4.717454") != std::string::npos);
    REQUIRE(r.out.find("# b0 = 198.867752") != std::string::npos);
    REQUIRE(r.out.find("x,f,g,a_star\n") != std::string::npos);

    // the middle row is x = 50; its f column carries the frozen value
    REQUIRE(r.out.find("\n50,139.85607970") != std::string::npos);
}

TEST_CASE("json output on stdout is a bare parseable document", "[cli]") {
    const auto r = run_cli({"solve", "--n_points", "2", "--x_max", "10",
                            "--format", "json"});
    REQUIRE(r.code == 0);
    REQUIRE(r.out.front() == '{');
    const auto doc = nlohmann::json::parse(r.out);
    REQUIRE(doc.contains("summary"));
    REQUIRE(doc["summary"].contains("x_alpha"));
    REQUIRE(doc["records"].size() == 2);
    REQUIRE(doc["records"][0].contains("x"));
    REQUIRE(doc["records"][0].contains("f"));
    REQUIRE(doc["records"][0].contains("g"));
    REQUIRE(doc["records"][0].contains("a_star"));
    REQUIRE(doc["columns"].size() == 4);
}

TEST_CASE("results can be written to a file", "[cli]") {
    const std::string path = "/tmp/divbar_cli_out.csv";
    std::remove(path.c_str());
    const auto r = run_cli({"solve", "--n_points", "2", "--x_max", "10",
                            "--out", path});
    REQUIRE(r.code == 0);
    REQUIRE(r.out.find("# wrote " + path) != std::string::npos);
    std::ifstream f(path);
    std::string first;
    std::getline(f, first);
    REQUIRE(first == "x,f,g,a_star");
    std::remove(path.c_str());
}

TEST_CASE("config files load, reject unknown keys, and lose to flags", "[cli]") {
    const std::string path = "/tmp/divbar_cli_config.txt";

    write_file(path, "# reference setup\nmu = 2.0\nn_points = 5\nx_max = 40\n");
    auto r = run_cli({"solve", "--config", path, "--n_points", "2"});
    REQUIRE(r.code == 0);
    // flag wins: 2 data rows after the header
    const auto hdr = r.out.find("x,f,g,a_star\n");
    REQUIRE(hdr != std::string::npos);
    REQUIRE(count_lines(r.out.substr(hdr)) == 3);

    write_file(path, "muu = 2.0\n");
    r = run_cli({"solve", "--config", path});
    REQUIRE(r.code == 2);
    REQUIRE(r.err.find("unknown config key") != std::string::npos);

    write_file(path, "mu 2.0\n");
    r = run_cli({"solve", "--config", path});
    REQUIRE(r.code == 2);
    REQUIRE(r.err.find("expected key = value") != std::string::npos);

    r = run_cli({"solve", "--config", "/tmp/no_such_divbar_config.txt"});
    REQUIRE(r.code == 2);
    std::remove(path.c_str());
}

TEST_CASE("exit codes follow the documented contract", "[cli]") {
    REQUIRE(run_cli({}).code == 2);                            // missing command
    REQUIRE(run_cli({"frobnicate"}).code == 2);                // unknown command
    REQUIRE(run_cli({"solve", "--mu", "abc"}).code == 2);      // unparseable value
    REQUIRE(run_cli({"solve", "--mu", "-3"}).code == 2);       // invalid model
    REQUIRE(run_cli({"barrier"}).code == 2);                   // missing epsilon
    REQUIRE(run_cli({"capital"}).code == 2);                   // missing epsilon
    REQUIRE(run_cli({"sweep"}).code == 2);                     // missing sweep parameters
    REQUIRE(run_cli({"solve", "--delta", "1.0"}).code == 3);   // unsupported regime
    REQUIRE(run_cli({"solve", "--format", "xml"}).code == 2);  // unknown format

    const auto help = run_cli({"--help"});
    REQUIRE(help.code == 0);
    REQUIRE(help.out.find("divbar") != std::string::npos);
}

TEST_CASE("validate reports the unsupported regime and exits nonzero", "[cli]") {
    const auto r = run_cli({"validate", "--delta", "1.0"});
    REQUIRE(r.code == 4);
    REQUIRE(r.out.find("check,pass,measured,threshold") != std::string::npos);
    REQUIRE(r.out.find("case_is_supported,false") != std::string::npos);
}

TEST_CASE("capital command matches the library call", "[cli]") {
    const auto r = run_cli({"capital", "--epsilon", "0.2", "--b", "100", "--T", "5"});
    REQUIRE(r.code == 0);
    REQUIRE(r.out.find("b,T,epsilon,risk_capital\n") != std::string::npos);

    divbar::ModelParams p;
    p.mu = 2.0;
    p.sigma = std::sqrt(50.0);
    p.delta = 0.2;
    p.c = 0.05;
    p.alpha = 0.5;
    p.beta = 8.0;
    const double expect = divbar::risk_capital(100.0, p, 5.0, 0.2);
    const auto row = r.out.substr(r.out.find("risk_capital\n") + 13);
    double b_col, t_col, eps_col, x_col;
    REQUIRE(std::sscanf(row.c_str(), "%lf,%lf,%lf,%lf", &b_col, &t_col, &eps_col,
                        &x_col) == 4);
    REQUIRE(b_col == 100.0);
    REQUIRE(t_col == 5.0);
    REQUIRE(x_col == Catch::Approx(expect).margin(1e-12));
}

TEST_CASE("sweep over x produces one row per point", "[cli]") {
    const auto one = run_cli({"sweep", "--sweep_var", "x", "--sweep_min", "10",
                              "--sweep_max", "10", "--sweep_steps", "1"});
    REQUIRE(one.code == 0);
    REQUIRE(one.out.find("x,f,g,a_star\n") != std::string::npos);
    REQUIRE(one.out.find("\n10,49.77807026") != std::string::npos);

    const auto many = run_cli({"sweep", "--sweep_var", "sigma2", "--sweep_min", "40",
                               "--sweep_max", "60", "--sweep_steps", "3"});
    REQUIRE(many.code == 0);
    const auto hdr = many.out.find("sigma2,x_alpha,x_beta,b0\n");
    REQUIRE(hdr != std::string::npos);
    REQUIRE(count_lines(many.out.substr(hdr)) == 4);

    const auto bad = run_cli({"sweep", "--sweep_var", "volatility", "--sweep_min",
                              "1", "--sweep_max", "2", "--sweep_steps", "2"});
    REQUIRE(bad.code == 2);
}

TEST_CASE("simulate is deterministic for a fixed seed", "[cli]") {
    const std::vector<std::string> args{"simulate", "--n_paths", "256", "--dt",
                                        "0.01",     "--T",       "1",   "--b",
                                        "100",      "--x",       "50",  "--seed",
                                        "9"};
    const auto a = run_cli(args);
    const auto b = run_cli(args);
    REQUIRE(a.code == 0);
    REQUIRE(a.out == b.out);
    REQUIRE(a.out.find("ruin_fraction") != std::string::npos);

    auto per_path_args = args;
    per_path_args.push_back("--per_path");
    const auto c = run_cli(per_path_args);
    REQUIRE(c.code == 0);
    const auto hdr = c.out.find("path,ruin_time,dividends\n");
    REQUIRE(hdr != std::string::npos);
    REQUIRE(count_lines(c.out.substr(hdr)) == 257);
}
