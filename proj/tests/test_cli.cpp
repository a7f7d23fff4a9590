#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "rgg/cli.hpp"
#include "rgg/experiments.hpp"

using doctest::Approx;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome call(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = rgg::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

double first_number(const std::string& text) { return std::stod(text); }

/// Value of a "key: value" line.
double field(const std::string& text, const std::string& key) {
  const auto pos = text.find(key + ": ");
  REQUIRE(pos != std::string::npos);
  return std::stod(text.substr(pos + key.size() + 2));
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

struct TempDir {
  fs::path path;
  TempDir() : path(fs::temp_directory_path() / ("rgg_cli_" + std::to_string(std::rand()))) {
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("xi") {
    auto r = call({"xi", "--dim", "3", "--k", "1", "--c", "0", "--area", "6"});
    CHECK(r.code == 0);
    CHECK(first_number(r.out) == Approx(0.7755).epsilon(1e-4));
    r = call({"xi", "--dim", "2", "--k", "2", "--c", "0", "--perimeter", "4"});
    CHECK(r.code == 0);
    CHECK(first_number(r.out) == Approx(-1.6278).epsilon(1e-4));
    r = call({"xi", "--dim", "3", "--k", "0", "--area", "6"});
    CHECK(r.code != 0);
    CHECK(r.err.find("k >= 1 required in 3D") != std::string::npos);
    CHECK(call({"xi", "--dim", "4", "--k", "1"}).code == 2);
    CHECK(call({"xi", "--dim", "3"}).code == 2);
  }

  TEST_CASE("radius") {
    auto r = call({"radius", "--dim", "3", "--n", "1000000", "--k", "1", "--xi", "0"});
    CHECK(r.code == 0);
    CHECK(first_number(r.out) == Approx(0.0248846).epsilon(1e-5));
    r = call({"radius", "--dim", "3", "--n", "1e6", "--k", "1", "--xi", "0"});
    CHECK(first_number(r.out) == Approx(0.0248846).epsilon(1e-5));
    r = call({"radius", "--dim", "2", "--n", "1000000", "--k", "0", "--c", "0"});
    CHECK(r.code == 0);
    CHECK(first_number(r.out) == Approx(2.0967e-3).epsilon(2e-4));
    r = call({"radius", "--dim", "3", "--n", "100", "--k", "1", "--xi", "-50"});
    CHECK(r.code != 0);
    CHECK_FALSE(r.err.empty());
    CHECK(call({"radius", "--dim", "3", "--k", "1"}).code == 2);
  }

  TEST_CASE("integral") {
    auto r = call({"integral", "--region", "cube", "--n", "1e12", "--k", "1", "--estimator", "1d"});
    REQUIRE(r.code == 0);
    const double far = field(r.out, "ratio_to_asymptote");
    r = call({"integral", "--region", "cube", "--n", "1e6", "--k", "1", "--estimator", "1d"});
    const double near = field(r.out, "ratio_to_asymptote");
    CHECK(std::abs(far - 1) < std::abs(near - 1));

    r = call({"integral", "--region", "cube", "--n", "1e8", "--k", "1", "--estimator", "mc", "--samples", "20000"});
    REQUIRE(r.code == 0);
    CHECK(field(r.out, "abs_diff_to_target") == Approx(std::abs(field(r.out, "value") - 1.0)).epsilon(1e-9));
    CHECK(r.out.find("estimator,n,k,c,value,error,target") != std::string::npos);

    CHECK(call({"integral", "--region", "sphere", "--n", "1e8"}).code == 2);
    CHECK(call({"integral", "--region", "cube", "--n", "1e8", "--estimator", "fast"}).code == 2);
    // r_n beyond the inradius.
    CHECK(call({"integral", "--region", "cube", "--n", "20", "--k", "1"}).code != 0);
  }

  TEST_CASE("simulate and analyze round trip") {
    TempDir dir;
    const auto csv = (dir.path / "r.csv").string();
    auto r = call({"simulate", "--region", "cube", "--n", "150", "--k", "1", "--c", "0", "--trials", "20",
                   "--seed", "42", "--out", csv});
    REQUIRE(r.code == 0);
    const std::string csv_text = slurp(csv);
    const std::string json_text = slurp(dir.path / "r.json");
    std::size_t lines = 0;
    for (char ch : csv_text) lines += ch == '\n';
    CHECK(lines == 21);

    r = call({"analyze", csv});
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(json_text);
    CHECK(field(r.out, "p_hat_delta") == Approx(j["p_hat_delta"].get<double>()).epsilon(1e-12));
    CHECK(field(r.out, "p_hat_kappa") == Approx(j["p_hat_kappa"].get<double>()).epsilon(1e-12));
    CHECK(field(r.out, "equality_rate") == Approx(j["equality_rate"].get<double>()).epsilon(1e-12));
    CHECK(field(r.out, "trials") == 20);

    // Rerun with more workers: byte-identical files.
    REQUIRE(call({"simulate", "--n", "150", "--trials", "20", "--seed", "42", "--workers", "4", "--out", csv}).code == 0);
    CHECK(slurp(csv) == csv_text);
    CHECK(slurp(dir.path / "r.json") == json_text);
  }

  TEST_CASE("poisson counts vary") {
    TempDir dir;
    const auto csv = (dir.path / "p.csv").string();
    REQUIRE(call({"simulate", "--n", "150", "--trials", "10", "--process", "poisson", "--out", csv}).code == 0);
    std::ifstream in(csv);
    const auto records = rgg::read_results_csv(in);
    bool varies = false;
    for (const auto& rec : records) varies |= rec.count != records.front().count;
    CHECK(varies);
  }

  TEST_CASE("analyze rejects bad input") {
    TempDir dir;
    const auto empty = dir.path / "empty.csv";
    std::ofstream(empty).close();
    CHECK(call({"analyze", empty.string()}).code != 0);
    CHECK(call({"analyze", (dir.path / "none.csv").string()}).code != 0);

    const auto bad = dir.path / "bad.csv";
    std::ofstream(bad) << rgg::kCsvHeader << "\n0,10,0.1,0.2,0.3,1,1,0\n1,10,0.1,oops,0.3,1,1,0\n";
    auto r = call({"analyze", bad.string()});
    CHECK(r.code != 0);
    CHECK(r.err.find("line 3") != std::string::npos);

    const auto corrupt = dir.path / "corrupt.csv";
    std::ofstream(corrupt) << rgg::kCsvHeader << "\n0,10,0.3,0.2,0.5,1,1,0\n";
    r = call({"analyze", corrupt.string()});
    CHECK(r.code != 0);
    CHECK(r.err.find("invariant violation") != std::string::npos);
  }

  TEST_CASE("config file and environment") {
    TempDir dir;
    const auto cfg = dir.path / "sim.ini";
    std::ofstream(cfg) << "n=120\ntrials=5\nseed=7\n";
    const auto csv = (dir.path / "c.csv").string();
    REQUIRE(call({"simulate", "--config", cfg.string(), "--out", csv}).code == 0);
    std::ifstream in(csv);
    const auto records = rgg::read_results_csv(in);
    CHECK(records.size() == 5);
    CHECK(records.front().count == 120);

    // Flags override the file.
    REQUIRE(call({"simulate", "--config", cfg.string(), "--trials", "3", "--out", csv}).code == 0);
    std::ifstream in2(csv);
    CHECK(rgg::read_results_csv(in2).size() == 3);

    setenv("RGG_WORKERS", "0", 1);
    CHECK(call({"simulate", "--n", "50", "--trials", "2", "--out", csv}).code == 2);
    setenv("RGG_WORKERS", "3", 1);
    CHECK(call({"simulate", "--n", "50", "--trials", "2", "--out", csv}).code == 0);
    unsetenv("RGG_WORKERS");
  }

  TEST_CASE("invalid configurations are usage errors") {
    CHECK(call({"simulate", "--n", "50", "--trials", "0", "--out", "x.csv"}).code == 2);
    CHECK(call({"simulate", "--n", "2", "--out", "x.csv"}).code == 2);
    CHECK(call({"simulate", "--process", "lattice", "--out", "x.csv"}).code == 2);
    CHECK(call({"simulate", "--n", "50"}).code == 2);
    CHECK(call({}).code == 2);
    CHECK(call({"frobnicate"}).code == 2);
    CHECK(call({"--help"}).code == 0);
    CHECK(call({"simulate", "--n", "50", "--trials", "2", "--out", "/nonexistent-dir/x.csv"}).code == 1);
  }

  TEST_CASE("parse_count and format12") {
    CHECK(rgg::cli::parse_count("1e8") == 1e8);
    CHECK(rgg::cli::parse_count("2000") == 2000);
    CHECK(rgg::cli::parse_count("12.9") == 12);
    CHECK_THROWS(rgg::cli::parse_count("-1"));
    CHECK_THROWS(rgg::cli::parse_count("ten"));
    CHECK(rgg::cli::format12(0.1) == "0.1");
    CHECK(rgg::cli::format12(1.0 / 3.0) == "0.333333333333");
  }

  TEST_CASE("installed binary runs") {
    const std::string cmd = std::string(RGG_CLI_PATH) + " xi --dim 3 --k 1 --c 0 --area 6";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    char buf[128] = {};
    const bool got = std::fgets(buf, sizeof buf, pipe) != nullptr;
    const int status = pclose(pipe);
    CHECK(got);
    CHECK(status == 0);
    CHECK(std::stod(buf) == Approx(0.7755).epsilon(1e-4));
  }
}
