#include "dimerlab/lab.hpp"

#include "dimerlab/seeds.hpp"

#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <vector>

using namespace dimerlab;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("dimerlab_test_" + std::to_string(splitmix64(std::random_device{}())));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string str(const std::string& name = "") const { return (path / name).string(); }
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int cli(std::initializer_list<const char*> args) {
    std::vector<const char*> argv = {"dimerlab"};
    argv.insert(argv.end(), args.begin(), args.end());
    return cli_main(static_cast<int>(argv.size()), argv.data());
}

}  // namespace

TEST_CASE("grid generation") {
    GridSpec grid;
    const auto values = grid.values();
    REQUIRE(values.size() == 31);
    CHECK(values.front() == doctest::Approx(1.0));
    CHECK(values.back() == doctest::Approx(300.0));

    grid.points = 0;
    CHECK_THROWS_AS(grid.values(), ConfigError);
    grid = GridSpec{};
    grid.t_min = 0.0;
    CHECK_THROWS_AS(grid.values(), ConfigError);
}

TEST_CASE("config parsing and unknown-key rejection") {
    const RunConfig defaults = RunConfig::load("default");
    CHECK(defaults.resolved_repetitions() == 1);
    CHECK(defaults.grid.points == 31);

    nlohmann::json j = defaults.to_json();
    j["noise"] = "on";
    RunConfig noisy = RunConfig::from_json(j);
    CHECK(noisy.noise.enabled);

    j = nlohmann::json{{"grid", {{"t_min", 50.0}, {"t_max", 100.0}, {"points", 3}}}};
    const RunConfig partial = RunConfig::from_json(j);
    CHECK(partial.grid.values() == std::vector<double>{50.0, 75.0, 100.0});

    try {
        RunConfig::from_json(nlohmann::json{{"gird", 1}});
        FAIL("expected a config error");
    } catch (const ConfigError& ex) {
        CHECK(std::string(ex.what()).find("gird") != std::string::npos);
    }
    try {
        RunConfig::from_json(nlohmann::json{{"grid", {{"tmin", 1.0}}}});
        FAIL("expected a config error");
    } catch (const ConfigError& ex) {
        CHECK(std::string(ex.what()).find("grid.tmin") != std::string::npos);
    }

    CHECK_THROWS_AS(RunConfig::load("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("repetitions default by noise mode") {
    RunConfig cfg;
    CHECK(cfg.resolved_repetitions() == 1);
    cfg.noise.enabled = true;
    CHECK(cfg.resolved_repetitions() == 30);
    cfg.repetitions = 7;
    CHECK(cfg.resolved_repetitions() == 7);
}

TEST_CASE("seed derivation is deterministic and index-sensitive") {
    CHECK(derive_seed(1, 2, 3) == derive_seed(1, 2, 3));
    CHECK(derive_seed(1, 2, 3) != derive_seed(1, 2, 4));
    CHECK(derive_seed(1, 2, 3) != derive_seed(1, 3, 3));
    CHECK(derive_seed(2, 2, 3) != derive_seed(1, 2, 3));
}

TEST_CASE("average error accumulation") {
    ReferenceCurve ref;
    ref.rows = {{1.0, 1.0}, {2.0, 0.9}, {3.0, 0.8}};
    ref.source = "test";

    CHECK(avg_error_accumulation(ref, ref.rows) == doctest::Approx(0.0));

    auto shifted = ref.rows;
    for (auto& [t, v] : shifted) v -= 0.1;
    CHECK(avg_error_accumulation(ref, shifted) == doctest::Approx(0.1));

    // Symmetric when the roles swap.
    ReferenceCurve swapped;
    swapped.rows = shifted;
    swapped.source = "swapped";
    CHECK(avg_error_accumulation(swapped, ref.rows) == doctest::Approx(0.1));

    const std::vector<std::pair<double, double>> far = {{10.0, 1.0}};
    CHECK_THROWS_AS(avg_error_accumulation(ref, far), std::invalid_argument);
}

TEST_CASE("average function evaluations") {
    std::vector<SweepRecord> records(2);
    records[0].n_evals_mean = 100.0;
    records[1].n_evals_mean = 300.0;
    CHECK(avg_function_evaluations(records) == doctest::Approx(200.0));
    records.assign(3, SweepRecord{});
    for (auto& r : records) r.n_evals_mean = 5000.0;
    CHECK(avg_function_evaluations(records) == doctest::Approx(5000.0));
}

TEST_CASE("sweep CSV round-trips") {
    TempDir dir;
    std::vector<SweepRecord> records(2);
    records[0].t_kelvin = 1.0;
    records[0].ergotropy_norm_mean = 1.0;
    records[0].cost_mean = -5.5;
    records[1].t_kelvin = 300.0;
    records[1].ergotropy_norm_mean = 0.735;
    records[1].has_extraction = true;
    records[1].pop_mean << 0.9, 0.05, 0.04, 0.01;
    records[1].fidelity_mean = 0.95;
    records[1].ergotropy_oracle_kelvin = 0.99;

    const std::string path = dir.str("sweep.csv");
    write_sweep_csv(path, records);

    const auto back = read_sweep_csv(path);
    REQUIRE(back.size() == 2);
    CHECK_FALSE(back[0].has_extraction);
    CHECK(back[0].cost_mean == doctest::Approx(-5.5));
    CHECK(back[1].has_extraction);
    CHECK(back[1].pop_mean(0) == doctest::Approx(0.9));
    CHECK(back[1].fidelity_mean == doctest::Approx(0.95));

    // Header shape: 26 comma-separated fields, LF endings, T first.
    const std::string text = slurp(path);
    CHECK(text.find("T_K,") == 0);
    CHECK(text.find('\r') == std::string::npos);
}

TEST_CASE("reference CSV ingestion") {
    TempDir dir;
    const std::string path = dir.str("ref.csv");
    write_reference_csv(path, {{1.0, 1.0}, {150.0, 0.9}, {300.0, 0.7351}});
    const ReferenceCurve curve = ReferenceCurve::load_csv(path);
    REQUIRE(curve.rows.size() == 3);
    CHECK(curve.rows[2].second == doctest::Approx(0.7351));

    std::ofstream bad(dir.str("bad.csv"));
    bad << "temperature,value\n1,1\n";
    bad.close();
    CHECK_THROWS_AS(ReferenceCurve::load_csv(dir.str("bad.csv")), ConfigError);

    std::ofstream unsorted(dir.str("unsorted.csv"));
    unsorted << "T_K,ergotropy_norm\n2,0.5\n1,0.6\n";
    unsorted.close();
    CHECK_THROWS_AS(ReferenceCurve::load_csv(dir.str("unsorted.csv")), ConfigError);
}

TEST_CASE("oracle subcommand writes a deterministic sweep") {
    TempDir dir;
    const std::string out = dir.str("run");
    CHECK(cli({"oracle", "--out", out.c_str()}) == 0);

    const auto records = read_sweep_csv(out + "/sweep.csv");
    REQUIRE(records.size() == 31);
    CHECK(records.front().t_kelvin == doctest::Approx(1.0));
    CHECK(records.front().ergotropy_norm_mean == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(records.back().ergotropy_norm_mean == doctest::Approx(0.7351).epsilon(2e-3));

    // Re-running from the emitted manifest reproduces the CSV byte for byte.
    const std::string manifest = out + "/manifest.json";
    const std::string rerun = dir.str("rerun");
    CHECK(cli({"oracle", "--config", manifest.c_str(), "--out", rerun.c_str()}) == 0);
    CHECK(slurp(out + "/sweep.csv") == slurp(rerun + "/sweep.csv"));
}

TEST_CASE("CLI error paths") {
    CHECK(cli({"oracle", "--config", "/missing/file.json"}) == 2);
    CHECK(cli({"frobnicate"}) == 2);
    CHECK(cli({"oracle", "--bogus-flag"}) == 2);
    CHECK(cli({"compare", "--ref", "/missing/a.csv", "--sim", "/missing/b.csv"}) == 2);
    // Unwritable output directory is a runtime failure, not a config one.
    CHECK(cli({"oracle", "--out", "/dev/null/out"}) == 3);
}

TEST_CASE("thread resolution respects the environment cap and the override") {
    setenv("DIMERLAB_THREADS", "1", 1);
    CHECK(resolve_threads(-1) == 1);
    CHECK(resolve_threads(6) == 6);   // explicit request wins
    setenv("DIMERLAB_THREADS", "junk", 1);
    CHECK_THROWS_AS(resolve_threads(-1), ConfigError);
    unsetenv("DIMERLAB_THREADS");
    CHECK(resolve_threads(-1) >= 1);
}

TEST_CASE("points.json carries per-repetition raw values") {
    TempDir dir;
    std::ofstream cfg(dir.str("config.json"));
    cfg << R"({"grid": {"t_min": 200.0, "t_max": 300.0, "points": 2}, "max_evals": 200,)"
        << R"( "repetitions": 2, "emit_points": true})";
    cfg.close();
    const std::string cfg_path = dir.str("config.json");
    const std::string out = dir.str("run");
    CHECK(cli({"vqt", "--config", cfg_path.c_str(), "--out", out.c_str()}) == 0);

    const auto points = nlohmann::json::parse(slurp(out + "/points.json"));
    REQUIRE(points.size() == 2);
    REQUIRE(points[0].at("reps").size() == 2);
    CHECK(points[0]["reps"][0].contains("cost"));
    CHECK(points[0]["reps"][0].contains("n_evals"));
    CHECK(points[0]["reps"][0]["n_evals"].get<int>() <= 200);
}

TEST_CASE("compare subcommand on oracle output") {
    TempDir dir;
    const std::string out = dir.str("run");
    const std::string ref = dir.str("reference.csv");
    CHECK(cli({"oracle", "--out", out.c_str(), "--reference-out", ref.c_str()}) == 0);
    const std::string sweep = out + "/sweep.csv";
    const std::string metrics_dir = dir.str("metrics");
    CHECK(cli({"compare", "--ref", ref.c_str(), "--sim", sweep.c_str(), "--out",
               metrics_dir.c_str()}) == 0);
    const std::string metrics = slurp(metrics_dir + "/metrics.json");
    const auto j = nlohmann::json::parse(metrics);
    CHECK(j.at("avg_error_accumulation").get<double>() == doctest::Approx(0.0));
}

TEST_CASE("noise-info prints the resolved model") {
    CHECK(cli({"noise-info", "--noise", "on"}) == 0);
}

TEST_CASE("extract subcommand over oracle states emits physical columns") {
    TempDir dir;
    const std::string out = dir.str("run");
    // A small grid keeps this quick; source defaults to oracle states.
    std::ofstream cfg(dir.str("config.json"));
    cfg << R"({"grid": {"t_min": 1.0, "t_max": 100.0, "points": 5}})";
    cfg.close();
    const std::string cfg_path = dir.str("config.json");
    CHECK(cli({"extract", "--config", cfg_path.c_str(), "--out", out.c_str()}) == 0);

    const auto records = read_sweep_csv(out + "/sweep.csv");
    REQUIRE(records.size() == 5);
    for (const SweepRecord& r : records) {
        CHECK(r.has_extraction);
        CHECK(r.pop_mean.sum() == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(r.fidelity_mean >= 0.0);
        CHECK(r.fidelity_mean <= 1.0);
        CHECK(r.ergotropy_norm_mean >= 0.0);
        CHECK(r.ergotropy_norm_mean <= 1.0 + 1e-6);
        CHECK(r.delta_e_mean <= r.ergotropy_oracle_kelvin + 1e-9);
    }
}

TEST_CASE("extract succeeds when the grid has no points below 100 K") {
    TempDir dir;
    std::ofstream cfg(dir.str("config.json"));
    cfg << R"({"grid": {"t_min": 150.0, "t_max": 300.0, "points": 2}})";
    cfg.close();
    const std::string cfg_path = dir.str("config.json");
    const std::string out = dir.str("run");
    CHECK(cli({"extract", "--config", cfg_path.c_str(), "--out", out.c_str()}) == 0);
    CHECK(read_sweep_csv(out + "/sweep.csv").size() == 2);
}

TEST_CASE("shot sampling in the extract pipeline is seeded and reproducible") {
    TempDir dir;
    std::ofstream cfg(dir.str("config.json"));
    cfg << R"({"grid": {"t_min": 1.0, "t_max": 50.0, "points": 2}, "shots": 2048})";
    cfg.close();
    const std::string cfg_path = dir.str("config.json");
    const std::string out_a = dir.str("a"), out_b = dir.str("b");
    CHECK(cli({"extract", "--config", cfg_path.c_str(), "--out", out_a.c_str()}) == 0);
    CHECK(cli({"extract", "--config", cfg_path.c_str(), "--out", out_b.c_str()}) == 0);
    CHECK(slurp(out_a + "/sweep.csv") == slurp(out_b + "/sweep.csv"));

    const auto records = read_sweep_csv(out_a + "/sweep.csv");
    for (const SweepRecord& r : records) {
        const double scaled = r.pop_mean(0) * 2048.0;
        CHECK(scaled == doctest::Approx(std::round(scaled)).epsilon(1e-9));
    }
}
