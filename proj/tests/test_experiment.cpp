#include "pnlab/experiment.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <fstream>
#include <unistd.h>

using namespace pnlab;

namespace {

fs::path fresh_dir(const std::string& tag) {
    static int counter = 0;
    fs::path p = fs::temp_directory_path() /
                 ("pnlab_test_" + tag + "_" + std::to_string(::getpid()) + "_" +
                  std::to_string(counter++));
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

json tiny_solve_config() {
    return json{{"kind", "solve"},
                {"seed", 7},
                {"problem",
                 {{"rho", 1.0},
                  {"mu", 0.5},
                  {"b0", 0.1},
                  {"T", 0.05},
                  {"grid", {{"dim", 1}, {"extent", {1.0}}, {"n", {40}}}},
                  {"source", {{"type", "sine"}, {"amplitude", 5.0}, {"mode", 1}}}}},
                {"solver", {{"method", "semi-implicit"}, {"dt", 0.005}}}};
}

json tiny_verify_config() {
    return json{{"kind", "verify-embeddings"},
                {"seed", 11},
                {"verify",
                 {{"corpus", {{"dims", {1}}, {"n1d", 40}, {"random_count", 2}}},
                  {"refinement_factors", {1, 2}}}}};
}

}  // namespace

TEST_CASE("config validation fails before any computation") {
    CHECK_THROWS_AS(parse_config(json{{"seed", 1}}), ConfigError);
    CHECK_THROWS_AS(parse_config(json{{"kind", "unknown-kind"}}), ConfigError);

    json bad_grid = tiny_solve_config();
    bad_grid["problem"]["grid"]["dim"] = 3;
    CHECK_THROWS_AS(parse_config(bad_grid), ConfigError);

    json bad_rho = tiny_solve_config();
    bad_rho["problem"]["rho"] = -1.0;
    CHECK_THROWS_AS(parse_config(bad_rho), std::invalid_argument);

    json bad_eps = tiny_solve_config();
    bad_eps["solver"]["epsilon_schedule"] = {0.1, 0.2};
    CHECK_THROWS_AS(parse_config(bad_eps), std::invalid_argument);

    json bad_method = tiny_solve_config();
    bad_method["solver"]["method"] = "leapfrog";
    CHECK_THROWS_AS(parse_config(bad_method), std::invalid_argument);
}

TEST_CASE("solve experiment writes outputs and a consistent manifest") {
    fs::path dir = fresh_dir("solve");
    ExperimentConfig cfg = parse_config(tiny_solve_config());
    RunOutcome out = run_experiment(cfg, dir);
    CHECK(out.exit_code == 0);
    CHECK(fs::exists(dir / "diagnostics.csv"));
    CHECK(fs::exists(dir / "final_state.csv"));
    CHECK(fs::exists(dir / "monitor.csv"));
    REQUIRE(fs::exists(dir / "manifest.json"));

    json manifest = json::parse(slurp(dir / "manifest.json"));
    CHECK(manifest["kind"] == "solve");
    CHECK(manifest["verdict"]["status"] == "completed");
    CHECK(manifest["verdict"]["admissible"] == true);
    for (const auto& f : manifest["files"]) {
        const fs::path p = dir / f["path"].get<std::string>();
        REQUIRE(fs::exists(p));
        CHECK(fs::file_size(p) == f["bytes"].get<std::uintmax_t>());
        char hash[20];
        std::snprintf(hash, sizeof hash, "%016llx",
                      static_cast<unsigned long long>(out::fnv1a64_file(p)));
        CHECK(f["fnv1a64"].get<std::string>() == hash);
    }
    fs::remove_all(dir);
}

TEST_CASE("identical config and seed give byte-identical data files") {
    fs::path a = fresh_dir("det_a");
    fs::path b = fresh_dir("det_b");
    ExperimentConfig cfg = parse_config(tiny_verify_config());
    run_experiment(cfg, a);
    run_experiment(cfg, b);
    int compared = 0;
    for (const auto& e : fs::recursive_directory_iterator(a)) {
        if (!e.is_regular_file() || e.path().filename() == "manifest.json") continue;
        const fs::path other = b / fs::relative(e.path(), a);
        REQUIRE(fs::exists(other));
        REQUIRE(slurp(e.path()) == slurp(other));
        ++compared;
    }
    CHECK(compared > 0);
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST_CASE("verify experiment: clean corpus passes, pinned constants fail") {
    fs::path dir = fresh_dir("verify");
    ExperimentConfig cfg = parse_config(tiny_verify_config());
    RunOutcome out = run_experiment(cfg, dir);
    CHECK(out.exit_code == 0);
    REQUIRE(fs::exists(dir / "summary.json"));
    json summary = json::parse(slurp(dir / "summary.json"));
    CHECK(summary["violations"] == false);
    for (const auto& entry : summary["inequalities"])
        CHECK(fs::exists(dir / entry["csv"].get<std::string>()));

    // pin one inequality's constants at half the fitted value: violation
    double fitted = 0.0;
    std::string name;
    for (const auto& entry : summary["inequalities"])
        if (entry["c2"].get<double>() == 0.0 && entry["c1"].get<double>() > 0.0) {
            fitted = entry["c1"].get<double>();
            name = entry["name"].get<std::string>();
            break;
        }
    REQUIRE(!name.empty());
    json broken = tiny_verify_config();
    broken["verify"]["pinned_constants"][name] = {{"c1", fitted * 0.5}, {"c2", 0.0}};
    fs::path dir2 = fresh_dir("verify_broken");
    RunOutcome bad = run_experiment(parse_config(broken), dir2);
    CHECK(bad.exit_code == 1);
    fs::remove_all(dir);
    fs::remove_all(dir2);
}

TEST_CASE("inequality selection narrows the verify plan") {
    fs::path dir = fresh_dir("verify_sel");
    json cfg = tiny_verify_config();
    cfg["verify"]["inequalities"] = {"func-laplacian"};
    RunOutcome out = run_experiment(parse_config(cfg), dir);
    CHECK(out.exit_code == 0);
    json summary = json::parse(slurp(dir / "summary.json"));
    CHECK(summary["inequalities"].size() == 2);  // the two 1D exponent choices
    fs::remove_all(dir);
}

TEST_CASE("sweep: empty grid, single point, aggregate") {
    // an empty value list makes an empty cartesian product
    json cfg{{"kind", "sweep"},
             {"seed", 3},
             {"sweep",
              {{"base", tiny_solve_config()},
               {"axes", json::array({{{"path", "problem.rho"}, {"values", json::array()}}})}}}};
    fs::path dir = fresh_dir("sweep_empty");
    RunOutcome out = run_experiment(parse_config(cfg), dir);
    CHECK(out.exit_code == 0);
    CHECK(out.verdict["points"].empty());
    REQUIRE(fs::exists(dir / "aggregate.csv"));
    fs::remove_all(dir);

    // a single-point sweep reproduces the direct run's verdict
    json one{{"kind", "sweep"},
             {"seed", 3},
             {"sweep",
              {{"base", tiny_solve_config()},
               {"axes", json::array({{{"path", "problem.rho"}, {"values", {1.0}}}})}}}};
    fs::path dir1 = fresh_dir("sweep_one");
    RunOutcome swept = run_experiment(parse_config(one), dir1);
    CHECK(swept.exit_code == 0);
    REQUIRE(swept.verdict["points"].size() == 1);
    CHECK(swept.verdict["points"][0]["verdict"]["status"] == "completed");

    fs::path dird = fresh_dir("sweep_direct");
    RunOutcome direct = run_experiment(parse_config(tiny_solve_config()), dird);
    CHECK(swept.verdict["points"][0]["verdict"]["final_phi"] ==
          direct.verdict["final_phi"]);
    fs::remove_all(dir1);
    fs::remove_all(dird);
}

TEST_CASE("sweep across the amplification boundary flips the verdict") {
    json base{{"kind", "blowup-study"},
              {"seed", 5},
              {"problem",
               {{"rho", 1.0},
                {"mu", 1.0},
                {"b0", 0.0},
                {"b_const", 4.0},
                {"T", 1.0},
                {"grid", {{"dim", 1}, {"extent", {1.0}}, {"n", {60}}}},
                {"u0", {{"type", "eigenfunction"}, {"amplitude", 1.0}}}}},
              {"solver", {{"method", "semi-implicit"}, {"dt", 0.002}}}};
    json cfg{{"kind", "sweep"},
             {"seed", 5},
             {"jobs", 2},
             {"sweep",
              {{"base", base},
               {"axes", json::array({{{"path", "problem.b_const"},
                                      {"values", {4.0, 2.0 * M_PI * M_PI}}}})}}}};
    fs::path dir = fresh_dir("sweep_regime");
    RunOutcome out = run_experiment(parse_config(cfg), dir);
    CHECK(out.exit_code == 0);  // both points match their expected regimes
    REQUIRE(out.verdict["points"].size() == 2);
    bool saw_bounded = false, saw_blowup = false;
    for (const auto& p : out.verdict["points"]) {
        const std::string s = p["verdict"]["status"].get<std::string>();
        if (s == "completed") saw_bounded = true;
        if (s == "blow-up-detected") saw_blowup = true;
    }
    CHECK(saw_bounded);
    CHECK(saw_blowup);
    fs::remove_all(dir);
}
