#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "pic/config.hpp"
#include "pic/csv.hpp"

using namespace pic;
using nlohmann::json;

namespace {

json uav_doc()
{
    return json{
        {"version", 1},
        {"experiment", "uav"},
        {"dt", 0.1},
        {"x0", {0, 0, 0, 0}},
        {"model", {{"type", "double_integrator"}, {"a_values", {-0.5, 0.1}}}},
        {"cost", {{"q_diag", {1, 2, 3, 4}}, {"x_tgt", {8, 8, 0, 0}}}},
        {"pi", {{"num_samples", 100}, {"lambda", 1.0}, {"horizon", 10}, {"seed", 42}}},
        {"run", {{"outer_steps", 5}, {"seeds", {1, 2}}}},
    };
}

json coverage_doc()
{
    return json{
        {"version", 1},
        {"experiment", "coverage-test"},
        {"dt", 0.1},
        {"x0", {0, 0}},
        {"model", {{"type", "ltv"}, {"A", {{1, 0}, {0, 1}}}, {"B", {{1, 0}, {0, 1}}}}},
        {"cost", {{"q_diag", {1, 1}}, {"x_tgt", {0, 0}}}},
        {"pi", {{"num_samples", 64}, {"lambda", 1.0}, {"horizon", 4}, {"seed", 9}}},
        {"coverage",
         {{"eps1", 0.05}, {"eps2", 0.1}, {"rho1", 0.05}, {"rho2", 0.05}, {"repetitions", 10},
          {"reference_samples", 1000}}},
    };
}

}  // namespace

TEST_CASE("minimal uav document parses into typed settings") {
    const Config cfg = parse_config(uav_doc(), {});
    CHECK(cfg.experiment == ExperimentKind::kUav);
    CHECK(cfg.dt == 0.1);
    CHECK(cfg.delta_mode == DeltaMode::kFolded);
    CHECK(cfg.x0 == Eigen::VectorXd::Zero(4));
    CHECK(cfg.model.type == ModelType::kDoubleIntegrator);
    CHECK(cfg.model.a_values == std::vector<double>{-0.5, 0.1});
    CHECK(cfg.cost.Q(1, 1) == 2.0);
    CHECK(cfg.cost.Q(3, 3) == 4.0);
    CHECK(cfg.cost.Q_T == cfg.cost.Q);  // terminal defaults to the running weight
    CHECK(cfg.cost.dt == 0.1);
    CHECK(cfg.pi.num_samples == 100);
    CHECK(cfg.pi.seed == 42);
    CHECK_FALSE(cfg.pi.zero_noise);
    CHECK(cfg.has_run);
    CHECK(cfg.run.outer_steps == 5);
    CHECK(cfg.run.seeds == std::vector<std::uint64_t>{1, 2});
    CHECK(cfg.run.actuation_noise);  // defaults on
    CHECK(cfg.out_dir.empty());
    CHECK(cfg.threads == 1);
    CHECK(cfg.hash_hex.size() == 16);
}

TEST_CASE("unknown keys are rejected with their full path") {
    json doc = uav_doc();
    doc["bogus"] = 1;
    CHECK_THROWS_WITH_AS(parse_config(doc, {}), doctest::Contains("unknown key \"bogus\""),
                         ConfigError);

    doc = uav_doc();
    doc["model"]["frobnicate"] = true;
    CHECK_THROWS_WITH_AS(parse_config(doc, {}),
                         doctest::Contains("unknown key \"model.frobnicate\""), ConfigError);

    doc = uav_doc();
    doc["pi"]["temperature"] = 2.0;
    CHECK_THROWS_WITH_AS(parse_config(doc, {}),
                         doctest::Contains("unknown key \"pi.temperature\""), ConfigError);
}

TEST_CASE("cli overrides patch the document before validation") {
    CliOverrides ov;
    ov.seed = 777;
    ov.out_dir = "results";
    ov.threads = 8;
    ov.delta_mode = "diffusion";
    const Config cfg = parse_config(uav_doc(), ov);
    CHECK(cfg.pi.seed == 777);
    CHECK(cfg.out_dir == "results");
    CHECK(cfg.threads == 8);
    CHECK(cfg.delta_mode == DeltaMode::kDiffusion);
    CHECK(cfg.effective["pi"]["seed"] == 777);

    CliOverrides bad;
    bad.delta_mode = "levy";
    CHECK_THROWS_AS(parse_config(uav_doc(), bad), ConfigError);

    // The Hoeffding form knob has no home without a complexity section.
    CliOverrides orphan;
    orphan.hoeffding_form = "conservative";
    CHECK_THROWS_WITH_AS(parse_config(uav_doc(), orphan),
                         doctest::Contains("requires a complexity section"), ConfigError);
}

TEST_CASE("hoeffding form override lands in the complexity settings") {
    json doc = uav_doc();
    doc["experiment"] = "complexity-table";
    doc["complexity"] = {{"eps1", 0.01}, {"eps2", 0.1},  {"rho1", 0.05},
                         {"rho2", 0.05}, {"mode", "analytic"}, {"horizons", {10}}};
    CliOverrides ov;
    ov.hoeffding_form = "conservative";
    const Config cfg = parse_config(doc, ov);
    CHECK(cfg.has_complexity);
    CHECK(cfg.complexity.form == HoeffdingForm::kConservative);

    ov.hoeffding_form = "prop1";
    CHECK_THROWS_AS(parse_config(doc, ov), ConfigError);
}

TEST_CASE("config hash ignores output and thread settings") {
    const Config base = parse_config(uav_doc(), {});

    CliOverrides cosmetic;
    cosmetic.out_dir = "elsewhere";
    cosmetic.threads = 16;
    CHECK(parse_config(uav_doc(), cosmetic).hash_hex == base.hash_hex);

    CliOverrides reseeded;
    reseeded.seed = 43;
    CHECK(parse_config(uav_doc(), reseeded).hash_hex != base.hash_hex);

    json slower = uav_doc();
    slower["dt"] = 0.2;
    CHECK(parse_config(slower, {}).hash_hex != base.hash_hex);

    // Key insertion order never matters: documents are canonicalized.
    json reordered;
    reordered["run"] = uav_doc()["run"];
    reordered["pi"] = uav_doc()["pi"];
    reordered["cost"] = uav_doc()["cost"];
    reordered["model"] = uav_doc()["model"];
    reordered["x0"] = uav_doc()["x0"];
    reordered["dt"] = uav_doc()["dt"];
    reordered["experiment"] = uav_doc()["experiment"];
    reordered["version"] = uav_doc()["version"];
    CHECK(parse_config(reordered, {}).hash_hex == base.hash_hex);
}

TEST_CASE("running and terminal weights accept exactly one spelling each") {
    json doc = uav_doc();
    doc["cost"]["q"] = {{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}};
    CHECK_THROWS_WITH_AS(parse_config(doc, {}), doctest::Contains("not both"), ConfigError);

    doc = uav_doc();
    doc["cost"].erase("q_diag");
    CHECK_THROWS_AS(parse_config(doc, {}), ConfigError);

    doc = uav_doc();
    doc["cost"].erase("q_diag");
    doc["cost"]["q"] = {{2, 0, 0, 0}, {0, 2, 0, 0}, {0, 0, 2, 0}, {0, 0, 0, 2}};
    CHECK(parse_config(doc, {}).cost.Q(0, 0) == 2.0);

    doc = uav_doc();
    doc["cost"]["q_terminal_diag"] = {9, 9, 9, 9};
    const Config cfg = parse_config(doc, {});
    CHECK(cfg.cost.Q_T(0, 0) == 9.0);
    CHECK(cfg.cost.Q(0, 0) == 1.0);

    doc["cost"]["q_terminal"] = {{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}};
    CHECK_THROWS_WITH_AS(parse_config(doc, {}), doctest::Contains("not both"), ConfigError);
}

TEST_CASE("version gate and document shape") {
    json doc = uav_doc();
    doc["version"] = 2;
    CHECK_THROWS_WITH_AS(parse_config(doc, {}), doctest::Contains("must be 1"), ConfigError);

    doc = uav_doc();
    doc.erase("version");
    CHECK_THROWS_WITH_AS(parse_config(doc, {}), doctest::Contains("is required"), ConfigError);

    CHECK_THROWS_AS(parse_config(json::array(), {}), ConfigError);
    CHECK_THROWS_AS(parse_config(json("text"), {}), ConfigError);
}

TEST_CASE("experiment specific section requirements") {
    json doc = uav_doc();
    doc.erase("run");
    CHECK_THROWS_WITH_AS(parse_config(doc, {}), doctest::Contains("run"), ConfigError);

    doc = uav_doc();
    doc["experiment"] = "variance-sweep";
    doc.erase("run");
    CHECK_THROWS_WITH_AS(parse_config(doc, {}), doctest::Contains("sweep"), ConfigError);
    doc["sweep"] = {{"a_values", {-0.5}}, {"horizons", {10, 20}}};
    const Config cfg = parse_config(doc, {});
    CHECK(cfg.has_sweep);
    CHECK(cfg.sweep.horizons == std::vector<int>{10, 20});

    doc = uav_doc();
    doc["experiment"] = "complexity-table";
    doc.erase("run");
    CHECK_THROWS_WITH_AS(parse_config(doc, {}), doctest::Contains("complexity"), ConfigError);

    // The coverage experiment insists on an explicit ltv model.
    json cov = coverage_doc();
    cov["model"] = {{"type", "double_integrator"}, {"a_values", {0.0}}};
    cov["x0"] = {0, 0, 0, 0};
    cov["cost"] = {{"q_diag", {1, 1, 1, 1}}, {"x_tgt", {0, 0, 0, 0}}};
    CHECK_THROWS_WITH_AS(parse_config(cov, {}), doctest::Contains("ltv"), ConfigError);
    CHECK(parse_config(coverage_doc(), {}).has_coverage);
}

TEST_CASE("mismatched experiment and model are rejected") {
    json doc = uav_doc();
    doc["model"] = {{"type", "simple_car"},
                    {"steerings", {{"narrow", {-0.26, 0.26}}}}};
    CHECK_THROWS_WITH_AS(parse_config(doc, {}),
                         doctest::Contains("must be double_integrator"), ConfigError);
}

TEST_CASE("steering settings stay inside the open half-pi interval") {
    json doc = uav_doc();
    doc["experiment"] = "ugv";
    doc["model"] = {{"type", "simple_car"},
                    {"wheelbase", 0.5},
                    {"steerings", {{"wide", {-1.5, 1.5}}, {"narrow", {-0.26, 0.26}}}}};
    const Config cfg = parse_config(doc, {});
    REQUIRE(cfg.model.steerings.size() == 2);
    CHECK(cfg.model.steerings[0].label == "narrow");  // labels iterate sorted
    CHECK(cfg.model.steerings[1].label == "wide");
    CHECK(cfg.model.steerings[0].lo == -0.26);

    json wall = doc;
    wall["model"]["steerings"]["wide"] = {-1.5707963267948966, 1.5};
    CHECK_THROWS_WITH_AS(parse_config(wall, {}), doctest::Contains("strictly inside"),
                         ConfigError);

    json inverted = doc;
    inverted["model"]["steerings"]["narrow"] = {0.3, 0.2};
    CHECK_THROWS_WITH_AS(parse_config(inverted, {}), doctest::Contains("lo < hi"), ConfigError);
}

TEST_CASE("dimension and positivity validation") {
    json doc = uav_doc();
    doc["dt"] = 0.0;
    CHECK_THROWS_AS(parse_config(doc, {}), ConfigError);

    doc = uav_doc();
    doc["x0"] = {0, 0, 0};
    CHECK_THROWS_WITH_AS(parse_config(doc, {}), doctest::Contains("x0"), ConfigError);

    doc = uav_doc();
    doc["cost"]["q_diag"] = {1, 1, 1};
    CHECK_THROWS_AS(parse_config(doc, {}), ConfigError);

    doc = uav_doc();
    doc["cost"]["omega_c"] = -1.0;
    CHECK_THROWS_AS(parse_config(doc, {}), ConfigError);

    // Cost-level validation failures arrive wrapped as config errors.
    doc = uav_doc();
    doc["cost"].erase("q_diag");
    doc["cost"]["q"] = {{1, 2, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}};
    CHECK_THROWS_AS(parse_config(doc, {}), ConfigError);

    doc = uav_doc();
    doc["pi"]["num_samples"] = 0;
    CHECK_THROWS_AS(parse_config(doc, {}), ConfigError);
    doc = uav_doc();
    doc["pi"]["lambda"] = 0.0;
    CHECK_THROWS_AS(parse_config(doc, {}), ConfigError);
    doc = uav_doc();
    doc["pi"]["seed"] = -1;
    CHECK_THROWS_WITH_AS(parse_config(doc, {}), doctest::Contains("nonnegative"), ConfigError);

    doc = uav_doc();
    doc["run"]["seeds"] = json::array();
    CHECK_THROWS_AS(parse_config(doc, {}), ConfigError);

    doc = uav_doc();
    doc["output"] = {{"dir", ""}};
    CHECK_THROWS_WITH_AS(parse_config(doc, {}), doctest::Contains("must not be empty"),
                         ConfigError);

    doc = uav_doc();
    doc["threads"] = 0;
    CHECK_THROWS_AS(parse_config(doc, {}), ConfigError);
}

TEST_CASE("ltv model shape validation") {
    json doc = coverage_doc();
    doc["model"]["A"] = {{1, 0}};
    CHECK_THROWS_WITH_AS(parse_config(doc, {}), doctest::Contains("square"), ConfigError);

    doc = coverage_doc();
    doc["model"]["B"] = {{1, 0}};
    CHECK_THROWS_WITH_AS(parse_config(doc, {}), doctest::Contains("row count"), ConfigError);

    doc = coverage_doc();
    doc["model"]["A"] = {{1, 0}, {0}};
    CHECK_THROWS_WITH_AS(parse_config(doc, {}), doctest::Contains("inconsistent"), ConfigError);
}

TEST_CASE("files that cannot be read or parsed raise config errors") {
    CHECK_THROWS_WITH_AS(load_config("/nonexistent/nowhere.json", {}),
                         doctest::Contains("cannot open"), ConfigError);

    const auto path = std::filesystem::temp_directory_path() / "pic_cfg_broken.json";
    std::ofstream(path) << "{ not json";
    CHECK_THROWS_AS(load_config(path, {}), ConfigError);
    std::filesystem::remove(path);

    const auto good = std::filesystem::temp_directory_path() / "pic_cfg_good.json";
    std::ofstream(good) << uav_doc().dump();
    CHECK(load_config(good, {}).experiment == ExperimentKind::kUav);
    std::filesystem::remove(good);
}

TEST_CASE("csv numbers use shortest round-trip form") {
    CHECK(csv::num(1.0) == "1");
    CHECK(csv::num(0.1) == "0.1");
    CHECK(csv::num(-2.5) == "-2.5");
    CHECK(csv::num(0.0) == "0");

    for (double v : {0.30000000000000004, 1e300, -7.000000000000001e-12, 14517.0,
                     2.951638872801739e+274, 4.9406564584124654e-324}) {
        const std::string s = csv::num(v);
        CHECK(std::strtod(s.c_str(), nullptr) == v);
    }

    CHECK(csv::num(std::numeric_limits<double>::infinity()) == "inf");
    CHECK(csv::num(-std::numeric_limits<double>::infinity()) == "-inf");
    CHECK(csv::num(std::nan("")) == "nan");

    CHECK(csv::num(std::int64_t{-123}) == "-123");
    CHECK(csv::num(std::uint64_t{18446744073709551615ULL}) == "18446744073709551615");
    CHECK(csv::num(42) == "42");
}
