#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "pic/complexity.hpp"
#include "pic/costs.hpp"
#include "pic/dynamics.hpp"

namespace pic {

// Raised for any problem with the experiment configuration: unreadable file,
// malformed JSON, schema violations, dimension mismatches. The CLI maps this
// to exit code 2.
class ConfigError : public std::runtime_error {
 public:
    using std::runtime_error::runtime_error;
};

enum class ExperimentKind { kUav, kUgv, kComplexityTable, kVarianceSweep, kCoverageTest };

enum class ModelType { kDoubleIntegrator, kSimpleCar, kLtv };

struct SteeringSetting {
    std::string label;
    double lo = 0.0;
    double hi = 0.0;
};

struct ModelConfig {
    ModelType type = ModelType::kDoubleIntegrator;
    std::vector<double> a_values;            // double_integrator
    double wheelbase = 0.5;                  // simple_car
    std::vector<SteeringSetting> steerings;  // simple_car, sorted by label
    Eigen::MatrixXd A, B;                    // ltv

    int state_dim() const;
    int control_dim() const;
};

struct PiSettings {
    int num_samples = 0;
    double lambda = 0.0;
    int horizon = 0;
    std::uint64_t seed = 0;
    bool zero_noise = false;
};

struct RunSettings {
    int outer_steps = 0;
    std::vector<std::uint64_t> seeds;
    bool actuation_noise = true;
};

struct ComplexitySettings {
    double eps1 = 0.0, eps2 = 0.0, rho1 = 0.0, rho2 = 0.0;
    ComplexityMode mode = ComplexityMode::kAnalytic;
    std::int64_t pilot_samples = 50000;
    bool es_indicator = true;
    std::vector<int> horizons;
    HoeffdingForm form = HoeffdingForm::kStandard;
};

struct SweepSettings {
    std::vector<double> a_values;
    std::vector<int> horizons;
};

struct CoverageSettings {
    double eps1 = 0.0, eps2 = 0.0, rho1 = 0.0, rho2 = 0.0;
    int repetitions = 0;
    std::int64_t reference_samples = 0;
};

// Parsed and validated experiment configuration. `effective` holds the JSON
// after CLI overrides were applied; `hash_hex` digests it with the output and
// threads blocks removed, so runs that differ only in those still match.
struct Config {
    ExperimentKind experiment = ExperimentKind::kUav;
    double dt = 0.0;
    DeltaMode delta_mode = DeltaMode::kFolded;
    Eigen::VectorXd x0;
    ModelConfig model;
    CostSpec cost;
    PiSettings pi;
    RunSettings run;
    bool has_run = false;
    ComplexitySettings complexity;
    bool has_complexity = false;
    SweepSettings sweep;
    bool has_sweep = false;
    CoverageSettings coverage;
    bool has_coverage = false;
    std::string out_dir;  // empty means: fall back to env var, then ./out
    int threads = 1;

    nlohmann::json effective;
    std::string hash_hex;
};

// Flag values that patch the config document before parsing, so they are
// covered by validation and by the config hash like any file-borne setting.
struct CliOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    std::optional<int> threads;
    std::optional<std::string> hoeffding_form;
    std::optional<std::string> delta_mode;
};

const char* to_string(ExperimentKind kind);

// FNV-1a 64 over the canonical dump of `effective` minus output/threads.
std::string config_hash_hex(const nlohmann::json& effective);

Config parse_config(nlohmann::json doc, const CliOverrides& overrides);
Config load_config(const std::filesystem::path& file, const CliOverrides& overrides);

}  // namespace pic
