#include "pic/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pic/complexity.hpp"
#include "pic/csv.hpp"
#include "pic/estimator.hpp"
#include "pic/moments.hpp"
#include "pic/rng.hpp"
#include "pic/simulator.hpp"
#include "pic/version.hpp"

namespace pic {
namespace {

// Sub-stream tags used by the commands; the closed-loop harness owns 0 and 1,
// the variance sweep owns 2.
constexpr std::uint32_t kTagPilotRow = 4;
constexpr std::uint32_t kTagCoverageReference = 5;
constexpr std::uint32_t kTagCoverageHoeffding = 6;
constexpr std::uint32_t kTagCoverageChebyshev = 7;

std::string metadata_line(const Config& cfg) {
    std::string s = "tool=pictool version=";
    s += kToolVersion;
    s += " experiment=";
    s += to_string(cfg.experiment);
    s += " config=";
    s += cfg.hash_hex;
    s += " seed=";
    s += csv::num(cfg.pi.seed);
    s += " delta_mode=";
    s += cfg.delta_mode == DeltaMode::kFolded ? "folded" : "diffusion";
    return s;
}

PiConfig make_inner(const Config& cfg, int control_dim) {
    PiConfig pi;
    pi.num_samples = cfg.pi.num_samples;
    pi.lambda = cfg.pi.lambda;
    pi.dt = cfg.dt;
    pi.nominal.assign(static_cast<std::size_t>(cfg.pi.horizon),
                      Eigen::VectorXd::Zero(control_dim));
    pi.seed = cfg.pi.seed;
    pi.mode = cfg.delta_mode;
    pi.zero_noise = cfg.pi.zero_noise;
    pi.threads = cfg.threads;
    return pi;
}

// Path file: one row per outer step with the pre-step state and the applied
// control, closed by a row with the reached state and zero control.
void write_path_csv(const std::filesystem::path& file, const std::string& meta,
                    const std::vector<std::string>& header, const RunLog& log) {
    csv::Writer w(file);
    w.comment(meta);
    w.row(header);
    std::vector<std::string> row;
    for (int k = 0; k < log.completed_steps; ++k) {
        const StepRecord& rec = log.steps[static_cast<std::size_t>(k)];
        row.clear();
        row.push_back(csv::num(k));
        for (Eigen::Index i = 0; i < rec.state.size(); ++i) row.push_back(csv::num(rec.state(i)));
        for (Eigen::Index i = 0; i < rec.control.size(); ++i)
            row.push_back(csv::num(rec.control(i)));
        w.row(row);
    }
    row.clear();
    row.push_back(csv::num(log.completed_steps));
    for (Eigen::Index i = 0; i < log.final_state.size(); ++i)
        row.push_back(csv::num(log.final_state(i)));
    const std::size_t m = header.size() - 1 - static_cast<std::size_t>(log.final_state.size());
    for (std::size_t i = 0; i < m; ++i) row.push_back(csv::num(0.0));
    w.row(row);
}

// Across-run sample variance of the planar position at one step.
double position_variance(const std::vector<std::vector<Eigen::Vector2d>>& runs, std::size_t k) {
    const std::size_t R = runs.size();
    Eigen::Vector2d mean = Eigen::Vector2d::Zero();
    for (const auto& run : runs) mean += run[k];
    mean /= static_cast<double>(R);
    double acc = 0.0;
    for (const auto& run : runs) acc += (run[k] - mean).squaredNorm();
    return acc / static_cast<double>(R - 1);
}

}  // namespace

std::filesystem::path resolve_out_dir(const Config& cfg) {
    if (!cfg.out_dir.empty()) return cfg.out_dir;
    if (const char* env = std::getenv("PICTOOL_OUT"); env != nullptr && *env != '\0') return env;
    return "./out";
}

int cmd_uav(const Config& cfg) {
    const std::filesystem::path out = resolve_out_dir(cfg);
    const std::string meta = metadata_line(cfg);

    // Penetration counts use the bare polygon; margin hits use the configured
    // safety margin.
    std::vector<ConvexObstacle> solid = cfg.cost.obstacles;
    for (ConvexObstacle& ob : solid) {
        ob.margin = 0.0;
        ob.prepare();
    }
    std::vector<ConvexObstacle> inflated = cfg.cost.obstacles;
    for (ConvexObstacle& ob : inflated) ob.prepare();

    csv::Writer summary(out / "uav_summary.csv");
    summary.comment(meta);
    summary.row({"a", "seed", "steps", "terminal_x", "terminal_y", "terminal_dist",
                 "penetrations", "margin_hits", "diverged"});

    for (double a : cfg.model.a_values) {
        const LtvDynamics dyn(make_double_integrator(a));
        for (std::uint64_t seed : cfg.run.seeds) {
            MpcRunConfig mc;
            mc.inner = make_inner(cfg, dyn.control_dim());
            mc.outer_steps = cfg.run.outer_steps;
            mc.master_seed = seed;
            mc.actuation_noise = cfg.run.actuation_noise;
            mc.x0 = cfg.x0;
            const RunLog log = run_mpc(dyn, cfg.cost, mc);

            write_path_csv(out / ("uav_path_a" + csv::num(a) + "_seed" + csv::num(seed) + ".csv"),
                           meta + " run_seed=" + csv::num(seed),
                           {"step", "x", "y", "vx", "vy", "u1", "u2"}, log);

            int penetrations = 0;
            int margin_hits = 0;
            auto tally = [&](const Eigen::VectorXd& x) {
                for (const ConvexObstacle& ob : solid)
                    if (point_in_obstacle(x, ob)) {
                        ++penetrations;
                        break;
                    }
                for (const ConvexObstacle& ob : inflated)
                    if (point_in_obstacle(x, ob)) {
                        ++margin_hits;
                        break;
                    }
            };
            for (int k = 0; k < log.completed_steps; ++k)
                tally(log.steps[static_cast<std::size_t>(k)].state);
            tally(log.final_state);

            const double tx = log.final_state(0);
            const double ty = log.final_state(1);
            const double dist = std::hypot(tx - cfg.cost.x_tgt(0), ty - cfg.cost.x_tgt(1));
            summary.row({csv::num(a), csv::num(seed), csv::num(log.completed_steps), csv::num(tx),
                         csv::num(ty), csv::num(dist), csv::num(penetrations),
                         csv::num(margin_hits), csv::num(log.diverged ? 1 : 0)});
        }
    }
    return 0;
}

int cmd_ugv(const Config& cfg) {
    const std::filesystem::path out = resolve_out_dir(cfg);
    const std::string meta = metadata_line(cfg);

    struct SettingRuns {
        std::string label;
        std::vector<std::vector<Eigen::Vector2d>> positions;  // one sequence per seed
    };
    std::vector<SettingRuns> settings;

    for (const SteeringSetting& st : cfg.model.steerings) {
        const SimpleCarDynamics dyn(cfg.model.wheelbase, cfg.dt, st.lo, st.hi);
        SettingRuns runs;
        runs.label = st.label;
        for (std::uint64_t seed : cfg.run.seeds) {
            MpcRunConfig mc;
            mc.inner = make_inner(cfg, dyn.control_dim());
            mc.outer_steps = cfg.run.outer_steps;
            mc.master_seed = seed;
            mc.actuation_noise = cfg.run.actuation_noise;
            mc.x0 = cfg.x0;
            const RunLog log = run_mpc(dyn, cfg.cost, mc);

            write_path_csv(out / ("ugv_path_" + st.label + "_seed" + csv::num(seed) + ".csv"),
                           meta + " run_seed=" + csv::num(seed),
                           {"step", "x", "y", "theta", "phi", "u1", "u2"}, log);

            std::vector<Eigen::Vector2d> pos;
            pos.reserve(static_cast<std::size_t>(log.completed_steps) + 1);
            for (int k = 0; k < log.completed_steps; ++k) {
                const Eigen::VectorXd& x = log.steps[static_cast<std::size_t>(k)].state;
                pos.emplace_back(x(0), x(1));
            }
            pos.emplace_back(log.final_state(0), log.final_state(1));
            runs.positions.push_back(std::move(pos));
        }
        settings.push_back(std::move(runs));
    }

    std::size_t rows = std::numeric_limits<std::size_t>::max();
    for (const SettingRuns& s : settings)
        for (const auto& run : s.positions) rows = std::min(rows, run.size());

    csv::Writer disp(out / "ugv_dispersion.csv");
    disp.comment(meta);
    std::vector<std::string> header{"step"};
    for (const SettingRuns& s : settings) header.push_back(s.label);
    disp.row(header);
    std::vector<std::string> row;
    for (std::size_t k = 0; k < rows; ++k) {
        row.clear();
        row.push_back(csv::num(static_cast<std::int64_t>(k)));
        for (const SettingRuns& s : settings) row.push_back(csv::num(position_variance(s.positions, k)));
        disp.row(row);
    }
    return 0;
}

int cmd_complexity(const Config& cfg) {
    const ComplexitySettings& cx = cfg.complexity;
    if (cfg.model.type == ModelType::kLtv)
        throw ConfigError("config: complexity-table supports double_integrator and simple_car models");
    if (cx.mode == ComplexityMode::kAnalytic && cfg.model.type != ModelType::kDoubleIntegrator)
        throw ConfigError("config: the analytic complexity route requires the double_integrator model");
    if (cx.pilot_samples > std::numeric_limits<int>::max())
        throw ConfigError("config: complexity.pilot_samples is too large");

    ComplexityQuery query;
    query.eps1 = cx.eps1;
    query.eps2 = cx.eps2;
    query.rho1 = cx.rho1;
    query.rho2 = cx.rho2;
    query.mode = cx.mode;
    query.form = cx.form;

    struct Param {
        std::string label;
        double a = 0.0;
        double steer_lo = 0.0, steer_hi = 0.0;
        bool car = false;
    };
    std::vector<Param> params;
    if (cfg.model.type == ModelType::kDoubleIntegrator) {
        for (double a : cfg.model.a_values) params.push_back({csv::num(a), a, 0.0, 0.0, false});
    } else {
        for (const SteeringSetting& st : cfg.model.steerings)
            params.push_back({st.label, 0.0, st.lo, st.hi, true});
    }

    const std::filesystem::path out = resolve_out_dir(cfg);
    csv::Writer w(out / "complexity_table.csv");
    w.comment(metadata_line(cfg));
    w.row({"param", "T", "n2", "multiplier", "n1", "mode", "flags"});

    std::uint64_t row_index = 0;
    for (const Param& p : params) {
        for (int T : cx.horizons) {
            ComplexityReport rep;
            if (cx.mode == ComplexityMode::kAnalytic) {
                const LtvModel model = make_double_integrator(p.a);
                const ControlSequence nominal(static_cast<std::size_t>(T),
                                              Eigen::VectorXd::Zero(model.control_dim()));
                const BeliefTrajectory beliefs = propagate_moments(model, nominal, cfg.x0);
                CostSpec es_spec = cfg.cost;
                if (!cx.es_indicator) es_spec.obstacles.clear();
                es_spec.prepare();
                rep = analyze_analytic(query, expected_total_cost(beliefs, es_spec),
                                       cfg.pi.lambda);
            } else {
                std::unique_ptr<DynamicsFn> dyn;
                if (p.car)
                    dyn = std::make_unique<SimpleCarDynamics>(cfg.model.wheelbase, cfg.dt,
                                                              p.steer_lo, p.steer_hi);
                else
                    dyn = std::make_unique<LtvDynamics>(make_double_integrator(p.a));
                PiConfig pilot;
                pilot.num_samples = static_cast<int>(cx.pilot_samples);
                pilot.lambda = cfg.pi.lambda;
                pilot.dt = cfg.dt;
                pilot.nominal.assign(static_cast<std::size_t>(T),
                                     Eigen::VectorXd::Zero(dyn->control_dim()));
                pilot.seed = derive_seed(cfg.pi.seed, row_index, kTagPilotRow);
                pilot.mode = cfg.delta_mode;
                pilot.zero_noise = cfg.pi.zero_noise;
                pilot.threads = cfg.threads;
                const WeightMean e1 = streamed_weight_mean(*dyn, cfg.cost, pilot, cfg.x0);
                rep = analyze_empirical(query, e1.underflow ? 0.0 : e1.value);
            }

            std::string n2_cell;
            if (rep.n2.overflow)
                n2_cell = "overflow";
            else if (!rep.n2_valid)
                n2_cell = "nan";
            else
                n2_cell = csv::num(rep.n2.count);
            const std::string mult_cell =
                rep.multiplier.overflow ? "overflow" : csv::num(rep.multiplier.count);
            std::string flags;
            if (rep.n2.overflow) flags = "overflow";
            if (rep.assumption_flag) flags += flags.empty() ? "assumption" : "|assumption";

            w.row({p.label, csv::num(T), n2_cell, mult_cell, csv::num(rep.n1),
                   rep.mode == ComplexityMode::kAnalytic ? "analytic" : "empirical", flags});
            ++row_index;
        }
    }
    return 0;
}

int cmd_variance_sweep(const Config& cfg) {
    PiConfig base;
    base.num_samples = cfg.pi.num_samples;
    base.lambda = cfg.pi.lambda;
    base.dt = cfg.dt;
    base.seed = cfg.pi.seed;
    base.mode = cfg.delta_mode;
    base.zero_noise = cfg.pi.zero_noise;
    base.threads = cfg.threads;

    const std::vector<SweepCell> cells =
        variance_sweep(cfg.cost, base, cfg.x0, cfg.sweep.a_values, cfg.sweep.horizons);

    const std::filesystem::path out = resolve_out_dir(cfg);
    csv::Writer w(out / "variance_sweep.csv");
    w.comment(metadata_line(cfg));
    w.row({"a", "T", "variance", "inv_mean_weight"});
    for (const SweepCell& c : cells)
        w.row({csv::num(c.a), csv::num(c.horizon), csv::num(c.mean_variance),
               c.underflow ? "overflow" : csv::num(c.inv_e1)});
    return 0;
}

int cmd_coverage(const Config& cfg) {
    const CoverageSettings& cv = cfg.coverage;
    LtvModel model;
    model.A = {cfg.model.A};
    model.B = {cfg.model.B};
    try {
        model.validate();
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config: model: ") + e.what());
    }
    const LtvDynamics dyn(std::move(model));

    PiConfig base;
    base.lambda = cfg.pi.lambda;
    base.dt = cfg.dt;
    base.mode = cfg.delta_mode;
    base.zero_noise = cfg.pi.zero_noise;
    base.threads = cfg.threads;
    base.nominal.assign(static_cast<std::size_t>(cfg.pi.horizon),
                        Eigen::VectorXd::Zero(dyn.control_dim()));

    if (cv.reference_samples > std::numeric_limits<int>::max())
        throw ConfigError("config: coverage.reference_samples is too large");
    PiConfig ref = base;
    ref.num_samples = static_cast<int>(cv.reference_samples);
    ref.seed = derive_seed(cfg.pi.seed, 0, kTagCoverageReference);
    const WeightMean e1_ref = streamed_weight_mean(dyn, cfg.cost, ref, cfg.x0);
    if (e1_ref.underflow || !(e1_ref.value > 0.0))
        throw ConfigError(
            "config: coverage reference weight mean underflowed; raise lambda or soften the cost");
    const double e2_ref =
        streamed_weighted_noise_component(dyn, cfg.cost, ref, cfg.x0, 0, 0, e1_ref.value);

    const std::int64_t n1 = hoeffding_samples(cv.eps1, cv.rho1);
    SampleCount n2;
    try {
        n2 = chebyshev_samples_empirical(e1_ref.value, cv.eps1, cv.eps2, cv.rho2);
    } catch (const AssumptionError& e) {
        throw ConfigError(std::string("config: coverage: ") + e.what());
    }
    if (n1 > std::numeric_limits<int>::max() || n2.overflow ||
        n2.count > static_cast<double>(std::numeric_limits<int>::max()))
        throw ConfigError("config: coverage batch size is too large to simulate");

    int fail1 = 0;
    PiConfig b1 = base;
    b1.num_samples = static_cast<int>(n1);
    for (int rep = 0; rep < cv.repetitions; ++rep) {
        b1.seed = derive_seed(cfg.pi.seed, static_cast<std::uint64_t>(rep), kTagCoverageHoeffding);
        const WeightMean e1 = streamed_weight_mean(dyn, cfg.cost, b1, cfg.x0);
        if (std::abs(e1.value - e1_ref.value) >= cv.eps1) ++fail1;
    }

    int fail2 = 0;
    PiConfig b2 = base;
    b2.num_samples = static_cast<int>(n2.count);
    for (int rep = 0; rep < cv.repetitions; ++rep) {
        b2.seed = derive_seed(cfg.pi.seed, static_cast<std::uint64_t>(rep), kTagCoverageChebyshev);
        const double e2 =
            streamed_weighted_noise_component(dyn, cfg.cost, b2, cfg.x0, 0, 0, e1_ref.value);
        if (std::abs(e2 - e2_ref) >= cv.eps2) ++fail2;
    }

    const std::filesystem::path out = resolve_out_dir(cfg);
    csv::Writer w(out / "coverage.csv");
    w.comment(metadata_line(cfg));
    w.row({"bound", "epsilon", "rho_permitted", "batch_size", "repetitions", "failures",
           "observed_freq"});
    const double reps = static_cast<double>(cv.repetitions);
    w.row({"hoeffding", csv::num(cv.eps1), csv::num(cv.rho1), csv::num(n1),
           csv::num(cv.repetitions), csv::num(fail1), csv::num(fail1 / reps)});
    w.row({"chebyshev", csv::num(cv.eps2), csv::num(cv.rho2), csv::num(n2.count),
           csv::num(cv.repetitions), csv::num(fail2), csv::num(fail2 / reps)});
    return 0;
}

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"sampling-based trajectory optimization and sample-complexity experiments"};
    app.require_subcommand(1);

    std::string config_path;
    CliOverrides ov;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "experiment configuration file (JSON)")
            ->required();
        sub->add_option("--seed", ov.seed, "override pi.seed");
        sub->add_option("--out", ov.out_dir, "override the output directory");
        sub->add_option("--threads", ov.threads, "override the worker thread count");
        sub->add_option("--hoeffding-form", ov.hoeffding_form,
                        "deviation bound shape: standard or conservative");
        sub->add_option("--delta-mode", ov.delta_mode, "noise coupling: folded or diffusion");
    };

    CLI::App* uav = app.add_subcommand("uav", "closed-loop double-integrator runs");
    CLI::App* ugv = app.add_subcommand("ugv", "closed-loop car runs per steering setting");
    CLI::App* complexity = app.add_subcommand("complexity", "required-sample-count table");
    CLI::App* sweep = app.add_subcommand("variance-sweep", "weighted-control variance grid");
    CLI::App* coverage = app.add_subcommand("coverage", "concentration-bound failure rates");
    for (CLI::App* sub : {uav, ugv, complexity, sweep, coverage}) add_common(sub);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    ExperimentKind kind = ExperimentKind::kUav;
    int (*fn)(const Config&) = nullptr;
    std::string subname;
    if (uav->parsed()) {
        kind = ExperimentKind::kUav;
        fn = cmd_uav;
        subname = "uav";
    } else if (ugv->parsed()) {
        kind = ExperimentKind::kUgv;
        fn = cmd_ugv;
        subname = "ugv";
    } else if (complexity->parsed()) {
        kind = ExperimentKind::kComplexityTable;
        fn = cmd_complexity;
        subname = "complexity";
    } else if (sweep->parsed()) {
        kind = ExperimentKind::kVarianceSweep;
        fn = cmd_variance_sweep;
        subname = "variance-sweep";
    } else if (coverage->parsed()) {
        kind = ExperimentKind::kCoverageTest;
        fn = cmd_coverage;
        subname = "coverage";
    } else {
        std::cerr << "error: no subcommand selected\n";
        return 2;
    }

    try {
        const Config cfg = load_config(config_path, ov);
        if (cfg.experiment != kind)
            throw ConfigError(std::string("config: experiment kind \"") +
                              to_string(cfg.experiment) + "\" does not match subcommand \"" +
                              subname + "\"");
        return fn(cfg);
    } catch (const ConfigError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const std::logic_error& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}

}  // namespace pic
