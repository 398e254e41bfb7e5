#include "pic/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <utility>

namespace pic {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw ConfigError("config: " + path + " " + what);
}

std::string joined(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
}

void check_keys(const json& obj, const std::string& path,
                std::initializer_list<const char*> allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool known = false;
        for (const char* k : allowed)
            if (it.key() == k) { known = true; break; }
        if (!known)
            throw ConfigError("config: unknown key \"" + joined(path, it.key()) + "\"");
    }
}

const json& get(const json& obj, const std::string& path, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end()) fail(joined(path, key), "is required");
    return *it;
}

const json* get_opt(const json& obj, const char* key) {
    auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
}

double as_double(const json& v, const std::string& path) {
    if (!v.is_number()) fail(path, "must be a number");
    return v.get<double>();
}

int as_int(const json& v, const std::string& path) {
    if (!v.is_number_integer()) fail(path, "must be an integer");
    auto raw = v.get<std::int64_t>();
    if (raw < std::numeric_limits<int>::min() || raw > std::numeric_limits<int>::max())
        fail(path, "is out of range");
    return static_cast<int>(raw);
}

std::int64_t as_int64(const json& v, const std::string& path) {
    if (!v.is_number_integer()) fail(path, "must be an integer");
    return v.get<std::int64_t>();
}

std::uint64_t as_u64(const json& v, const std::string& path) {
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer()) {
        auto raw = v.get<std::int64_t>();
        if (raw < 0) fail(path, "must be nonnegative");
        return static_cast<std::uint64_t>(raw);
    }
    fail(path, "must be an integer");
}

bool as_bool(const json& v, const std::string& path) {
    if (!v.is_boolean()) fail(path, "must be a boolean");
    return v.get<bool>();
}

std::string as_string(const json& v, const std::string& path) {
    if (!v.is_string()) fail(path, "must be a string");
    return v.get<std::string>();
}

Eigen::VectorXd as_vector(const json& v, const std::string& path) {
    if (!v.is_array() || v.empty()) fail(path, "must be a non-empty array of numbers");
    Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i)
        out(static_cast<Eigen::Index>(i)) = as_double(v[i], path + "[" + std::to_string(i) + "]");
    return out;
}

Eigen::MatrixXd as_matrix(const json& v, const std::string& path) {
    if (!v.is_array() || v.empty()) fail(path, "must be a non-empty array of rows");
    const std::size_t rows = v.size();
    std::size_t cols = 0;
    Eigen::MatrixXd out;
    for (std::size_t r = 0; r < rows; ++r) {
        const std::string rpath = path + "[" + std::to_string(r) + "]";
        if (!v[r].is_array() || v[r].empty()) fail(rpath, "must be a non-empty array of numbers");
        if (r == 0) {
            cols = v[r].size();
            out.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
        } else if (v[r].size() != cols) {
            fail(rpath, "has inconsistent row length");
        }
        for (std::size_t c = 0; c < cols; ++c)
            out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                as_double(v[r][c], rpath + "[" + std::to_string(c) + "]");
    }
    return out;
}

ExperimentKind parse_experiment(const std::string& s, const std::string& path) {
    if (s == "uav") return ExperimentKind::kUav;
    if (s == "ugv") return ExperimentKind::kUgv;
    if (s == "complexity-table") return ExperimentKind::kComplexityTable;
    if (s == "variance-sweep") return ExperimentKind::kVarianceSweep;
    if (s == "coverage-test") return ExperimentKind::kCoverageTest;
    fail(path, "must be one of uav, ugv, complexity-table, variance-sweep, coverage-test");
}

DeltaMode parse_delta_mode(const std::string& s, const std::string& path) {
    if (s == "folded") return DeltaMode::kFolded;
    if (s == "diffusion") return DeltaMode::kDiffusion;
    fail(path, "must be folded or diffusion");
}

HoeffdingForm parse_hoeffding_form(const std::string& s, const std::string& path) {
    if (s == "standard") return HoeffdingForm::kStandard;
    if (s == "conservative") return HoeffdingForm::kConservative;
    fail(path, "must be standard or conservative");
}

ModelConfig parse_model(const json& j) {
    if (!j.is_object()) fail("model", "must be an object");
    ModelConfig model;
    const std::string type = as_string(get(j, "model", "type"), "model.type");
    if (type == "double_integrator") {
        model.type = ModelType::kDoubleIntegrator;
        check_keys(j, "model", {"type", "a_values"});
        if (const json* av = get_opt(j, "a_values")) {
            if (!av->is_array() || av->empty())
                fail("model.a_values", "must be a non-empty array of numbers");
            for (std::size_t i = 0; i < av->size(); ++i)
                model.a_values.push_back(
                    as_double((*av)[i], "model.a_values[" + std::to_string(i) + "]"));
        }
    } else if (type == "simple_car") {
        model.type = ModelType::kSimpleCar;
        check_keys(j, "model", {"type", "wheelbase", "steerings"});
        if (const json* wb = get_opt(j, "wheelbase")) {
            model.wheelbase = as_double(*wb, "model.wheelbase");
            if (!(model.wheelbase > 0.0)) fail("model.wheelbase", "must be positive");
        }
        const json& st = get(j, "model", "steerings");
        if (!st.is_object() || st.empty())
            fail("model.steerings", "must be a non-empty object of label -> [lo, hi]");
        for (auto it = st.begin(); it != st.end(); ++it) {
            const std::string path = "model.steerings." + it.key();
            const json& pair = *it;
            if (!pair.is_array() || pair.size() != 2) fail(path, "must be an array [lo, hi]");
            SteeringSetting s;
            s.label = it.key();
            s.lo = as_double(pair[0], path + "[0]");
            s.hi = as_double(pair[1], path + "[1]");
            if (!(s.lo < s.hi)) fail(path, "must satisfy lo < hi");
            constexpr double kHalfPi = 1.5707963267948966;
            if (!(s.lo > -kHalfPi && s.hi < kHalfPi))
                fail(path, "must lie strictly inside (-pi/2, pi/2)");
            model.steerings.push_back(std::move(s));
        }
    } else if (type == "ltv") {
        model.type = ModelType::kLtv;
        check_keys(j, "model", {"type", "A", "B"});
        model.A = as_matrix(get(j, "model", "A"), "model.A");
        model.B = as_matrix(get(j, "model", "B"), "model.B");
        if (model.A.rows() != model.A.cols()) fail("model.A", "must be square");
        if (model.B.rows() != model.A.rows())
            fail("model.B", "row count must match model.A");
    } else {
        fail("model.type", "must be one of double_integrator, simple_car, ltv");
    }
    return model;
}

CostSpec parse_cost(const json& j, int state_dim, double dt) {
    if (!j.is_object()) fail("cost", "must be an object");
    check_keys(j, "cost",
               {"q_diag", "q", "q_terminal_diag", "q_terminal", "x_tgt", "omega_c", "obstacles"});
    CostSpec spec;
    spec.dt = dt;

    const json* q_diag = get_opt(j, "q_diag");
    const json* q_full = get_opt(j, "q");
    if (q_diag && q_full) fail("cost", "must set q_diag or q, not both");
    if (!q_diag && !q_full) fail("cost.q_diag", "is required (or cost.q)");
    if (q_diag)
        spec.Q = as_vector(*q_diag, "cost.q_diag").asDiagonal();
    else
        spec.Q = as_matrix(*q_full, "cost.q");

    const json* qt_diag = get_opt(j, "q_terminal_diag");
    const json* qt_full = get_opt(j, "q_terminal");
    if (qt_diag && qt_full) fail("cost", "must set q_terminal_diag or q_terminal, not both");
    if (qt_diag)
        spec.Q_T = as_vector(*qt_diag, "cost.q_terminal_diag").asDiagonal();
    else if (qt_full)
        spec.Q_T = as_matrix(*qt_full, "cost.q_terminal");
    else
        spec.Q_T = spec.Q;  // terminal defaults to the running weight

    spec.x_tgt = as_vector(get(j, "cost", "x_tgt"), "cost.x_tgt");

    if (const json* oc = get_opt(j, "omega_c")) {
        spec.omega_c = as_double(*oc, "cost.omega_c");
        if (spec.omega_c < 0.0) fail("cost.omega_c", "must be nonnegative");
    }

    if (const json* obs = get_opt(j, "obstacles")) {
        if (!obs->is_array()) fail("cost.obstacles", "must be an array");
        for (std::size_t i = 0; i < obs->size(); ++i) {
            const std::string path = "cost.obstacles[" + std::to_string(i) + "]";
            const json& o = (*obs)[i];
            if (!o.is_object()) fail(path, "must be an object");
            check_keys(o, path, {"vertices", "margin", "projection"});
            ConvexObstacle ob;
            const json& verts = get(o, path, "vertices");
            if (!verts.is_array() || verts.empty())
                fail(path + ".vertices", "must be a non-empty array of [x, y] pairs");
            for (std::size_t v = 0; v < verts.size(); ++v) {
                const std::string vpath = path + ".vertices[" + std::to_string(v) + "]";
                if (!verts[v].is_array() || verts[v].size() != 2)
                    fail(vpath, "must be an [x, y] pair");
                ob.vertices.emplace_back(as_double(verts[v][0], vpath + "[0]"),
                                         as_double(verts[v][1], vpath + "[1]"));
            }
            if (const json* m = get_opt(o, "margin")) {
                ob.margin = as_double(*m, path + ".margin");
                if (ob.margin < 0.0) fail(path + ".margin", "must be nonnegative");
            }
            if (const json* pr = get_opt(o, "projection")) {
                if (!pr->is_array() || pr->size() != 2)
                    fail(path + ".projection", "must be an array of two coordinate indices");
                ob.projection = {as_int((*pr)[0], path + ".projection[0]"),
                                 as_int((*pr)[1], path + ".projection[1]")};
            }
            spec.obstacles.push_back(std::move(ob));
        }
    }

    if (spec.Q.rows() != state_dim)
        fail("cost.q_diag", "dimension must match the model state dimension");
    if (spec.Q_T.rows() != state_dim)
        fail("cost.q_terminal_diag", "dimension must match the model state dimension");
    if (spec.x_tgt.size() != state_dim)
        fail("cost.x_tgt", "dimension must match the model state dimension");
    try {
        spec.validate();
        for (const ConvexObstacle& ob : spec.obstacles) ob.validate(state_dim);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config: cost: ") + e.what());
    }
    return spec;
}

PiSettings parse_pi(const json& j) {
    if (!j.is_object()) fail("pi", "must be an object");
    check_keys(j, "pi", {"num_samples", "lambda", "horizon", "seed", "zero_noise"});
    PiSettings pi;
    pi.num_samples = as_int(get(j, "pi", "num_samples"), "pi.num_samples");
    if (pi.num_samples < 1) fail("pi.num_samples", "must be at least 1");
    pi.lambda = as_double(get(j, "pi", "lambda"), "pi.lambda");
    if (!(pi.lambda > 0.0)) fail("pi.lambda", "must be positive");
    pi.horizon = as_int(get(j, "pi", "horizon"), "pi.horizon");
    if (pi.horizon < 1) fail("pi.horizon", "must be at least 1");
    pi.seed = as_u64(get(j, "pi", "seed"), "pi.seed");
    if (const json* z = get_opt(j, "zero_noise")) pi.zero_noise = as_bool(*z, "pi.zero_noise");
    return pi;
}

RunSettings parse_run(const json& j) {
    if (!j.is_object()) fail("run", "must be an object");
    check_keys(j, "run", {"outer_steps", "seeds", "actuation_noise"});
    RunSettings run;
    run.outer_steps = as_int(get(j, "run", "outer_steps"), "run.outer_steps");
    if (run.outer_steps < 1) fail("run.outer_steps", "must be at least 1");
    const json& seeds = get(j, "run", "seeds");
    if (!seeds.is_array() || seeds.empty())
        fail("run.seeds", "must be a non-empty array of integers");
    for (std::size_t i = 0; i < seeds.size(); ++i)
        run.seeds.push_back(as_u64(seeds[i], "run.seeds[" + std::to_string(i) + "]"));
    if (const json* an = get_opt(j, "actuation_noise"))
        run.actuation_noise = as_bool(*an, "run.actuation_noise");
    return run;
}

ComplexitySettings parse_complexity(const json& j) {
    if (!j.is_object()) fail("complexity", "must be an object");
    check_keys(j, "complexity",
               {"eps1", "eps2", "rho1", "rho2", "mode", "pilot_samples", "es_indicator",
                "horizons", "hoeffding_form"});
    ComplexitySettings c;
    c.eps1 = as_double(get(j, "complexity", "eps1"), "complexity.eps1");
    c.eps2 = as_double(get(j, "complexity", "eps2"), "complexity.eps2");
    c.rho1 = as_double(get(j, "complexity", "rho1"), "complexity.rho1");
    c.rho2 = as_double(get(j, "complexity", "rho2"), "complexity.rho2");
    if (!(c.eps1 > 0.0)) fail("complexity.eps1", "must be positive");
    if (!(c.eps2 > 0.0)) fail("complexity.eps2", "must be positive");
    if (!(c.rho1 > 0.0 && c.rho1 < 1.0)) fail("complexity.rho1", "must lie in (0, 1)");
    if (!(c.rho2 > 0.0 && c.rho2 < 1.0)) fail("complexity.rho2", "must lie in (0, 1)");
    const std::string mode = as_string(get(j, "complexity", "mode"), "complexity.mode");
    if (mode == "analytic")
        c.mode = ComplexityMode::kAnalytic;
    else if (mode == "empirical")
        c.mode = ComplexityMode::kEmpirical;
    else
        fail("complexity.mode", "must be analytic or empirical");
    if (const json* p = get_opt(j, "pilot_samples")) {
        c.pilot_samples = as_int64(*p, "complexity.pilot_samples");
        if (c.pilot_samples < 2) fail("complexity.pilot_samples", "must be at least 2");
    }
    if (const json* e = get_opt(j, "es_indicator"))
        c.es_indicator = as_bool(*e, "complexity.es_indicator");
    const json& hs = get(j, "complexity", "horizons");
    if (!hs.is_array() || hs.empty())
        fail("complexity.horizons", "must be a non-empty array of integers");
    for (std::size_t i = 0; i < hs.size(); ++i) {
        const int T = as_int(hs[i], "complexity.horizons[" + std::to_string(i) + "]");
        if (T < 1) fail("complexity.horizons[" + std::to_string(i) + "]", "must be at least 1");
        c.horizons.push_back(T);
    }
    if (const json* f = get_opt(j, "hoeffding_form"))
        c.form = parse_hoeffding_form(as_string(*f, "complexity.hoeffding_form"),
                                      "complexity.hoeffding_form");
    return c;
}

SweepSettings parse_sweep(const json& j) {
    if (!j.is_object()) fail("sweep", "must be an object");
    check_keys(j, "sweep", {"a_values", "horizons"});
    SweepSettings s;
    const json& av = get(j, "sweep", "a_values");
    if (!av.is_array() || av.empty())
        fail("sweep.a_values", "must be a non-empty array of numbers");
    for (std::size_t i = 0; i < av.size(); ++i)
        s.a_values.push_back(as_double(av[i], "sweep.a_values[" + std::to_string(i) + "]"));
    const json& hs = get(j, "sweep", "horizons");
    if (!hs.is_array() || hs.empty())
        fail("sweep.horizons", "must be a non-empty array of integers");
    for (std::size_t i = 0; i < hs.size(); ++i) {
        const int T = as_int(hs[i], "sweep.horizons[" + std::to_string(i) + "]");
        if (T < 1) fail("sweep.horizons[" + std::to_string(i) + "]", "must be at least 1");
        s.horizons.push_back(T);
    }
    return s;
}

CoverageSettings parse_coverage(const json& j) {
    if (!j.is_object()) fail("coverage", "must be an object");
    check_keys(j, "coverage",
               {"eps1", "eps2", "rho1", "rho2", "repetitions", "reference_samples"});
    CoverageSettings c;
    c.eps1 = as_double(get(j, "coverage", "eps1"), "coverage.eps1");
    c.eps2 = as_double(get(j, "coverage", "eps2"), "coverage.eps2");
    c.rho1 = as_double(get(j, "coverage", "rho1"), "coverage.rho1");
    c.rho2 = as_double(get(j, "coverage", "rho2"), "coverage.rho2");
    if (!(c.eps1 > 0.0)) fail("coverage.eps1", "must be positive");
    if (!(c.eps2 > 0.0)) fail("coverage.eps2", "must be positive");
    if (!(c.rho1 > 0.0 && c.rho1 < 1.0)) fail("coverage.rho1", "must lie in (0, 1)");
    if (!(c.rho2 > 0.0 && c.rho2 < 1.0)) fail("coverage.rho2", "must lie in (0, 1)");
    c.repetitions = as_int(get(j, "coverage", "repetitions"), "coverage.repetitions");
    if (c.repetitions < 1) fail("coverage.repetitions", "must be at least 1");
    c.reference_samples =
        as_int64(get(j, "coverage", "reference_samples"), "coverage.reference_samples");
    if (c.reference_samples < 2) fail("coverage.reference_samples", "must be at least 2");
    return c;
}

}  // namespace

int ModelConfig::state_dim() const {
    switch (type) {
        case ModelType::kDoubleIntegrator: return 4;
        case ModelType::kSimpleCar: return 4;
        case ModelType::kLtv: return static_cast<int>(A.rows());
    }
    return 0;
}

int ModelConfig::control_dim() const {
    switch (type) {
        case ModelType::kDoubleIntegrator: return 2;
        case ModelType::kSimpleCar: return 2;
        case ModelType::kLtv: return static_cast<int>(B.cols());
    }
    return 0;
}

const char* to_string(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::kUav: return "uav";
        case ExperimentKind::kUgv: return "ugv";
        case ExperimentKind::kComplexityTable: return "complexity-table";
        case ExperimentKind::kVarianceSweep: return "variance-sweep";
        case ExperimentKind::kCoverageTest: return "coverage-test";
    }
    return "?";
}

std::string config_hash_hex(const nlohmann::json& effective) {
    nlohmann::json stripped = effective;
    stripped.erase("output");
    stripped.erase("threads");
    const std::string dump = stripped.dump();
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : dump) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17] = {};
    for (int i = 15; i >= 0; --i) {
        buf[i] = "0123456789abcdef"[h & 0xF];
        h >>= 4;
    }
    return std::string(buf, 16);
}

Config parse_config(nlohmann::json doc, const CliOverrides& overrides) {
    if (!doc.is_object()) throw ConfigError("config: document must be a JSON object");

    if (overrides.seed) {
        if (!doc.contains("pi")) doc["pi"] = json::object();
        doc["pi"]["seed"] = *overrides.seed;
    }
    if (overrides.out_dir) {
        if (!doc.contains("output")) doc["output"] = json::object();
        doc["output"]["dir"] = *overrides.out_dir;
    }
    if (overrides.threads) doc["threads"] = *overrides.threads;
    if (overrides.delta_mode) doc["delta_mode"] = *overrides.delta_mode;
    if (overrides.hoeffding_form) {
        if (!doc.contains("complexity"))
            throw ConfigError(
                "config: --hoeffding-form requires a complexity section in the config");
        doc["complexity"]["hoeffding_form"] = *overrides.hoeffding_form;
    }

    check_keys(doc, "",
               {"version", "experiment", "dt", "delta_mode", "x0", "model", "cost", "pi", "run",
                "complexity", "sweep", "coverage", "output", "threads"});

    Config cfg;
    const int version = as_int(get(doc, "", "version"), "version");
    if (version != 1) fail("version", "must be 1");

    cfg.experiment = parse_experiment(as_string(get(doc, "", "experiment"), "experiment"),
                                      "experiment");
    cfg.dt = as_double(get(doc, "", "dt"), "dt");
    if (!(cfg.dt > 0.0)) fail("dt", "must be positive");
    if (const json* dm = get_opt(doc, "delta_mode"))
        cfg.delta_mode = parse_delta_mode(as_string(*dm, "delta_mode"), "delta_mode");

    cfg.model = parse_model(get(doc, "", "model"));
    cfg.x0 = as_vector(get(doc, "", "x0"), "x0");
    if (cfg.x0.size() != cfg.model.state_dim())
        fail("x0", "dimension must match the model state dimension");

    cfg.cost = parse_cost(get(doc, "", "cost"), cfg.model.state_dim(), cfg.dt);
    cfg.pi = parse_pi(get(doc, "", "pi"));

    if (const json* r = get_opt(doc, "run")) {
        cfg.run = parse_run(*r);
        cfg.has_run = true;
    }
    if (const json* c = get_opt(doc, "complexity")) {
        cfg.complexity = parse_complexity(*c);
        cfg.has_complexity = true;
    }
    if (const json* s = get_opt(doc, "sweep")) {
        cfg.sweep = parse_sweep(*s);
        cfg.has_sweep = true;
    }
    if (const json* c = get_opt(doc, "coverage")) {
        cfg.coverage = parse_coverage(*c);
        cfg.has_coverage = true;
    }
    if (const json* o = get_opt(doc, "output")) {
        if (!o->is_object()) fail("output", "must be an object");
        check_keys(*o, "output", {"dir"});
        cfg.out_dir = as_string(get(*o, "output", "dir"), "output.dir");
        if (cfg.out_dir.empty()) fail("output.dir", "must not be empty");
    }
    if (const json* t = get_opt(doc, "threads")) {
        cfg.threads = as_int(*t, "threads");
        if (cfg.threads < 1) fail("threads", "must be at least 1");
    }

    switch (cfg.experiment) {
        case ExperimentKind::kUav:
            if (cfg.model.type != ModelType::kDoubleIntegrator)
                fail("model.type", "must be double_integrator for the uav experiment");
            if (cfg.model.a_values.empty())
                fail("model.a_values", "is required for the uav experiment");
            if (!cfg.has_run) fail("run", "is required for the uav experiment");
            break;
        case ExperimentKind::kUgv:
            if (cfg.model.type != ModelType::kSimpleCar)
                fail("model.type", "must be simple_car for the ugv experiment");
            if (!cfg.has_run) fail("run", "is required for the ugv experiment");
            break;
        case ExperimentKind::kComplexityTable:
            if (!cfg.has_complexity)
                fail("complexity", "is required for the complexity-table experiment");
            if (cfg.model.type == ModelType::kDoubleIntegrator && cfg.model.a_values.empty())
                fail("model.a_values", "is required for the complexity-table experiment");
            break;
        case ExperimentKind::kVarianceSweep:
            if (cfg.model.type != ModelType::kDoubleIntegrator)
                fail("model.type", "must be double_integrator for the variance-sweep experiment");
            if (!cfg.has_sweep) fail("sweep", "is required for the variance-sweep experiment");
            break;
        case ExperimentKind::kCoverageTest:
            if (cfg.model.type != ModelType::kLtv)
                fail("model.type", "must be ltv for the coverage-test experiment");
            if (!cfg.has_coverage)
                fail("coverage", "is required for the coverage-test experiment");
            break;
    }

    cfg.effective = std::move(doc);
    cfg.hash_hex = config_hash_hex(cfg.effective);
    return cfg;
}

Config load_config(const std::filesystem::path& file, const CliOverrides& overrides) {
    std::ifstream in(file);
    if (!in) throw ConfigError("config: cannot open " + file.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return parse_config(std::move(doc), overrides);
}

}  // namespace pic
