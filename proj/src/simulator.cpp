#include "pic/simulator.hpp"

#include <cmath>
#include <stdexcept>

#include "pic/rng.hpp"

namespace pic {
namespace {

constexpr double kDivergenceNorm = 1e9;

// Sub-stream tags under one master seed.
constexpr std::uint32_t kTagRollouts = 0;
constexpr std::uint32_t kTagActuation = 1;
constexpr std::uint32_t kTagSweepCell = 2;

}  // namespace

void MpcRunConfig::validate(const DynamicsFn& dyn) const
{
    if (outer_steps < 1) throw std::invalid_argument("MpcRunConfig: outer_steps must be positive");
    if (x0.size() != dyn.state_dim())
        throw std::invalid_argument("MpcRunConfig: x0 dimension mismatch");
    PiConfig probe = inner;
    probe.nominal.assign(1, Eigen::VectorXd::Zero(dyn.control_dim()));
    probe.validate();
}

RunLog run_mpc(const DynamicsFn& dyn, const CostSpec& spec, const MpcRunConfig& cfg)
{
    cfg.validate(dyn);
    spec.validate();
    CostSpec prepared = spec;
    prepared.prepare();

    const int m = dyn.control_dim();
    const int T = cfg.inner.horizon();
    if (T < 1) throw std::invalid_argument("run_mpc: inner horizon must be positive");
    PiConfig inner = cfg.inner;
    inner.nominal.assign(static_cast<std::size_t>(T), Eigen::VectorXd::Zero(m));

    const double gain = inner.mode == DeltaMode::kDiffusion ? std::sqrt(inner.dt) : 1.0;
    RunLog log;
    log.steps.reserve(static_cast<std::size_t>(cfg.outer_steps));
    Eigen::VectorXd x = cfg.x0;
    Eigen::VectorXd act = Eigen::VectorXd::Zero(m);
    for (int k = 0; k < cfg.outer_steps; ++k) {
        if (!x.allFinite() || x.norm() > kDivergenceNorm) {
            log.diverged = true;
            break;
        }
        inner.seed = derive_seed(cfg.master_seed, static_cast<std::uint64_t>(k), kTagRollouts);
        TrajectoryBatch batch = build_batch(dyn, prepared, inner, x);
        if (batch.costs.hasNaN() || !std::isfinite(batch.costs.minCoeff())) {
            log.diverged = true;
            break;
        }
        const ControlSequence u_star = estimate_control(batch, inner);

        StepRecord rec;
        rec.state = x;
        rec.control = u_star.front();
        const WeightMean e1 = empirical_weight_mean(batch);
        rec.e1_hat = e1.value;
        rec.e1_underflow = e1.underflow;
        rec.min_cost = batch.costs.minCoeff();
        rec.var_weighted = empirical_variance_weighted_control(batch, 0);

        if (cfg.actuation_noise)
            fill_normals(derive_seed(cfg.master_seed, static_cast<std::uint64_t>(k), kTagActuation),
                         0, 0, act.data(), m);
        x = dyn.step(0, x, rec.control, gain * act);
        log.steps.push_back(std::move(rec));
        ++log.completed_steps;
    }
    log.final_state = x;
    return log;
}

std::vector<SweepCell> variance_sweep(const CostSpec& spec, const PiConfig& base,
                                      const Eigen::VectorXd& x0,
                                      const std::vector<double>& a_values,
                                      const std::vector<int>& horizons)
{
    if (a_values.empty() || horizons.empty())
        throw std::invalid_argument("variance_sweep: empty grid");
    for (int T : horizons)
        if (T < 1) throw std::invalid_argument("variance_sweep: horizons must be positive");

    std::vector<SweepCell> cells;
    cells.reserve(a_values.size() * horizons.size());
    std::uint64_t cell_index = 0;
    for (double a : a_values) {
        const LtvDynamics dyn(make_double_integrator(a));
        for (int T : horizons) {
            PiConfig cfg = base;
            cfg.nominal.assign(static_cast<std::size_t>(T),
                               Eigen::VectorXd::Zero(dyn.control_dim()));
            cfg.seed = derive_seed(base.seed, cell_index++, kTagSweepCell);
            const TrajectoryBatch batch = build_batch(dyn, spec, cfg, x0);

            SweepCell cell;
            cell.a = a;
            cell.horizon = T;
            const WeightMean e1 = empirical_weight_mean(batch);
            cell.underflow = e1.underflow;
            cell.inv_e1 = e1.underflow ? std::numeric_limits<double>::infinity() : 1.0 / e1.value;
            double acc = 0.0;
            for (int t = 0; t < T; ++t)
                acc += empirical_variance_weighted_control(batch, t).mean();
            cell.mean_variance = acc / static_cast<double>(T);
            cells.push_back(std::move(cell));
        }
    }
    return cells;
}

}  // namespace pic
