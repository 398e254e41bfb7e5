#include "pic/estimator.hpp"

#include <cmath>
#include <stdexcept>

#include "pic/detail/parallel.hpp"
#include "pic/rng.hpp"

namespace pic {
namespace {

// One simulated sample without rollout storage.  Mirrors sample_rollout plus
// trajectory_cost operation for operation so both paths produce bitwise
// identical costs.  Optionally captures the raw draw delta_t[i].
double simulate_sample_cost(const DynamicsFn& dyn, const CostSpec& spec,
                            const ControlSequence& nominal, const Eigen::VectorXd& x0,
                            std::uint64_t seed, std::uint64_t sample, const SampleOptions& opt,
                            int t_cap, int i_cap, double* captured)
{
    const int T = static_cast<int>(nominal.size());
    const int m = dyn.control_dim();
    const double gain = opt.mode == DeltaMode::kDiffusion ? std::sqrt(opt.dt) : 1.0;
    Eigen::VectorXd x = x0;
    Eigen::VectorXd draw = Eigen::VectorXd::Zero(m);
    double s = 0.0;
    for (int t = 0; t < T; ++t) {
        if (!opt.zero_noise)
            fill_normals(seed, sample, static_cast<std::uint32_t>(t), draw.data(), m);
        if (t == t_cap && captured) *captured = draw[i_cap];
        s += running_cost(x, spec) * spec.dt;
        x = dyn.step(t, x, nominal[static_cast<std::size_t>(t)], gain * draw);
    }
    return s + terminal_cost(x, spec);
}

}  // namespace

void PiConfig::validate() const
{
    if (num_samples < 1) throw std::invalid_argument("PiConfig: num_samples must be positive");
    if (!(lambda > 0.0)) throw std::invalid_argument("PiConfig: lambda must be positive");
    if (!(dt > 0.0)) throw std::invalid_argument("PiConfig: dt must be positive");
    if (nominal.empty()) throw std::invalid_argument("PiConfig: empty nominal sequence");
    if (threads < 1) throw std::invalid_argument("PiConfig: threads must be positive");
}

TrajectoryBatch build_batch(const DynamicsFn& dyn, const CostSpec& spec, const PiConfig& cfg,
                            const Eigen::VectorXd& x0)
{
    cfg.validate();
    spec.validate();
    if (x0.size() != dyn.state_dim())
        throw std::invalid_argument("build_batch: x0 dimension mismatch");
    if (spec.x_tgt.size() != dyn.state_dim())
        throw std::invalid_argument("build_batch: cost dimension mismatch");

    CostSpec prepared = spec;
    prepared.prepare();

    const int N = cfg.num_samples;
    TrajectoryBatch batch;
    batch.rollouts.resize(static_cast<std::size_t>(N));
    batch.costs.resize(N);
    batch.weights.resize(N);
    batch.log_weights.resize(N);

    const SampleOptions opt{cfg.mode, cfg.dt, cfg.zero_noise};
    detail::for_each_block(N, cfg.threads, [&](std::int64_t, std::int64_t b0, std::int64_t b1) {
        for (std::int64_t n = b0; n < b1; ++n) {
            Rollout ro = sample_rollout(dyn, cfg.nominal, x0, cfg.seed,
                                        static_cast<std::uint64_t>(n), opt);
            const double s = trajectory_cost(ro, prepared);
            batch.rollouts[static_cast<std::size_t>(n)] = std::move(ro);
            batch.costs[n] = s;
            batch.log_weights[n] = -s / cfg.lambda;
            batch.weights[n] = std::exp(batch.log_weights[n]);
        }
    });
    return batch;
}

ControlSequence estimate_control(const TrajectoryBatch& batch, const PiConfig& cfg)
{
    cfg.validate();
    const int N = batch.size();
    if (N < 1) throw std::invalid_argument("estimate_control: empty batch");
    if (batch.costs.hasNaN()) throw std::invalid_argument("estimate_control: batch has NaN costs");
    const int T = cfg.horizon();
    const int m = static_cast<int>(cfg.nominal.front().size());
    if (static_cast<int>(batch.rollouts.size()) != N ||
        batch.rollouts.front().noises.rows() != T || batch.rollouts.front().noises.cols() != m)
        throw std::invalid_argument("estimate_control: batch does not match the config horizon");

    const double shift = batch.log_weights.maxCoeff();
    if (!std::isfinite(shift))
        throw std::invalid_argument("estimate_control: every rollout cost is infinite");

    detail::NeumaierSum den;
    std::vector<detail::NeumaierSum> num(static_cast<std::size_t>(T) * m);
    for (int n = 0; n < N; ++n) {
        const double w = std::exp(batch.log_weights[n] - shift);
        den.add(w);
        const auto& noises = batch.rollouts[static_cast<std::size_t>(n)].noises;
        for (int t = 0; t < T; ++t)
            for (int i = 0; i < m; ++i)
                num[static_cast<std::size_t>(t) * m + i].add(w * noises(t, i));
    }

    const double scale = cfg.mode == DeltaMode::kDiffusion ? 1.0 / std::sqrt(cfg.dt) : 1.0;
    const double total = den.value();
    ControlSequence out(static_cast<std::size_t>(T));
    for (int t = 0; t < T; ++t) {
        Eigen::VectorXd u = cfg.nominal[static_cast<std::size_t>(t)];
        for (int i = 0; i < m; ++i)
            u[i] += scale * num[static_cast<std::size_t>(t) * m + i].value() / total;
        out[static_cast<std::size_t>(t)] = std::move(u);
    }
    return out;
}

WeightMean empirical_weight_mean(const TrajectoryBatch& batch)
{
    const int N = batch.size();
    if (N < 1) throw std::invalid_argument("empirical_weight_mean: empty batch");
    detail::NeumaierSum sum;
    double peak = 0.0;
    for (int n = 0; n < N; ++n) {
        sum.add(batch.weights[n]);
        peak = std::max(peak, batch.weights[n]);
    }
    return {sum.value() / N, peak == 0.0};
}

Eigen::VectorXd empirical_weighted_noise(const TrajectoryBatch& batch, int t, double e_w_ref)
{
    const int N = batch.size();
    if (N < 1) throw std::invalid_argument("empirical_weighted_noise: empty batch");
    if (!(e_w_ref > 0.0) || !std::isfinite(e_w_ref))
        throw std::invalid_argument("empirical_weighted_noise: reference weight mean must be positive");
    const auto& first = batch.rollouts.front().noises;
    if (t < 0 || t >= first.rows())
        throw std::invalid_argument("empirical_weighted_noise: step index out of range");
    const int m = static_cast<int>(first.cols());
    std::vector<detail::NeumaierSum> sums(static_cast<std::size_t>(m));
    for (int n = 0; n < N; ++n) {
        const auto& noises = batch.rollouts[static_cast<std::size_t>(n)].noises;
        for (int i = 0; i < m; ++i) sums[static_cast<std::size_t>(i)].add(batch.weights[n] * noises(t, i));
    }
    Eigen::VectorXd out(m);
    for (int i = 0; i < m; ++i) out[i] = sums[static_cast<std::size_t>(i)].value() / (N * e_w_ref);
    return out;
}

Eigen::VectorXd empirical_variance_weighted_control(const TrajectoryBatch& batch, int t)
{
    const int N = batch.size();
    if (N < 2) throw std::invalid_argument("empirical_variance_weighted_control: needs N >= 2");
    const auto& first = batch.rollouts.front().noises;
    if (t < 0 || t >= first.rows())
        throw std::invalid_argument("empirical_variance_weighted_control: step index out of range");
    const int m = static_cast<int>(first.cols());
    const double e1 = empirical_weight_mean(batch).value;

    std::vector<detail::NeumaierSum> mean_sums(static_cast<std::size_t>(m));
    for (int n = 0; n < N; ++n) {
        const auto& noises = batch.rollouts[static_cast<std::size_t>(n)].noises;
        for (int i = 0; i < m; ++i)
            mean_sums[static_cast<std::size_t>(i)].add(batch.weights[n] * noises(t, i) / e1);
    }
    Eigen::VectorXd mean(m);
    for (int i = 0; i < m; ++i) mean[i] = mean_sums[static_cast<std::size_t>(i)].value() / N;

    std::vector<detail::NeumaierSum> var_sums(static_cast<std::size_t>(m));
    for (int n = 0; n < N; ++n) {
        const auto& noises = batch.rollouts[static_cast<std::size_t>(n)].noises;
        for (int i = 0; i < m; ++i) {
            const double dev = batch.weights[n] * noises(t, i) / e1 - mean[i];
            var_sums[static_cast<std::size_t>(i)].add(dev * dev);
        }
    }
    Eigen::VectorXd var(m);
    for (int i = 0; i < m; ++i) var[i] = var_sums[static_cast<std::size_t>(i)].value() / (N - 1);
    return var;
}

WeightMean streamed_weight_mean(const DynamicsFn& dyn, const CostSpec& spec, const PiConfig& cfg,
                                const Eigen::VectorXd& x0)
{
    cfg.validate();
    spec.validate();
    if (x0.size() != dyn.state_dim())
        throw std::invalid_argument("streamed_weight_mean: x0 dimension mismatch");
    CostSpec prepared = spec;
    prepared.prepare();

    const int N = cfg.num_samples;
    const SampleOptions opt{cfg.mode, cfg.dt, cfg.zero_noise};
    const std::int64_t blocks = detail::block_count(N);
    std::vector<detail::NeumaierSum> partial(static_cast<std::size_t>(blocks));
    std::vector<double> peak(static_cast<std::size_t>(blocks), 0.0);
    detail::for_each_block(N, cfg.threads, [&](std::int64_t b, std::int64_t b0, std::int64_t b1) {
        auto& acc = partial[static_cast<std::size_t>(b)];
        double pk = 0.0;
        for (std::int64_t n = b0; n < b1; ++n) {
            const double s = simulate_sample_cost(dyn, prepared, cfg.nominal, x0, cfg.seed,
                                                  static_cast<std::uint64_t>(n), opt, -1, 0,
                                                  nullptr);
            const double w = std::exp(-s / cfg.lambda);
            acc.add(w);
            pk = std::max(pk, w);
        }
        peak[static_cast<std::size_t>(b)] = pk;
    });
    detail::NeumaierSum total;
    double pk = 0.0;
    for (std::int64_t b = 0; b < blocks; ++b) {
        total.add(partial[static_cast<std::size_t>(b)].value());
        pk = std::max(pk, peak[static_cast<std::size_t>(b)]);
    }
    return {total.value() / N, pk == 0.0};
}

double streamed_weighted_noise_component(const DynamicsFn& dyn, const CostSpec& spec,
                                         const PiConfig& cfg, const Eigen::VectorXd& x0, int t,
                                         int i, double e_w_ref)
{
    cfg.validate();
    spec.validate();
    if (!(e_w_ref > 0.0) || !std::isfinite(e_w_ref))
        throw std::invalid_argument("streamed_weighted_noise_component: reference must be positive");
    if (t < 0 || t >= cfg.horizon() || i < 0 || i >= dyn.control_dim())
        throw std::invalid_argument("streamed_weighted_noise_component: index out of range");
    CostSpec prepared = spec;
    prepared.prepare();

    const int N = cfg.num_samples;
    const SampleOptions opt{cfg.mode, cfg.dt, cfg.zero_noise};
    const std::int64_t blocks = detail::block_count(N);
    std::vector<detail::NeumaierSum> partial(static_cast<std::size_t>(blocks));
    detail::for_each_block(N, cfg.threads, [&](std::int64_t b, std::int64_t b0, std::int64_t b1) {
        auto& acc = partial[static_cast<std::size_t>(b)];
        for (std::int64_t n = b0; n < b1; ++n) {
            double captured = 0.0;
            const double s = simulate_sample_cost(dyn, prepared, cfg.nominal, x0, cfg.seed,
                                                  static_cast<std::uint64_t>(n), opt, t, i,
                                                  &captured);
            acc.add(std::exp(-s / cfg.lambda) * captured);
        }
    });
    detail::NeumaierSum total;
    for (std::int64_t b = 0; b < blocks; ++b) total.add(partial[static_cast<std::size_t>(b)].value());
    return total.value() / (N * e_w_ref);
}

}  // namespace pic
