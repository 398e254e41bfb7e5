#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "pic/costs.hpp"
#include "pic/dynamics.hpp"

namespace pic {

// Sampling setup for one batch of rollouts.
struct PiConfig {
    int num_samples = 0;        // N
    double lambda = 1.0;        // temperature
    double dt = 1.0;
    ControlSequence nominal;    // length T
    std::uint64_t seed = 0;
    DeltaMode mode = DeltaMode::kFolded;
    bool zero_noise = false;
    int threads = 1;

    int horizon() const { return static_cast<int>(nominal.size()); }
    void validate() const;
};

// N sampled trajectories with their costs and importance weights
// w_n = exp(-S_n / lambda).  log_weights stores -S_n / lambda so downstream
// consumers can shift before exponentiating.
struct TrajectoryBatch {
    std::vector<Rollout> rollouts;
    Eigen::VectorXd costs;
    Eigen::VectorXd weights;
    Eigen::VectorXd log_weights;

    int size() const { return static_cast<int>(costs.size()); }
};

TrajectoryBatch build_batch(const DynamicsFn& dyn, const CostSpec& spec, const PiConfig& cfg,
                            const Eigen::VectorXd& x0);

// Importance-weighted control update
//   u*_t = u_t + sum_n w_n delta_t^(n) / sum_n w_n,
// with the noise divided by sqrt(dt) in diffusion mode.  Weights are shifted
// by the max log weight before exponentiation; the shift cancels in the
// ratio, so deep underflow of the raw weights does not disturb the estimate.
ControlSequence estimate_control(const TrajectoryBatch& batch, const PiConfig& cfg);

struct WeightMean {
    double value = 0.0;
    bool underflow = false;  // every raw weight underflowed to exact zero
};

// Plain average of the raw (unshifted) weights, compensated summation in
// index order.
WeightMean empirical_weight_mean(const TrajectoryBatch& batch);

// Per-component average of w_n delta_t^(n) / e_w_ref.  Pass the reference
// weight mean explicitly; it must be positive.
Eigen::VectorXd empirical_weighted_noise(const TrajectoryBatch& batch, int t, double e_w_ref);

// Unbiased per-component sample variance of w_n delta_t^(n) / E1_hat, with
// E1_hat taken from this batch.  Total weight underflow propagates as NaN.
Eigen::VectorXd empirical_variance_weighted_control(const TrajectoryBatch& batch, int t);

// Streaming variants for large sample counts: same numbers as going through
// build_batch (identical draws, block-deterministic reduction) without
// storing the rollouts.
WeightMean streamed_weight_mean(const DynamicsFn& dyn, const CostSpec& spec, const PiConfig& cfg,
                                const Eigen::VectorXd& x0);

// Average of w_n delta_t^(n)[i] / e_w_ref over a streamed batch.
double streamed_weighted_noise_component(const DynamicsFn& dyn, const CostSpec& spec,
                                         const PiConfig& cfg, const Eigen::VectorXd& x0, int t,
                                         int i, double e_w_ref);

}  // namespace pic
