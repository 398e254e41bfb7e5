#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "pic/costs.hpp"
#include "pic/dynamics.hpp"
#include "pic/estimator.hpp"

namespace pic {

// Receding-horizon loop: every outer step resamples a fresh batch around the
// zero nominal sequence from the current state, applies the first estimated
// control, and steps the true system once.
struct MpcRunConfig {
    PiConfig inner;               // nominal is rebuilt as zeros each step
    int outer_steps = 0;
    std::uint64_t master_seed = 0;
    bool actuation_noise = true;  // one fresh draw on the applied step
    Eigen::VectorXd x0;

    void validate(const DynamicsFn& dyn) const;
};

struct StepRecord {
    Eigen::VectorXd state;         // x_k before applying the control
    Eigen::VectorXd control;       // applied first control u_k
    double e1_hat = 0.0;
    bool e1_underflow = false;
    double min_cost = 0.0;
    Eigen::VectorXd var_weighted;  // per-component variance at the first step
};

struct RunLog {
    std::vector<StepRecord> steps;
    Eigen::VectorXd final_state;
    bool diverged = false;
    int completed_steps = 0;
};

// The log is a pure function of (dynamics, cost, config, master_seed); the
// worker count never changes a number.  A state norm above 1e9 or a batch
// with no finite cost ends the run with diverged set instead of throwing.
RunLog run_mpc(const DynamicsFn& dyn, const CostSpec& spec, const MpcRunConfig& cfg);

struct SweepCell {
    double a = 0.0;
    int horizon = 0;
    double mean_variance = 0.0;  // variance of the weighted noise, averaged
                                 // over steps and components
    double inv_e1 = 0.0;         // 1 / empirical weight mean
    bool underflow = false;
};

// Open-loop batches from x0 for every (a, horizon) pair of the double
// integrator family; each cell gets its own derived seed.
std::vector<SweepCell> variance_sweep(const CostSpec& spec, const PiConfig& base,
                                      const Eigen::VectorXd& x0,
                                      const std::vector<double>& a_values,
                                      const std::vector<int>& horizons);

}  // namespace pic
