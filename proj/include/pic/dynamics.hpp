#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <vector>

namespace pic {

using ControlSequence = std::vector<Eigen::VectorXd>;

// How sampled noise enters a transition.  With kFolded the step function's
// noise gain already contains the time step, so delta is passed through as
// drawn.  With kDiffusion the draw is scaled by sqrt(dt) before it enters the
// dynamics, and the control estimator divides it back out.
enum class DeltaMode { kFolded, kDiffusion };

// Discrete linear time-varying model x' = A_t x + B_t (u + delta).
// A single-entry sequence is treated as time-invariant and valid for any t.
struct LtvModel {
    std::vector<Eigen::MatrixXd> A;
    std::vector<Eigen::MatrixXd> B;

    int state_dim() const { return static_cast<int>(A.front().rows()); }
    int control_dim() const { return static_cast<int>(B.front().cols()); }
    bool time_invariant() const { return A.size() == 1; }
    int horizon() const { return static_cast<int>(A.size()); }

    const Eigen::MatrixXd& A_at(int t) const;
    const Eigen::MatrixXd& B_at(int t) const;

    // Throws std::invalid_argument on empty, mismatched or non-finite input.
    void validate() const;
};

Eigen::VectorXd step_ltv(const LtvModel& model, int t, const Eigen::VectorXd& x,
                         const Eigen::VectorXd& u, const Eigen::VectorXd& delta);

// Planar double integrator with velocity feedback a on both axes.
// State (px, py, vx, vy), input (ax, ay).
LtvModel make_double_integrator(double a);

// Kinematic car, state (px, py, theta, phi), input (v, omega).  The steering
// angle is clamped to [steer_lo, steer_hi] after the update.  Noise enters
// additively on both inputs before the rates are applied.
Eigen::VectorXd step_simple_car(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                                const Eigen::VectorXd& delta, double wheelbase, double dt,
                                double steer_lo, double steer_hi);

// Single-step transition used by the samplers and the closed-loop harness.
class DynamicsFn {
public:
    virtual ~DynamicsFn() = default;
    virtual int state_dim() const = 0;
    virtual int control_dim() const = 0;
    virtual Eigen::VectorXd step(int t, const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                                 const Eigen::VectorXd& delta) const = 0;
};

class LtvDynamics final : public DynamicsFn {
public:
    explicit LtvDynamics(LtvModel model);
    int state_dim() const override { return model_.state_dim(); }
    int control_dim() const override { return model_.control_dim(); }
    Eigen::VectorXd step(int t, const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                         const Eigen::VectorXd& delta) const override;
    const LtvModel& model() const { return model_; }

private:
    LtvModel model_;
};

class SimpleCarDynamics final : public DynamicsFn {
public:
    SimpleCarDynamics(double wheelbase, double dt, double steer_lo, double steer_hi);
    int state_dim() const override { return 4; }
    int control_dim() const override { return 2; }
    Eigen::VectorXd step(int t, const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                         const Eigen::VectorXd& delta) const override;
    double steer_lo() const { return steer_lo_; }
    double steer_hi() const { return steer_hi_; }

private:
    double wheelbase_;
    double dt_;
    double steer_lo_;
    double steer_hi_;
};

// One sampled trajectory.  states has T+1 rows, noises has T rows of the raw
// standard-normal draws; any scaling implied by the delta mode happens at the
// dynamics boundary, not in storage.
struct Rollout {
    Eigen::MatrixXd states;  // (T+1) x n
    Eigen::MatrixXd noises;  // T x m
    std::uint64_t seed = 0;
    std::uint64_t sample_index = 0;
};

struct SampleOptions {
    DeltaMode mode = DeltaMode::kFolded;
    double dt = 1.0;
    bool zero_noise = false;  // deterministic rollouts for tests
};

// Simulates one noise-driven trajectory under the nominal control sequence.
// Identical (seed, sample_index) always reproduces the identical rollout.
Rollout sample_rollout(const DynamicsFn& dyn, const ControlSequence& nominal,
                       const Eigen::VectorXd& x0, std::uint64_t seed,
                       std::uint64_t sample_index, const SampleOptions& opt = {});

}  // namespace pic
