#include "pic/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "pic/rng.hpp"

namespace pic {

const Eigen::MatrixXd& LtvModel::A_at(int t) const
{
    if (time_invariant()) return A.front();
    if (t < 0 || t >= horizon()) throw std::invalid_argument("LtvModel: step index out of range");
    return A[static_cast<std::size_t>(t)];
}

const Eigen::MatrixXd& LtvModel::B_at(int t) const
{
    if (time_invariant()) return B.front();
    if (t < 0 || t >= horizon()) throw std::invalid_argument("LtvModel: step index out of range");
    return B[static_cast<std::size_t>(t)];
}

void LtvModel::validate() const
{
    if (A.empty() || A.size() != B.size())
        throw std::invalid_argument("LtvModel: A and B must be non-empty and equally long");
    const auto n = A.front().rows();
    const auto m = B.front().cols();
    for (std::size_t t = 0; t < A.size(); ++t) {
        if (A[t].rows() != n || A[t].cols() != n)
            throw std::invalid_argument("LtvModel: A matrices must be n x n with a common n");
        if (B[t].rows() != n || B[t].cols() != m)
            throw std::invalid_argument("LtvModel: B matrices must be n x m with common dims");
        if (!A[t].allFinite() || !B[t].allFinite())
            throw std::invalid_argument("LtvModel: matrices must be finite");
    }
}

Eigen::VectorXd step_ltv(const LtvModel& model, int t, const Eigen::VectorXd& x,
                         const Eigen::VectorXd& u, const Eigen::VectorXd& delta)
{
    if (t < 0) throw std::invalid_argument("step_ltv: negative step index");
    const Eigen::MatrixXd& A = model.A_at(t);
    const Eigen::MatrixXd& B = model.B_at(t);
    if (x.size() != A.rows()) throw std::invalid_argument("step_ltv: state dimension mismatch");
    if (u.size() != B.cols() || delta.size() != B.cols())
        throw std::invalid_argument("step_ltv: control dimension mismatch");
    return A * x + B * (u + delta);
}

LtvModel make_double_integrator(double a)
{
    Eigen::MatrixXd A(4, 4);
    A << 1, 0, 0.1, 0,
         0, 1, 0, 0.1,
         0, 0, 1 + a, 0,
         0, 0, 0, 1 + a;
    Eigen::MatrixXd B(4, 2);
    B << 0, 0,
         0, 0,
         0.1, 0,
         0, 0.1;
    return LtvModel{{A}, {B}};
}

Eigen::VectorXd step_simple_car(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                                const Eigen::VectorXd& delta, double wheelbase, double dt,
                                double steer_lo, double steer_hi)
{
    if (x.size() != 4 || u.size() != 2 || delta.size() != 2)
        throw std::invalid_argument("step_simple_car: expects state dim 4, input dim 2");
    if (!(wheelbase > 0.0) || !(dt > 0.0) || !(steer_lo < steer_hi))
        throw std::invalid_argument("step_simple_car: bad wheelbase, dt or steering limits");
    const double theta = x[2];
    const double phi = x[3];
    const double v = u[0] + delta[0];
    const double w = u[1] + delta[1];
    Eigen::VectorXd next(4);
    next[0] = x[0] + std::cos(theta) * v * dt;
    next[1] = x[1] + std::sin(theta) * v * dt;
    next[2] = theta + std::tan(phi) / wheelbase * v * dt;
    next[3] = std::clamp(phi + w * dt, steer_lo, steer_hi);
    return next;
}

LtvDynamics::LtvDynamics(LtvModel model) : model_(std::move(model)) { model_.validate(); }

Eigen::VectorXd LtvDynamics::step(int t, const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                                  const Eigen::VectorXd& delta) const
{
    return step_ltv(model_, t, x, u, delta);
}

SimpleCarDynamics::SimpleCarDynamics(double wheelbase, double dt, double steer_lo, double steer_hi)
    : wheelbase_(wheelbase), dt_(dt), steer_lo_(steer_lo), steer_hi_(steer_hi)
{
    if (!(wheelbase > 0.0) || !(dt > 0.0) || !(steer_lo < steer_hi))
        throw std::invalid_argument("SimpleCarDynamics: bad wheelbase, dt or steering limits");
}

Eigen::VectorXd SimpleCarDynamics::step(int, const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                                        const Eigen::VectorXd& delta) const
{
    return step_simple_car(x, u, delta, wheelbase_, dt_, steer_lo_, steer_hi_);
}

Rollout sample_rollout(const DynamicsFn& dyn, const ControlSequence& nominal,
                       const Eigen::VectorXd& x0, std::uint64_t seed,
                       std::uint64_t sample_index, const SampleOptions& opt)
{
    const int T = static_cast<int>(nominal.size());
    const int n = dyn.state_dim();
    const int m = dyn.control_dim();
    if (T < 1) throw std::invalid_argument("sample_rollout: empty nominal sequence");
    if (x0.size() != n) throw std::invalid_argument("sample_rollout: x0 dimension mismatch");
    if (!(opt.dt > 0.0)) throw std::invalid_argument("sample_rollout: dt must be positive");

    Rollout ro;
    ro.seed = seed;
    ro.sample_index = sample_index;
    ro.states.resize(T + 1, n);
    ro.noises.setZero(T, m);
    ro.states.row(0) = x0.transpose();

    const double gain = opt.mode == DeltaMode::kDiffusion ? std::sqrt(opt.dt) : 1.0;
    Eigen::VectorXd x = x0;
    Eigen::VectorXd draw = Eigen::VectorXd::Zero(m);
    for (int t = 0; t < T; ++t) {
        if (nominal[static_cast<std::size_t>(t)].size() != m)
            throw std::invalid_argument("sample_rollout: nominal control dimension mismatch");
        if (!opt.zero_noise) {
            fill_normals(seed, sample_index, static_cast<std::uint32_t>(t), draw.data(), m);
            ro.noises.row(t) = draw.transpose();
        }
        x = dyn.step(t, x, nominal[static_cast<std::size_t>(t)], gain * draw);
        ro.states.row(t + 1) = x.transpose();
    }
    return ro;
}

}  // namespace pic
