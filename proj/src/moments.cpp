#include "pic/moments.hpp"

#include <cmath>
#include <stdexcept>

namespace pic {
namespace {

// Regularized lower incomplete gamma P(a, x), series expansion below the
// crossover and a modified Lentz continued fraction above it.  Good to about
// 1e-14 relative over the range used here.
double gamma_p(double a, double x)
{
    if (!(a > 0.0) || x < 0.0) throw std::invalid_argument("gamma_p: needs a > 0, x >= 0");
    if (x == 0.0) return 0.0;
    const double log_prefix = -x + a * std::log(x) - std::lgamma(a);
    if (x < a + 1.0) {
        double ap = a;
        double del = 1.0 / a;
        double sum = del;
        for (int i = 0; i < 500; ++i) {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if (std::abs(del) < std::abs(sum) * 1e-16) break;
        }
        return sum * std::exp(log_prefix);
    }
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 500; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double el = d * c;
        h *= el;
        if (std::abs(el - 1.0) < 1e-16) break;
    }
    return 1.0 - std::exp(log_prefix) * h;
}

constexpr double kEigClampRel = 1e-12;

}  // namespace

void GaussianBelief::validate() const
{
    const auto n = mean.size();
    if (n == 0) throw std::invalid_argument("GaussianBelief: empty mean");
    if (cov.rows() != n || cov.cols() != n)
        throw std::invalid_argument("GaussianBelief: covariance shape mismatch");
    if (!mean.allFinite() || !cov.allFinite())
        throw std::invalid_argument("GaussianBelief: non-finite entries");
    if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-9)
        throw std::invalid_argument("GaussianBelief: covariance not symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    if (es.eigenvalues().minCoeff() < -1e-9)
        throw std::invalid_argument("GaussianBelief: covariance not positive semidefinite");
}

void BeliefTrajectory::validate() const
{
    if (beliefs.size() < 2) throw std::invalid_argument("BeliefTrajectory: needs horizon >= 1");
    if (!beliefs.front().cov.isZero(0.0))
        throw std::invalid_argument("BeliefTrajectory: initial covariance must be zero");
    const auto n = beliefs.front().mean.size();
    for (const auto& b : beliefs) {
        if (b.mean.size() != n) throw std::invalid_argument("BeliefTrajectory: dimension drift");
        b.validate();
    }
}

BeliefTrajectory propagate_moments(const LtvModel& model, const ControlSequence& nominal,
                                   const Eigen::VectorXd& x0)
{
    model.validate();
    const int T = static_cast<int>(nominal.size());
    const int n = model.state_dim();
    const int m = model.control_dim();
    if (T < 1) throw std::invalid_argument("propagate_moments: empty nominal sequence");
    if (!model.time_invariant() && model.horizon() < T)
        throw std::invalid_argument("propagate_moments: model horizon shorter than nominal");
    if (x0.size() != n) throw std::invalid_argument("propagate_moments: x0 dimension mismatch");

    BeliefTrajectory traj;
    traj.beliefs.reserve(static_cast<std::size_t>(T) + 1);
    Eigen::VectorXd x = x0;
    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(n, n);
    traj.beliefs.push_back({x, P});
    for (int t = 0; t < T; ++t) {
        const auto& u = nominal[static_cast<std::size_t>(t)];
        if (u.size() != m)
            throw std::invalid_argument("propagate_moments: nominal control dimension mismatch");
        const Eigen::MatrixXd& A = model.A_at(t);
        const Eigen::MatrixXd& B = model.B_at(t);
        x = A * x + B * u;
        P = A * P * A.transpose() + B * B.transpose();
        P = 0.5 * (P + P.transpose());
        traj.beliefs.push_back({x, P});
    }
    return traj;
}

double noncentral_chi2_mean(int k, double ell)
{
    if (k < 1) throw std::invalid_argument("noncentral_chi2_mean: degrees must be positive");
    if (ell < 0.0 || !std::isfinite(ell))
        throw std::invalid_argument("noncentral_chi2_mean: noncentrality must be finite, >= 0");
    return static_cast<double>(k) + ell;
}

double chi2_cdf(int d, double q)
{
    if (d < 1) throw std::invalid_argument("chi2_cdf: degrees must be positive");
    if (q < 0.0 || !std::isfinite(q))
        throw std::invalid_argument("chi2_cdf: quantile must be finite, >= 0");
    return gamma_p(0.5 * d, 0.5 * q);
}

double expected_quadratic_cost(const GaussianBelief& belief, const Eigen::MatrixXd& Q,
                               const Eigen::VectorXd& x_tgt)
{
    belief.validate();
    const auto n = belief.mean.size();
    if (Q.rows() != n || Q.cols() != n || x_tgt.size() != n)
        throw std::invalid_argument("expected_quadratic_cost: dimension mismatch");
    if ((Q - Q.transpose()).cwiseAbs().maxCoeff() > 1e-9)
        throw std::invalid_argument("expected_quadratic_cost: Q not symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> esq(Q);
    if (esq.eigenvalues().minCoeff() <= 0.0)
        throw std::invalid_argument("expected_quadratic_cost: Q must be positive definite");

    const Eigen::VectorXd offset = belief.mean - x_tgt;

    // Whitening factor V with V^T V = Q.
    const Eigen::MatrixXd V = esq.eigenvalues().cwiseSqrt().asDiagonal() *
                              esq.eigenvectors().transpose();
    Eigen::MatrixXd S = V * belief.cov * V.transpose();
    S = 0.5 * (S + S.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ess(S);
    Eigen::VectorXd lam = ess.eigenvalues();
    const double lam_max = lam.cwiseAbs().maxCoeff();
    for (auto i = 0; i < lam.size(); ++i)
        if (std::abs(lam[i]) < kEigClampRel * lam_max) lam[i] = 0.0;

    if (lam_max == 0.0 || lam.minCoeff() <= 0.0) {
        // Rank-deficient whitened covariance, per-mode scaling is undefined.
        return (Q * belief.cov).trace() + offset.dot(Q * offset);
    }
    const Eigen::VectorXd z = ess.eigenvectors().transpose() * (V * offset);
    double total = 0.0;
    for (auto i = 0; i < lam.size(); ++i) {
        const double mu = z[i] / std::sqrt(lam[i]);
        total += lam[i] * (1.0 + mu * mu);
    }
    return total;
}

double collision_probability(const GaussianBelief& belief, const Eigen::Vector2d& c_star,
                             const std::vector<int>& projection)
{
    belief.validate();
    if (projection.size() != 2 || projection[0] == projection[1])
        throw std::invalid_argument("collision_probability: projection must name two coordinates");
    for (int idx : projection)
        if (idx < 0 || idx >= belief.mean.size())
            throw std::invalid_argument("collision_probability: projection index out of range");

    Eigen::Vector2d m2(belief.mean[projection[0]], belief.mean[projection[1]]);
    Eigen::Matrix2d P2;
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) P2(r, c) = belief.cov(projection[r], projection[c]);

    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(P2);
    const double lam_min = es.eigenvalues().minCoeff();
    const double lam_max = es.eigenvalues().maxCoeff();
    if (lam_min <= 1e-12 * std::max(1.0, lam_max)) {
        // Point mass at the mean: inside the degenerate conservative set only
        // if the anchor coincides with the mean.
        return (c_star - m2).squaredNorm() == 0.0 ? 1.0 : 0.0;
    }
    const Eigen::Vector2d v = c_star - m2;
    const double q = v.dot(P2.ldlt().solve(v));
    return 1.0 - chi2_cdf(2, q);
}

double expected_total_cost(const BeliefTrajectory& traj, const CostSpec& spec)
{
    traj.validate();
    spec.validate();
    if (traj.beliefs.front().mean.size() != spec.x_tgt.size())
        throw std::invalid_argument("expected_total_cost: dimension mismatch");
    const int T = traj.horizon();
    double total = 0.0;
    for (int t = 0; t < T; ++t) {
        const auto& b = traj.beliefs[static_cast<std::size_t>(t)];
        double step_cost = expected_quadratic_cost(b, spec.Q, spec.x_tgt);
        for (const auto& obs : spec.obstacles) {
            const Eigen::Vector2d mean_proj(b.mean[obs.projection[0]], b.mean[obs.projection[1]]);
            const Eigen::Vector2d c = closest_vertex(obs, mean_proj);
            step_cost += spec.omega_c * collision_probability(b, c, obs.projection);
        }
        total += step_cost * spec.dt;
    }
    return total + expected_quadratic_cost(traj.beliefs.back(), spec.Q_T, spec.x_tgt);
}

}  // namespace pic
