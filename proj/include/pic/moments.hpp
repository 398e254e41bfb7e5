#pragma once

#include <Eigen/Dense>
#include <vector>

#include "pic/costs.hpp"
#include "pic/dynamics.hpp"

namespace pic {

struct GaussianBelief {
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;

    // Symmetry within 1e-9 and eigenvalues above -1e-9.
    void validate() const;
};

// Beliefs at steps 0..T, cov at step 0 is exactly zero.
struct BeliefTrajectory {
    std::vector<GaussianBelief> beliefs;

    int horizon() const { return static_cast<int>(beliefs.size()) - 1; }
    void validate() const;
};

// Exact mean and covariance recursion under the linear model driven by the
// nominal controls:
//   mean' = A mean + B u,   cov' = A cov A^T + B B^T,
// starting from a deterministic x0.  The model's B is taken as the complete
// noise gain of one step.
BeliefTrajectory propagate_moments(const LtvModel& model, const ControlSequence& nominal,
                                   const Eigen::VectorXd& x0);

// Mean of a noncentral chi-square with k degrees of freedom and noncentrality
// ell: k + ell.
double noncentral_chi2_mean(int k, double ell);

// Chi-square CDF with d degrees of freedom, evaluated as the regularized
// lower incomplete gamma P(d/2, q/2).
double chi2_cdf(int d, double q);

// E[(X - x_tgt)^T Q (X - x_tgt)] for X ~ N(mean, cov) and positive definite
// Q.  Computed through the eigenvalues of the Q-whitened covariance; falls
// back to trace(Q cov) + offset^T Q offset when the whitened covariance is
// singular.  The two routes agree to machine precision, which the tests pin.
double expected_quadratic_cost(const GaussianBelief& belief, const Eigen::MatrixXd& Q,
                               const Eigen::VectorXd& x_tgt);

// Probability that the projected state falls outside the covariance-shaped
// ellipsoid through the point c_star, an upper bound on the probability of
// touching the obstacle c_star came from:
//   1 - F_chi2(d, (c* - mean)^T cov^-1 (c* - mean)).
// A singular projected covariance is treated as a point mass at the mean.
double collision_probability(const GaussianBelief& belief, const Eigen::Vector2d& c_star,
                             const std::vector<int>& projection);

// Expected cost-to-go along a belief trajectory: per-step expected quadratic
// cost plus omega_c times the conservative collision probability of each
// obstacle, dt-weighted, plus the terminal expected quadratic cost.  The
// obstacle anchor c* is the vertex closest to the projected mean at each
// step.
double expected_total_cost(const BeliefTrajectory& traj, const CostSpec& spec);

}  // namespace pic
