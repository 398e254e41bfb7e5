#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "pic/dynamics.hpp"

namespace pic {

// A requested tolerance cannot be met because a moment assumption fails,
// e.g. the deviation bound is not below the mean weight.
class AssumptionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Two-sided deviation bound shape behind the sample count for the weight
// mean.  kStandard uses exp(-2 N eps^2); kConservative drops the factor two
// in the exponent and therefore doubles the count.
enum class HoeffdingForm { kStandard, kConservative };

// A sample count that may exceed floating range.  log10 is always valid;
// count holds the ceiled value only when overflow is false.
struct SampleCount {
    double count = 0.0;
    double log10 = 0.0;
    bool overflow = false;
};

inline constexpr double kLog10Cap = 300.0;

// Samples needed so the empirical weight mean deviates from its expectation
// by less than eps1 with probability at least 1 - rho1.
std::int64_t hoeffding_samples(double eps1, double rho1,
                               HoeffdingForm form = HoeffdingForm::kStandard);

// Chebyshev-based count for the weighted-noise average, driven by the
// analytic variance bound (1 + sqrt(2)) exp(2 E[S] / lambda).  The exponent
// argument e_s_over_lambda = E[S] / lambda stays in the log domain until the
// final value; counts past the log10 cap are reported as overflow.
SampleCount chebyshev_samples_analytic(double e_s_over_lambda, double eps2, double rho2,
                                       double log10_cap = kLog10Cap);

// Pilot-estimate variant: replaces the exponential moment by the guaranteed
// floor (e1_hat - eps1)^2 of the squared weight mean.  Throws AssumptionError
// unless e1_hat - eps1 > 0.
SampleCount chebyshev_samples_empirical(double e1_hat, double eps1, double eps2, double rho2,
                                        double log10_cap = kLog10Cap);

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

// Two-sided enclosure of the i-th control estimate when the weight mean is
// known within eps1 and the weighted-noise average within eps2:
// the product interval [1 -+ eps1/e_w] * [u -+ eps2].  Requires eps1 < e_w.
Interval control_error_bounds(double u_star_i, double eps1, double eps2, double e_w);

// Var(w) <= (1 - E[w]) E[w] for weights in [0, 1].
double var_w_bound(double e_w);

struct VarianceBound {
    double value = 0.0;  // +inf when overflow
    double log10 = 0.0;
    bool overflow = false;
};

// Variance bound (1 + sqrt(2)) exp(2 E[S] / lambda) for the weighted noise,
// log-domain with the same overflow cap as the sample counts.
VarianceBound variance_upper_bound(double e_s_over_lambda, double log10_cap = kLog10Cap);

// Var(XY) <= sqrt(Var(X^2) Var(Y^2)) + E[X^2] E[Y^2] for dependent X, Y.
double var_product_bound(double var_x2, double var_y2, double e_x2, double e_y2);

// Lower bound on the spectral norm of the state covariance at step t >= 1:
// sigma_min^2 of the noise gains pushed through the transition products.
double covariance_growth_lower_bound(const LtvModel& model, int t);

// lambda_min(Q) lambda_min(P): floor of the expected quadratic cost over all
// targets and means.
double min_expected_cost_bound(const Eigen::MatrixXd& Q, const Eigen::MatrixXd& P);

// For an unstable pair (|lambda_1(A)| > 1, B square full rank) returns the
// growth floor sigma |lambda_1|^(2t) for t = 1..t_max with
// sigma = lambda_min(Q) lambda_min(B B^T) / |lambda_1|^2.  The constant is
// re-verified against the propagated covariance on every call; failure
// throws std::logic_error because it would mean the constant is wrong.
std::vector<double> unstable_growth_curve(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                                          const Eigen::MatrixXd& Q, int t_max);

enum class ComplexityMode { kAnalytic, kEmpirical };

struct ComplexityQuery {
    double eps1 = 0.0;
    double eps2 = 0.0;
    double rho1 = 0.0;
    double rho2 = 0.0;
    ComplexityMode mode = ComplexityMode::kAnalytic;
    HoeffdingForm form = HoeffdingForm::kStandard;
    double log10_cap = kLog10Cap;
};

// One table row.  multiplier is eps1 / E[w], with E[w] replaced by its
// analytic floor exp(-E[S]/lambda) on the analytic route or by the pilot
// mean on the empirical route.
struct ComplexityReport {
    std::int64_t n1 = 0;
    SampleCount n2{};
    bool n2_valid = true;
    SampleCount multiplier{};
    double e_s = std::numeric_limits<double>::quiet_NaN();
    double e1_hat = std::numeric_limits<double>::quiet_NaN();
    ComplexityMode mode = ComplexityMode::kAnalytic;
    bool assumption_flag = false;
};

ComplexityReport analyze_analytic(const ComplexityQuery& q, double e_s, double lambda);
ComplexityReport analyze_empirical(const ComplexityQuery& q, double e1_hat);

}  // namespace pic
