#include "pic/complexity.hpp"

#include <cmath>
#include <stdexcept>

#include "pic/moments.hpp"

namespace pic {
namespace {

constexpr double kLn10 = 2.302585092994046;

void check_tolerance(double eps, const char* name)
{
    if (!(eps > 0.0) || !std::isfinite(eps))
        throw std::invalid_argument(std::string(name) + " must be positive and finite");
}

void check_risk(double rho, const char* name)
{
    if (!(rho > 0.0) || !(rho < 1.0))
        throw std::invalid_argument(std::string(name) + " must lie in (0, 1)");
}

// Smallest eigenvalue of M M^T; zero for wide-rank-deficient gains.
double sigma2_min_gain(const Eigen::MatrixXd& M)
{
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M * M.transpose());
    return std::max(0.0, es.eigenvalues().minCoeff());
}

double sigma2_min(const Eigen::MatrixXd& M)
{
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
    const double s = svd.singularValues().minCoeff();
    return s * s;
}

SampleCount count_from_log(double ln_value, double log10_cap)
{
    SampleCount out;
    out.log10 = ln_value / kLn10;
    if (out.log10 > log10_cap) {
        out.overflow = true;
        out.count = std::numeric_limits<double>::infinity();
        return out;
    }
    out.count = std::max(1.0, std::ceil(std::exp(ln_value)));
    return out;
}

}  // namespace

std::int64_t hoeffding_samples(double eps1, double rho1, HoeffdingForm form)
{
    check_tolerance(eps1, "hoeffding_samples: eps1");
    if (!(rho1 > 0.0) || !std::isfinite(rho1))
        throw std::invalid_argument("hoeffding_samples: rho1 must be positive");
    const double denom = form == HoeffdingForm::kStandard ? 2.0 * eps1 * eps1 : eps1 * eps1;
    const double raw = std::log(2.0 / rho1) / denom;
    if (raw >= 9.0e18) throw std::invalid_argument("hoeffding_samples: count exceeds integer range");
    return std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(raw)));
}

SampleCount chebyshev_samples_analytic(double e_s_over_lambda, double eps2, double rho2,
                                       double log10_cap)
{
    check_tolerance(eps2, "chebyshev_samples_analytic: eps2");
    check_risk(rho2, "chebyshev_samples_analytic: rho2");
    if (e_s_over_lambda < 0.0 || !std::isfinite(e_s_over_lambda))
        throw std::invalid_argument("chebyshev_samples_analytic: E[S]/lambda must be finite, >= 0");
    const double ln_n = std::log1p(std::sqrt(2.0)) + 2.0 * e_s_over_lambda -
                        std::log(rho2 * eps2 * eps2);
    return count_from_log(ln_n, log10_cap);
}

SampleCount chebyshev_samples_empirical(double e1_hat, double eps1, double eps2, double rho2,
                                        double log10_cap)
{
    check_tolerance(eps2, "chebyshev_samples_empirical: eps2");
    check_risk(rho2, "chebyshev_samples_empirical: rho2");
    if (!(eps1 >= 0.0) || !std::isfinite(eps1) || !std::isfinite(e1_hat))
        throw std::invalid_argument("chebyshev_samples_empirical: bad eps1 or e1_hat");
    const double floor = e1_hat - eps1;
    if (!(floor > 0.0))
        throw AssumptionError("chebyshev_samples_empirical: pilot weight mean minus eps1 must be positive");
    const double ln_n = std::log1p(std::sqrt(2.0)) - std::log(rho2 * eps2 * eps2) -
                        2.0 * std::log(floor);
    return count_from_log(ln_n, log10_cap);
}

Interval control_error_bounds(double u_star_i, double eps1, double eps2, double e_w)
{
    if (!std::isfinite(u_star_i)) throw std::invalid_argument("control_error_bounds: u not finite");
    if (!(eps1 >= 0.0) || !(eps2 >= 0.0))
        throw std::invalid_argument("control_error_bounds: tolerances must be non-negative");
    if (!(e_w > 0.0) || e_w > 1.0)
        throw std::invalid_argument("control_error_bounds: e_w must lie in (0, 1]");
    if (!(eps1 < e_w))
        throw AssumptionError("control_error_bounds: eps1 must be below the weight mean");
    const double c = eps1 / e_w;
    const double lo_f = u_star_i - eps2;
    const double hi_f = u_star_i + eps2;
    return {std::min((1.0 - c) * lo_f, (1.0 + c) * lo_f),
            std::max((1.0 - c) * hi_f, (1.0 + c) * hi_f)};
}

double var_w_bound(double e_w)
{
    if (!(e_w > 0.0) || e_w > 1.0)
        throw std::invalid_argument("var_w_bound: e_w must lie in (0, 1]");
    return (1.0 - e_w) * e_w;
}

VarianceBound variance_upper_bound(double e_s_over_lambda, double log10_cap)
{
    if (e_s_over_lambda < 0.0 || !std::isfinite(e_s_over_lambda))
        throw std::invalid_argument("variance_upper_bound: E[S]/lambda must be finite, >= 0");
    VarianceBound out;
    const double ln_v = std::log1p(std::sqrt(2.0)) + 2.0 * e_s_over_lambda;
    out.log10 = ln_v / kLn10;
    if (out.log10 > log10_cap) {
        out.overflow = true;
        out.value = std::numeric_limits<double>::infinity();
    } else {
        out.value = std::exp(ln_v);
    }
    return out;
}

double var_product_bound(double var_x2, double var_y2, double e_x2, double e_y2)
{
    for (double v : {var_x2, var_y2, e_x2, e_y2})
        if (v < 0.0 || !std::isfinite(v))
            throw std::invalid_argument("var_product_bound: moments must be finite, >= 0");
    return std::sqrt(var_x2 * var_y2) + e_x2 * e_y2;
}

double covariance_growth_lower_bound(const LtvModel& model, int t)
{
    model.validate();
    if (t < 1) throw std::invalid_argument("covariance_growth_lower_bound: t must be >= 1");
    if (!model.time_invariant() && t > model.horizon())
        throw std::invalid_argument("covariance_growth_lower_bound: t beyond model horizon");
    double bound = sigma2_min_gain(model.B_at(t - 1));
    Eigen::MatrixXd prod = Eigen::MatrixXd::Identity(model.state_dim(), model.state_dim());
    for (int tau = t - 2; tau >= 0; --tau) {
        prod = prod * model.A_at(tau + 1);
        bound += sigma2_min(prod) * sigma2_min_gain(model.B_at(tau));
    }
    return bound;
}

double min_expected_cost_bound(const Eigen::MatrixXd& Q, const Eigen::MatrixXd& P)
{
    if (Q.rows() != Q.cols() || P.rows() != P.cols() || Q.rows() != P.rows())
        throw std::invalid_argument("min_expected_cost_bound: square matrices of equal size");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> esq(Q);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> esp(P);
    if (esq.eigenvalues().minCoeff() <= 0.0)
        throw std::invalid_argument("min_expected_cost_bound: Q must be positive definite");
    return esq.eigenvalues().minCoeff() * std::max(0.0, esp.eigenvalues().minCoeff());
}

std::vector<double> unstable_growth_curve(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                                          const Eigen::MatrixXd& Q, int t_max)
{
    const auto n = A.rows();
    if (A.cols() != n || B.rows() != n || B.cols() != n || Q.rows() != n || Q.cols() != n)
        throw std::invalid_argument("unstable_growth_curve: A, B, Q must be n x n");
    if (t_max < 1) throw std::invalid_argument("unstable_growth_curve: t_max must be >= 1");

    Eigen::EigenSolver<Eigen::MatrixXd> esa(A);
    const double lam1 = esa.eigenvalues().cwiseAbs().maxCoeff();
    if (!(lam1 > 1.0))
        throw std::invalid_argument("unstable_growth_curve: A needs an eigenvalue outside the unit circle");
    const double b_floor = sigma2_min_gain(B);
    if (!(b_floor > 0.0))
        throw std::invalid_argument("unstable_growth_curve: B must have full rank");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> esq(Q);
    const double q_floor = esq.eigenvalues().minCoeff();
    if (!(q_floor > 0.0))
        throw std::invalid_argument("unstable_growth_curve: Q must be positive definite");

    const double growth = lam1 * lam1;
    const double sigma = q_floor * b_floor / growth;
    std::vector<double> curve(static_cast<std::size_t>(t_max));
    double pow_term = 1.0;
    for (int t = 1; t <= t_max; ++t) {
        pow_term *= growth;
        curve[static_cast<std::size_t>(t - 1)] = sigma * pow_term;
    }

    // The floor must sit below lambda_min(Q) * lambda_max(P_t) for the noise
    // covariance this pair generates; anything else means the constant is
    // wrong, which is an internal error rather than bad input.
    const LtvModel model{{A}, {B}};
    const ControlSequence nominal(static_cast<std::size_t>(t_max),
                                  Eigen::VectorXd::Zero(B.cols()));
    const BeliefTrajectory traj = propagate_moments(model, nominal, Eigen::VectorXd::Zero(n));
    for (int t = 1; t <= t_max; ++t) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> esp(
            traj.beliefs[static_cast<std::size_t>(t)].cov);
        const double ceiling = q_floor * esp.eigenvalues().maxCoeff();
        if (curve[static_cast<std::size_t>(t - 1)] > ceiling * (1.0 + 1e-9) + 1e-12)
            throw std::logic_error("unstable_growth_curve: growth floor failed verification");
    }
    return curve;
}

ComplexityReport analyze_analytic(const ComplexityQuery& q, double e_s, double lambda)
{
    if (!(lambda > 0.0)) throw std::invalid_argument("analyze_analytic: lambda must be positive");
    if (e_s < 0.0 || !std::isfinite(e_s))
        throw std::invalid_argument("analyze_analytic: E[S] must be finite, >= 0");
    check_tolerance(q.eps1, "analyze_analytic: eps1");
    ComplexityReport r;
    r.mode = ComplexityMode::kAnalytic;
    r.e_s = e_s;
    r.n1 = hoeffding_samples(q.eps1, q.rho1, q.form);
    const double esol = e_s / lambda;
    r.n2 = chebyshev_samples_analytic(esol, q.eps2, q.rho2, q.log10_cap);
    // eps1 / E[w] with the Jensen floor exp(-E[S]/lambda) standing in for E[w].
    SampleCount mult;
    const double ln_mult = std::log(q.eps1) + esol;
    mult.log10 = ln_mult / kLn10;
    if (mult.log10 > q.log10_cap) {
        mult.overflow = true;
        mult.count = std::numeric_limits<double>::infinity();
    } else {
        mult.count = std::exp(ln_mult);
    }
    r.multiplier = mult;
    r.assumption_flag = q.eps1 >= std::exp(-esol);
    return r;
}

ComplexityReport analyze_empirical(const ComplexityQuery& q, double e1_hat)
{
    check_tolerance(q.eps1, "analyze_empirical: eps1");
    ComplexityReport r;
    r.mode = ComplexityMode::kEmpirical;
    r.e1_hat = e1_hat;
    r.n1 = hoeffding_samples(q.eps1, q.rho1, q.form);
    try {
        r.n2 = chebyshev_samples_empirical(e1_hat, q.eps1, q.eps2, q.rho2, q.log10_cap);
    } catch (const AssumptionError&) {
        r.n2_valid = false;
        r.assumption_flag = true;
    }
    SampleCount mult;
    if (e1_hat > 0.0) {
        mult.count = q.eps1 / e1_hat;
        mult.log10 = std::log10(mult.count);
    } else {
        mult.overflow = true;
        mult.count = std::numeric_limits<double>::infinity();
        mult.log10 = std::numeric_limits<double>::infinity();
    }
    r.multiplier = mult;
    if (!(e1_hat - q.eps1 > 0.0)) r.assumption_flag = true;
    return r;
}

}  // namespace pic
