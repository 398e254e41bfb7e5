#include "pic/costs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace pic {
namespace {

double cross2(const Eigen::Vector2d& o, const Eigen::Vector2d& a, const Eigen::Vector2d& b)
{
    return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

// Andrew monotone chain, counterclockwise, degenerate inputs collapse to a
// point or a segment.
std::vector<Eigen::Vector2d> convex_hull(std::vector<Eigen::Vector2d> pts)
{
    std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) {
        return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
    });
    pts.erase(std::unique(pts.begin(), pts.end(),
                          [](const auto& a, const auto& b) { return a == b; }),
              pts.end());
    const std::size_t n = pts.size();
    if (n <= 2) return pts;
    std::vector<Eigen::Vector2d> hull(2 * n);
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i) {
        while (k >= 2 && cross2(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
        hull[k++] = pts[i];
    }
    for (std::size_t i = n - 1, lower = k + 1; i-- > 0;) {
        while (k >= lower && cross2(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
        hull[k++] = pts[i];
    }
    hull.resize(k - 1);
    return hull;
}

double point_segment_distance(const Eigen::Vector2d& p, const Eigen::Vector2d& a,
                              const Eigen::Vector2d& b)
{
    const Eigen::Vector2d ab = b - a;
    const double len2 = ab.squaredNorm();
    if (len2 == 0.0) return (p - a).norm();
    const double s = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
    return (p - (a + s * ab)).norm();
}

double hull_distance(const Eigen::Vector2d& p, const std::vector<Eigen::Vector2d>& hull)
{
    if (hull.size() == 1) return (p - hull[0]).norm();
    if (hull.size() == 2) return point_segment_distance(p, hull[0], hull[1]);
    bool inside = true;
    double dist = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < hull.size(); ++i) {
        const auto& a = hull[i];
        const auto& b = hull[(i + 1) % hull.size()];
        if (cross2(a, b, p) < 0) inside = false;
        dist = std::min(dist, point_segment_distance(p, a, b));
    }
    return inside ? 0.0 : dist;
}

Eigen::Vector2d project(const Eigen::VectorXd& x, const std::vector<int>& projection)
{
    return {x[projection[0]], x[projection[1]]};
}

bool is_pd(const Eigen::MatrixXd& M)
{
    if (M.rows() != M.cols()) return false;
    if ((M - M.transpose()).cwiseAbs().maxCoeff() > 1e-9) return false;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
    return es.eigenvalues().minCoeff() > 0.0;
}

}  // namespace

void ConvexObstacle::validate(int state_dim) const
{
    if (vertices.empty()) throw std::invalid_argument("ConvexObstacle: needs at least one vertex");
    if (margin < 0.0) throw std::invalid_argument("ConvexObstacle: margin must be non-negative");
    if (projection.size() != 2)
        throw std::invalid_argument("ConvexObstacle: projection must name two coordinates");
    if (projection[0] == projection[1])
        throw std::invalid_argument("ConvexObstacle: projection coordinates must be distinct");
    for (int idx : projection)
        if (idx < 0 || idx >= state_dim)
            throw std::invalid_argument("ConvexObstacle: projection index out of range");
    for (const auto& v : vertices)
        if (!v.allFinite()) throw std::invalid_argument("ConvexObstacle: non-finite vertex");
}

void ConvexObstacle::prepare() { hull = convex_hull(vertices); }

bool point_in_obstacle(const Eigen::VectorXd& x, const ConvexObstacle& obs)
{
    const Eigen::Vector2d p = project(x, obs.projection);
    if (!p.allFinite()) return false;
    if (!obs.hull.empty()) return hull_distance(p, obs.hull) <= obs.margin;
    return hull_distance(p, convex_hull(obs.vertices)) <= obs.margin;
}

Eigen::Vector2d closest_vertex(const ConvexObstacle& obs, const Eigen::Vector2d& point)
{
    if (obs.vertices.empty())
        throw std::invalid_argument("closest_vertex: obstacle has no vertices");
    std::size_t best = 0;
    double best_d = (obs.vertices[0] - point).squaredNorm();
    for (std::size_t i = 1; i < obs.vertices.size(); ++i) {
        const double d = (obs.vertices[i] - point).squaredNorm();
        if (d < best_d) {
            best = i;
            best_d = d;
        }
    }
    return obs.vertices[best];
}

void CostSpec::validate() const
{
    const auto n = x_tgt.size();
    if (n == 0) throw std::invalid_argument("CostSpec: empty target state");
    if (Q.rows() != n || Q.cols() != n || Q_T.rows() != n || Q_T.cols() != n)
        throw std::invalid_argument("CostSpec: weight dimensions must match the target state");
    if (!is_pd(Q)) throw std::invalid_argument("CostSpec: Q must be symmetric positive definite");
    if (!is_pd(Q_T))
        throw std::invalid_argument("CostSpec: Q_T must be symmetric positive definite");
    if (omega_c < 0.0) throw std::invalid_argument("CostSpec: omega_c must be non-negative");
    if (!(dt > 0.0)) throw std::invalid_argument("CostSpec: dt must be positive");
    for (const auto& obs : obstacles) obs.validate(static_cast<int>(n));
}

void CostSpec::prepare()
{
    for (auto& obs : obstacles) obs.prepare();
}

double running_cost(const Eigen::VectorXd& x, const CostSpec& spec)
{
    if (x.size() != spec.x_tgt.size())
        throw std::invalid_argument("running_cost: state dimension mismatch");
    const Eigen::VectorXd d = x - spec.x_tgt;
    double c = d.dot(spec.Q * d);
    for (const auto& obs : spec.obstacles)
        if (point_in_obstacle(x, obs)) c += spec.omega_c;
    return c;
}

double terminal_cost(const Eigen::VectorXd& x, const CostSpec& spec)
{
    if (x.size() != spec.x_tgt.size())
        throw std::invalid_argument("terminal_cost: state dimension mismatch");
    const Eigen::VectorXd d = x - spec.x_tgt;
    return d.dot(spec.Q_T * d);
}

double trajectory_cost(const Rollout& rollout, const CostSpec& spec)
{
    const int T = static_cast<int>(rollout.noises.rows());
    if (rollout.states.rows() != T + 1)
        throw std::invalid_argument("trajectory_cost: rollout has inconsistent lengths");
    double s = 0.0;
    for (int t = 0; t < T; ++t) s += running_cost(rollout.states.row(t).transpose(), spec) * spec.dt;
    return s + terminal_cost(rollout.states.row(T).transpose(), spec);
}

}  // namespace pic
