#pragma once

#include <Eigen/Dense>
#include <vector>

#include "pic/dynamics.hpp"

namespace pic {

// Convex obstacle given by vertices in a coordinate-projected plane, inflated
// by a safety margin.  projection lists the state coordinates that span the
// plane, e.g. {0, 1} for the position block.
struct ConvexObstacle {
    std::vector<Eigen::Vector2d> vertices;
    double margin = 0.0;
    std::vector<int> projection = {0, 1};
    std::vector<Eigen::Vector2d> hull;  // filled by prepare(), see below

    void validate(int state_dim) const;

    // Precomputes the convex hull so membership tests inside sampling loops
    // do not rebuild it.  Untouched obstacles still work, just slower.
    void prepare();
};

// Exact membership test: distance from the projected point to the convex hull
// of the vertices is at most the margin.  Boundary points count as inside.
bool point_in_obstacle(const Eigen::VectorXd& x, const ConvexObstacle& obs);

// Hull vertex nearest to a projected query point; ties go to the lowest index.
Eigen::Vector2d closest_vertex(const ConvexObstacle& obs, const Eigen::Vector2d& point);

// State cost: quadratic distance to the target plus a fixed penalty per
// obstacle the state currently touches.
struct CostSpec {
    Eigen::MatrixXd Q;      // running weight, positive definite
    Eigen::MatrixXd Q_T;    // terminal weight, positive definite
    Eigen::VectorXd x_tgt;
    double omega_c = 0.0;   // obstacle penalty weight
    std::vector<ConvexObstacle> obstacles;
    double dt = 1.0;

    void validate() const;
    void prepare();  // prepares every obstacle
};

double running_cost(const Eigen::VectorXd& x, const CostSpec& spec);
double terminal_cost(const Eigen::VectorXd& x, const CostSpec& spec);

// Cost-to-go of a sampled trajectory: terminal cost plus dt-weighted running
// cost over steps 0..T-1.  The terminal term is not scaled by dt.
double trajectory_cost(const Rollout& rollout, const CostSpec& spec);

}  // namespace pic
