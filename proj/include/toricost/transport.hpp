#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "toricost/costs.hpp"
#include "toricost/dynamics.hpp"

namespace toricost
{

/// Finite positive measure sum_i w_i delta_{x_i} on an ambient space.
struct DiscreteMeasure
{
    std::vector<std::vector<double>> points;
    std::vector<double> weights;

    std::size_t size() const noexcept { return weights.size(); }
    double total_mass() const;
    /// Lengths match, weights positive and finite, points share a dimension.
    void validate() const;
    bool is_uniform(double rel_tol = 1e-12) const;

    static DiscreteMeasure uniform(std::vector<std::vector<double>> points, double total_mass = 1.0);
};

using Matrix = Eigen::MatrixXd;

/// C(i, j) = c(x_i, y_j) for a named ambient cost.
Matrix cost_matrix(const DiscreteMeasure& source, const DiscreteMeasure& target,
                   const AmbientCostFn& cost);

/// Mean of the entries; the reference scale for epsilon and tolerances.
double cost_scale(const Matrix& costs);

/// Coupling of two measures; row sums give the source marginal, column sums
/// the target marginal.
struct TransportPlan
{
    Matrix matrix;
    double cost = 0.0;
    double row_defect = 0.0;
    double col_defect = 0.0;
    std::size_t iterations = 0;
};

/// Permutation transport map between equal-size uniform measures.
struct TransportMap
{
    std::vector<std::size_t> assignment;
    double cost = 0.0;
};

inline constexpr std::size_t max_bruteforce_size = 9;

/// Exhaustive Monge problem over all m! permutations. Requires uniform
/// weights, equal support sizes and m <= 9, else UnsupportedMeasureError.
/// Ties resolve to the lexicographically first permutation.
TransportMap solve_monge_bruteforce(const DiscreteMeasure& source,
                                    const DiscreteMeasure& target, const Matrix& costs);

/// Entropic Kantorovich problem by alternating marginal scaling of
/// exp(-C / epsilon); switches to log-domain updates when
/// epsilon < 0.05 max C. The log-domain path walks epsilon down from
/// 0.05 max C in factors of 4 and finishes a stalled stage with damped
/// Newton steps on the dual. max_iter bounds sweeps plus Newton steps;
/// NonConvergenceError when a marginal defect is still above tol.
TransportPlan solve_kantorovich_sinkhorn(const DiscreteMeasure& source,
                                         const DiscreteMeasure& target, const Matrix& costs,
                                         double epsilon, std::size_t max_iter = 100000,
                                         double tol = 1e-9);

/// Exact Kantorovich problem by successive shortest augmenting paths on
/// the bipartite transportation network. Any positive weights with equal
/// total mass.
TransportPlan solve_kantorovich_exact(const DiscreteMeasure& source,
                                      const DiscreteMeasure& target, const Matrix& costs);

/// The coupling (Id x f)(mu_-) induced by a transport map.
TransportPlan graph_plan(const DiscreteMeasure& source, const DiscreteMeasure& target,
                         const TransportMap& map, const Matrix& costs);

double plan_cost(const Matrix& plan, const Matrix& costs);

struct BoundReport
{
    double monge_cost = 0.0;
    double kantorovich_cost = 0.0;
    double graph_plan_cost = 0.0;
    double sinkhorn_cost = 0.0;
    bool holds = false;
    TransportMap monge_map;
    TransportPlan kantorovich_plan;
};

/// Monge (permutation brute force) against exact Kantorovich (network
/// solver): holds when monge_cost >= kantorovich_cost - 1e-9. Also reports
/// the cost of the optimal map's graph plan and the entropic cost at
/// `epsilon`.
BoundReport verify_monge_kantorovich_bound(const DiscreteMeasure& source,
                                           const DiscreteMeasure& target, const Matrix& costs,
                                           double epsilon);

/// Discrete picture of the flow coupling: mu_- from samples x_i, mu_+ from
/// phi_t(x_i), both uniform with unit mass. Its graph plan (the identity
/// assignment) costs periodicity_estimate / total_volume.
struct FlowCoupling
{
    DiscreteMeasure source;
    DiscreteMeasure target;
    Matrix costs;
    double graph_plan_cost = 0.0;
    double periodicity_estimate = 0.0;
    double total_volume = 0.0;
};

/// The dense cost matrix limits the coupling to this many samples.
inline constexpr std::size_t max_coupling_samples = 4096;

FlowCoupling sampled_flow_coupling(const SystemDef& sys, const TimeVector& t,
                                   const CostFunction& c, std::size_t n_samples,
                                   std::uint64_t seed, const IntegratorConfig& cfg = {});

}  // namespace toricost
