#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "toricost/fixed_vector.hpp"
#include "toricost/geometry.hpp"

namespace toricost
{

using ScalarFn = std::function<double(const ChartPoint&)>;
using GradientFn = std::function<TangentVector(const ChartPoint&)>;
using FlowFn = std::function<ChartPoint(double, const ChartPoint&)>;
using RegionFn = std::function<bool(const ChartPoint&)>;

/// One component h_k of a momentum map.
struct HamiltonianComponent
{
    std::string label;
    ScalarFn value;
    /// Analytic partial derivatives in chart coordinates. Must accept
    /// unreduced angles (the integrator evaluates between reductions).
    GradientFn gradient;
    /// Exact time-t map; empty means integrate numerically.
    FlowFn analytic_flow;

    bool has_analytic_flow() const noexcept { return static_cast<bool>(analytic_flow); }
};

/// A compact completely integrable system h = (h_1, ..., h_n) on a chart.
struct SystemDef
{
    std::string name;
    DarbouxChart chart;
    std::vector<HamiltonianComponent> components;

    std::size_t half_dimension() const noexcept { return chart.half_dimension(); }

    /// Structural checks: component count and callable presence.
    void validate() const;
};

struct IntegratorConfig
{
    double step_size = 1e-3;
    double newton_tol = 1e-12;
    int newton_max_iter = 50;

    /// step_size in (0, 0.1], newton_tol in (0, step_size^2), max_iter >= 1.
    void validate() const;
};

/// omega(X, Y) for omega = sum_i dq_i ^ dp_i.
double symplectic_form(const TangentVector& x, const TangentVector& y);

/// X^{h_k}(p), defined by omega(X, .) = -dh_k. In each Darboux pair this is
/// (-dh/dp, dh/dq); for h = z on the sphere the field is (-1, 0).
/// Throws SingularPointError on the chart's degenerate locus.
TangentVector hamiltonian_vector_field(const SystemDef& sys, std::size_t k,
                                       const ChartPoint& p);

/// {h_i, h_j}(p) = omega(X^{h_i}, X^{h_j}).
double poisson_bracket(const SystemDef& sys, std::size_t i, std::size_t j,
                       const ChartPoint& p);

/// Time-t map of h_k with the implicit midpoint rule regardless of any
/// analytic flow. Fixed steps, last one shortened to land on t; angles are
/// reduced after every step.
ChartPoint integrate_midpoint(const SystemDef& sys, std::size_t k, double t,
                              const ChartPoint& p, const IntegratorConfig& cfg);

/// Time-t map of h_k: the analytic flow when declared, otherwise
/// integrate_midpoint. t = 0 returns p unchanged.
ChartPoint flow_component(const SystemDef& sys, std::size_t k, double t,
                          const ChartPoint& p, const IntegratorConfig& cfg);

/// phi_t^h = phi_{t_1}^{h_1} o ... o phi_{t_n}^{h_n}, applied in index
/// order 1..n.
ChartPoint flow(const SystemDef& sys, const TimeVector& t, const ChartPoint& p,
                const IntegratorConfig& cfg);

/// Same composition but applying components in the given order.
ChartPoint flow_ordered(const SystemDef& sys, const TimeVector& t, const ChartPoint& p,
                        const std::vector<std::size_t>& order,
                        const IntegratorConfig& cfg);

/// Max ambient distance between flow() and a random reordering of the
/// composition over `trials` random (p, t, permutation) triples. Needs n >= 2.
double check_flow_commutativity(const SystemDef& sys, std::size_t trials,
                                std::uint64_t seed, const IntegratorConfig& cfg,
                                const RegionFn& region = {});

/// Worst |det D(phi_t) - 1| over `trials` random points, with the Jacobian
/// taken by central differences (step 1e-5) in chart coordinates.
/// `region`, when given, restricts the sampled base points.
double check_volume_preservation(const SystemDef& sys, const TimeVector& t,
                                 std::size_t trials, std::uint64_t seed,
                                 const IntegratorConfig& cfg,
                                 const RegionFn& region = {});

/// max_{i != j} |{h_i, h_j}| over `samples` random regular points.
double max_poisson_defect(const SystemDef& sys, std::size_t samples, std::uint64_t seed);

/// Whether X^{h_1}(p), ..., X^{h_n}(p) span an n-dimensional space
/// (numerical rank with relative singular-value tolerance).
bool is_regular(const SystemDef& sys, const ChartPoint& p, double tol = 1e-9);

/// Fraction of `samples` random points that are regular.
double regular_fraction(const SystemDef& sys, std::size_t samples, std::uint64_t seed);

}  // namespace toricost
