#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "toricost/dynamics.hpp"
#include "toricost/fixed_vector.hpp"
#include "toricost/geometry.hpp"

namespace toricost
{

using AmbientCostFn = std::function<double(const AmbientPoint&, const AmbientPoint&)>;

/// Continuous metric-like cost on a chart: c(x, y) = 0 iff x = y and
/// c(x, y) = c(y, x). Evaluated on ambient embeddings, so metric-likeness
/// follows from injectivity of the embedding.
class CostFunction
{
public:
    CostFunction(std::string name, EmbedFn embed, AmbientCostFn ambient);

    const std::string& name() const noexcept { return name_; }

    double operator()(const ChartPoint& x, const ChartPoint& y) const
    {
        return ambient_(embed_(x), embed_(y));
    }

    double ambient(const AmbientPoint& a, const AmbientPoint& b) const
    {
        return ambient_(a, b);
    }

    const AmbientCostFn& ambient_fn() const noexcept { return ambient_; }

private:
    std::string name_;
    EmbedFn embed_;
    AmbientCostFn ambient_;
};

/// Ambient form of a named cost: "chordal" (Euclidean distance) or
/// "chordal-sq" (its square). Throws ValidationError otherwise.
AmbientCostFn ambient_cost(const std::string& name);

CostFunction make_cost(const std::string& name, const DarbouxChart& chart);

/// Monte Carlo estimate of C_t^h(U, c) = int_U c(x, phi_t(x)) d mu_omega.
struct CostEstimate
{
    double value = 0.0;
    /// sd(integrand) * total_volume / sqrt(n_samples)
    double std_error = 0.0;
    std::size_t n_samples = 0;
    /// Samples whose flow evaluation failed; they are left out of the mean.
    std::size_t n_failed = 0;
    TimeVector t;
    std::uint64_t seed = 0;
};

/// Axis-aligned box in chart coordinates restricting the domain U.
struct BoxRegion
{
    std::vector<double> lo;
    std::vector<double> hi;

    bool contains(const ChartPoint& p) const;
};

/// Fixed mu_omega-uniform sample set reused across time parameters
/// (common random numbers).
struct SampleSet
{
    std::vector<ChartPoint> points;
    std::vector<AmbientPoint> embedded;
    double total_volume = 0.0;
    std::uint64_t seed = 0;
};

SampleSet draw_samples(const DarbouxChart& chart, std::size_t n_samples, std::uint64_t seed);

/// Share of samples allowed to fail before an estimate is rejected.
inline constexpr double max_failure_fraction = 1e-3;

CostEstimate periodicity_cost(const SystemDef& sys, const TimeVector& t, const CostFunction& c,
                              const SampleSet& samples, const IntegratorConfig& cfg,
                              const std::optional<BoxRegion>& region = std::nullopt);

/// Draws n_samples >= 100 points from the seed and estimates C_t^h(M, c).
CostEstimate periodicity_cost(const SystemDef& sys, const TimeVector& t, const CostFunction& c,
                              std::size_t n_samples, std::uint64_t seed,
                              const IntegratorConfig& cfg,
                              const std::optional<BoxRegion>& region = std::nullopt);

/// Estimates along a path of time parameters on one shared sample set.
std::vector<CostEstimate> cost_continuity_probe(const SystemDef& sys, const CostFunction& c,
                                                const std::vector<TimeVector>& t_path,
                                                std::size_t n_samples, std::uint64_t seed,
                                                const IntegratorConfig& cfg);

/// Deterministic midpoint-rule cross-check for n = 1 charts, using
/// cells_per_axis^2 cells. std_error is reported as 0.
CostEstimate periodicity_cost_quadrature(const SystemDef& sys, const TimeVector& t,
                                         const CostFunction& c, std::size_t cells_per_axis,
                                         const IntegratorConfig& cfg);

/// Mean of c over independent uniform point pairs.
double mean_pair_cost(const DarbouxChart& chart, const CostFunction& c, std::size_t pairs,
                      std::uint64_t seed);

}  // namespace toricost
