#include "toricost/costs.hpp"

#include <cmath>
#include <utility>

#include "toricost/errors.hpp"
#include "toricost/parallel.hpp"
#include "toricost/random.hpp"

namespace toricost
{

namespace
{

double squared_distance(const AmbientPoint& a, const AmbientPoint& b)
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
    {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

struct Moments
{
    double mean = 0.0;
    double sd = 0.0;
};

// Two-pass mean / sample standard deviation over the successful entries,
// with pairwise summation in index order.
Moments moments(const std::vector<double>& values)
{
    Moments m;
    if (values.empty())
        return m;
    const double n = static_cast<double>(values.size());
    m.mean = pairwise_sum(values.data(), values.size()) / n;
    if (values.size() < 2)
        return m;
    std::vector<double> dev(values.size());
    for (std::size_t i = 0; i < values.size(); ++i)
    {
        const double d = values[i] - m.mean;
        dev[i] = d * d;
    }
    m.sd = std::sqrt(pairwise_sum(dev.data(), dev.size()) / (n - 1.0));
    return m;
}

constexpr std::uint64_t pair_cost_purpose = 0x70616972;

}  // namespace

CostFunction::CostFunction(std::string name, EmbedFn embed, AmbientCostFn ambient)
    : name_(std::move(name)), embed_(std::move(embed)), ambient_(std::move(ambient))
{
}

AmbientCostFn ambient_cost(const std::string& name)
{
    if (name == "chordal-sq")
        return squared_distance;
    if (name == "chordal")
        return [](const AmbientPoint& a, const AmbientPoint& b) {
            return std::sqrt(squared_distance(a, b));
        };
    throw ValidationError("unknown cost '" + name + "' (expected chordal or chordal-sq)");
}

CostFunction make_cost(const std::string& name, const DarbouxChart& chart)
{
    return CostFunction(name, [chart](const ChartPoint& p) { return chart.embed(p); },
                        ambient_cost(name));
}

bool BoxRegion::contains(const ChartPoint& p) const
{
    for (std::size_t i = 0; i < p.size() && i < lo.size(); ++i)
        if (p[i] < lo[i] || p[i] > hi[i])
            return false;
    return true;
}

SampleSet draw_samples(const DarbouxChart& chart, std::size_t n_samples, std::uint64_t seed)
{
    SampleSet s;
    s.points = sample_points(chart, n_samples, seed);
    s.embedded.resize(n_samples);
    parallel_for(n_samples, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i)
            s.embedded[i] = chart.embed(s.points[i]);
    });
    s.total_volume = chart.total_volume();
    s.seed = seed;
    return s;
}

CostEstimate periodicity_cost(const SystemDef& sys, const TimeVector& t, const CostFunction& c,
                              const SampleSet& samples, const IntegratorConfig& cfg,
                              const std::optional<BoxRegion>& region)
{
    if (t.size() != sys.components.size())
        throw ValidationError("time vector length does not match system '" + sys.name + "'");
    const std::size_t n = samples.points.size();
    if (n < 100)
        throw ValidationError("periodicity_cost needs at least 100 samples");

    std::vector<double> values(n);
    std::vector<char> failed(n, 0);
    const auto& cost = c.ambient_fn();
    parallel_for(n, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i)
        {
            const ChartPoint& x = samples.points[i];
            if (region && !region->contains(x))
            {
                values[i] = 0.0;
                continue;
            }
            try
            {
                const ChartPoint y = flow(sys, t, x, cfg);
                values[i] = cost(samples.embedded[i], sys.chart.embed(y));
            }
            catch (const NumericError&)
            {
                failed[i] = 1;
            }
            catch (const std::domain_error&)
            {
                failed[i] = 1;
            }
            catch (const SingularPointError&)
            {
                failed[i] = 1;
            }
        }
    });

    std::vector<double> ok;
    ok.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
        if (!failed[i])
            ok.push_back(values[i]);
    const std::size_t n_failed = n - ok.size();
    if (static_cast<double>(n_failed) > max_failure_fraction * static_cast<double>(n))
        throw NumericError("periodicity_cost: " + std::to_string(n_failed) + " of "
                           + std::to_string(n) + " samples failed during flow evaluation");

    const Moments m = moments(ok);
    CostEstimate est;
    est.value = m.mean * samples.total_volume;
    est.std_error = ok.empty() ? 0.0
                               : m.sd * samples.total_volume
                                     / std::sqrt(static_cast<double>(ok.size()));
    est.n_samples = n;
    est.n_failed = n_failed;
    est.t = t;
    est.seed = samples.seed;
    return est;
}

CostEstimate periodicity_cost(const SystemDef& sys, const TimeVector& t, const CostFunction& c,
                              std::size_t n_samples, std::uint64_t seed,
                              const IntegratorConfig& cfg, const std::optional<BoxRegion>& region)
{
    if (n_samples < 100)
        throw ValidationError("periodicity_cost needs at least 100 samples");
    cfg.validate();
    return periodicity_cost(sys, t, c, draw_samples(sys.chart, n_samples, seed), cfg, region);
}

std::vector<CostEstimate> cost_continuity_probe(const SystemDef& sys, const CostFunction& c,
                                                const std::vector<TimeVector>& t_path,
                                                std::size_t n_samples, std::uint64_t seed,
                                                const IntegratorConfig& cfg)
{
    if (t_path.empty())
        throw ValidationError("cost_continuity_probe: empty time path");
    if (n_samples < 100)
        throw ValidationError("periodicity_cost needs at least 100 samples");
    cfg.validate();
    const SampleSet samples = draw_samples(sys.chart, n_samples, seed);
    std::vector<CostEstimate> out;
    out.reserve(t_path.size());
    for (const auto& t : t_path)
        out.push_back(periodicity_cost(sys, t, c, samples, cfg));
    return out;
}

CostEstimate periodicity_cost_quadrature(const SystemDef& sys, const TimeVector& t,
                                         const CostFunction& c, std::size_t cells_per_axis,
                                         const IntegratorConfig& cfg)
{
    if (sys.chart.dimension() != 2)
        throw ValidationError("midpoint quadrature is only available for n = 1 charts");
    if (cells_per_axis == 0)
        throw ValidationError("midpoint quadrature needs at least one cell per axis");
    const auto& r = sys.chart.ranges();
    const double h0 = r[0].length() / static_cast<double>(cells_per_axis);
    const double h1 = r[1].length() / static_cast<double>(cells_per_axis);

    std::vector<double> rows(cells_per_axis);
    parallel_for(cells_per_axis, [&](std::size_t begin, std::size_t end) {
        std::vector<double> row(cells_per_axis);
        for (std::size_t i = begin; i < end; ++i)
        {
            for (std::size_t j = 0; j < cells_per_axis; ++j)
            {
                const ChartPoint x{r[0].lo + (static_cast<double>(i) + 0.5) * h0,
                                   r[1].lo + (static_cast<double>(j) + 0.5) * h1};
                row[j] = c(x, flow(sys, t, x, cfg));
            }
            rows[i] = pairwise_sum(row.data(), row.size());
        }
    });

    CostEstimate est;
    est.value = pairwise_sum(rows.data(), rows.size()) * h0 * h1;
    est.n_samples = cells_per_axis * cells_per_axis;
    est.t = t;
    return est;
}

double mean_pair_cost(const DarbouxChart& chart, const CostFunction& c, std::size_t pairs,
                      std::uint64_t seed)
{
    if (pairs == 0)
        throw ValidationError("mean_pair_cost: pairs must be positive");
    const std::uint64_t s = derive_seed(seed, pair_cost_purpose);
    std::vector<double> values(pairs);
    parallel_for(pairs, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i)
            values[i] = c(sample_point(chart, s, 2 * i), sample_point(chart, s, 2 * i + 1));
    });
    return pairwise_sum(values.data(), values.size()) / static_cast<double>(pairs);
}

}  // namespace toricost
