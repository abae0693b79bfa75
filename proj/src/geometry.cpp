#include "toricost/geometry.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

#include "toricost/errors.hpp"
#include "toricost/parallel.hpp"
#include "toricost/random.hpp"

namespace toricost
{

double reduce_angle(double angle) noexcept
{
    double r = std::fmod(angle, two_pi);
    if (r < 0.0)
        r += two_pi;
    // r + 2pi can round up to exactly 2pi
    if (r >= two_pi)
        r = 0.0;
    return r;
}

double angle_difference(double a, double b) noexcept
{
    double d = std::remainder(a - b, two_pi);
    if (d <= -std::numbers::pi)
        d += two_pi;
    return d;
}

bool CoordRange::contains(double x) const noexcept
{
    if (angular)
        return x >= lo && x < hi;
    return x > lo && x < hi;
}

DarbouxChart::DarbouxChart(std::string id, std::vector<CoordRange> ranges,
                           std::size_t embedding_dim, EmbedFn embed,
                           SingularSetSpec singular)
    : id_(std::move(id)),
      ranges_(std::move(ranges)),
      embedding_dim_(embedding_dim),
      embed_(std::move(embed)),
      singular_(std::move(singular))
{
    if (ranges_.empty() || ranges_.size() % 2 != 0)
        throw ValidationError("chart '" + id_ + "': dimension must be even and positive");
    if (ranges_.size() > ChartPoint::capacity)
        throw ValidationError("chart '" + id_ + "': dimension exceeds supported maximum");
    if (embedding_dim_ == 0 || embedding_dim_ > AmbientPoint::capacity)
        throw ValidationError("chart '" + id_ + "': invalid embedding dimension");
    for (const auto& r : ranges_)
    {
        if (!(r.lo < r.hi) || !std::isfinite(r.lo) || !std::isfinite(r.hi))
            throw ValidationError("chart '" + id_ + "': empty or unbounded coordinate range");
        if (r.angular && (r.lo != 0.0 || r.hi != two_pi))
            throw ValidationError("chart '" + id_ + "': angular ranges must be [0, 2pi)");
    }
    if (!embed_)
        throw ValidationError("chart '" + id_ + "': missing embedding");
}

double DarbouxChart::total_volume() const noexcept
{
    double v = 1.0;
    for (const auto& r : ranges_)
        v *= r.length();
    return v;
}

AmbientPoint DarbouxChart::embed(const ChartPoint& p) const
{
    if (p.size() != dimension())
        throw std::domain_error("chart '" + id_ + "': point has wrong dimension");
    return embed_(p);
}

bool DarbouxChart::contains(const ChartPoint& p) const noexcept
{
    if (p.size() != dimension())
        return false;
    for (std::size_t i = 0; i < p.size(); ++i)
        if (!ranges_[i].contains(p[i]))
            return false;
    return true;
}

void DarbouxChart::validate(const ChartPoint& p) const
{
    if (!contains(p))
        throw ValidationError("point outside chart '" + id_ + "'");
}

ChartPoint DarbouxChart::reduce(ChartPoint p) const noexcept
{
    for (std::size_t i = 0; i < p.size() && i < ranges_.size(); ++i)
        if (ranges_[i].angular)
            p[i] = reduce_angle(p[i]);
    return p;
}

DarbouxChart sphere_chart()
{
    auto embed = [](const ChartPoint& p) {
        const double z = p[1];
        if (!(z > -1.0 && z < 1.0))
            throw std::domain_error("s2 chart: z must lie in (-1, 1)");
        const double r = std::sqrt((1.0 - z) * (1.0 + z));
        return AmbientPoint{r * std::cos(p[0]), r * std::sin(p[0]), z};
    };
    SingularSetSpec poles{"poles z = +-1", [](const ChartPoint& p) {
                              return !(p[1] > -1.0 && p[1] < 1.0);
                          }};
    return DarbouxChart("s2", {CoordRange::circle(), CoordRange::open(-1.0, 1.0)}, 3,
                        embed, poles);
}

DarbouxChart torus_chart()
{
    auto embed = [](const ChartPoint& p) {
        return AmbientPoint{std::cos(p[0]), std::sin(p[0]), std::cos(p[1]), std::sin(p[1])};
    };
    return DarbouxChart("t2", {CoordRange::circle(), CoordRange::circle()}, 4, embed,
                        SingularSetSpec{"none", {}});
}

DarbouxChart product_chart(const DarbouxChart& a, const DarbouxChart& b)
{
    std::vector<CoordRange> ranges = a.ranges();
    ranges.insert(ranges.end(), b.ranges().begin(), b.ranges().end());

    const std::size_t da = a.dimension();
    const std::size_t db = b.dimension();
    auto split = [da, db](const ChartPoint& p) {
        return std::pair{ChartPoint::from(p.span().subspan(0, da)),
                         ChartPoint::from(p.span().subspan(da, db))};
    };
    auto embed = [a, b, split](const ChartPoint& p) {
        auto [pa, pb] = split(p);
        const AmbientPoint ea = a.embed(pa);
        const AmbientPoint eb = b.embed(pb);
        AmbientPoint out(ea.size() + eb.size());
        std::copy(ea.begin(), ea.end(), out.begin());
        std::copy(eb.begin(), eb.end(), out.begin() + ea.size());
        return out;
    };
    SingularSetSpec singular{
        a.singular().description + " | " + b.singular().description,
        [a, b, split](const ChartPoint& p) {
            auto [pa, pb] = split(p);
            return a.is_singular(pa) || b.is_singular(pb);
        }};
    return DarbouxChart(a.id() + "x" + b.id(), std::move(ranges),
                        a.embedding_dim() + b.embedding_dim(), embed, singular);
}

DarbouxChart chart_by_id(const std::string& id)
{
    if (id == "s2")
        return sphere_chart();
    if (id == "t2")
        return torus_chart();
    if (id == "s2xs2")
        return product_chart(sphere_chart(), sphere_chart());
    throw ValidationError("unknown chart id '" + id + "'");
}

ChartPoint sample_point(const DarbouxChart& chart, std::uint64_t seed, std::uint64_t index)
{
    CounterRng rng(seed, index);
    const auto& ranges = chart.ranges();
    ChartPoint p(ranges.size());
    for (;;)
    {
        for (std::size_t i = 0; i < ranges.size(); ++i)
        {
            const auto& r = ranges[i];
            p[i] = r.angular ? reduce_angle(two_pi * rng.uniform())
                             : r.lo + r.length() * rng.uniform();
        }
        if (chart.contains(p) && !chart.is_singular(p))
            return p;
    }
}

std::vector<ChartPoint> sample_points(const DarbouxChart& chart, std::size_t count,
                                      std::uint64_t seed)
{
    if (count == 0)
        throw ValidationError("sample_points: count must be at least 1");
    std::vector<ChartPoint> points(count);
    parallel_for(count, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i)
            points[i] = sample_point(chart, seed, i);
    });
    return points;
}

double total_volume(const DarbouxChart& chart)
{
    return chart.total_volume();
}

AmbientPoint embed(const DarbouxChart& chart, const ChartPoint& p)
{
    return chart.embed(p);
}

double euclidean_distance(const AmbientPoint& a, const AmbientPoint& b)
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
    {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

}  // namespace toricost
