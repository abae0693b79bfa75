#include "toricost/toricity.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <limits>
#include <sstream>

#include "toricost/errors.hpp"

namespace toricost
{

namespace
{

constexpr double lattice_snap_tol = 1e-9;
constexpr double golden = 0.6180339887498949;

double snap_to_lattice(double t)
{
    const double k = std::round(t / two_pi);
    const double lattice = k * two_pi;
    if (std::abs(t - lattice) <= lattice_snap_tol * std::max(1.0, std::abs(t)))
        return lattice;
    return t;
}

bool is_origin(const TimeVector& t)
{
    return std::all_of(t.begin(), t.end(), [](double v) { return v == 0.0; });
}

std::string format_time(const TimeVector& t)
{
    std::string s = "(";
    for (std::size_t k = 0; k < t.size(); ++k)
        s += (k ? ", " : "") + fmt::format("{:.12g}", t[k]);
    return s + ")";
}

// Golden-section minimization of f on [a, b]; returns (argmin, value).
template <class F>
std::pair<double, double> golden_section(F&& f, double a, double b)
{
    double x1 = b - golden * (b - a);
    double x2 = a + golden * (b - a);
    double f1 = f(x1);
    double f2 = f(x2);
    for (int iter = 0; iter < 200 && (b - a) > 1e-11 * std::max(1.0, std::abs(a) + std::abs(b));
         ++iter)
    {
        if (f1 <= f2)
        {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - golden * (b - a);
            f1 = f(x1);
        }
        else
        {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + golden * (b - a);
            f2 = f(x2);
        }
    }
    return f1 <= f2 ? std::pair{x1, f1} : std::pair{x2, f2};
}

}  // namespace

std::string to_string(Verdict v)
{
    switch (v)
    {
    case Verdict::ToricEvidence:
        return "ToricEvidence";
    case Verdict::NotToric:
        return "NotToric";
    case Verdict::Inconclusive:
        return "Inconclusive";
    }
    return "Inconclusive";
}

Verdict verdict_from_string(const std::string& s)
{
    if (s == "ToricEvidence")
        return Verdict::ToricEvidence;
    if (s == "NotToric")
        return Verdict::NotToric;
    if (s == "Inconclusive")
        return Verdict::Inconclusive;
    throw ValidationError("unknown verdict '" + s + "'");
}

ScanGrid::ScanGrid(std::vector<AxisRange> axes) : axes_(std::move(axes))
{
    if (axes_.empty() || axes_.size() > TimeVector::capacity)
        throw ValidationError("scan grid needs between 1 and "
                              + std::to_string(TimeVector::capacity) + " axes");
    for (const auto& a : axes_)
    {
        if (!(std::isfinite(a.t_min) && std::isfinite(a.t_max) && a.t_min < a.t_max))
            throw ValidationError("scan grid axis needs finite t_min < t_max");
        if (a.steps < 2)
            throw ValidationError("scan grid axis needs at least 2 steps");
    }
}

ScanGrid ScanGrid::default_for(std::size_t n)
{
    return ScanGrid(std::vector<AxisRange>(n, AxisRange{}));
}

std::size_t ScanGrid::size() const noexcept
{
    std::size_t s = 1;
    for (const auto& a : axes_)
        s *= a.steps;
    return s;
}

double ScanGrid::spacing(std::size_t axis) const
{
    const auto& a = axes_.at(axis);
    return (a.t_max - a.t_min) / static_cast<double>(a.steps - 1);
}

double ScanGrid::axis_value(std::size_t axis, std::size_t i) const
{
    const auto& a = axes_.at(axis);
    if (i + 1 == a.steps)
        return snap_to_lattice(a.t_max);
    return snap_to_lattice(a.t_min + static_cast<double>(i) * spacing(axis));
}

TimeVector ScanGrid::point(std::size_t flat_index) const
{
    TimeVector t(axes_.size());
    for (std::size_t k = axes_.size(); k-- > 0;)
    {
        const std::size_t steps = axes_[k].steps;
        t[k] = axis_value(k, flat_index % steps);
        flat_index /= steps;
    }
    return t;
}

std::optional<std::size_t> ScanGrid::find(const TimeVector& t) const
{
    if (t.size() != axes_.size())
        return std::nullopt;
    std::size_t flat = 0;
    for (std::size_t k = 0; k < axes_.size(); ++k)
    {
        const auto& a = axes_[k];
        const double pos = (t[k] - a.t_min) / spacing(k);
        const double idx = std::round(pos);
        if (idx < 0.0 || idx >= static_cast<double>(a.steps))
            return std::nullopt;
        const auto i = static_cast<std::size_t>(idx);
        if (axis_value(k, i) != t[k])
            return std::nullopt;
        flat = flat * a.steps + i;
    }
    return flat;
}

bool on_period_lattice(const TimeVector& t)
{
    return std::all_of(t.begin(), t.end(), [](double v) {
        return v == std::round(v / two_pi) * two_pi;
    });
}

double ScanResult::point_threshold(std::size_t i) const
{
    return std::max(zero_threshold, 5.0 * estimates.at(i).std_error);
}

double ScanResult::point_margin(std::size_t i) const
{
    return 10.0 * point_threshold(i);
}

PointClass classify_point(const CostEstimate& e, double zero_threshold)
{
    const double thr = std::max(zero_threshold, 5.0 * e.std_error);
    if (e.value < thr)
        return PointClass::Zero;
    if (e.value > 10.0 * thr)
        return PointClass::Positive;
    return PointClass::Undecided;
}

ScanResult scan(const SystemDef& sys, const CostFunction& c, const ScanGrid& grid,
                std::size_t n_samples, std::uint64_t seed, const IntegratorConfig& cfg)
{
    const std::size_t n = sys.components.size();
    if (grid.dimension() != n)
        throw ValidationError("scan grid has " + std::to_string(grid.dimension())
                              + " axes but system '" + sys.name + "' has n = "
                              + std::to_string(n));
    if (n_samples < 100)
        throw ValidationError("periodicity_cost needs at least 100 samples");
    cfg.validate();

    ScanResult r{grid, {}, {}, {}, Verdict::Inconclusive, 0.0, 0.0, 0.0, std::nullopt};
    const SampleSet samples = draw_samples(sys.chart, n_samples, seed);
    r.cost_scale = mean_pair_cost(sys.chart, c, std::min<std::size_t>(n_samples, 10000), seed);
    r.zero_threshold = 1e-6 * sys.chart.total_volume() * r.cost_scale;
    r.positivity_margin = 10.0 * r.zero_threshold;

    r.estimates.reserve(grid.size());
    r.classes.reserve(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i)
    {
        r.estimates.push_back(periodicity_cost(sys, grid.point(i), c, samples, cfg));
        r.classes.push_back(classify_point(r.estimates.back(), r.zero_threshold));
        if (r.classes.back() == PointClass::Zero)
            r.zeros.push_back(grid.point(i));
    }

    TimeVector diagonal(n);
    for (std::size_t k = 0; k < n; ++k)
        diagonal[k] = two_pi;
    r.diagonal_index = grid.find(diagonal);
    if (!r.diagonal_index)
        return r;

    const PointClass diag = r.classes[*r.diagonal_index];
    if (diag == PointClass::Positive)
    {
        r.verdict = Verdict::NotToric;
        return r;
    }
    if (diag != PointClass::Zero)
        return r;

    bool consistent = true;
    for (std::size_t i = 0; i < grid.size() && consistent; ++i)
    {
        const bool lattice = on_period_lattice(grid.point(i));
        consistent = lattice ? r.classes[i] == PointClass::Zero
                             : r.classes[i] == PointClass::Positive;
    }
    if (consistent)
        r.verdict = Verdict::ToricEvidence;
    return r;
}

RefinedZero refine_zero(const SystemDef& sys, const CostFunction& c,
                        const TimeVector& t_candidate, double radius, std::size_t n_samples,
                        std::uint64_t seed, const IntegratorConfig& cfg)
{
    if (t_candidate.size() != sys.components.size())
        throw ValidationError("time vector length does not match system '" + sys.name + "'");
    if (!(radius > 0.0))
        throw ValidationError("refine_zero: radius must be positive");
    if (n_samples < 100)
        throw ValidationError("periodicity_cost needs at least 100 samples");
    cfg.validate();

    const SampleSet samples = draw_samples(sys.chart, n_samples, seed);
    const CostEstimate start = periodicity_cost(sys, t_candidate, c, samples, cfg);

    TimeVector best = t_candidate;
    const std::size_t sweeps = t_candidate.size() == 1 ? 1 : 4;
    for (std::size_t sweep = 0; sweep < sweeps; ++sweep)
    {
        for (std::size_t k = 0; k < best.size(); ++k)
        {
            auto along_axis = [&](double s) {
                TimeVector t = best;
                t[k] = s;
                return periodicity_cost(sys, t, c, samples, cfg).value;
            };
            const double centre = t_candidate[k];
            best[k] = golden_section(along_axis, centre - radius, centre + radius).first;
        }
    }

    CostEstimate refined = periodicity_cost(sys, best, c, samples, cfg);
    if (!(refined.value < start.value))
        return {t_candidate, start};
    return {best, refined};
}

Classification classify(const SystemDef& sys, const CostFunction& c, const ScanGrid& grid,
                        std::size_t n_samples, std::uint64_t seed, const IntegratorConfig& cfg)
{
    Classification out;
    out.scan = scan(sys, c, grid, n_samples, seed, cfg);
    const ScanResult& s = out.scan;
    const std::size_t n = grid.dimension();
    std::ostringstream report;
    report << "system " << sys.name << ", cost " << c.name() << ", " << grid.size()
           << " grid points, " << n_samples << " samples, seed " << seed << "\n";
    report << "zero threshold " << fmt::format("{:.6g}", s.zero_threshold)
           << ", positivity margin " << fmt::format("{:.6g}", s.positivity_margin) << "\n";
    report << "normalized (2pi) test: " << to_string(s.verdict) << "\n";

    auto finish = [&](Verdict v, const std::string& why) {
        out.verdict = v;
        report << "verdict " << to_string(v) << ": " << why << "\n";
        out.report = report.str();
        return out;
    };

    const auto undecided = std::count(s.classes.begin(), s.classes.end(), PointClass::Undecided);
    if (undecided > 0)
        return finish(Verdict::Inconclusive,
                      std::to_string(undecided)
                          + " grid points cannot be separated from zero at this sample size");

    std::vector<TimeVector> nonzero_zeros;
    for (const auto& z : s.zeros)
        if (!is_origin(z))
            nonzero_zeros.push_back(z);

    if (nonzero_zeros.empty())
    {
        if (s.diagonal_index && s.classes[*s.diagonal_index] == PointClass::Positive)
            return finish(Verdict::NotToric,
                          "no zero-cost time in the window besides 0 and C at (2pi,...,2pi) is "
                          "positive");
        return finish(Verdict::Inconclusive,
                      "no zero-cost time found and (2pi,...,2pi) is not on the grid");
    }

    // Smallest positive zero on each coordinate axis.
    TimeVector generator(n);
    for (std::size_t k = 0; k < n; ++k)
    {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& z : nonzero_zeros)
        {
            bool on_axis = z[k] > 0.0;
            for (std::size_t j = 0; j < n && on_axis; ++j)
                on_axis = j == k || z[j] == 0.0;
            if (on_axis)
                best = std::min(best, z[k]);
        }
        if (!std::isfinite(best))
            return finish(Verdict::Inconclusive,
                          "zero set has no generator along axis " + std::to_string(k + 1));
        generator[k] = best;
    }

    const auto gen_index = grid.find(generator);
    if (!gen_index || s.classes[*gen_index] != PointClass::Zero)
        return finish(Verdict::Inconclusive, "axis generators do not combine to a zero "
                                             + format_time(generator));

    double radius = 0.0;
    for (std::size_t k = 0; k < n; ++k)
        radius = std::max(radius, grid.spacing(k));
    out.refined = refine_zero(sys, c, generator, radius, n_samples, seed, cfg);
    const TimeVector period = out.refined->t;
    report << "refined generator " << format_time(period) << " with C = "
           << fmt::format("{:.6g}", out.refined->estimate.value) << "\n";
    if (classify_point(out.refined->estimate, s.zero_threshold) != PointClass::Zero)
        return finish(Verdict::Inconclusive, "refined generator is not a zero");

    // Every zero must sit within one cell of a lattice point m * period.
    for (const auto& z : s.zeros)
        for (std::size_t k = 0; k < n; ++k)
        {
            const double m = std::round(z[k] / period[k]);
            if (std::abs(z[k] - m * period[k]) > grid.spacing(k))
                return finish(Verdict::Inconclusive,
                              "zero " + format_time(z) + " is off the lattice generated by "
                                  + format_time(period));
        }

    // Every lattice point inside the window must have a zero within one cell.
    std::vector<std::size_t> counts(n);
    std::vector<double> lo(n), hi(n);
    for (std::size_t k = 0; k < n; ++k)
    {
        const auto& a = grid.axes()[k];
        lo[k] = std::ceil(a.t_min / period[k] - 1e-9);
        hi[k] = std::floor(a.t_max / period[k] + 1e-9);
    }
    std::vector<double> m(lo);
    for (bool more = true; more;)
    {
        bool matched = false;
        for (const auto& z : s.zeros)
        {
            bool near = true;
            for (std::size_t k = 0; k < n && near; ++k)
                near = std::abs(z[k] - m[k] * period[k]) <= grid.spacing(k);
            if (near)
            {
                matched = true;
                break;
            }
        }
        if (!matched)
            return finish(Verdict::Inconclusive,
                          "lattice point without a zero-cost grid neighbour");
        more = false;
        for (std::size_t k = n; k-- > 0;)
        {
            if (m[k] < hi[k])
            {
                m[k] += 1.0;
                more = true;
                break;
            }
            m[k] = lo[k];
        }
    }

    out.period = period;
    report << "detected period " << format_time(period) << "\n";
    return finish(Verdict::ToricEvidence,
                  "zeros form the lattice generated by the period; costs are positive elsewhere");
}

}  // namespace toricost
