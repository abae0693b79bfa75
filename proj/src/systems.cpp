#include "toricost/systems.hpp"

#include <cmath>
#include <numbers>

#include "toricost/errors.hpp"

namespace toricost
{

namespace
{

using std::numbers::pi;

bool numeric_only(const SystemParams& p)
{
    const auto it = p.find("numeric");
    return it != p.end() && it->second != 0.0;
}

// h depends on the height z only, so its flow is theta -> theta - h'(z) t.
HamiltonianComponent vertical_spin(std::string label, std::function<double(double)> potential,
                                   std::function<double(double)> speed, std::size_t offset,
                                   std::size_t dim, bool analytic)
{
    HamiltonianComponent h;
    h.label = std::move(label);
    h.value = [potential, offset](const ChartPoint& p) { return potential(p[offset + 1]); };
    h.gradient = [speed, offset, dim](const ChartPoint& p) {
        TangentVector g(dim);
        g[offset + 1] = speed(p[offset + 1]);
        return g;
    };
    if (analytic)
        h.analytic_flow = [speed, offset](double t, const ChartPoint& p) {
            ChartPoint q = p;
            q[offset] = p[offset] - speed(p[offset + 1]) * t;
            return q;
        };
    return h;
}

SystemDef sphere_spin(const std::string& name, double scale, double eps, bool analytic)
{
    auto potential = [scale, eps](double z) { return scale * (z + eps * z * z); };
    auto speed = [scale, eps](double z) { return scale * (1.0 + 2.0 * eps * z); };
    return SystemDef{name, sphere_chart(),
                     {vertical_spin("h", potential, speed, 0, 2, analytic)}};
}

SystemDef tilted_spin(bool analytic)
{
    HamiltonianComponent h;
    h.label = "x";
    h.value = [](const ChartPoint& p) {
        return std::sqrt((1.0 - p[1]) * (1.0 + p[1])) * std::cos(p[0]);
    };
    h.gradient = [](const ChartPoint& p) {
        const double z = p[1];
        const double r = std::sqrt((1.0 - z) * (1.0 + z));
        return TangentVector{-r * std::sin(p[0]), -z * std::cos(p[0]) / r};
    };
    if (analytic)
        // Rotation by -t about the x axis, read back in (theta, z).
        h.analytic_flow = [](double t, const ChartPoint& p) {
            const double z = p[1];
            const double r = std::sqrt((1.0 - z) * (1.0 + z));
            const double x = r * std::cos(p[0]);
            const double y = r * std::sin(p[0]);
            const double c = std::cos(t);
            const double s = std::sin(t);
            const double y2 = y * c + z * s;
            const double z2 = -y * s + z * c;
            return ChartPoint{std::atan2(y2, x), z2};
        };
    return SystemDef{"s2-spin-tilted", sphere_chart(), {std::move(h)}};
}

SystemDef torus_cos(bool analytic)
{
    HamiltonianComponent h;
    h.label = "cos(theta_1)";
    h.value = [](const ChartPoint& p) { return std::cos(p[0]); };
    h.gradient = [](const ChartPoint& p) { return TangentVector{-std::sin(p[0]), 0.0}; };
    if (analytic)
        h.analytic_flow = [](double t, const ChartPoint& p) {
            return ChartPoint{p[0], p[1] - t * std::sin(p[0])};
        };
    return SystemDef{"t2-cos", torus_chart(), {std::move(h)}};
}

SystemDef double_spin(bool analytic)
{
    auto identity = [](double z) { return z; };
    auto unit = [](double) { return 1.0; };
    return SystemDef{"s2xs2-toric",
                     product_chart(sphere_chart(), sphere_chart()),
                     {vertical_spin("z_1", identity, unit, 0, 4, analytic),
                      vertical_spin("z_2", identity, unit, 2, 4, analytic)}};
}

double sphere_spin_closed_form(double t)
{
    return (16.0 * pi / 3.0) * (1.0 - std::cos(t));
}

TimeVector uniform_time(std::size_t n, double value)
{
    TimeVector t(n);
    for (std::size_t k = 0; k < n; ++k)
        t[k] = value;
    return t;
}

std::vector<CatalogEntry> make_catalog()
{
    std::vector<CatalogEntry> c;
    auto toric = [](const SystemParams&) { return Verdict::ToricEvidence; };
    auto not_toric = [](const SystemParams&) { return Verdict::NotToric; };
    auto no_period = [](const SystemParams&) { return std::optional<TimeVector>{}; };

    c.push_back({"s2-spin", "S^2, h = z: rotation about the z axis", "s2",
                 {{"numeric", 0.0}},
                 [](const SystemParams& p) {
                     return sphere_spin("s2-spin", 1.0, 0.0, !numeric_only(p));
                 },
                 [](const TimeVector& t, const SystemParams&) {
                     return sphere_spin_closed_form(t[0]);
                 },
                 toric, [](const SystemParams&) {
                     return std::optional<TimeVector>{uniform_time(1, two_pi)};
                 }});

    c.push_back({"s2-spin-halfspeed", "S^2, h = z/2: rotation at half speed", "s2",
                 {{"numeric", 0.0}},
                 [](const SystemParams& p) {
                     return sphere_spin("s2-spin-halfspeed", 0.5, 0.0, !numeric_only(p));
                 },
                 [](const TimeVector& t, const SystemParams&) {
                     return sphere_spin_closed_form(0.5 * t[0]);
                 },
                 toric, [](const SystemParams&) {
                     return std::optional<TimeVector>{uniform_time(1, 2.0 * two_pi)};
                 }});

    c.push_back({"s2-spin-perturbed", "S^2, h = z + eps z^2: height-dependent speed", "s2",
                 {{"eps", 0.1}, {"numeric", 0.0}},
                 [](const SystemParams& p) {
                     return sphere_spin("s2-spin-perturbed", 1.0, p.at("eps"), !numeric_only(p));
                 },
                 [](const TimeVector& t, const SystemParams& p) {
                     const double eps = p.at("eps");
                     return sphere_cost_integral([eps](double z) { return 1.0 + 2.0 * eps * z; },
                                                 t[0]);
                 },
                 [](const SystemParams& p) {
                     return p.at("eps") == 0.0 ? Verdict::ToricEvidence : Verdict::NotToric;
                 },
                 [](const SystemParams& p) {
                     return p.at("eps") == 0.0 ? std::optional<TimeVector>{uniform_time(1, two_pi)}
                                               : std::nullopt;
                 }});

    c.push_back({"s2-spin-tilted", "S^2, h = x: rotation about the x axis", "s2",
                 {{"numeric", 0.0}},
                 [](const SystemParams& p) { return tilted_spin(!numeric_only(p)); },
                 [](const TimeVector& t, const SystemParams&) {
                     return sphere_spin_closed_form(t[0]);
                 },
                 toric, [](const SystemParams&) {
                     return std::optional<TimeVector>{uniform_time(1, two_pi)};
                 }});

    c.push_back({"t2-cos", "T^2, h = cos(theta_1): shear along theta_2", "t2",
                 {{"numeric", 0.0}},
                 [](const SystemParams& p) { return torus_cos(!numeric_only(p)); },
                 [](const TimeVector& t, const SystemParams&) {
                     return 8.0 * pi * pi * (1.0 - bessel_j0(t[0]));
                 },
                 not_toric, no_period});

    c.push_back({"s2xs2-toric", "S^2 x S^2, h = (z_1, z_2): independent rotations", "s2xs2",
                 {{"numeric", 0.0}},
                 [](const SystemParams& p) { return double_spin(!numeric_only(p)); },
                 [](const TimeVector& t, const SystemParams&) {
                     return 4.0 * pi
                            * (sphere_spin_closed_form(t[0]) + sphere_spin_closed_form(t[1]));
                 },
                 toric, [](const SystemParams&) {
                     return std::optional<TimeVector>{uniform_time(2, two_pi)};
                 }});
    return c;
}

}  // namespace

const std::vector<CatalogEntry>& catalog()
{
    static const std::vector<CatalogEntry> entries = make_catalog();
    return entries;
}

const CatalogEntry& catalog_entry(const std::string& id)
{
    for (const auto& e : catalog())
        if (e.id == id)
            return e;
    throw ValidationError("unknown system id '" + id + "'");
}

SystemParams resolve_params(const CatalogEntry& entry, const SystemParams& params)
{
    SystemParams out = entry.defaults;
    for (const auto& [key, value] : params)
    {
        if (!out.contains(key))
            throw ValidationError("system '" + entry.id + "' has no parameter '" + key + "'");
        if (!std::isfinite(value))
            throw ValidationError("parameter '" + key + "' must be finite");
        out[key] = value;
    }
    if (out.at("numeric") != 0.0 && out.at("numeric") != 1.0)
        throw ValidationError("parameter 'numeric' must be 0 or 1");
    if (const auto it = out.find("eps"); it != out.end() && std::abs(it->second) > 0.4)
        throw ValidationError("parameter 'eps' must lie in [-0.4, 0.4]");
    return out;
}

SystemDef build(const std::string& id, const SystemParams& params)
{
    const CatalogEntry& entry = catalog_entry(id);
    SystemDef sys = entry.builder(resolve_params(entry, params));
    sys.validate();
    return sys;
}

double bessel_j0(double x)
{
    const auto nodes = static_cast<std::size_t>(64 + 4 * std::ceil(std::abs(x)));
    double s = 0.0;
    for (std::size_t i = 0; i < nodes; ++i)
    {
        const double theta = two_pi * static_cast<double>(i) / static_cast<double>(nodes);
        s += std::cos(x * std::sin(theta));
    }
    return s / static_cast<double>(nodes);
}

double sphere_cost_integral(const std::function<double(double)>& speed, double t)
{
    constexpr std::size_t panels = 4096;
    const double h = 2.0 / panels;
    auto f = [&](double z) { return (1.0 - z * z) * 2.0 * (1.0 - std::cos(speed(z) * t)); };
    double s = f(-1.0) + f(1.0);
    for (std::size_t i = 1; i < panels; ++i)
        s += (i % 2 ? 4.0 : 2.0) * f(-1.0 + h * static_cast<double>(i));
    return two_pi * s * h / 3.0;
}

}  // namespace toricost
