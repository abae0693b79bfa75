#include "toricost/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "toricost/errors.hpp"
#include "toricost/random.hpp"

namespace toricost
{

namespace
{

TangentVector field_unchecked(const HamiltonianComponent& h, const ChartPoint& p)
{
    const TangentVector grad = h.gradient(p);
    TangentVector x(grad.size());
    for (std::size_t i = 0; i + 1 < grad.size(); i += 2)
    {
        x[i] = -grad[i + 1];
        x[i + 1] = grad[i];
    }
    return x;
}

void check_index(const SystemDef& sys, std::size_t k)
{
    if (k >= sys.components.size())
        throw ValidationError("component index " + std::to_string(k) + " out of range for system '"
                              + sys.name + "'");
}

bool all_finite(const ChartPoint& p)
{
    return std::all_of(p.begin(), p.end(), [](double v) { return std::isfinite(v); });
}

Eigen::MatrixXd field_jacobian(const HamiltonianComponent& h, const ChartPoint& m)
{
    const std::size_t d = m.size();
    Eigen::MatrixXd jac(d, d);
    for (std::size_t j = 0; j < d; ++j)
    {
        const double delta = 1e-6 * std::max(1.0, std::abs(m[j]));
        ChartPoint plus = m;
        ChartPoint minus = m;
        plus[j] += delta;
        minus[j] -= delta;
        const TangentVector fp = field_unchecked(h, plus);
        const TangentVector fm = field_unchecked(h, minus);
        for (std::size_t i = 0; i < d; ++i)
            jac(i, j) = (fp[i] - fm[i]) / (2.0 * delta);
    }
    return jac;
}

// One implicit midpoint step y = y0 + h X((y0 + y) / 2), solved by a chord
// Newton iteration with the Jacobian frozen at the explicit predictor.
ChartPoint midpoint_step(const HamiltonianComponent& ham, const ChartPoint& y0, double h,
                         const IntegratorConfig& cfg)
{
    const std::size_t d = y0.size();
    ChartPoint y = y0;
    const TangentVector x0 = field_unchecked(ham, y0);
    for (std::size_t i = 0; i < d; ++i)
        y[i] += h * x0[i];

    ChartPoint mid(d);
    for (std::size_t i = 0; i < d; ++i)
        mid[i] = 0.5 * (y0[i] + y[i]);
    const Eigen::MatrixXd jac
        = Eigen::MatrixXd::Identity(d, d) - 0.5 * h * field_jacobian(ham, mid);
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(jac);

    Eigen::VectorXd residual(d);
    for (int iter = 0; iter < cfg.newton_max_iter; ++iter)
    {
        for (std::size_t i = 0; i < d; ++i)
            mid[i] = 0.5 * (y0[i] + y[i]);
        const TangentVector xm = field_unchecked(ham, mid);
        for (std::size_t i = 0; i < d; ++i)
            residual[i] = y[i] - y0[i] - h * xm[i];
        const Eigen::VectorXd delta = lu.solve(residual);
        double norm = 0.0;
        for (std::size_t i = 0; i < d; ++i)
        {
            y[i] -= delta[i];
            norm = std::max(norm, std::abs(delta[i]));
        }
        if (!std::isfinite(norm) || !all_finite(y))
            break;
        if (norm < cfg.newton_tol)
            return y;
    }
    throw NewtonDivergenceError("implicit midpoint: Newton iteration did not converge in "
                                + std::to_string(cfg.newton_max_iter) + " iterations");
}

}  // namespace

void SystemDef::validate() const
{
    if (components.size() != chart.half_dimension())
        throw ValidationError("system '" + name + "': expected "
                              + std::to_string(chart.half_dimension())
                              + " momentum-map components");
    for (const auto& c : components)
        if (!c.value || !c.gradient)
            throw ValidationError("system '" + name + "': component '" + c.label
                                  + "' lacks value or gradient");
}

void IntegratorConfig::validate() const
{
    if (!(step_size > 0.0 && step_size <= 0.1))
        throw ValidationError("integrator step_size must lie in (0, 0.1]");
    if (!(newton_tol > 0.0 && newton_tol < step_size * step_size))
        throw ValidationError("integrator newton_tol must lie in (0, step_size^2)");
    if (newton_max_iter < 1)
        throw ValidationError("integrator newton_max_iter must be positive");
}

double symplectic_form(const TangentVector& x, const TangentVector& y)
{
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < x.size(); i += 2)
        s += x[i] * y[i + 1] - x[i + 1] * y[i];
    return s;
}

TangentVector hamiltonian_vector_field(const SystemDef& sys, std::size_t k, const ChartPoint& p)
{
    check_index(sys, k);
    if (p.size() != sys.chart.dimension())
        throw ValidationError("point dimension does not match system '" + sys.name + "'");
    if (sys.chart.is_singular(p))
        throw SingularPointError("point lies on the singular locus of chart '" + sys.chart.id()
                                 + "'");
    return field_unchecked(sys.components[k], p);
}

double poisson_bracket(const SystemDef& sys, std::size_t i, std::size_t j, const ChartPoint& p)
{
    return symplectic_form(hamiltonian_vector_field(sys, i, p),
                           hamiltonian_vector_field(sys, j, p));
}

ChartPoint integrate_midpoint(const SystemDef& sys, std::size_t k, double t,
                              const ChartPoint& p, const IntegratorConfig& cfg)
{
    check_index(sys, k);
    if (sys.chart.is_singular(p))
        throw SingularPointError("flow started on the singular locus of chart '"
                                 + sys.chart.id() + "'");
    if (t == 0.0)
        return p;

    const auto& ham = sys.components[k];
    const double h = std::copysign(cfg.step_size, t);
    const double full_steps = std::floor(std::abs(t) / cfg.step_size);
    const auto n_full = static_cast<long long>(full_steps);
    const double remainder = t - static_cast<double>(n_full) * h;

    ChartPoint y = p;
    for (long long s = 0; s < n_full; ++s)
        y = sys.chart.reduce(midpoint_step(ham, y, h, cfg));
    if (std::abs(remainder) > 1e-15 * std::max(1.0, std::abs(t)))
        y = sys.chart.reduce(midpoint_step(ham, y, remainder, cfg));
    return y;
}

ChartPoint flow_component(const SystemDef& sys, std::size_t k, double t, const ChartPoint& p,
                          const IntegratorConfig& cfg)
{
    check_index(sys, k);
    if (t == 0.0)
        return p;
    const auto& ham = sys.components[k];
    if (ham.has_analytic_flow())
    {
        if (sys.chart.is_singular(p))
            throw SingularPointError("flow started on the singular locus of chart '"
                                     + sys.chart.id() + "'");
        return sys.chart.reduce(ham.analytic_flow(t, p));
    }
    return integrate_midpoint(sys, k, t, p, cfg);
}

ChartPoint flow_ordered(const SystemDef& sys, const TimeVector& t, const ChartPoint& p,
                        const std::vector<std::size_t>& order, const IntegratorConfig& cfg)
{
    if (t.size() != sys.components.size())
        throw ValidationError("time vector length does not match system '" + sys.name + "'");
    ChartPoint y = p;
    for (const std::size_t k : order)
        y = flow_component(sys, k, t[k], y, cfg);
    return y;
}

ChartPoint flow(const SystemDef& sys, const TimeVector& t, const ChartPoint& p,
                const IntegratorConfig& cfg)
{
    if (t.size() != sys.components.size())
        throw ValidationError("time vector length does not match system '" + sys.name + "'");
    // phi_{t_1} o ... o phi_{t_n}: by commutativity the application order
    // 1..n gives the same map as the written composition.
    ChartPoint y = p;
    for (std::size_t k = 0; k < t.size(); ++k)
        y = flow_component(sys, k, t[k], y, cfg);
    return y;
}

double check_flow_commutativity(const SystemDef& sys, std::size_t trials, std::uint64_t seed,
                                const IntegratorConfig& cfg, const RegionFn& region)
{
    const std::size_t n = sys.components.size();
    if (n < 2)
        throw ValidationError("check_flow_commutativity needs n >= 2");

    double worst = 0.0;
    std::uint64_t stream = 0;
    for (std::size_t trial = 0; trial < trials; ++trial)
    {
        ChartPoint p;
        do
            p = sample_point(sys.chart, seed, stream++);
        while (region && !region(p));

        CounterRng rng(derive_seed(seed, 1), trial);
        TimeVector t(n);
        for (std::size_t k = 0; k < n; ++k)
            t[k] = -two_pi + 2.0 * two_pi * rng.uniform();

        std::vector<std::size_t> order(n);
        for (std::size_t k = 0; k < n; ++k)
            order[k] = k;
        for (std::size_t k = n - 1; k > 0; --k)
        {
            const auto j = static_cast<std::size_t>(rng.next() % (k + 1));
            std::swap(order[k], order[j]);
        }

        const ChartPoint a = flow(sys, t, p, cfg);
        const ChartPoint b = flow_ordered(sys, t, p, order, cfg);
        worst = std::max(worst, euclidean_distance(sys.chart.embed(a), sys.chart.embed(b)));
    }
    return worst;
}

double check_volume_preservation(const SystemDef& sys, const TimeVector& t, std::size_t trials,
                                 std::uint64_t seed, const IntegratorConfig& cfg,
                                 const RegionFn& region)
{
    constexpr double fd_step = 1e-5;
    constexpr double margin = 1e-3;
    const auto& ranges = sys.chart.ranges();
    const std::size_t d = ranges.size();

    auto interior = [&](const ChartPoint& p) {
        for (std::size_t i = 0; i < d; ++i)
            if (!ranges[i].angular && (p[i] < ranges[i].lo + margin || p[i] > ranges[i].hi - margin))
                return false;
        return !region || region(p);
    };

    double worst = 0.0;
    std::uint64_t stream = 0;
    for (std::size_t trial = 0; trial < trials; ++trial)
    {
        ChartPoint p;
        do
            p = sample_point(sys.chart, seed, stream++);
        while (!interior(p));

        Eigen::MatrixXd jac(d, d);
        for (std::size_t j = 0; j < d; ++j)
        {
            ChartPoint plus = p;
            ChartPoint minus = p;
            plus[j] += fd_step;
            minus[j] -= fd_step;
            const ChartPoint fp = flow(sys, t, sys.chart.reduce(plus), cfg);
            const ChartPoint fm = flow(sys, t, sys.chart.reduce(minus), cfg);
            for (std::size_t i = 0; i < d; ++i)
            {
                const double diff = ranges[i].angular ? angle_difference(fp[i], fm[i])
                                                      : fp[i] - fm[i];
                jac(i, j) = diff / (2.0 * fd_step);
            }
        }
        worst = std::max(worst, std::abs(jac.determinant() - 1.0));
    }
    return worst;
}

double max_poisson_defect(const SystemDef& sys, std::size_t samples, std::uint64_t seed)
{
    const std::size_t n = sys.components.size();
    double worst = 0.0;
    for (std::size_t s = 0; s < samples; ++s)
    {
        const ChartPoint p = sample_point(sys.chart, seed, s);
        if (!is_regular(sys, p))
            continue;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (i != j)
                    worst = std::max(worst, std::abs(poisson_bracket(sys, i, j, p)));
    }
    return worst;
}

bool is_regular(const SystemDef& sys, const ChartPoint& p, double tol)
{
    if (sys.chart.is_singular(p))
        return false;
    const std::size_t n = sys.components.size();
    const std::size_t d = p.size();
    Eigen::MatrixXd span(d, n);
    for (std::size_t k = 0; k < n; ++k)
    {
        const TangentVector x = field_unchecked(sys.components[k], p);
        for (std::size_t i = 0; i < d; ++i)
            span(i, k) = x[i];
    }
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(span);
    const auto& sv = svd.singularValues();
    const double scale = std::max(1.0, sv.maxCoeff());
    return sv.minCoeff() > tol * scale;
}

double regular_fraction(const SystemDef& sys, std::size_t samples, std::uint64_t seed)
{
    if (samples == 0)
        throw ValidationError("regular_fraction: samples must be positive");
    std::size_t regular = 0;
    for (std::size_t s = 0; s < samples; ++s)
        if (is_regular(sys, sample_point(sys.chart, seed, s)))
            ++regular;
    return static_cast<double>(regular) / static_cast<double>(samples);
}

}  // namespace toricost
