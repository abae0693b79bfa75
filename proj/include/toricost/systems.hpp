#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "toricost/dynamics.hpp"
#include "toricost/toricity.hpp"

namespace toricost
{

/// Named real parameters of a catalog entry. "numeric" = 1 drops the
/// analytic flows so the implicit midpoint integrator is used instead.
using SystemParams = std::map<std::string, double>;

struct CatalogEntry
{
    std::string id;
    std::string description;
    std::string chart_id;
    SystemParams defaults;
    std::function<SystemDef(const SystemParams&)> builder;
    /// Closed form of C_t for the chordal-sq cost.
    std::function<double(const TimeVector&, const SystemParams&)> oracle;
    std::function<Verdict(const SystemParams&)> expected_verdict;
    std::function<std::optional<TimeVector>(const SystemParams&)> expected_period;
};

const std::vector<CatalogEntry>& catalog();

/// Throws ValidationError for unknown ids.
const CatalogEntry& catalog_entry(const std::string& id);

/// Merge user parameters over the entry defaults, rejecting unknown keys
/// and out-of-range values.
SystemParams resolve_params(const CatalogEntry& entry, const SystemParams& params);

SystemDef build(const std::string& id, const SystemParams& params = {});

/// J_0(x) = (1/2pi) int_0^{2pi} cos(x sin theta) d theta by the periodic
/// trapezoidal rule.
double bessel_j0(double x);

/// 2pi int_{-1}^{1} (1 - z^2) 2 (1 - cos(f(z) t)) dz by composite
/// Simpson quadrature, f the angular speed at height z.
double sphere_cost_integral(const std::function<double(double)>& speed, double t);

}  // namespace toricost
