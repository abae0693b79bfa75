#include "doctest.h"

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "toricost/errors.hpp"
#include "toricost/systems.hpp"
#include "toricost/toricity.hpp"

using namespace toricost;

namespace
{

constexpr double pi = std::numbers::pi;

ScanGrid verdict_grid(std::size_t n)
{
    if (n == 1)
        return ScanGrid::default_for(1);
    return ScanGrid({AxisRange{0.0, 2 * two_pi, 33}, AxisRange{0.0, 2 * two_pi, 33}});
}

}  // namespace

TEST_SUITE("systems")
{
    TEST_CASE("catalog lookup and parameters")
    {
        CHECK(catalog().size() == 6);
        CHECK_THROWS_AS(build("nope"), ValidationError);
        CHECK_THROWS_AS(build("s2-spin", {{"eps", 0.1}}), ValidationError);
        CHECK_THROWS_AS(build("s2-spin-perturbed", {{"eps", 0.5}}), ValidationError);
        CHECK_THROWS_AS(build("s2-spin-perturbed", {{"eps", std::nan("")}}), ValidationError);
        CHECK_THROWS_AS(build("t2-cos", {{"numeric", 0.5}}), ValidationError);
        CHECK(resolve_params(catalog_entry("s2-spin-perturbed"), {}).at("eps") == 0.1);
        CHECK(resolve_params(catalog_entry("s2-spin-perturbed"), {{"eps", -0.2}}).at("eps") == -0.2);

        for (const auto& e : catalog())
        {
            CAPTURE(e.id);
            const auto sys = build(e.id);
            CHECK_NOTHROW(sys.validate());
            CHECK(sys.name == e.id);
            CHECK(sys.chart.id() == e.chart_id);
            CHECK(sys.components.size() == sys.chart.half_dimension());
            for (const auto& comp : sys.components)
                CHECK(comp.has_analytic_flow());
            for (const auto& comp : build(e.id, {{"numeric", 1.0}}).components)
                CHECK_FALSE(comp.has_analytic_flow());
        }
    }

    TEST_CASE("build examples")
    {
        const auto spin = build("s2-spin");
        const auto e = periodicity_cost(spin, TimeVector{pi}, make_cost("chordal-sq", spin.chart),
                                        100000, 1, IntegratorConfig{});
        CHECK(std::abs(e.value - 33.5103) <= 3 * e.std_error);

        const auto prod = build("s2xs2-toric");
        for (const auto& p : sample_points(prod.chart, 100, 3))
        {
            const auto q = flow(prod, TimeVector{two_pi, two_pi}, p, IntegratorConfig{});
            CHECK(euclidean_distance(prod.chart.embed(p), prod.chart.embed(q)) <= 1e-9);
        }
    }

    TEST_CASE("library Bessel quadrature against scipy and an independent rule")
    {
        const double xs[] = {1.0, 2.0, pi, 2 * pi, 7.0};
        const double scipy[] = {oracle::j0_at_1, oracle::j0_at_2, oracle::j0_at_pi,
                                oracle::j0_at_2pi, oracle::j0_at_7};
        for (std::size_t i = 0; i < 5; ++i)
        {
            CAPTURE(xs[i]);
            CHECK(bessel_j0(xs[i]) == doctest::Approx(scipy[i]).epsilon(1e-13));
            CHECK(oracle::bessel_j0_simpson(xs[i]) == doctest::Approx(scipy[i]).epsilon(1e-12));
        }
        CHECK(bessel_j0(0.0) == 1.0);
    }

    TEST_CASE("oracles against independent quadrature")
    {
        const double ts[] = {1.0, pi, 2 * pi, 7.0};
        const double scipy_perturbed[] = {oracle::perturbed_c_1, oracle::perturbed_c_pi,
                                          oracle::perturbed_c_2pi, oracle::perturbed_c_7};
        const auto& perturbed = catalog_entry("s2-spin-perturbed");
        const auto params = resolve_params(perturbed, {});
        for (std::size_t i = 0; i < 4; ++i)
        {
            CAPTURE(ts[i]);
            CHECK(oracle::perturbed_spin(ts[i], 0.1) ==
                  doctest::Approx(scipy_perturbed[i]).epsilon(1e-12));
            CHECK(perturbed.oracle(TimeVector{ts[i]}, params) ==
                  doctest::Approx(scipy_perturbed[i]).epsilon(1e-10));
        }

        // eps = 0 collapses the perturbation onto the plain spin
        CHECK(perturbed.oracle(TimeVector{1.0}, {{"eps", 0.0}, {"numeric", 0.0}}) ==
              doctest::Approx(oracle::sphere_spin(1.0)).epsilon(1e-10));

        const auto& spin = catalog_entry("s2-spin");
        const auto& half = catalog_entry("s2-spin-halfspeed");
        const auto& torus = catalog_entry("t2-cos");
        const auto& prod = catalog_entry("s2xs2-toric");
        for (const double t : ts)
        {
            CHECK(spin.oracle(TimeVector{t}, {}) == doctest::Approx(oracle::sphere_spin(t)));
            CHECK(half.oracle(TimeVector{t}, {}) == doctest::Approx(oracle::sphere_spin(t / 2)));
            // hand integral of (1 - z^2) 2 (1 - cos t) by Gauss-Legendre
            const double sphere = 2 * pi * oracle::gauss_legendre([t](double z) {
                                      return (1 - z * z) * 2 * (1 - std::cos(t));
                                  }, -1.0, 1.0);
            CHECK(spin.oracle(TimeVector{t}, {}) == doctest::Approx(sphere).epsilon(1e-12));
            // 2D torus integral, theta_2 integrates to 2 pi
            const double shear = 2 * pi * oracle::gauss_legendre([t](double a) {
                                     return 2 * (1 - std::cos(t * std::sin(a)));
                                 }, 0.0, 2 * pi);
            CHECK(torus.oracle(TimeVector{t}, {}) == doctest::Approx(shear).epsilon(1e-10));
            CHECK(prod.oracle(TimeVector{t, 1.0}, {}) ==
                  doctest::Approx(4 * pi * (oracle::sphere_spin(t) + oracle::sphere_spin(1.0))));
        }
        CHECK(torus.oracle(TimeVector{2.0}, {}) ==
              doctest::Approx(oracle::torus_shear(2.0, oracle::j0_at_2)).epsilon(1e-12));
        CHECK(spin.oracle(TimeVector{pi}, {}) == doctest::Approx(33.510321638291124).epsilon(1e-15));
    }

    TEST_CASE("oracles match Monte Carlo at the preregistered times")
    {
        const double ts[] = {0.0, 1.0, pi, 2 * pi, 7.0};
        for (const auto& entry : catalog())
        {
            CAPTURE(entry.id);
            const auto params = resolve_params(entry, {});
            const auto sys = build(entry.id);
            const auto c = make_cost("chordal-sq", sys.chart);
            const std::size_t n = sys.components.size();
            for (const double s : ts)
            {
                CAPTURE(s);
                TimeVector t(n);
                for (std::size_t k = 0; k < n; ++k)
                    t[k] = s;
                const auto e = periodicity_cost(sys, t, c, 100000, 2718, IntegratorConfig{});
                CHECK(std::abs(e.value - entry.oracle(t, params)) <= 3 * e.std_error + 1e-9);
            }
        }
    }

    TEST_CASE("expected verdicts reproduce under three seeds")
    {
        for (const auto& entry : catalog())
        {
            CAPTURE(entry.id);
            const auto params = resolve_params(entry, {});
            const auto sys = build(entry.id);
            const std::size_t n = sys.components.size();
            const std::size_t samples = n == 1 ? 100000 : 20000;
            for (const std::uint64_t seed : {1u, 2u, 3u})
            {
                CAPTURE(seed);
                const auto k = classify(sys, make_cost("chordal-sq", sys.chart), verdict_grid(n),
                                        samples, seed, IntegratorConfig{});
                CHECK(k.verdict == entry.expected_verdict(params));
                const auto expected = entry.expected_period(params);
                REQUIRE(k.period.has_value() == expected.has_value());
                if (expected)
                    for (std::size_t i = 0; i < n; ++i)
                        CHECK(std::abs((*k.period)[i] - (*expected)[i]) <= 1e-3);
            }
        }
    }
}
