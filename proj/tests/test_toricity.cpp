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

ScanResult scan_default(const char* id, std::size_t samples = 100000, std::uint64_t seed = 42,
                        const SystemParams& params = {})
{
    const auto sys = build(id, params);
    return scan(sys, make_cost("chordal-sq", sys.chart), ScanGrid::default_for(1), samples, seed,
                IntegratorConfig{});
}

}  // namespace

TEST_SUITE("toricity")
{
    TEST_CASE("verdict names round-trip")
    {
        for (const auto v : {Verdict::ToricEvidence, Verdict::NotToric, Verdict::Inconclusive})
            CHECK(verdict_from_string(to_string(v)) == v);
        CHECK_THROWS_AS(verdict_from_string("Toric"), ValidationError);
    }

    TEST_CASE("default grid holds the lattice points exactly")
    {
        const auto g = ScanGrid::default_for(1);
        CHECK(g.size() == 129);
        CHECK(g.axis_value(0, 0) == 0.0);
        CHECK(g.axis_value(0, 64) == two_pi);
        CHECK(g.axis_value(0, 128) == 2 * two_pi);
        CHECK(g.find(TimeVector{two_pi}) == std::optional<std::size_t>{64});
        CHECK_FALSE(g.find(TimeVector{1.0}));
        CHECK(g.spacing(0) == doctest::Approx(4 * pi / 128));

        const auto g2 = ScanGrid::default_for(2);
        CHECK(g2.size() == 129 * 129);
        // t_1 varies slowest
        CHECK(g2.point(1) == TimeVector{0.0, g2.axis_value(1, 1)});
        CHECK(g2.point(129) == TimeVector{g2.axis_value(0, 1), 0.0});
        CHECK(g2.find(TimeVector{two_pi, two_pi}) == std::optional<std::size_t>{64 * 129 + 64});

        CHECK(on_period_lattice(TimeVector{0.0, two_pi}));
        CHECK(on_period_lattice(TimeVector{-two_pi}));
        CHECK_FALSE(on_period_lattice(TimeVector{two_pi, 1.0}));

        CHECK_THROWS_AS(ScanGrid({AxisRange{1.0, 1.0, 10}}), ValidationError);
        CHECK_THROWS_AS(ScanGrid({AxisRange{0.0, 1.0, 1}}), ValidationError);
        CHECK_THROWS_AS(ScanGrid({}), ValidationError);
    }

    TEST_CASE("point classification")
    {
        CostEstimate e;
        e.value = 0.5;
        e.std_error = 0.0;
        CHECK(classify_point(e, 1.0) == PointClass::Zero);
        e.value = 5.0;
        CHECK(classify_point(e, 1.0) == PointClass::Undecided);
        e.value = 10.5;
        CHECK(classify_point(e, 1.0) == PointClass::Positive);
        // noise raises the per-point threshold
        e.value = 3.0;
        e.std_error = 1.0;
        CHECK(classify_point(e, 1.0) == PointClass::Zero);
    }

    TEST_CASE("s2-spin scan: zeros exactly at 0, 2pi, 4pi")
    {
        const auto r = scan_default("s2-spin");
        REQUIRE(r.estimates.size() == 129);
        REQUIRE(r.zeros.size() == 3);
        CHECK(r.zeros[0] == TimeVector{0.0});
        CHECK(r.zeros[1] == TimeVector{two_pi});
        CHECK(r.zeros[2] == TimeVector{2 * two_pi});
        CHECK(r.verdict == Verdict::ToricEvidence);
        CHECK(r.zero_threshold == doctest::Approx(1e-6 * 4 * pi * r.cost_scale));
        CHECK(r.positivity_margin == 10 * r.zero_threshold);
        for (std::size_t i = 0; i < r.estimates.size(); ++i)
        {
            if (on_period_lattice(r.grid.point(i)))
                CHECK(r.estimates[i].value < r.point_threshold(i));
            else
                CHECK(r.estimates[i].value > r.point_margin(i));
        }
    }

    TEST_CASE("t2-cos and perturbed scans: only the origin is a zero")
    {
        for (const char* id : {"t2-cos", "s2-spin-perturbed"})
        {
            CAPTURE(id);
            const auto r = scan_default(id);
            REQUIRE(r.zeros.size() == 1);
            CHECK(r.zeros[0] == TimeVector{0.0});
            CHECK(r.verdict == Verdict::NotToric);
            REQUIRE(r.diagonal_index);
            const auto& d = r.estimates[*r.diagonal_index];
            CHECK(d.value > 5 * d.std_error);
        }
    }

    TEST_CASE("refine_zero examples")
    {
        const auto spin = build("s2-spin");
        const auto c = make_cost("chordal-sq", spin.chart);
        const IntegratorConfig cfg;
        const auto near = refine_zero(spin, c, TimeVector{6.2}, 0.2, 100000, 42, cfg);
        CHECK(std::abs(near.t[0] - two_pi) <= 1e-3);

        const auto exact = refine_zero(spin, c, TimeVector{two_pi}, 0.1, 100000, 42, cfg);
        CHECK(exact.t == TimeVector{two_pi});
        const auto r = scan_default("s2-spin");
        CHECK(exact.estimate.value < r.zero_threshold);

        const auto torus = build("t2-cos");
        const auto ct = make_cost("chordal-sq", torus.chart);
        const auto local = refine_zero(torus, ct, TimeVector{7.0}, 0.5, 100000, 42, cfg);
        const auto rt = scan_default("t2-cos");
        CHECK(local.estimate.value > rt.positivity_margin);
        const double floor_value = oracle::torus_shear(0.0, oracle::j0_local_max);
        MESSAGE("t2-cos local minimum " << local.t[0] << " value " << local.estimate.value
                                       << " oracle " << floor_value);
        CHECK(std::abs(local.estimate.value - floor_value) <= 4 * local.estimate.std_error);

        CHECK_THROWS_AS(refine_zero(spin, c, TimeVector{6.2}, 0.0, 1000, 1, cfg), ValidationError);
    }

    TEST_CASE("classify on the catalog")
    {
        const IntegratorConfig cfg;
        struct Case
        {
            const char* id;
            Verdict verdict;
            double period;
        };
        for (const Case& cs : {Case{"s2-spin", Verdict::ToricEvidence, two_pi},
                               Case{"s2-spin-halfspeed", Verdict::ToricEvidence, 2 * two_pi},
                               Case{"t2-cos", Verdict::NotToric, 0.0},
                               Case{"s2-spin-perturbed", Verdict::NotToric, 0.0}})
        {
            CAPTURE(cs.id);
            const auto sys = build(cs.id);
            const auto k = classify(sys, make_cost("chordal-sq", sys.chart), ScanGrid::default_for(1),
                                    100000, 42, cfg);
            CHECK(k.verdict == cs.verdict);
            CHECK_FALSE(k.report.empty());
            if (cs.verdict == Verdict::ToricEvidence)
            {
                REQUIRE(k.period);
                CHECK(std::abs((*k.period)[0] - cs.period) <= 1e-3);
            }
            else
            {
                CHECK_FALSE(k.period);
            }
        }
    }

    TEST_CASE("classify on the product on a 33 x 33 grid")
    {
        const auto sys = build("s2xs2-toric");
        const ScanGrid grid({AxisRange{0.0, 2 * two_pi, 33}, AxisRange{0.0, 2 * two_pi, 33}});
        const auto k = classify(sys, make_cost("chordal-sq", sys.chart), grid, 20000, 42,
                                IntegratorConfig{});
        CHECK(k.verdict == Verdict::ToricEvidence);
        REQUIRE(k.period);
        CHECK(std::abs((*k.period)[0] - two_pi) <= 1e-3);
        CHECK(std::abs((*k.period)[1] - two_pi) <= 1e-3);
        // (2pi, 0) is a zero as well: the lattice is 2pi Z^2, not only the diagonal
        CHECK(k.scan.zeros.size() == 9);
    }

    TEST_CASE("unresolvable noise gives Inconclusive")
    {
        // C_2pi is about 7e-5 here: above the scale floor but under its margin.
        const auto sys = build("s2-spin-perturbed", {{"eps", 0.0005}});
        const double c2pi = oracle::gauss_legendre(
            [](double z) {
                return 2 * pi * (1 - z * z) * 2 * (1 - std::cos((1 + 0.001 * z) * two_pi));
            },
            -1.0, 1.0);
        const auto k = classify(sys, make_cost("chordal-sq", sys.chart), ScanGrid::default_for(1),
                                100000, 42, IntegratorConfig{});
        MESSAGE("C_2pi oracle " << c2pi << ", threshold " << k.scan.zero_threshold);
        CHECK(c2pi > k.scan.zero_threshold);
        CHECK(c2pi < k.scan.positivity_margin);
        CHECK(k.verdict == Verdict::Inconclusive);
        CHECK(k.scan.verdict == Verdict::Inconclusive);
    }

    TEST_CASE("zero-set symmetry in t")
    {
        for (const auto& entry : catalog())
        {
            CAPTURE(entry.id);
            const auto sys = build(entry.id);
            const auto c = make_cost("chordal-sq", sys.chart);
            const std::size_t n = sys.components.size();
            for (const double s : {0.7, 2.0, pi, 5.5})
            {
                TimeVector t(n), minus(n);
                for (std::size_t k = 0; k < n; ++k)
                {
                    t[k] = s * (k + 1);
                    minus[k] = -t[k];
                }
                const auto a = periodicity_cost(sys, t, c, 20000, 3, IntegratorConfig{});
                const auto b = periodicity_cost(sys, minus, c, 20000, 4, IntegratorConfig{});
                const double combined = std::hypot(a.std_error, b.std_error);
                CHECK(std::abs(a.value - b.value) <= 3 * combined + 1e-12);
            }
        }
    }

    TEST_CASE("doubling the grid keeps every zero")
    {
        for (const char* id : {"s2-spin", "s2-spin-halfspeed", "t2-cos"})
        {
            CAPTURE(id);
            const auto sys = build(id);
            const auto c = make_cost("chordal-sq", sys.chart);
            const ScanGrid coarse({AxisRange{0.0, 2 * two_pi, 65}});
            const auto rc = scan(sys, c, coarse, 20000, 5, IntegratorConfig{});
            const auto rf = scan(sys, c, ScanGrid::default_for(1), 20000, 5, IntegratorConfig{});
            for (const auto& z : rc.zeros)
            {
                bool kept = false;
                for (const auto& f : rf.zeros)
                    kept = kept || f == z;
                CHECK(kept);
            }
            for (const auto& f : rf.zeros)
            {
                bool near = false;
                for (const auto& z : rc.zeros)
                    near = near || std::abs(f[0] - z[0]) <= coarse.spacing(0) + 1e-12;
                CHECK(near);
            }
        }
    }

    TEST_CASE("verdicts are deterministic")
    {
        const auto sys = build("s2-spin-halfspeed");
        const auto c = make_cost("chordal-sq", sys.chart);
        const ScanGrid grid({AxisRange{0.0, 2 * two_pi, 65}});
        const auto a = classify(sys, c, grid, 20000, 11, IntegratorConfig{});
        const auto b = classify(sys, c, grid, 20000, 11, IntegratorConfig{});
        CHECK(a.verdict == b.verdict);
        CHECK(a.period == b.period);
        CHECK(a.report == b.report);
        for (std::size_t i = 0; i < a.scan.estimates.size(); ++i)
            CHECK(a.scan.estimates[i].value == b.scan.estimates[i].value);
    }

    TEST_CASE("scan argument validation")
    {
        const auto sys = build("s2xs2-toric");
        CHECK_THROWS_AS(scan(sys, make_cost("chordal-sq", sys.chart), ScanGrid::default_for(1), 1000,
                             1, IntegratorConfig{}),
                        ValidationError);
    }
}
