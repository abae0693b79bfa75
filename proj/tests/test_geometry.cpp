#include "doctest.h"

#include <array>
#include <cmath>
#include <cstdlib>
#include <numbers>

#include "oracles.hpp"
#include "toricost/errors.hpp"
#include "toricost/geometry.hpp"

using namespace toricost;

namespace
{

struct ThreadsOverride
{
    explicit ThreadsOverride(const char* value) { setenv("TORICOST_THREADS", value, 1); }
    ~ThreadsOverride() { unsetenv("TORICOST_THREADS"); }
};

double chi_square_10_bins(const std::vector<ChartPoint>& pts, std::size_t coord, double lo,
                          double hi)
{
    std::array<double, 10> counts{};
    for (const auto& p : pts)
    {
        auto bin = static_cast<std::size_t>((p[coord] - lo) / (hi - lo) * 10.0);
        counts[std::min<std::size_t>(bin, 9)] += 1.0;
    }
    const double expected = static_cast<double>(pts.size()) / 10.0;
    double chi2 = 0.0;
    for (const double c : counts)
        chi2 += (c - expected) * (c - expected) / expected;
    return chi2;
}

}  // namespace

TEST_SUITE("geometry")
{
    TEST_CASE("angle reduction stays in [0, 2pi)")
    {
        CHECK(reduce_angle(0.0) == 0.0);
        CHECK(reduce_angle(two_pi) == 0.0);
        CHECK(reduce_angle(-1e-300) < two_pi);
        CHECK(reduce_angle(-std::nextafter(0.0, 1.0)) < two_pi);
        CHECK(reduce_angle(3.0 * two_pi + 1.0) == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(reduce_angle(-0.5) == doctest::Approx(two_pi - 0.5));
        CHECK(angle_difference(0.1, two_pi - 0.1) == doctest::Approx(0.2));
        CHECK(angle_difference(two_pi - 0.1, 0.1) == doctest::Approx(-0.2));
    }

    TEST_CASE("sphere samples lie in the chart")
    {
        const auto chart = sphere_chart();
        const auto pts = sample_points(chart, 4, 7);
        REQUIRE(pts.size() == 4);
        for (const auto& p : pts)
        {
            CHECK(p.size() == 2);
            CHECK(p[0] >= 0.0);
            CHECK(p[0] < two_pi);
            CHECK(p[1] > -1.0);
            CHECK(p[1] < 1.0);
        }
    }

    TEST_CASE("sampling is deterministic for a fixed seed")
    {
        const auto chart = sphere_chart();
        CHECK(sample_points(chart, 4, 7) == sample_points(chart, 4, 7));
        CHECK(sample_points(chart, 4, 7) != sample_points(chart, 4, 8));
    }

    TEST_CASE("samples do not depend on the worker count")
    {
        const auto chart = product_chart(sphere_chart(), sphere_chart());
        std::vector<ChartPoint> one, many;
        {
            ThreadsOverride t("1");
            one = sample_points(chart, 20000, 3);
        }
        {
            ThreadsOverride t("4");
            many = sample_points(chart, 20000, 3);
        }
        CHECK(one == many);
    }

    TEST_CASE("zero count is rejected")
    {
        CHECK_THROWS_AS(sample_points(sphere_chart(), 0, 1), ValidationError);
    }

    TEST_CASE("sphere height has mean zero")
    {
        const auto pts = sample_points(sphere_chart(), 1000000, 1);
        double sum = 0.0;
        for (const auto& p : pts)
            sum += p[1];
        const double mean = sum / 1e6;
        const double stderr_z = (1.0 / std::sqrt(3.0)) / 1e3;
        CHECK(std::abs(mean) < 3.0 * stderr_z);
    }

    TEST_CASE("marginal histograms pass chi-square at 0.001")
    {
        for (const char* id : {"s2", "t2", "s2xs2"})
        {
            CAPTURE(id);
            const auto chart = chart_by_id(id);
            const auto pts = sample_points(chart, 100000, 11);
            for (std::size_t c = 0; c < chart.dimension(); ++c)
            {
                CAPTURE(c);
                const auto& r = chart.ranges()[c];
                CHECK(chi_square_10_bins(pts, c, r.lo, r.hi) < oracle::chi2_999_dof9);
            }
        }
    }

    TEST_CASE("sub-box fraction approaches its volume share")
    {
        const auto chart = sphere_chart();
        const auto pts = sample_points(chart, 200000, 5);
        // theta in [1, 2.5), z in [-0.3, 0.6)
        const double share = (1.5 / two_pi) * (0.9 / 2.0);
        std::size_t inside = 0;
        for (const auto& p : pts)
            if (p[0] >= 1.0 && p[0] < 2.5 && p[1] >= -0.3 && p[1] < 0.6)
                ++inside;
        const double frac = static_cast<double>(inside) / 200000.0;
        const double sd = std::sqrt(share * (1.0 - share) / 200000.0);
        CHECK(std::abs(frac - share) < 4.0 * sd);
    }

    TEST_CASE("embeddings of the catalog charts")
    {
        const auto s2 = sphere_chart();
        const auto e0 = embed(s2, ChartPoint{0.0, 0.0});
        CHECK(e0 == AmbientPoint{1.0, 0.0, 0.0});
        const auto e1 = embed(s2, ChartPoint{std::numbers::pi / 2, 0.0});
        CHECK(e1[0] == doctest::Approx(0.0).epsilon(1e-15));
        CHECK(e1[1] == 1.0);
        CHECK(e1[2] == 0.0);

        CHECK(embed(torus_chart(), ChartPoint{0.0, 0.0}) == AmbientPoint{1.0, 0.0, 1.0, 0.0});

        CHECK_THROWS_AS(embed(s2, ChartPoint{0.0, 1.0}), std::domain_error);
        CHECK_THROWS_AS(embed(s2, ChartPoint{0.0, -1.5}), std::domain_error);
    }

    TEST_CASE("sphere embedding lands on the unit sphere")
    {
        const auto s2 = sphere_chart();
        for (const auto& p : sample_points(s2, 1000, 2))
        {
            const auto e = embed(s2, p);
            CHECK(e[0] * e[0] + e[1] * e[1] + e[2] * e[2] == doctest::Approx(1.0).epsilon(1e-14));
        }
    }

    TEST_CASE("embeddings are injective on random distinct pairs")
    {
        for (const char* id : {"s2", "t2", "s2xs2"})
        {
            CAPTURE(id);
            const auto chart = chart_by_id(id);
            const auto a = sample_points(chart, 1000, 21);
            const auto b = sample_points(chart, 1000, 22);
            for (std::size_t i = 0; i < a.size(); ++i)
            {
                REQUIRE(a[i] != b[i]);
                CHECK(euclidean_distance(chart.embed(a[i]), chart.embed(b[i])) > 0.0);
            }
        }
    }

    TEST_CASE("total volumes")
    {
        // Archimedes: the unit sphere has area 4 pi r^2.
        CHECK(total_volume(sphere_chart()) == doctest::Approx(4.0 * oracle::pi));
        CHECK(total_volume(torus_chart()) == doctest::Approx(4.0 * oracle::pi * oracle::pi));
        CHECK(total_volume(chart_by_id("s2xs2")) == doctest::Approx(16.0 * oracle::pi * oracle::pi));
    }

    TEST_CASE("product chart concatenates coordinates and singular sets")
    {
        const auto chart = chart_by_id("s2xs2");
        CHECK(chart.dimension() == 4);
        CHECK(chart.half_dimension() == 2);
        CHECK(chart.embedding_dim() == 6);
        const auto e = chart.embed(ChartPoint{0.0, 0.0, std::numbers::pi, 0.5});
        CHECK(e[0] == 1.0);
        CHECK(e[5] == 0.5);
        CHECK(chart.is_singular(ChartPoint{0.0, 0.0, 0.0, 1.0}));
        CHECK(chart.is_singular(ChartPoint{0.0, -1.0, 0.0, 0.0}));
        CHECK_FALSE(chart.is_singular(ChartPoint{0.0, 0.2, 0.0, 0.3}));
    }

    TEST_CASE("chart validation")
    {
        const auto s2 = sphere_chart();
        CHECK_NOTHROW(s2.validate(ChartPoint{1.0, 0.0}));
        CHECK_THROWS_AS(s2.validate(ChartPoint{two_pi, 0.0}), ValidationError);
        CHECK_THROWS_AS(s2.validate(ChartPoint{1.0, 1.0}), ValidationError);
        CHECK_THROWS_AS(s2.validate(ChartPoint{1.0}), ValidationError);
        CHECK_THROWS_AS(chart_by_id("cp2"), ValidationError);
        auto embed_fn = [](const ChartPoint&) { return AmbientPoint{0.0}; };
        CHECK_THROWS_AS(DarbouxChart("odd", {CoordRange::circle()}, 1, embed_fn), ValidationError);
        CHECK_THROWS_AS(DarbouxChart("empty", {CoordRange::circle(), CoordRange::open(1.0, 1.0)},
                                     1, embed_fn),
                        ValidationError);
    }
}
