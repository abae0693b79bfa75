#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "toricost/fixed_vector.hpp"

namespace toricost
{

inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// Reduce an angle into [0, 2pi).
double reduce_angle(double angle) noexcept;

/// Signed angular difference a - b folded into (-pi, pi].
double angle_difference(double a, double b) noexcept;

/// Range of one Darboux coordinate: either a full circle [0, 2pi) or a
/// bounded open interval (lo, hi).
struct CoordRange
{
    double lo = 0.0;
    double hi = two_pi;
    bool angular = true;

    static CoordRange circle() { return {0.0, two_pi, true}; }
    static CoordRange open(double lo, double hi) { return {lo, hi, false}; }

    double length() const noexcept { return hi - lo; }
    bool contains(double x) const noexcept;
};

/// Degenerate locus of a chart (measure zero), e.g. the poles of S^2.
struct SingularSetSpec
{
    std::string description;
    std::function<bool(const ChartPoint&)> contains;

    bool operator()(const ChartPoint& p) const { return contains && contains(p); }
};

using EmbedFn = std::function<AmbientPoint(const ChartPoint&)>;

/// A compact symplectic manifold given by one Darboux chart whose coordinate
/// box carries the symplectic volume as Lebesgue measure.
///
/// Coordinates come in consecutive pairs (q_i, p_i) with
/// omega = sum_i dq_i ^ dp_i.
class DarbouxChart
{
public:
    DarbouxChart(std::string id, std::vector<CoordRange> ranges,
                 std::size_t embedding_dim, EmbedFn embed,
                 SingularSetSpec singular = {});

    const std::string& id() const noexcept { return id_; }
    std::size_t half_dimension() const noexcept { return ranges_.size() / 2; }
    std::size_t dimension() const noexcept { return ranges_.size(); }
    const std::vector<CoordRange>& ranges() const noexcept { return ranges_; }
    std::size_t embedding_dim() const noexcept { return embedding_dim_; }
    const SingularSetSpec& singular() const noexcept { return singular_; }

    /// Product of coordinate-range lengths, i.e. mu_omega(M).
    double total_volume() const noexcept;

    /// Map into the ambient Euclidean space; throws std::domain_error for
    /// points outside the chart.
    AmbientPoint embed(const ChartPoint& p) const;

    bool is_singular(const ChartPoint& p) const { return singular_(p); }

    /// Dimension and range membership (angles must already be reduced).
    bool contains(const ChartPoint& p) const noexcept;

    /// Throws ValidationError unless contains(p).
    void validate(const ChartPoint& p) const;

    /// Reduce angular coordinates mod 2pi; other coordinates untouched.
    ChartPoint reduce(ChartPoint p) const noexcept;

private:
    std::string id_;
    std::vector<CoordRange> ranges_;
    std::size_t embedding_dim_;
    EmbedFn embed_;
    SingularSetSpec singular_;
};

/// S^2 in cylindrical coordinates (theta, z), omega = d theta ^ dz, poles
/// excluded. Embeds as the unit sphere in R^3.
DarbouxChart sphere_chart();

/// T^2 with angles (theta_1, theta_2), omega = d theta_1 ^ d theta_2.
/// Embeds as a product of unit circles in R^4.
DarbouxChart torus_chart();

/// Cartesian product: concatenated coordinates, ranges and embeddings.
DarbouxChart product_chart(const DarbouxChart& a, const DarbouxChart& b);

/// Catalog lookup: "s2", "t2", "s2xs2".
DarbouxChart chart_by_id(const std::string& id);

/// The index-th mu_omega-uniform sample of the run identified by seed.
/// Draws landing on the singular locus or on an open-interval endpoint are
/// redrawn from the same stream.
ChartPoint sample_point(const DarbouxChart& chart, std::uint64_t seed,
                        std::uint64_t index);

/// count i.i.d. uniform points; identical for a fixed (chart, count, seed)
/// regardless of the worker count.
std::vector<ChartPoint> sample_points(const DarbouxChart& chart,
                                      std::size_t count, std::uint64_t seed);

double total_volume(const DarbouxChart& chart);

AmbientPoint embed(const DarbouxChart& chart, const ChartPoint& p);

double euclidean_distance(const AmbientPoint& a, const AmbientPoint& b);

}  // namespace toricost
