#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "toricost/costs.hpp"
#include "toricost/dynamics.hpp"

namespace toricost
{

enum class Verdict
{
    ToricEvidence,
    NotToric,
    Inconclusive,
};

std::string to_string(Verdict v);
Verdict verdict_from_string(const std::string& s);

struct AxisRange
{
    double t_min = 0.0;
    double t_max = 2.0 * two_pi;
    std::size_t steps = 129;
};

/// Tensor grid of time parameters, visited in lexicographic order (t_1
/// slowest). Grid values within 1e-9 of a multiple of 2pi are snapped onto
/// it so the lattice points (2 pi k) are represented exactly.
class ScanGrid
{
public:
    explicit ScanGrid(std::vector<AxisRange> axes);

    /// [0, 4pi] with 129 steps on each of n axes.
    static ScanGrid default_for(std::size_t n);

    const std::vector<AxisRange>& axes() const noexcept { return axes_; }
    std::size_t dimension() const noexcept { return axes_.size(); }
    std::size_t size() const noexcept;
    double spacing(std::size_t axis) const;
    double axis_value(std::size_t axis, std::size_t i) const;
    TimeVector point(std::size_t flat_index) const;
    /// Flat index of the grid point exactly equal to t, if any.
    std::optional<std::size_t> find(const TimeVector& t) const;

private:
    std::vector<AxisRange> axes_;
};

/// Coordinates all lie in 2 pi Z (exact after grid snapping).
bool on_period_lattice(const TimeVector& t);

enum class PointClass
{
    Zero,
    Positive,
    Undecided,
};

struct ScanResult
{
    ScanGrid grid = ScanGrid::default_for(1);
    std::vector<CostEstimate> estimates;
    std::vector<PointClass> classes;
    std::vector<TimeVector> zeros;
    Verdict verdict = Verdict::Inconclusive;
    /// Scale floor 1e-6 * total_volume * cost_scale. A point is zero when
    /// value < max(floor, 5 std_error) and positive when value exceeds ten
    /// times that.
    double zero_threshold = 0.0;
    double positivity_margin = 0.0;
    double cost_scale = 0.0;
    std::optional<std::size_t> diagonal_index;

    double point_threshold(std::size_t i) const;
    double point_margin(std::size_t i) const;
};

/// Classification of one estimate against the scale floor.
PointClass classify_point(const CostEstimate& e, double zero_threshold);

/// Evaluate C_t on every grid point with common random numbers and apply
/// the zero-cost test at the diagonal (2pi, ..., 2pi).
ScanResult scan(const SystemDef& sys, const CostFunction& c, const ScanGrid& grid,
                std::size_t n_samples, std::uint64_t seed, const IntegratorConfig& cfg);

struct RefinedZero
{
    TimeVector t;
    CostEstimate estimate;
};

/// Minimize the estimate over the box of half-width `radius` around the
/// candidate: golden section for n = 1, coordinate descent of golden
/// sections for n >= 2. Returns the candidate itself when nothing better is
/// found.
RefinedZero refine_zero(const SystemDef& sys, const CostFunction& c,
                        const TimeVector& t_candidate, double radius, std::size_t n_samples,
                        std::uint64_t seed, const IntegratorConfig& cfg);

struct Classification
{
    Verdict verdict = Verdict::Inconclusive;
    /// Smallest positive per-axis generator of the zero lattice.
    std::optional<TimeVector> period;
    std::optional<RefinedZero> refined;
    ScanResult scan;
    std::string report;
};

/// Scan, refine the lattice generator, and decide. A lattice {m T} of zeros
/// with positive costs elsewhere gives ToricEvidence with period T; a
/// zero-free window with positive cost at (2pi, ..., 2pi) gives NotToric.
Classification classify(const SystemDef& sys, const CostFunction& c, const ScanGrid& grid,
                        std::size_t n_samples, std::uint64_t seed, const IntegratorConfig& cfg);

}  // namespace toricost
