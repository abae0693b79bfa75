#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>

namespace toricost
{

/// Small inline vector of doubles with a compile-time capacity.
///
/// The tag parameter keeps chart points, tangent vectors, ambient points and
/// time vectors distinct at the type level even though they share storage.
template <class Tag, std::size_t Capacity>
class FixedVector
{
public:
    static constexpr std::size_t capacity = Capacity;

    FixedVector() = default;

    explicit FixedVector(std::size_t size) : size_(size)
    {
        if (size > Capacity)
            throw std::length_error("FixedVector: size exceeds capacity");
    }

    FixedVector(std::initializer_list<double> values)
        : FixedVector(values.size())
    {
        std::copy(values.begin(), values.end(), data_.begin());
    }

    static FixedVector from(std::span<const double> values)
    {
        FixedVector v(values.size());
        std::copy(values.begin(), values.end(), v.data_.begin());
        return v;
    }

    std::size_t size() const noexcept { return size_; }
    bool empty() const noexcept { return size_ == 0; }

    double& operator[](std::size_t i) noexcept { return data_[i]; }
    double operator[](std::size_t i) const noexcept { return data_[i]; }

    double* begin() noexcept { return data_.data(); }
    double* end() noexcept { return data_.data() + size_; }
    const double* begin() const noexcept { return data_.data(); }
    const double* end() const noexcept { return data_.data() + size_; }

    std::span<double> span() noexcept { return {data_.data(), size_}; }
    std::span<const double> span() const noexcept { return {data_.data(), size_}; }

    friend bool operator==(const FixedVector& a, const FixedVector& b)
    {
        return a.size_ == b.size_ && std::equal(a.begin(), a.end(), b.begin());
    }

private:
    std::array<double, Capacity> data_{};
    std::size_t size_ = 0;
};

struct ChartPointTag;
struct TangentTag;
struct AmbientTag;
struct TimeTag;

/// Darboux coordinates of a point; angular entries are kept in [0, 2pi).
using ChartPoint = FixedVector<ChartPointTag, 8>;
/// Tangent or cotangent vector expressed in chart coordinates.
using TangentVector = FixedVector<TangentTag, 8>;
/// Point of the ambient Euclidean space a chart embeds into.
using AmbientPoint = FixedVector<AmbientTag, 12>;
/// Flow times (t_1, ..., t_n), one per momentum-map component.
using TimeVector = FixedVector<TimeTag, 4>;

}  // namespace toricost
