#include "bimagelsh/hashing.hpp"

#include <cmath>
#include <random>
#include <string>

#include "bimagelsh/errors.hpp"

namespace bimagelsh {

ProjectionFamily::ProjectionFamily(std::uint64_t seed, std::uint32_t m, std::size_t dim, double w, double c)
    : seed_(seed), m_(m), dim_(dim), w_(w), c_(c) {
    if (m == 0 || dim == 0) {
        throw DomainError("projection family needs m > 0 and d > 0");
    }
    if (!(w > 0.0) || !(c > 1.0)) {
        throw DomainError("projection family needs w > 0 and c > 1");
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    directions_.resize(static_cast<std::size_t>(m) * dim);
    for (double& v : directions_) {
        v = normal(rng);
    }
}

std::span<const double> ProjectionFamily::direction(std::uint32_t i) const {
    if (i >= m_) {
        throw BoundsError("projection " + std::to_string(i) + " out of range (m = " + std::to_string(m_) + ")");
    }
    return {directions_.data() + static_cast<std::size_t>(i) * dim_, dim_};
}

namespace {

template <typename T>
double dot(std::span<const double> a, std::span<const T> x) {
    double sum = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        sum += a[k] * static_cast<double>(x[k]);
    }
    return sum;
}

}  // namespace

double ProjectionFamily::project(std::uint32_t i, std::span<const float> x) const {
    if (x.size() != dim_) {
        throw DimensionError("vector has " + std::to_string(x.size()) + " coordinates, expected " +
                             std::to_string(dim_));
    }
    return dot(direction(i), x);
}

double ProjectionFamily::project(std::uint32_t i, std::span<const double> x) const {
    if (x.size() != dim_) {
        throw DimensionError("vector has " + std::to_string(x.size()) + " coordinates, expected " +
                             std::to_string(dim_));
    }
    return dot(direction(i), x);
}

std::vector<double> ProjectionFamily::project_all(std::span<const float> x) const {
    std::vector<double> out(m_);
    for (std::uint32_t i = 0; i < m_; ++i) {
        out[i] = project(i, x);
    }
    return out;
}

std::int64_t ProjectionFamily::cell_of(double projected) const {
    return static_cast<std::int64_t>(std::floor(projected / w_));
}

bool ProjectionFamily::collides_projected(double q_projected, double x_projected, double radius) const {
    return std::abs(q_projected - x_projected) <= half_window(radius);
}

bool ProjectionFamily::collides(std::uint32_t i, std::span<const float> q, std::span<const float> x,
                                double radius) const {
    return collides_projected(project(i, q), project(i, x), radius);
}

CellRange ProjectionFamily::cell_range_projected(double q_projected, double radius) const {
    const double half = half_window(radius);
    return {cell_of(q_projected - half), cell_of(q_projected + half)};
}

CellRange ProjectionFamily::cell_range(std::uint32_t i, std::span<const float> q, double radius) const {
    return cell_range_projected(project(i, q), radius);
}

std::vector<CellRange> ProjectionFamily::growth_cells(double q_projected, double previous_half,
                                                     double half) const {
    const CellRange outer{cell_of(q_projected - half), cell_of(q_projected + half)};
    if (previous_half < 0.0) {
        return {outer};
    }
    const CellRange left{outer.lo, cell_of(q_projected - previous_half)};
    const CellRange right{cell_of(q_projected + previous_half), outer.hi};
    if (left.hi + 1 >= right.lo) {
        return {outer};
    }
    return {left, right};
}

double radius_schedule(double c, std::uint32_t round) { return std::pow(c, static_cast<double>(round)); }

}  // namespace bimagelsh
