#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace bimagelsh {

/// Inclusive range of bucket cell indices [lo, hi].
struct CellRange {
    std::int64_t lo;
    std::int64_t hi;

    bool contains(std::int64_t cell) const { return lo <= cell && cell <= hi; }
    bool contains(const CellRange& other) const { return lo <= other.lo && other.hi <= hi; }
    bool operator==(const CellRange&) const = default;
};

/// m Gaussian random projections of R^d with bucket width w and ratio c.
///
/// Query-aware: a point x collides with query q in projection i at radius R
/// iff |<a_i, q> - <a_i, x>| <= w*R/2. Bucket cells are the half-open
/// intervals [j*w, (j+1)*w) of projected values. The family is a pure
/// function of (seed, m, d, w, c); only those five values are persisted.
class ProjectionFamily {
public:
    ProjectionFamily(std::uint64_t seed, std::uint32_t m, std::size_t dim, double w, double c);

    std::uint64_t seed() const { return seed_; }
    std::uint32_t size() const { return m_; }
    std::size_t dim() const { return dim_; }
    double width() const { return w_; }
    double ratio() const { return c_; }

    std::span<const double> direction(std::uint32_t i) const;

    double project(std::uint32_t i, std::span<const float> x) const;
    double project(std::uint32_t i, std::span<const double> x) const;
    /// All m projections of x.
    std::vector<double> project_all(std::span<const float> x) const;

    /// Half-width of the collision window at radius R.
    double half_window(double radius) const { return w_ * radius / 2.0; }
    std::int64_t cell_of(double projected) const;

    bool collides(std::uint32_t i, std::span<const float> q, std::span<const float> x, double radius) const;
    bool collides_projected(double q_projected, double x_projected, double radius) const;

    /// Cells overlapped by [p(q) - wR/2, p(q) + wR/2].
    CellRange cell_range(std::uint32_t i, std::span<const float> q, double radius) const;
    CellRange cell_range_projected(double q_projected, double radius) const;

    /// Cells that can hold points entering the window when its half-width
    /// grows from `previous_half` to `half`. A negative `previous_half` means
    /// no earlier window. Returns one or two disjoint ranges, ascending. The
    /// boundary cells of the previous window are included again since they may
    /// hold points that only collide at the wider window.
    std::vector<CellRange> growth_cells(double q_projected, double previous_half, double half) const;

    /// True iff a projected gap lies in (previous_half, half].
    static bool in_growth(double gap, double previous_half, double half) {
        return gap <= half && (previous_half < 0.0 || gap > previous_half);
    }

private:
    std::uint64_t seed_;
    std::uint32_t m_;
    std::size_t dim_;
    double w_;
    double c_;
    std::vector<double> directions_;  // m x d, row-major
};

/// Virtual rehashing radius at round t: c^t.
double radius_schedule(double c, std::uint32_t round);

}  // namespace bimagelsh
