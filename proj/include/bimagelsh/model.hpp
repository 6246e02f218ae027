#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace bimagelsh {

using PointId = std::uint32_t;
using ImageId = std::uint32_t;
using Category = std::uint32_t;

/// One descriptor of the dataset, viewed in place.
struct DescriptorPoint {
    PointId point_id;
    ImageId image_id;
    std::span<const float> vector;
};

struct ImageRecord {
    ImageId image_id = 0;
    std::vector<PointId> descriptor_ids;
    std::optional<Category> category;
};

/// An immutable collection of descriptors grouped into images.
///
/// Coordinates are stored row-major as 32-bit floats; point ids are row
/// indices. Image ids must be dense in [0, S): every image owns at least one
/// descriptor. Categories are either known for every image or for none.
class Dataset {
public:
    Dataset() = default;

    /// Validates ownership, dimensions and counts; throws DimensionError or
    /// DomainError on inconsistent input.
    Dataset(std::size_t dim, std::vector<float> coords, std::vector<ImageId> owners,
            std::optional<std::vector<Category>> image_categories = std::nullopt);

    std::size_t dim() const { return dim_; }
    std::size_t size() const { return owners_.size(); }
    std::size_t image_count() const { return images_.size(); }
    bool has_categories() const { return has_categories_; }

    std::span<const float> vector(PointId id) const {
        return {coords_.data() + static_cast<std::size_t>(id) * dim_, dim_};
    }
    ImageId image_of(PointId id) const { return owners_[id]; }
    DescriptorPoint point(PointId id) const { return {id, owners_[id], vector(id)}; }

    const ImageRecord& image(ImageId id) const { return images_.at(id); }
    const std::vector<ImageRecord>& images() const { return images_; }
    std::optional<Category> category_of(ImageId id) const { return images_.at(id).category; }

    const std::vector<float>& coords() const { return coords_; }
    const std::vector<ImageId>& owners() const { return owners_; }

private:
    std::size_t dim_ = 0;
    std::vector<float> coords_;
    std::vector<ImageId> owners_;
    std::vector<ImageRecord> images_;
    bool has_categories_ = false;
};

/// The bag of descriptors of a query image.
class QueryImage {
public:
    QueryImage(std::size_t dim, std::vector<float> coords);

    static QueryImage from_image(const Dataset& data, ImageId id);

    std::size_t dim() const { return dim_; }
    std::size_t size() const { return coords_.size() / dim_; }
    std::span<const float> descriptor(std::size_t i) const {
        return {coords_.data() + i * dim_, dim_};
    }

private:
    std::size_t dim_;
    std::vector<float> coords_;
};

/// Interpretation of the second half of the Useful / S1 condition.
enum class UsefulRule {
    /// 1 - cDist >= gamma: at least a gamma fraction of pairs verified within c*R.
    VerifiedSimilarity,
    /// cDist >= gamma, taken literally.
    LiteralCDist,
};

/// Query and build parameters. Zero in `m`, `l` or `v_images` means "derive
/// the default" (see resolve()).
struct Params {
    std::uint32_t m = 0;
    double w = 2.0;
    double c = 2.0;
    std::uint32_t l = 0;
    double gamma = 0.000475;
    double uthres = 0.03;
    std::uint32_t k = 20;
    std::uint32_t k_prime = 100;
    std::uint32_t v_images = 0;
    std::uint32_t v_prime_points = 100;
    std::uint32_t max_radius_exponent = 20;
    std::uint64_t seed = 42;
    UsefulRule useful_rule = UsefulRule::VerifiedSimilarity;
    /// Query image left out of the result set (hold-out evaluation).
    std::optional<ImageId> excluded_image;

    /// Fills the derived defaults for a dataset of n points and validates.
    /// m = 8*ceil(log2 n) clamped to [8, 64], l = ceil(0.6 m), v_images = k.
    Params resolve(std::size_t n) const;

    /// Throws DomainError when an invariant is violated. Expects resolved values.
    void validate() const;
};

double euclidean(std::span<const float> a, std::span<const float> b);
double euclidean(std::span<const double> a, std::span<const double> b);

/// Fraction of descriptor pairs (x1, x2) with ||x1 - x2|| <= radius.
double sim_images(const ImageRecord& x1, const ImageRecord& x2, double radius, const Dataset& data);
double dist_images(const ImageRecord& x1, const ImageRecord& x2, double radius, const Dataset& data);

double sim_query(const QueryImage& query, const ImageRecord& image, double radius, const Dataset& data);

struct ScoredImage {
    ImageId image_id;
    double similarity;
};

/// Exact top-k images by image distance to the query, ascending; ties broken
/// by image id. Requires k <= S.
std::vector<ScoredImage> exact_top_k_images(const QueryImage& query, std::size_t k, double radius,
                                            const Dataset& data);

}  // namespace bimagelsh
