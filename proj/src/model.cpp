#include "bimagelsh/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bimagelsh/errors.hpp"

namespace bimagelsh {

Dataset::Dataset(std::size_t dim, std::vector<float> coords, std::vector<ImageId> owners,
                 std::optional<std::vector<Category>> image_categories)
    : dim_(dim), coords_(std::move(coords)), owners_(std::move(owners)) {
    if (dim_ == 0) {
        throw DimensionError("dataset dimensionality must be positive");
    }
    if (owners_.empty()) {
        throw DomainError("dataset has no descriptors");
    }
    if (coords_.size() != owners_.size() * dim_) {
        throw DimensionError("coordinate count " + std::to_string(coords_.size()) + " != n*d = " +
                             std::to_string(owners_.size() * dim_));
    }
    const ImageId max_id = *std::max_element(owners_.begin(), owners_.end());
    images_.resize(static_cast<std::size_t>(max_id) + 1);
    for (ImageId j = 0; j < images_.size(); ++j) {
        images_[j].image_id = j;
    }
    for (PointId i = 0; i < owners_.size(); ++i) {
        images_[owners_[i]].descriptor_ids.push_back(i);
    }
    for (const auto& img : images_) {
        if (img.descriptor_ids.empty()) {
            throw DomainError("image " + std::to_string(img.image_id) +
                              " owns no descriptors; image ids must be dense");
        }
    }
    if (image_categories) {
        if (image_categories->size() != images_.size()) {
            throw DomainError("category count " + std::to_string(image_categories->size()) +
                              " != image count " + std::to_string(images_.size()));
        }
        for (std::size_t j = 0; j < images_.size(); ++j) {
            images_[j].category = (*image_categories)[j];
        }
        has_categories_ = true;
    }
}

QueryImage::QueryImage(std::size_t dim, std::vector<float> coords)
    : dim_(dim), coords_(std::move(coords)) {
    if (dim_ == 0 || coords_.empty()) {
        throw DomainError("query image must hold at least one descriptor");
    }
    if (coords_.size() % dim_ != 0) {
        throw DimensionError("query coordinates are not a multiple of the dimensionality");
    }
}

QueryImage QueryImage::from_image(const Dataset& data, ImageId id) {
    const auto& record = data.image(id);
    std::vector<float> coords;
    coords.reserve(record.descriptor_ids.size() * data.dim());
    for (PointId p : record.descriptor_ids) {
        auto v = data.vector(p);
        coords.insert(coords.end(), v.begin(), v.end());
    }
    return QueryImage(data.dim(), std::move(coords));
}

Params Params::resolve(std::size_t n) const {
    Params out = *this;
    if (out.m == 0) {
        const auto bits = static_cast<std::uint32_t>(std::ceil(std::log2(static_cast<double>(std::max<std::size_t>(n, 2)))));
        out.m = std::clamp<std::uint32_t>(8 * bits, 8, 64);
    }
    if (out.l == 0) {
        out.l = static_cast<std::uint32_t>(std::ceil(0.6 * out.m));
    }
    if (out.v_images == 0) {
        out.v_images = out.k;
    }
    out.validate();
    return out;
}

void Params::validate() const {
    auto fail = [](const std::string& what) { throw DomainError("invalid parameters: " + what); };
    if (m == 0 || m > 255) fail("m must be in [1, 255]");
    if (!(w > 0.0)) fail("w must be positive");
    if (!(c > 1.0)) fail("c must exceed 1");
    if (l < 1 || l > m) fail("l must be in [1, m]");
    if (!(gamma >= 0.0 && gamma <= 1.0)) fail("gamma must be in [0, 1]");
    if (!(uthres >= 0.0 && uthres <= 1.0)) fail("uthres must be in [0, 1]");
    if (k < 1) fail("k must be at least 1");
    if (k_prime < k) fail("k' must be at least k");
}

namespace {

template <typename T>
double euclidean_impl(std::span<const T> a, std::span<const T> b) {
    if (a.size() != b.size()) {
        throw DimensionError("vector lengths differ: " + std::to_string(a.size()) + " vs " +
                             std::to_string(b.size()));
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double diff = static_cast<double>(a[i]) - static_cast<double>(b[i]);
        sum += diff * diff;
    }
    return std::sqrt(sum);
}

template <typename LeftAt>
double pair_fraction(std::size_t left_size, LeftAt left_at, const ImageRecord& right, double radius,
                     const Dataset& data) {
    if (radius < 0.0) {
        throw DomainError("radius must be non-negative");
    }
    if (left_size == 0 || right.descriptor_ids.empty()) {
        throw DomainError("image similarity needs non-empty descriptor sets");
    }
    std::size_t within = 0;
    for (std::size_t i = 0; i < left_size; ++i) {
        auto a = left_at(i);
        for (PointId p : right.descriptor_ids) {
            if (euclidean(a, data.vector(p)) <= radius) {
                ++within;
            }
        }
    }
    return static_cast<double>(within) /
           (static_cast<double>(left_size) * static_cast<double>(right.descriptor_ids.size()));
}

}  // namespace

double euclidean(std::span<const float> a, std::span<const float> b) { return euclidean_impl(a, b); }
double euclidean(std::span<const double> a, std::span<const double> b) { return euclidean_impl(a, b); }

double sim_images(const ImageRecord& x1, const ImageRecord& x2, double radius, const Dataset& data) {
    return pair_fraction(
        x1.descriptor_ids.size(), [&](std::size_t i) { return data.vector(x1.descriptor_ids[i]); }, x2,
        radius, data);
}

double dist_images(const ImageRecord& x1, const ImageRecord& x2, double radius, const Dataset& data) {
    return 1.0 - sim_images(x1, x2, radius, data);
}

double sim_query(const QueryImage& query, const ImageRecord& image, double radius, const Dataset& data) {
    if (query.dim() != data.dim()) {
        throw DimensionError("query dimensionality does not match the dataset");
    }
    return pair_fraction(
        query.size(), [&](std::size_t i) { return query.descriptor(i); }, image, radius, data);
}

std::vector<ScoredImage> exact_top_k_images(const QueryImage& query, std::size_t k, double radius,
                                            const Dataset& data) {
    if (k > data.image_count()) {
        throw DomainError("k exceeds the number of images");
    }
    std::vector<ScoredImage> scored;
    scored.reserve(data.image_count());
    for (const auto& img : data.images()) {
        scored.push_back({img.image_id, sim_query(query, img, radius, data)});
    }
    // Ascending distance == descending similarity.
    auto by_rank = [](const ScoredImage& a, const ScoredImage& b) {
        if (a.similarity != b.similarity) return a.similarity > b.similarity;
        return a.image_id < b.image_id;
    };
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(k), scored.end(), by_rank);
    scored.resize(k);
    return scored;
}

}  // namespace bimagelsh
