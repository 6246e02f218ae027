#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "bimagelsh/model.hpp"

namespace bimagelsh {

/// A loaded or generated dataset together with its ground-truth categories.
using DatasetBundle = Dataset;

/// Reads an .fvecs file (per record: dimension u32 LE, then that many f32 LE)
/// and its image map (one line per vector: "imageId[,category]").
DatasetBundle load_fvecs(const std::filesystem::path& vectors, const std::filesystem::path& image_map);
/// Same for .bvecs (one unsigned byte per coordinate).
DatasetBundle load_bvecs(const std::filesystem::path& vectors, const std::filesystem::path& image_map);
/// Picks the reader by file extension.
DatasetBundle load_dataset(const std::filesystem::path& vectors, const std::filesystem::path& image_map);

/// Raw fvecs / bvecs decoding: returns (d, row-major coordinates).
std::pair<std::size_t, std::vector<float>> read_fvecs(const std::filesystem::path& path);
std::pair<std::size_t, std::vector<float>> read_bvecs(const std::filesystem::path& path);

void write_fvecs(const std::filesystem::path& path, std::size_t dim, std::span<const float> coords);
void write_image_map(const std::filesystem::path& path, const Dataset& data);
void export_dataset(const Dataset& data, const std::filesystem::path& vectors, const std::filesystem::path& image_map);

struct SyntheticSpec {
    std::uint32_t images = 200;
    std::uint32_t per_image = 50;
    std::uint32_t dim = 16;
    std::uint32_t categories = 10;
    /// Standard deviation of descriptors around their image centre.
    double spread = 0.5;
    /// Standard deviation of category centres around the origin.
    double category_scale = 10.0;
    /// Standard deviation of image centres around their category centre.
    double image_jitter = 1.0;
    std::uint64_t seed = 7;
};

/// Gaussian clusters: categories -> images -> descriptors. Image j belongs to
/// category j % categories. Deterministic in the spec.
DatasetBundle generate_synthetic(const SyntheticSpec& spec);

/// #returned images sharing the query category, divided by k.
double accuracy(std::span<const ImageId> returned, Category query_category, const Dataset& data, std::uint32_t k);

}  // namespace bimagelsh
