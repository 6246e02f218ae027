#pragma once

#include <unistd.h>

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "bimagelsh/model.hpp"

namespace bimagelsh::testing {

/// Fresh scratch directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static int counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("bimagelsh_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline std::vector<float> random_vector(std::size_t dim, std::mt19937_64& rng, float scale = 1.0f) {
    std::normal_distribution<float> normal(0.0f, scale);
    std::vector<float> v(dim);
    for (auto& x : v) x = normal(rng);
    return v;
}

/// Dataset with `images` images of `per_image` random descriptors each.
inline Dataset random_dataset(std::size_t images, std::size_t per_image, std::size_t dim, std::uint64_t seed,
                              float scale = 1.0f) {
    std::mt19937_64 rng(seed);
    std::vector<float> coords;
    std::vector<ImageId> owners;
    for (std::size_t j = 0; j < images; ++j) {
        for (std::size_t p = 0; p < per_image; ++p) {
            auto v = random_vector(dim, rng, scale);
            coords.insert(coords.end(), v.begin(), v.end());
            owners.push_back(static_cast<ImageId>(j));
        }
    }
    return Dataset(dim, std::move(coords), std::move(owners));
}

}  // namespace bimagelsh::testing

#include <fstream>
#include <map>

namespace bimagelsh::testing {

inline std::vector<std::uint8_t> file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Relative path -> contents of every regular file below `root`.
inline std::map<std::string, std::vector<std::uint8_t>> snapshot(const std::filesystem::path& root) {
    std::map<std::string, std::vector<std::uint8_t>> out;
    for (const auto& entry : std::filesystem::recursive_directory_iterator(root)) {
        if (entry.is_regular_file()) {
            out[std::filesystem::relative(entry.path(), root).string()] = file_bytes(entry.path());
        }
    }
    return out;
}

}  // namespace bimagelsh::testing
