#include "bimagelsh/data.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <fstream>
#include <optional>
#include <random>
#include <string>

#include "bimagelsh/errors.hpp"

namespace bimagelsh {

namespace fs = std::filesystem;

namespace {

std::vector<std::uint8_t> slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary | std::ios::ate);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    const auto size = static_cast<std::size_t>(in.tellg());
    std::vector<std::uint8_t> bytes(size);
    in.seekg(0);
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(size));
    return bytes;
}

std::uint32_t le_u32(const std::uint8_t* p) {
    return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
           static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
}

template <typename DecodeCoord>
std::pair<std::size_t, std::vector<float>> read_vecs(const fs::path& path, std::size_t coord_size,
                                                     DecodeCoord decode) {
    const auto bytes = slurp(path);
    std::size_t dim = 0;
    std::vector<float> coords;
    std::size_t pos = 0;
    std::size_t record = 0;
    while (pos < bytes.size()) {
        if (bytes.size() - pos < 4) {
            throw FormatError(path.string() + ": truncated header of record " + std::to_string(record));
        }
        const std::uint32_t d = le_u32(bytes.data() + pos);
        pos += 4;
        if (d == 0) {
            throw FormatError(path.string() + ": record " + std::to_string(record) + " has dimension 0");
        }
        if (record == 0) {
            dim = d;
        } else if (d != dim) {
            throw FormatError(path.string() + ": record " + std::to_string(record) + " has dimension " +
                              std::to_string(d) + ", expected " + std::to_string(dim));
        }
        if (bytes.size() - pos < d * coord_size) {
            throw FormatError(path.string() + ": truncated record " + std::to_string(record));
        }
        for (std::uint32_t k = 0; k < d; ++k) {
            coords.push_back(decode(bytes.data() + pos));
            pos += coord_size;
        }
        ++record;
    }
    if (record == 0) {
        throw FormatError(path.string() + ": no vectors");
    }
    return {dim, std::move(coords)};
}

struct ImageMap {
    std::vector<ImageId> owners;
    std::optional<std::vector<Category>> categories;  // per image
};

ImageMap read_image_map(const fs::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    std::vector<ImageId> owners;
    std::vector<std::optional<Category>> point_categories;
    std::string line;
    std::size_t line_no = 0;
    auto parse = [&](std::string_view text, std::uint32_t& out) {
        auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
        if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
            throw FormatError(path.string() + ":" + std::to_string(line_no) + ": bad number '" + std::string(text) + "'");
        }
    };
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto comma = line.find(',');
        std::uint32_t image = 0;
        parse(std::string_view(line).substr(0, comma), image);
        owners.push_back(image);
        if (comma == std::string::npos) {
            point_categories.emplace_back();
        } else {
            std::uint32_t cat = 0;
            parse(std::string_view(line).substr(comma + 1), cat);
            point_categories.emplace_back(cat);
        }
    }

    ImageMap map;
    map.owners = std::move(owners);
    const bool any = std::any_of(point_categories.begin(), point_categories.end(), [](auto& c) { return c.has_value(); });
    const bool all = std::all_of(point_categories.begin(), point_categories.end(), [](auto& c) { return c.has_value(); });
    if (any && !all) {
        throw FormatError(path.string() + ": categories must be given on every line or on none");
    }
    if (all && !map.owners.empty()) {
        const ImageId max_id = *std::max_element(map.owners.begin(), map.owners.end());
        std::vector<std::optional<Category>> per_image(static_cast<std::size_t>(max_id) + 1);
        for (std::size_t i = 0; i < map.owners.size(); ++i) {
            auto& slot = per_image[map.owners[i]];
            if (slot && *slot != *point_categories[i]) {
                throw FormatError(path.string() + ": image " + std::to_string(map.owners[i]) +
                                  " has conflicting categories");
            }
            slot = point_categories[i];
        }
        std::vector<Category> cats;
        for (std::size_t j = 0; j < per_image.size(); ++j) {
            if (!per_image[j]) {
                throw FormatError(path.string() + ": image " + std::to_string(j) + " has no descriptors");
            }
            cats.push_back(*per_image[j]);
        }
        map.categories = std::move(cats);
    }
    return map;
}

DatasetBundle assemble(const fs::path& map_path, std::pair<std::size_t, std::vector<float>> vecs) {
    auto map = read_image_map(map_path);
    const std::size_t n = vecs.second.size() / vecs.first;
    if (map.owners.size() != n) {
        throw FormatError("image map has " + std::to_string(map.owners.size()) + " lines for " + std::to_string(n) +
                          " vectors");
    }
    try {
        return Dataset(vecs.first, std::move(vecs.second), std::move(map.owners), std::move(map.categories));
    } catch (const DomainError& e) {
        throw FormatError(map_path.string() + ": " + e.what());
    }
}

}  // namespace

std::pair<std::size_t, std::vector<float>> read_fvecs(const fs::path& path) {
    return read_vecs(path, 4, [](const std::uint8_t* p) { return std::bit_cast<float>(le_u32(p)); });
}

std::pair<std::size_t, std::vector<float>> read_bvecs(const fs::path& path) {
    return read_vecs(path, 1, [](const std::uint8_t* p) { return static_cast<float>(*p); });
}

DatasetBundle load_fvecs(const fs::path& vectors, const fs::path& image_map) {
    return assemble(image_map, read_fvecs(vectors));
}

DatasetBundle load_bvecs(const fs::path& vectors, const fs::path& image_map) {
    return assemble(image_map, read_bvecs(vectors));
}

DatasetBundle load_dataset(const fs::path& vectors, const fs::path& image_map) {
    if (vectors.extension() == ".bvecs") {
        return load_bvecs(vectors, image_map);
    }
    return load_fvecs(vectors, image_map);
}

void write_fvecs(const fs::path& path, std::size_t dim, std::span<const float> coords) {
    if (dim == 0 || coords.size() % dim != 0) {
        throw DimensionError("coordinates are not a whole number of " + std::to_string(dim) + "-d vectors");
    }
    std::vector<std::uint8_t> bytes;
    bytes.reserve(coords.size() / dim * (4 + 4 * dim));
    auto put = [&](std::uint32_t v) {
        for (int k = 0; k < 4; ++k) bytes.push_back(static_cast<std::uint8_t>(v >> (8 * k)));
    };
    for (std::size_t i = 0; i < coords.size(); i += dim) {
        put(static_cast<std::uint32_t>(dim));
        for (std::size_t k = 0; k < dim; ++k) put(std::bit_cast<std::uint32_t>(coords[i + k]));
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out || !out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()))) {
        throw IoError("cannot write " + path.string());
    }
}

void write_image_map(const fs::path& path, const Dataset& data) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
    for (PointId i = 0; i < data.size(); ++i) {
        const ImageId image = data.image_of(i);
        out << image;
        if (auto cat = data.category_of(image)) out << ',' << *cat;
        out << '\n';
    }
}

void export_dataset(const Dataset& data, const fs::path& vectors, const fs::path& image_map) {
    write_fvecs(vectors, data.dim(), data.coords());
    write_image_map(image_map, data);
}

DatasetBundle generate_synthetic(const SyntheticSpec& spec) {
    if (spec.images == 0 || spec.per_image == 0 || spec.dim == 0 || spec.categories == 0) {
        throw DomainError("synthetic dataset needs positive counts");
    }
    if (spec.images % spec.categories != 0) {
        throw DomainError("image count must be divisible by the category count");
    }
    if (spec.spread < 0.0 || spec.category_scale < 0.0 || spec.image_jitter < 0.0) {
        throw DomainError("synthetic spreads must be non-negative");
    }
    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const std::size_t d = spec.dim;

    std::vector<double> category_centres(spec.categories * d);
    for (double& v : category_centres) v = spec.category_scale * normal(rng);

    std::vector<float> coords;
    coords.reserve(static_cast<std::size_t>(spec.images) * spec.per_image * d);
    std::vector<ImageId> owners;
    std::vector<Category> categories;
    std::vector<double> centre(d);
    for (ImageId j = 0; j < spec.images; ++j) {
        const Category cat = j % spec.categories;
        categories.push_back(cat);
        for (std::size_t k = 0; k < d; ++k) {
            centre[k] = category_centres[cat * d + k] + spec.image_jitter * normal(rng);
        }
        for (std::uint32_t p = 0; p < spec.per_image; ++p) {
            for (std::size_t k = 0; k < d; ++k) {
                coords.push_back(static_cast<float>(centre[k] + spec.spread * normal(rng)));
            }
            owners.push_back(j);
        }
    }
    return Dataset(d, std::move(coords), std::move(owners), std::move(categories));
}

double accuracy(std::span<const ImageId> returned, Category query_category, const Dataset& data, std::uint32_t k) {
    if (k == 0) {
        throw DomainError("accuracy needs k >= 1");
    }
    if (returned.size() > k) {
        throw DomainError("more images returned than requested");
    }
    std::size_t hits = 0;
    for (ImageId id : returned) {
        if (id >= data.image_count()) {
            throw BoundsError("unknown image id " + std::to_string(id));
        }
        const auto cat = data.category_of(id);
        if (!cat) {
            throw DomainError("dataset has no categories");
        }
        if (*cat == query_category) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(k);
}

}  // namespace bimagelsh
