#include "bimagelsh/index.hpp"

#include <algorithm>
#include <bit>
#include <fstream>
#include <map>
#include <string>

#include "bimagelsh/errors.hpp"
#include "bimagelsh/report.hpp"

namespace bimagelsh {

namespace fs = std::filesystem;

namespace {

constexpr std::uint8_t kBucketMagic[4] = {'B', 'K', 'T', '1'};
constexpr std::uint8_t kCatalogMagic[4] = {'B', 'C', 'A', 'T'};
constexpr std::uint8_t kCatalogVersion = 0x01;
constexpr std::size_t kCatalogHeaderSize = 9;
constexpr std::size_t kCatalogEntrySize = 20;

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T value) {
    static_assert(std::is_unsigned_v<T>);
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        out.push_back(static_cast<std::uint8_t>(value >> (8 * i)));
    }
}

template <typename T>
T get_le(const std::uint8_t* p) {
    T value = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        value |= static_cast<T>(p[i]) << (8 * i);
    }
    return value;
}

std::vector<std::uint8_t> read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary | std::ios::ate);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    const auto size = static_cast<std::size_t>(in.tellg());
    std::vector<std::uint8_t> bytes(size);
    in.seekg(0);
    if (!in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(size))) {
        throw IoError("short read on " + path.string());
    }
    return bytes;
}

void write_file(const fs::path& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out || !out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()))) {
        throw IoError("cannot write " + path.string());
    }
}

void prepare_output_dir(const fs::path& dir) {
    std::error_code ec;
    if (fs::exists(dir)) {
        if (!fs::is_directory(dir)) {
            throw IoError(dir.string() + " exists and is not a directory");
        }
        if (!fs::is_empty(dir)) {
            if (!fs::exists(dir / "manifest.json")) {
                throw IoError(dir.string() + " is not empty and does not hold an index");
            }
            for (const auto& entry : fs::directory_iterator(dir)) {
                const auto name = entry.path().filename().string();
                if (name == "manifest.json" || name.starts_with("proj_")) {
                    fs::remove_all(entry.path());
                }
            }
        }
    }
    fs::create_directories(dir, ec);
    if (ec) {
        throw IoError("cannot create " + dir.string() + ": " + ec.message());
    }
}

}  // namespace

std::vector<std::uint8_t> encode_bucket(std::span<const BucketEntry> entries) {
    std::vector<std::uint8_t> out;
    out.reserve(kBucketHeaderSize + entries.size() * kBucketRecordSize);
    out.insert(out.end(), std::begin(kBucketMagic), std::end(kBucketMagic));
    put_le(out, static_cast<std::uint32_t>(entries.size()));
    for (const auto& e : entries) {
        put_le(out, e.point_id);
        put_le(out, e.image_id);
        put_le(out, std::bit_cast<std::uint64_t>(e.projected));
    }
    return out;
}

std::vector<BucketEntry> decode_bucket(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < kBucketHeaderSize || !std::equal(std::begin(kBucketMagic), std::end(kBucketMagic), bytes.begin())) {
        throw FormatError("bucket file has a bad header");
    }
    const auto count = get_le<std::uint32_t>(bytes.data() + 4);
    if (bytes.size() != kBucketHeaderSize + static_cast<std::size_t>(count) * kBucketRecordSize) {
        throw FormatError("bucket file size does not match its entry count");
    }
    std::vector<BucketEntry> entries(count);
    const std::uint8_t* p = bytes.data() + kBucketHeaderSize;
    for (auto& e : entries) {
        e.point_id = get_le<std::uint32_t>(p);
        e.image_id = get_le<std::uint32_t>(p + 4);
        e.projected = std::bit_cast<double>(get_le<std::uint64_t>(p + 8));
        p += kBucketRecordSize;
    }
    return entries;
}

IoMeter& IoMeter::operator+=(const IoMeter& other) {
    bucket_bytes_read += other.bucket_bytes_read;
    bucket_files_read += other.bucket_files_read;
    bucket_files_skipped += other.bucket_files_skipped;
    data_bytes_read += other.data_bytes_read;
    return *this;
}

std::uint64_t IndexManifest::bucket_file_count() const {
    std::uint64_t total = 0;
    for (const auto& proj : cells) total += proj.size();
    return total;
}

std::uint64_t IndexManifest::bucket_bytes() const {
    std::uint64_t total = 0;
    for (const auto& proj : cells) {
        for (const auto& cell : proj) total += cell.bytes;
    }
    return total;
}

std::uint64_t IndexManifest::bitmap_bytes() const {
    std::uint64_t total = 0;
    for (auto b : catalog_bytes) total += b;
    return total;
}

double IndexManifest::overhead_ratio() const {
    const auto bucket = bucket_bytes();
    return bucket == 0 ? 0.0 : static_cast<double>(bitmap_bytes()) / static_cast<double>(bucket);
}

std::vector<std::uint8_t> encode_catalog(std::span<const std::pair<std::int64_t, CompressedBitmap>> bitmaps) {
    std::vector<std::uint8_t> table;
    std::vector<std::uint8_t> blobs;
    for (const auto& [cell, bitmap] : bitmaps) {
        const auto record = serialize_bitmap(bitmap);
        put_le(table, static_cast<std::uint64_t>(cell));
        put_le(table, static_cast<std::uint64_t>(blobs.size()));
        put_le(table, static_cast<std::uint32_t>(record.size()));
        blobs.insert(blobs.end(), record.begin(), record.end());
    }
    std::vector<std::uint8_t> out;
    out.reserve(kCatalogHeaderSize + table.size() + blobs.size());
    out.insert(out.end(), std::begin(kCatalogMagic), std::end(kCatalogMagic));
    out.push_back(kCatalogVersion);
    put_le(out, static_cast<std::uint32_t>(bitmaps.size()));
    out.insert(out.end(), table.begin(), table.end());
    out.insert(out.end(), blobs.begin(), blobs.end());
    return out;
}

std::vector<std::pair<std::int64_t, CompressedBitmap>> decode_catalog(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < kCatalogHeaderSize || !std::equal(std::begin(kCatalogMagic), std::end(kCatalogMagic), bytes.begin())) {
        throw FormatError("bitmap catalog has a bad header");
    }
    if (bytes[4] != kCatalogVersion) {
        throw FormatError("unsupported bitmap catalog version");
    }
    const auto count = get_le<std::uint32_t>(bytes.data() + 5);
    const std::size_t blob_start = kCatalogHeaderSize + static_cast<std::size_t>(count) * kCatalogEntrySize;
    if (bytes.size() < blob_start) {
        throw FormatError("bitmap catalog table truncated");
    }
    std::vector<std::pair<std::int64_t, CompressedBitmap>> out;
    out.reserve(count);
    for (std::uint32_t k = 0; k < count; ++k) {
        const std::uint8_t* e = bytes.data() + kCatalogHeaderSize + k * kCatalogEntrySize;
        const auto cell = static_cast<std::int64_t>(get_le<std::uint64_t>(e));
        const auto offset = get_le<std::uint64_t>(e + 8);
        const auto size = get_le<std::uint32_t>(e + 16);
        if (offset + size > bytes.size() - blob_start) {
            throw FormatError("bitmap catalog entry points past the end of the file");
        }
        out.emplace_back(cell, deserialize_bitmap(bytes.subspan(blob_start + offset, size)));
    }
    return out;
}

fs::path projection_dir(const fs::path& index_dir, std::uint32_t projection) {
    return index_dir / ("proj_" + std::to_string(projection));
}

fs::path bucket_path(const fs::path& index_dir, std::uint32_t projection, std::int64_t cell) {
    return projection_dir(index_dir, projection) / ("cell_" + std::to_string(cell) + ".bkt");
}

fs::path catalog_path(const fs::path& index_dir, std::uint32_t projection) {
    return projection_dir(index_dir, projection) / "bitmaps.cat";
}

IndexManifest build_index(const Dataset& data, const Params& params, const fs::path& out_dir) {
    IndexManifest manifest;
    manifest.params = params.resolve(data.size());
    manifest.n = data.size();
    manifest.images = data.image_count();
    manifest.dim = data.dim();

    const auto& p = manifest.params;
    const ProjectionFamily family(p.seed, p.m, data.dim(), p.w, p.c);
    const auto image_count = static_cast<std::uint32_t>(data.image_count());

    prepare_output_dir(out_dir);

    for (std::uint32_t i = 0; i < p.m; ++i) {
        std::map<std::int64_t, std::vector<BucketEntry>> buckets;
        for (PointId id = 0; id < data.size(); ++id) {
            const double projected = family.project(i, data.vector(id));
            buckets[family.cell_of(projected)].push_back({id, data.image_of(id), projected});
        }

        fs::create_directories(projection_dir(out_dir, i));
        std::vector<CellInfo> cells;
        std::vector<std::pair<std::int64_t, CompressedBitmap>> bitmaps;
        for (auto& [cell, entries] : buckets) {
            std::sort(entries.begin(), entries.end(), [](const BucketEntry& a, const BucketEntry& b) {
                if (a.projected != b.projected) return a.projected < b.projected;
                return a.point_id < b.point_id;
            });
            const auto bytes = encode_bucket(entries);
            write_file(bucket_path(out_dir, i, cell), bytes);
            cells.push_back({cell, static_cast<std::uint32_t>(entries.size()), bytes.size()});

            BitmapBuilder builder(image_count);
            for (const auto& e : entries) builder.set(e.image_id);
            bitmaps.emplace_back(cell, builder.build());
        }
        const auto catalog = encode_catalog(bitmaps);
        write_file(catalog_path(out_dir, i), catalog);
        manifest.cells.push_back(std::move(cells));
        manifest.catalog_bytes.push_back(catalog.size());
    }

    const std::string text = manifest_to_json(manifest).dump(2) + "\n";
    write_file(out_dir / "manifest.json",
               std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
    return manifest;
}

void check_dataset(const IndexManifest& manifest, const Dataset& data) {
    if (manifest.n != data.size() || manifest.images != data.image_count() || manifest.dim != data.dim()) {
        throw DomainError("dataset (n=" + std::to_string(data.size()) + ", S=" + std::to_string(data.image_count()) +
                          ", d=" + std::to_string(data.dim()) + ") does not match the index (n=" +
                          std::to_string(manifest.n) + ", S=" + std::to_string(manifest.images) +
                          ", d=" + std::to_string(manifest.dim) + ")");
    }
}

namespace {

IndexManifest load_manifest(const fs::path& dir) {
    const auto bytes = read_file(dir / "manifest.json");
    return manifest_from_json_text(std::string(bytes.begin(), bytes.end()));
}

}  // namespace

IndexReader::IndexReader(fs::path dir)
    : dir_(std::move(dir)),
      manifest_(load_manifest(dir_)),
      family_(manifest_.params.seed, manifest_.params.m, manifest_.dim, manifest_.params.w, manifest_.params.c),
      empty_bitmap_(CompressedBitmap::empty(static_cast<std::uint32_t>(manifest_.images))) {
    if (manifest_.cells.size() != manifest_.params.m) {
        throw FormatError("manifest lists " + std::to_string(manifest_.cells.size()) + " projections, expected " +
                          std::to_string(manifest_.params.m));
    }
    bitmaps_.resize(manifest_.params.m);
    for (std::uint32_t i = 0; i < manifest_.params.m; ++i) {
        auto catalog = decode_catalog(read_file(catalog_path(dir_, i)));
        const auto& cells = manifest_.cells[i];
        if (catalog.size() != cells.size()) {
            throw FormatError("bitmap catalog of projection " + std::to_string(i) + " disagrees with the manifest");
        }
        for (std::size_t k = 0; k < cells.size(); ++k) {
            if (catalog[k].first != cells[k].cell || catalog[k].second.length() != manifest_.images) {
                throw FormatError("bitmap catalog of projection " + std::to_string(i) + " disagrees with the manifest");
            }
            bitmaps_[i].push_back(std::move(catalog[k].second));
        }
    }
}

std::size_t IndexReader::find_cell(std::uint32_t projection, std::int64_t cell) const {
    if (projection >= manifest_.cells.size()) {
        throw NotFoundError("projection " + std::to_string(projection) + " not in index");
    }
    const auto& cells = manifest_.cells[projection];
    auto it = std::lower_bound(cells.begin(), cells.end(), cell,
                               [](const CellInfo& info, std::int64_t c) { return info.cell < c; });
    if (it == cells.end() || it->cell != cell) {
        return cells.size();
    }
    return static_cast<std::size_t>(it - cells.begin());
}

BucketFile IndexReader::read_bucket(std::uint32_t projection, std::int64_t cell, IoMeter& meter) const {
    BucketFile file;
    file.projection = projection;
    file.cell = cell;
    const auto k = find_cell(projection, cell);
    if (k == manifest_.cells[projection].size()) {
        return file;
    }
    const auto bytes = read_file(bucket_path(dir_, projection, cell));
    meter.bucket_bytes_read += bytes.size();
    meter.bucket_files_read += 1;
    file.entries = decode_bucket(bytes);
    if (file.entries.size() != manifest_.cells[projection][k].entries) {
        throw FormatError("bucket " + bucket_path(dir_, projection, cell).string() + " disagrees with the manifest");
    }
    for (const auto& e : file.entries) {
        if (family_.cell_of(e.projected) != cell || e.image_id >= manifest_.images || e.point_id >= manifest_.n) {
            throw FormatError("bucket " + bucket_path(dir_, projection, cell).string() + " holds a foreign entry");
        }
    }
    return file;
}

const CompressedBitmap& IndexReader::bucket_bitmap(std::uint32_t projection, std::int64_t cell) const {
    const auto k = find_cell(projection, cell);
    if (k == manifest_.cells[projection].size()) {
        return empty_bitmap_;
    }
    return bitmaps_[projection][k];
}

std::span<const CellInfo> IndexReader::cells_in(std::uint32_t projection, CellRange range) const {
    if (projection >= manifest_.cells.size()) {
        throw NotFoundError("projection " + std::to_string(projection) + " not in index");
    }
    const auto& cells = manifest_.cells[projection];
    auto lo = std::lower_bound(cells.begin(), cells.end(), range.lo,
                               [](const CellInfo& info, std::int64_t c) { return info.cell < c; });
    auto hi = std::upper_bound(lo, cells.end(), range.hi,
                               [](std::int64_t c, const CellInfo& info) { return c < info.cell; });
    return {lo, hi};
}

}  // namespace bimagelsh
