#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <utility>
#include <vector>

#include "bimagelsh/bitmap.hpp"
#include "bimagelsh/hashing.hpp"
#include "bimagelsh/model.hpp"

namespace bimagelsh {

struct BucketEntry {
    PointId point_id;
    ImageId image_id;
    double projected;

    bool operator==(const BucketEntry&) const = default;
};

/// Contents of one (projection, cell) bucket file, sorted by projected value.
struct BucketFile {
    std::uint32_t projection = 0;
    std::int64_t cell = 0;
    std::vector<BucketEntry> entries;
};

/// "BKT1" + entry count u32, then fixed-width records:
/// point id u32, image id u32, projected value f64, all little-endian.
inline constexpr std::size_t kBucketHeaderSize = 8;
inline constexpr std::size_t kBucketRecordSize = 16;

std::vector<std::uint8_t> encode_bucket(std::span<const BucketEntry> entries);
std::vector<BucketEntry> decode_bucket(std::span<const std::uint8_t> bytes);

/// Per-query IO accounting. Owned by a single query.
struct IoMeter {
    std::uint64_t bucket_bytes_read = 0;
    std::uint64_t bucket_files_read = 0;
    std::uint64_t bucket_files_skipped = 0;
    std::uint64_t data_bytes_read = 0;

    void reset() { *this = IoMeter{}; }
    IoMeter& operator+=(const IoMeter& other);
    bool operator==(const IoMeter&) const = default;
};

struct CellInfo {
    std::int64_t cell;
    std::uint32_t entries;
    std::uint64_t bytes;
};

struct IndexManifest {
    Params params;  // resolved
    std::uint64_t n = 0;
    std::uint64_t images = 0;
    std::uint64_t dim = 0;
    /// Per projection, non-empty cells in ascending order.
    std::vector<std::vector<CellInfo>> cells;
    /// On-disk size of each projection's bitmap catalog.
    std::vector<std::uint64_t> catalog_bytes;

    std::uint64_t bucket_file_count() const;
    std::uint64_t bucket_bytes() const;
    std::uint64_t bitmap_bytes() const;
    /// bitmap catalog bytes / bucket bytes.
    double overhead_ratio() const;
};

/// Catalog file: "BCAT", version 0x01, entry count u32, then per entry
/// (cell i64, offset u64, size u32) with offsets relative to the first
/// bitmap record, then the concatenated serialized bitmaps.
std::vector<std::uint8_t> encode_catalog(std::span<const std::pair<std::int64_t, CompressedBitmap>> bitmaps);
std::vector<std::pair<std::int64_t, CompressedBitmap>> decode_catalog(std::span<const std::uint8_t> bytes);

std::filesystem::path projection_dir(const std::filesystem::path& index_dir, std::uint32_t projection);
std::filesystem::path bucket_path(const std::filesystem::path& index_dir, std::uint32_t projection, std::int64_t cell);
std::filesystem::path catalog_path(const std::filesystem::path& index_dir, std::uint32_t projection);

/// Writes manifest.json, proj_<i>/cell_<j>.bkt and proj_<i>/bitmaps.cat.
/// An existing index in `out_dir` is replaced; any other non-empty directory
/// is refused.
IndexManifest build_index(const Dataset& data, const Params& params, const std::filesystem::path& out_dir);

/// Throws DomainError unless the dataset has the manifest's n, S and d.
void check_dataset(const IndexManifest& manifest, const Dataset& data);

/// Read side of an index. The manifest and bitmap catalogs are loaded once and
/// kept in memory; bucket files are read from disk on every request. All
/// methods are const and safe to call from concurrent queries.
class IndexReader {
public:
    explicit IndexReader(std::filesystem::path dir);

    const std::filesystem::path& dir() const { return dir_; }
    const IndexManifest& manifest() const { return manifest_; }
    const ProjectionFamily& family() const { return family_; }
    std::uint32_t image_count() const { return static_cast<std::uint32_t>(manifest_.images); }

    /// Empty cells have no file: they yield no entries and meter nothing.
    BucketFile read_bucket(std::uint32_t projection, std::int64_t cell, IoMeter& meter) const;

    /// Empty cells yield an all-zero bitmap. Throws NotFoundError for an
    /// unknown projection.
    const CompressedBitmap& bucket_bitmap(std::uint32_t projection, std::int64_t cell) const;

    /// Non-empty cells of a projection that fall inside `range`.
    std::span<const CellInfo> cells_in(std::uint32_t projection, CellRange range) const;

private:
    std::size_t find_cell(std::uint32_t projection, std::int64_t cell) const;

    std::filesystem::path dir_;
    IndexManifest manifest_;
    ProjectionFamily family_;
    std::vector<std::vector<CompressedBitmap>> bitmaps_;  // parallel to manifest_.cells
    CompressedBitmap empty_bitmap_;
};

}  // namespace bimagelsh
